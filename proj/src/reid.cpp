#include "canlift/reid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "canlift/error.hpp"
#include "canlift/features.hpp"
#include "canlift/learner.hpp"
#include "canlift/rng.hpp"

namespace canlift {

namespace {

constexpr size_t kFolds = 10;
constexpr size_t kMinSamples = 50;

} // namespace

std::vector<DriverSample> build_driver_samples(const std::array<CandidateSeries, 4>& signals,
                                               const std::string& driver,
                                               const PipelineConfig& cfg) {
    for (const CandidateSeries& s : signals) {
        if (s.ts.empty()) fail("build_driver_samples: missing signal series");
        if (s.norm.size() != s.raw.size()) fail("build_driver_samples: signals must be normalized");
    }
    FeatureSpec spec = FeatureSpec::reid11(cfg.max_bins);

    // common wall-clock grid covered by all four signals
    double t0 = signals[0].ts.front(), t1 = signals[0].ts.back();
    for (const CandidateSeries& s : signals) {
        t0 = std::max(t0, s.ts.front());
        t1 = std::min(t1, s.ts.back());
    }
    std::vector<DriverSample> out;
    if (t1 - t0 < cfg.window_s) return out;

    // alignment needs coverage, not variation: a flat pedal is behavior too,
    // so the per-window variation threshold is not applied here
    std::array<std::vector<WindowSample>, 4> wins;
    for (size_t s = 0; s < 4; ++s)
        wins[s] = windows_from(signals[s], t0, t1, cfg.window_s, cfg.overlap, 1);

    std::array<size_t, 4> cursor{};
    double stride = cfg.window_s * (1.0 - cfg.overlap);
    auto k_max = static_cast<size_t>(std::floor((t1 - t0 - cfg.window_s) / stride + 1e-9));
    for (size_t k = 0; k <= k_max; ++k) {
        double ws = t0 + static_cast<double>(k) * stride;
        std::array<const WindowSample*, 4> found{};
        bool all = true;
        for (size_t s = 0; s < 4; ++s) {
            while (cursor[s] < wins[s].size() && wins[s][cursor[s]].t_start < ws - 1e-6) ++cursor[s];
            if (cursor[s] < wins[s].size() &&
                std::abs(wins[s][cursor[s]].t_start - ws) <= 1e-6) {
                found[s] = &wins[s][cursor[s]];
            } else {
                all = false;
                break;
            }
        }
        if (!all) continue;

        DriverSample sample;
        sample.driver = driver;
        sample.t_start = ws;
        sample.t_end = ws + cfg.window_s;
        sample.values.reserve(4 * spec.names.size());
        for (size_t s = 0; s < 4; ++s) {
            FeatureVector fv = extract(*found[s], spec);
            sample.values.insert(sample.values.end(), fv.values.begin(), fv.values.end());
        }
        out.push_back(std::move(sample));
    }
    return out;
}

ReidResult pairwise_reid(const std::vector<DriverSample>& samples_a,
                         const std::vector<DriverSample>& samples_b, const PipelineConfig& cfg,
                         uint64_t seed) {
    if (samples_a.size() < kMinSamples || samples_b.size() < kMinSamples)
        fail("pairwise_reid: each driver needs at least " + std::to_string(kMinSamples) +
             " samples");

    ReidResult result;
    result.driver_a = samples_a[0].driver;
    result.driver_b = samples_b[0].driver;

    size_t n = samples_a.size() + samples_b.size();
    Rng rng(seed);

    // Per-driver stratified folds. The shuffle stream is keyed by the
    // driver's sample content, which makes the partition invariant under
    // argument order (label-swap symmetry) and aligns identical sample sets
    // onto identical folds (a relabeled copy of a driver shares folds with
    // the original, so exact twins never leak across the train/test split).
    auto content_key = [](const std::vector<DriverSample>& samples) {
        uint64_t h = 0xcbf29ce484222325ULL;
        auto mix = [&h](const void* p, size_t bytes) {
            const auto* c = static_cast<const unsigned char*>(p);
            for (size_t i = 0; i < bytes; ++i) {
                h ^= c[i];
                h *= 0x100000001b3ULL;
            }
        };
        for (const DriverSample& s : samples)
            mix(s.values.data(), s.values.size() * sizeof(double));
        return h;
    };
    std::vector<size_t> fold_of(n);
    auto assign = [&](const std::vector<DriverSample>& samples, size_t begin) {
        std::vector<size_t> order(samples.size());
        std::iota(order.begin(), order.end(), 0);
        Rng dr = rng.split(content_key(samples));
        dr.shuffle(order);
        for (size_t pos = 0; pos < samples.size(); ++pos)
            fold_of[begin + order[pos]] = pos % kFolds;
    };
    assign(samples_a, 0);
    assign(samples_b, samples_a.size());

    auto values_of = [&](size_t idx) -> const std::vector<double>& {
        return idx < samples_a.size() ? samples_a[idx].values
                                      : samples_b[idx - samples_a.size()].values;
    };
    auto is_a = [&](size_t idx) { return idx < samples_a.size(); };

    for (size_t fold = 0; fold < kFolds; ++fold) {
        std::vector<std::vector<double>> train_pos, train_neg;
        std::vector<size_t> test;
        for (size_t idx = 0; idx < n; ++idx) {
            if (fold_of[idx] == fold) {
                test.push_back(idx);
            } else if (is_a(idx)) {
                train_pos.push_back(values_of(idx));
            } else {
                train_neg.push_back(values_of(idx));
            }
        }
        Forest forest = train_forest(train_pos, train_neg, cfg.forest, rng.split(100 + fold).seed());

        size_t tp_a = 0, fp_a = 0, tp_b = 0, fp_b = 0;
        for (size_t idx : test) {
            bool pred_a = forest.predict(values_of(idx));
            if (pred_a)
                (is_a(idx) ? tp_a : fp_a) += 1;
            else
                (is_a(idx) ? fp_b : tp_b) += 1;
        }
        // macro precision over the two class roles; a side with no
        // predictions is left out of the average
        double sum = 0.0;
        int sides = 0;
        if (tp_a + fp_a > 0) {
            sum += static_cast<double>(tp_a) / static_cast<double>(tp_a + fp_a);
            ++sides;
        }
        if (tp_b + fp_b > 0) {
            sum += static_cast<double>(tp_b) / static_cast<double>(tp_b + fp_b);
            ++sides;
        }
        result.fold_precisions.push_back(sides > 0 ? sum / sides : 0.5);
    }

    result.mean_precision =
        std::accumulate(result.fold_precisions.begin(), result.fold_precisions.end(), 0.0) /
        static_cast<double>(result.fold_precisions.size());
    return result;
}

std::vector<ReidResult> cohort_reid(const std::vector<std::vector<DriverSample>>& drivers,
                                    size_t k, const PipelineConfig& cfg, uint64_t seed) {
    if (k < 2) fail("cohort_reid: k must be >= 2");
    if (drivers.size() < k) fail("cohort_reid: need at least k driver sample sets");

    Rng rng(seed);
    std::vector<size_t> ids(drivers.size());
    std::iota(ids.begin(), ids.end(), 0);
    rng.shuffle(ids);
    ids.resize(k);
    std::sort(ids.begin(), ids.end());

    std::vector<ReidResult> out;
    uint64_t pair_stream = 0;
    for (size_t i = 0; i < ids.size(); ++i)
        for (size_t j = i + 1; j < ids.size(); ++j)
            out.push_back(pairwise_reid(drivers[ids[i]], drivers[ids[j]], cfg,
                                        rng.split(500 + pair_stream++).seed()));
    return out;
}

} // namespace canlift
