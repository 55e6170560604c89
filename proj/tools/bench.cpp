// Compares the OpenMP kernels against their serial references on one
// synthetic drive: DTW candidate ranking, forest training, and window
// feature extraction.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "canlift/canlog.hpp"
#include "canlift/decomposer.hpp"
#include "canlift/features.hpp"
#include "canlift/learner.hpp"
#include "canlift/parallel.hpp"
#include "canlift/synthgen.hpp"
#include "canlift/tsmatch.hpp"

using namespace canlift;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

template <class F>
double time_ms(F&& fn, int reps) {
    double best = 1e30;
    for (int r = 0; r < reps; ++r) {
        double t0 = now_ms();
        fn();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    double duration = 600.0;
    if (argc > 1) duration = std::atof(argv[1]);

    std::printf("generating %.0f s synthetic drive...\n", duration);
    ScenarioSpec spec;
    spec.duration_s = duration;
    spec.layout_seed = 7;
    spec.drive_seed = 7;
    SynthDrive drive = generate(spec);

    CanLog log = parse_log(drive.can_text);
    PipelineConfig cfg;
    std::vector<CandidateSeries> cands = decompose(log, cfg);
    VelocitySeries ref =
        remove_velocity_outliers(gps_to_velocity(parse_gps(drive.gps_csv)), cfg.max_jump_kmh);
    std::printf("candidates: %zu, frames: %zu, threads: %d\n", cands.size(), log.frames.size(),
                effective_threads());

    std::printf("%-28s %12s %12s %8s\n", "kernel", "serial ms", "openmp ms", "speedup");

    {
        auto serial = time_ms([&] { rank_by_dtw_serial(ref, cands); }, 3);
        auto parallel = time_ms([&] { rank_by_dtw(ref, cands); }, 3);
        std::printf("%-28s %12.1f %12.1f %8.2f\n", "rank_by_dtw", serial, parallel,
                    serial / parallel);
    }

    {
        FeatureSpec spec15 = FeatureSpec::full15(cfg.max_bins);
        std::vector<std::vector<FeatureVector>> out(cands.size());
        auto extract_all = [&](bool par) {
            auto body = [&](size_t i) {
                out[i] = candidate_feature_vectors(cands[i], cfg, spec15);
            };
            if (par)
                parallel_for(cands.size(), body);
            else
                serial_for(cands.size(), body);
        };
        auto serial = time_ms([&] { extract_all(false); }, 3);
        auto parallel = time_ms([&] { extract_all(true); }, 3);
        std::printf("%-28s %12.1f %12.1f %8.2f\n", "feature extraction", serial, parallel,
                    serial / parallel);

        // forest training on the velocity-vs-rest task
        SeriesId velo = drive.truth.locations.at("velocity");
        std::vector<std::vector<double>> pos, neg;
        for (size_t i = 0; i < cands.size(); ++i)
            for (const FeatureVector& fv : out[i])
                (cands[i].id == velo ? pos : neg).push_back(fv.values);
        if (!pos.empty() && !neg.empty()) {
            auto serial_f = time_ms([&] { train_forest(pos, neg, cfg.forest, 1, false); }, 3);
            auto parallel_f = time_ms([&] { train_forest(pos, neg, cfg.forest, 1, true); }, 3);
            std::printf("%-28s %12.1f %12.1f %8.2f\n", "train_forest", serial_f, parallel_f,
                        serial_f / parallel_f);
        }
    }
    return 0;
}
