#include "canlift/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "canlift/error.hpp"
#include "canlift/parallel.hpp"

namespace canlift {

namespace {

double gini(size_t pos, size_t n) {
    if (n == 0) return 0.0;
    double p = static_cast<double>(pos) / static_cast<double>(n);
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct BuildNode {
    size_t begin, end; // index range into the row-index array
    uint32_t node;     // slot in tree.nodes
    uint32_t depth;
};

} // namespace

double DecisionTree::predict_p(std::span<const double> x) const {
    uint32_t i = 0;
    for (;;) {
        const TreeNode& nd = nodes[i];
        if (nd.feature == kLeafMarker) return nd.leaf_p;
        i = (x[nd.feature] <= nd.threshold) ? nd.left : nd.right;
    }
}

DecisionTree train_tree(std::span<const TrainingRow> rows, const ForestParams& params, Rng& rng,
                        TrainStats* stats) {
    if (rows.empty()) fail("train_tree: no samples");
    size_t d = rows[0].x.size();
    size_t k = params.features_per_split
                   ? params.features_per_split
                   : static_cast<size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    k = std::min(k, d);

    if (stats) stats->importance.assign(d, 0.0);

    DecisionTree tree;
    std::vector<size_t> idx(rows.size());
    std::iota(idx.begin(), idx.end(), 0);

    std::vector<size_t> feat_pool(d);
    std::iota(feat_pool.begin(), feat_pool.end(), 0);
    std::vector<std::pair<double, uint8_t>> sorted; // (value, label)

    auto total = static_cast<double>(rows.size());
    std::vector<BuildNode> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, rows.size(), 0, 0});

    while (!stack.empty()) {
        BuildNode bn = stack.back();
        stack.pop_back();
        size_t n = bn.end - bn.begin;
        size_t pos = 0;
        for (size_t i = bn.begin; i < bn.end; ++i) pos += rows[idx[i]].label;

        auto make_leaf = [&]() {
            tree.nodes[bn.node].feature = kLeafMarker;
            tree.nodes[bn.node].leaf_p = static_cast<double>(pos) / static_cast<double>(n);
        };

        if (pos == 0 || pos == n || bn.depth >= params.max_depth ||
            n < 2 * params.min_samples_leaf) {
            make_leaf();
            continue;
        }

        double parent_gini = gini(pos, n);

        // sample k distinct features
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(rng.below(d - i));
            std::swap(feat_pool[i], feat_pool[j]);
        }

        // zero-gain splits are admitted (xor-style data needs them); depth
        // and leaf-size caps bound the growth
        double best_score = parent_gini + 1e-12;
        size_t best_feature = d;
        double best_threshold = 0.0;
        size_t best_left_n = 0;

        for (size_t fi = 0; fi < k; ++fi) {
            size_t f = feat_pool[fi];
            sorted.clear();
            for (size_t i = bn.begin; i < bn.end; ++i)
                sorted.emplace_back(rows[idx[i]].x[f], rows[idx[i]].label);
            std::sort(sorted.begin(), sorted.end());

            size_t left_pos = 0;
            for (size_t i = 0; i + 1 < n; ++i) {
                left_pos += sorted[i].second;
                if (sorted[i].first == sorted[i + 1].first) continue;
                size_t nl = i + 1, nr = n - nl;
                if (nl < params.min_samples_leaf || nr < params.min_samples_leaf) continue;
                double score = (static_cast<double>(nl) * gini(left_pos, nl) +
                                static_cast<double>(nr) * gini(pos - left_pos, nr)) /
                               static_cast<double>(n);
                if (score < best_score) {
                    double mid = 0.5 * (sorted[i].first + sorted[i + 1].first);
                    // adjacent doubles can round the midpoint onto the right
                    // value; fall back to the left value so x <= mid splits
                    // exactly where the scan did
                    if (!(mid < sorted[i + 1].first)) mid = sorted[i].first;
                    best_score = score;
                    best_feature = f;
                    best_threshold = mid;
                    best_left_n = nl;
                }
            }
        }

        if (best_feature == d) {
            make_leaf();
            continue;
        }

        auto mid = std::partition(idx.begin() + static_cast<long>(bn.begin),
                                  idx.begin() + static_cast<long>(bn.end), [&](size_t r) {
                                      return rows[r].x[best_feature] <= best_threshold;
                                  });
        auto left_n = static_cast<size_t>(mid - (idx.begin() + static_cast<long>(bn.begin)));
        if (left_n != best_left_n) fail("train_tree: inconsistent partition");

        if (stats)
            stats->importance[best_feature] +=
                (static_cast<double>(n) / total) * (parent_gini - best_score);

        auto left_slot = static_cast<uint32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        auto right_slot = static_cast<uint32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[bn.node].feature = static_cast<uint16_t>(best_feature);
        tree.nodes[bn.node].threshold = best_threshold;
        tree.nodes[bn.node].left = left_slot;
        tree.nodes[bn.node].right = right_slot;

        stack.push_back({bn.begin + left_n, bn.end, right_slot, bn.depth + 1});
        stack.push_back({bn.begin, bn.begin + left_n, left_slot, bn.depth + 1});
    }
    return tree;
}

bool Forest::predict(std::span<const double> x) const {
    return 2 * positive_trees(x) > trees.size();
}

size_t Forest::positive_trees(std::span<const double> x) const {
    size_t v = 0;
    for (const DecisionTree& t : trees) v += t.predict(x);
    return v;
}

Forest train_forest(const std::vector<std::vector<double>>& positives,
                    const std::vector<std::vector<double>>& negatives, const ForestParams& params,
                    uint64_t seed, bool parallel) {
    if (positives.empty() || negatives.empty()) fail("train_forest: both classes must be non-empty");
    size_t d = positives[0].size();
    for (const auto& v : positives)
        if (v.size() != d) fail("train_forest: inconsistent feature vector length");
    for (const auto& v : negatives)
        if (v.size() != d) fail("train_forest: inconsistent feature vector length");

    Rng master(seed);

    // Balance: downsample the larger class without replacement.
    size_t m = std::min(positives.size(), negatives.size());
    auto pick = [&](size_t from, size_t take) {
        std::vector<size_t> ids(from);
        std::iota(ids.begin(), ids.end(), 0);
        master.shuffle(ids);
        ids.resize(take);
        std::sort(ids.begin(), ids.end());
        return ids;
    };
    std::vector<size_t> pos_ids = pick(positives.size(), m);
    std::vector<size_t> neg_ids = pick(negatives.size(), m);

    std::vector<TrainingRow> rows;
    rows.reserve(2 * m);
    for (size_t i : pos_ids) rows.push_back({positives[i], 1});
    for (size_t i : neg_ids) rows.push_back({negatives[i], 0});

    size_t n_pos = 0;
    for (const TrainingRow& r : rows) n_pos += r.label;
    if (n_pos * 2 != rows.size()) fail("train_forest: balancing invariant violated");

    Forest forest;
    forest.params = params;
    forest.seed = seed;
    forest.trees.resize(params.n_trees);
    forest.importance_sum.assign(d, 0.0);

    std::vector<TrainStats> stats(params.n_trees);
    std::vector<std::vector<uint32_t>> oob_rows(params.n_trees);
    auto train_one = [&](size_t t) {
        Rng rng = master.split(t);
        std::vector<TrainingRow> sample;
        std::vector<uint8_t> inbag(rows.size(), 0);
        if (params.bootstrap) {
            sample.reserve(rows.size());
            for (size_t i = 0; i < rows.size(); ++i) {
                auto pick_row = rng.below(rows.size());
                sample.push_back(rows[pick_row]);
                inbag[pick_row] = 1;
            }
        } else {
            sample = rows;
            std::fill(inbag.begin(), inbag.end(), 1);
        }
        forest.trees[t] = train_tree(sample, params, rng, &stats[t]);
        for (uint32_t i = 0; i < rows.size(); ++i)
            if (!inbag[i]) oob_rows[t].push_back(i);
    };

    if (parallel)
        parallel_for(params.n_trees, train_one);
    else
        serial_for(params.n_trees, train_one);

    for (const TrainStats& s : stats)
        for (size_t f = 0; f < d; ++f) forest.importance_sum[f] += s.importance[f];

    if (params.bootstrap) {
        std::vector<uint32_t> votes(rows.size(), 0), pos_votes(rows.size(), 0);
        for (size_t t = 0; t < params.n_trees; ++t)
            for (uint32_t i : oob_rows[t]) {
                ++votes[i];
                pos_votes[i] += forest.trees[t].predict(rows[i].x);
            }
        size_t scored = 0, correct = 0;
        for (size_t i = 0; i < rows.size(); ++i) {
            if (votes[i] == 0) continue;
            ++scored;
            bool pred = 2 * pos_votes[i] > votes[i];
            correct += pred == (rows[i].label == 1);
        }
        if (scored > 0)
            forest.oob_accuracy = static_cast<double>(correct) / static_cast<double>(scored);
    }
    return forest;
}

std::vector<std::pair<Feature, double>> feature_importances(const Forest& forest) {
    if (forest.trees.empty()) fail("feature_importances: untrained forest");
    double total = 0.0;
    for (double v : forest.importance_sum) total += v;
    std::vector<std::pair<Feature, double>> out;
    for (size_t f = 0; f < forest.importance_sum.size(); ++f) {
        Feature feat = f < forest.spec.names.size() ? forest.spec.names[f] : static_cast<Feature>(f);
        out.emplace_back(feat, total > 0.0 ? forest.importance_sum[f] / total : 0.0);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

std::vector<FeatureVector> candidate_feature_vectors(const CandidateSeries& candidate,
                                                     const PipelineConfig& cfg,
                                                     const FeatureSpec& spec) {
    std::vector<FeatureVector> out;
    for (const WindowSample& w : windows(candidate, cfg.window_s, cfg.overlap, cfg.min_variation))
        out.push_back(extract(w, spec));
    return out;
}

MatchReport locate_signal(const Forest& model, const std::vector<CandidateSeries>& candidates,
                          const PipelineConfig& cfg) {
    if (candidates.empty()) fail("locate_signal: no surviving candidates in target log");
    if (model.config_hash != cfg.hash())
        fail("locate_signal: model config hash " + hash_hex(model.config_hash) +
             " does not match pipeline config " + hash_hex(cfg.hash()));

    MatchReport report;
    report.signal_name = model.positive_label;
    report.config_hash = model.config_hash;
    report.ranked.resize(candidates.size());

    parallel_for(candidates.size(), [&](size_t i) {
        CandidateVotes cv;
        cv.id = candidates[i].id;
        for (const FeatureVector& fv : candidate_feature_vectors(candidates[i], cfg, model.spec)) {
            ++cv.windows;
            cv.votes += model.predict(fv.values);
        }
        report.ranked[i] = cv;
    });

    for (const CandidateVotes& cv : report.ranked) {
        report.total_votes += cv.votes;
        report.total_windows += cv.windows;
    }
    std::sort(report.ranked.begin(), report.ranked.end(),
              [](const CandidateVotes& a, const CandidateVotes& b) {
                  if (a.votes != b.votes) return a.votes > b.votes;
                  return a.id < b.id;
              });
    return report;
}

MatchReport locate_signal(const Forest& model, const CanLog& target, const PipelineConfig& cfg) {
    return locate_signal(model, decompose(target, cfg), cfg);
}

Evaluation evaluate(const MatchReport& report, const std::set<SeriesId>& truth,
                    const SeriesId& primary) {
    if (truth.find(primary) == truth.end()) fail("evaluate: primary truth must be in the truth set");
    bool primary_present = false;
    for (const CandidateVotes& cv : report.ranked)
        if (cv.id == primary) primary_present = true;
    if (!primary_present) fail("evaluate: truth " + primary.str() + " absent from candidates");

    Evaluation ev;
    size_t true_votes = 0;
    size_t best_true = 0;
    bool seen_true = false, seen_false = false;
    size_t best_false_votes = 0;
    size_t primary_votes = 0, primary_windows = 0;
    for (size_t i = 0; i < report.ranked.size(); ++i) {
        const CandidateVotes& cv = report.ranked[i];
        bool is_true = truth.find(cv.id) != truth.end();
        if (is_true) {
            true_votes += cv.votes;
            if (!seen_true) {
                ev.rank = i + 1;
                best_true = cv.votes;
                seen_true = true;
            }
        } else if (!seen_false) {
            // ranked is vote-descending, so the first false candidate has the max
            best_false_votes = cv.votes;
            seen_false = true;
        }
        if (cv.id == primary) {
            primary_votes = cv.votes;
            primary_windows = cv.windows;
        }
    }

    ev.precision = report.total_votes > 0
                       ? static_cast<double>(true_votes) / static_cast<double>(report.total_votes)
                       : 0.0;
    ev.recall = primary_windows > 0
                    ? static_cast<double>(primary_votes) / static_cast<double>(primary_windows)
                    : 0.0;
    ev.gap = report.total_votes > 0
                 ? (static_cast<double>(best_true) - static_cast<double>(best_false_votes)) /
                       static_cast<double>(report.total_votes)
                 : 0.0;
    ev.gap = std::max(0.0, ev.gap);
    return ev;
}

Evaluation evaluate(const MatchReport& report, const SeriesId& truth) {
    return evaluate(report, std::set<SeriesId>{truth}, truth);
}

// ---- model file ----------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'C', 'M', 'F', '1'};
constexpr uint32_t kVersion = 1;

template <class T>
void put(std::string& buf, const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const char* p = reinterpret_cast<const char*>(&v);
    buf.append(p, sizeof(T));
}

void put_string(std::string& buf, const std::string& s) {
    put(buf, static_cast<uint32_t>(s.size()));
    buf.append(s);
}

struct Reader {
    const std::string& buf;
    size_t pos = 0;

    template <class T>
    T get() {
        if (pos + sizeof(T) > buf.size()) fail("model file truncated");
        T v;
        std::memcpy(&v, buf.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }

    std::string get_string() {
        auto n = get<uint32_t>();
        if (pos + n > buf.size()) fail("model file truncated");
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

} // namespace

void save_model(const Forest& forest, const std::string& path) {
    std::string buf;
    buf.append(kMagic, sizeof kMagic);
    put(buf, kVersion);
    put(buf, forest.config_hash);
    put_string(buf, forest.positive_label);

    put(buf, static_cast<uint32_t>(forest.spec.names.size()));
    for (Feature f : forest.spec.names) put_string(buf, feature_name(f));
    put(buf, forest.spec.max_bins);

    put(buf, forest.params.n_trees);
    put(buf, forest.params.max_depth);
    put(buf, forest.params.min_samples_leaf);
    put(buf, forest.params.features_per_split);
    put(buf, static_cast<uint8_t>(forest.params.bootstrap));
    put(buf, forest.seed);

    put(buf, static_cast<uint32_t>(forest.importance_sum.size()));
    for (double v : forest.importance_sum) put(buf, v);

    put(buf, static_cast<uint32_t>(forest.trees.size()));
    for (const DecisionTree& t : forest.trees) {
        put(buf, static_cast<uint32_t>(t.nodes.size()));
        for (const TreeNode& nd : t.nodes) {
            put(buf, nd.feature);
            put(buf, nd.threshold);
            put(buf, nd.left);
            put(buf, nd.right);
            put(buf, nd.leaf_p);
        }
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open model file for writing: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) fail("failed writing model file: " + path);
}

Forest load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open model file: " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < 8 || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0)
        fail("not a canlift model file: " + path);
    Reader r{buf, sizeof kMagic};
    auto version = r.get<uint32_t>();
    if (version != kVersion) fail("unsupported model version " + std::to_string(version));

    Forest f;
    f.config_hash = r.get<uint64_t>();
    f.positive_label = r.get_string();

    auto n_feat = r.get<uint32_t>();
    for (uint32_t i = 0; i < n_feat; ++i) f.spec.names.push_back(feature_from_name(r.get_string()));
    f.spec.max_bins = r.get<uint32_t>();

    f.params.n_trees = r.get<uint32_t>();
    f.params.max_depth = r.get<uint32_t>();
    f.params.min_samples_leaf = r.get<uint32_t>();
    f.params.features_per_split = r.get<uint32_t>();
    f.params.bootstrap = r.get<uint8_t>() != 0;
    f.seed = r.get<uint64_t>();

    auto n_imp = r.get<uint32_t>();
    for (uint32_t i = 0; i < n_imp; ++i) f.importance_sum.push_back(r.get<double>());

    auto n_trees = r.get<uint32_t>();
    f.trees.resize(n_trees);
    for (uint32_t t = 0; t < n_trees; ++t) {
        auto n_nodes = r.get<uint32_t>();
        f.trees[t].nodes.resize(n_nodes);
        for (uint32_t i = 0; i < n_nodes; ++i) {
            TreeNode& nd = f.trees[t].nodes[i];
            nd.feature = r.get<uint16_t>();
            nd.threshold = r.get<double>();
            nd.left = r.get<uint32_t>();
            nd.right = r.get<uint32_t>();
            nd.leaf_p = r.get<double>();
            if (nd.feature != kLeafMarker && (nd.left >= n_nodes || nd.right >= n_nodes))
                fail("model file corrupt: child offset out of range");
        }
    }
    return f;
}

} // namespace canlift
