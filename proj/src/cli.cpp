#include "canlift/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "canlift/canlog.hpp"
#include "canlift/config.hpp"
#include "canlift/decomposer.hpp"
#include "canlift/error.hpp"
#include "canlift/features.hpp"
#include "canlift/groundtruth.hpp"
#include "canlift/learner.hpp"
#include "canlift/parallel.hpp"
#include "canlift/reid.hpp"
#include "canlift/synthgen.hpp"
#include "canlift/tsmatch.hpp"

namespace canlift::cli {

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open file for writing: " + path);
    out << text;
    if (!out) fail("failed writing file: " + path);
}

std::string f4(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string g10(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string hex_id(uint16_t id) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%04x", id);
    return buf;
}

struct Ctx {
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
    bool json = false;
    bool strict = false;
    int threads = 0;
    std::string config_path;
    PipelineConfig cfg;

    // post-parse overrides (value, was-set)
    double window = 0, overlap = 0, max_jump = 0;
    uint32_t min_variation = 0, max_bins = 0;
    uint64_t seed = 0;
    bool little_endian = false;
    CLI::App* root = nullptr;

    void finalize() {
        if (!config_path.empty()) cfg = PipelineConfig::from_json_text(read_file(config_path));
        auto set = [&](const char* name) { return root->count(name) > 0; };
        if (set("--window")) cfg.window_s = window;
        if (set("--overlap")) cfg.overlap = overlap;
        if (set("--min-variation")) cfg.min_variation = min_variation;
        if (set("--max-bins")) cfg.max_bins = max_bins;
        if (set("--max-jump")) cfg.max_jump_kmh = max_jump;
        if (set("--seed")) cfg.seed = seed;
        if (little_endian) cfg.endianness = EndianPolicy::BigAndLittle;
        if (threads == 0) {
            if (const char* env = std::getenv("CANLIFT_THREADS")) threads = std::atoi(env);
        }
        set_threads(threads);
        if (cfg.window_s <= 0) fail("window must be > 0");
        if (cfg.overlap < 0 || cfg.overlap >= 1) fail("overlap must be in [0, 1)");
    }

    void header(const std::string& report) {
        if (json) {
            nlohmann::json j{{"report", report}, {"config", hash_hex(cfg.hash())}};
            *out << j.dump() << "\n";
        } else {
            *out << "# canlift " << report << "\n# config " << hash_hex(cfg.hash()) << "\n";
        }
    }

    CanLog load_log(const std::string& path) {
        ParseStats stats;
        CanLog log = parse_log(read_file(path), strict ? ParseMode::Strict : ParseMode::Lenient,
                               &stats);
        log.meta.source = path;
        if (stats.skipped > 0) {
            *err << "warning: skipped " << stats.skipped << " malformed line(s) in " << path
                 << "\n";
            for (const std::string& e : stats.errors) *err << "  " << e << "\n";
        }
        return log;
    }
};

std::vector<SeriesId> parse_truth_list(const std::string& arg) {
    std::vector<SeriesId> out;
    size_t pos = 0;
    while (pos <= arg.size()) {
        size_t comma = arg.find(',', pos);
        if (comma == std::string::npos) comma = arg.size();
        std::string item = arg.substr(pos, comma - pos);
        if (!item.empty()) out.push_back(SeriesId::parse(item));
        pos = comma + 1;
    }
    if (out.empty()) fail("empty truth list");
    return out;
}

// Candidates whose span intersects any listed truth span on the same id.
bool overlaps_truth(const SeriesId& cand, const std::vector<SeriesId>& truth) {
    for (const SeriesId& t : truth) {
        if (cand.can_id != t.can_id) continue;
        unsigned c0 = cand.span.start, c1 = cand.span.start + cand.span.width;
        unsigned t0 = t.span.start, t1 = t.span.start + t.span.width;
        if (c0 < t1 && t0 < c1) return true;
    }
    return false;
}

// ---- subcommands -----------------------------------------------------------

void cmd_ids(Ctx& ctx, const std::string& log_path) {
    CanLog log = ctx.load_log(log_path);
    ctx.header("ids");
    if (!ctx.json) *ctx.out << "id\tframes\tdlc\n";
    for (const IdSummary& s : ids(log)) {
        if (ctx.json) {
            nlohmann::json j{{"id", hex_id(s.can_id)},
                             {"frames", s.frame_count},
                             {"dlc", s.dominant_dlc}};
            *ctx.out << j.dump() << "\n";
        } else {
            *ctx.out << hex_id(s.can_id) << "\t" << s.frame_count << "\t"
                     << static_cast<int>(s.dominant_dlc) << "\n";
        }
    }
}

void cmd_decompose(Ctx& ctx, const std::string& log_path, bool bits) {
    CanLog log = ctx.load_log(log_path);
    if (bits) {
        ctx.header("bit-distribution");
        for (const IdSummary& s : ids(log)) {
            BitDistribution bd = bit_distribution(log, s.can_id);
            if (ctx.json) {
                nlohmann::json j{{"id", hex_id(s.can_id)}, {"frames", bd.frame_count}};
                j["probs"] = bd.probs;
                *ctx.out << j.dump() << "\n";
            } else {
                *ctx.out << hex_id(s.can_id);
                for (double p : bd.probs) *ctx.out << "," << f4(p);
                *ctx.out << "\n";
            }
        }
        return;
    }
    DecomposeOptions opts;
    opts.little_endian_pairs = ctx.cfg.endianness == EndianPolicy::BigAndLittle;
    ctx.header("decompose");
    if (!ctx.json) *ctx.out << "candidate\tsamples\tdistinct\tstatus\n";
    for (const CandidateSeries& c : candidate_series(log, opts)) {
        bool kept = c.distinct > 1 && c.distinct >= ctx.cfg.min_variation;
        if (ctx.json) {
            nlohmann::json j{{"candidate", c.id.str()},
                             {"samples", c.size()},
                             {"distinct", c.distinct},
                             {"kept", kept}};
            *ctx.out << j.dump() << "\n";
        } else {
            *ctx.out << c.id.str() << "\t" << c.size() << "\t" << c.distinct << "\t"
                     << (kept ? "kept" : "dropped") << "\n";
        }
    }
}

void cmd_features(Ctx& ctx, const std::string& log_path, const std::string& spec_name,
                  const std::string& only, bool with_cid_ce) {
    CanLog log = ctx.load_log(log_path);
    FeatureSpec spec = FeatureSpec::by_name(spec_name, ctx.cfg.max_bins);
    if (with_cid_ce) spec.names.push_back(Feature::CidCe); // extra, never in default specs
    std::vector<CandidateSeries> cands;
    if (only.empty()) {
        cands = decompose(log, ctx.cfg);
    } else {
        cands.push_back(normalize(extract_candidate(log, SeriesId::parse(only))));
    }
    ctx.header("features");
    if (!ctx.json) {
        *ctx.out << "candidate,t_start,t_end";
        for (Feature f : spec.names) *ctx.out << "," << feature_name(f);
        *ctx.out << "\n";
    }
    for (const CandidateSeries& c : cands) {
        for (const FeatureVector& fv : candidate_feature_vectors(c, ctx.cfg, spec)) {
            if (ctx.json) {
                nlohmann::json j{{"candidate", fv.source.str()},
                                 {"t_start", fv.t_start},
                                 {"t_end", fv.t_end}};
                for (size_t i = 0; i < spec.names.size(); ++i)
                    j[feature_name(spec.names[i])] = fv.values[i];
                *ctx.out << j.dump() << "\n";
            } else {
                *ctx.out << fv.source.str() << "," << g10(fv.t_start) << "," << g10(fv.t_end);
                for (double v : fv.values) *ctx.out << "," << g10(v);
                *ctx.out << "\n";
            }
        }
    }
}

void cmd_find_velocity(Ctx& ctx, const std::string& log_path, const std::string& gps_path,
                       size_t band, size_t top) {
    CanLog log = ctx.load_log(log_path);
    VelocitySeries ref = remove_velocity_outliers(gps_to_velocity(parse_gps(read_file(gps_path))),
                                                  ctx.cfg.max_jump_kmh);
    std::vector<CandidateSeries> cands = decompose(log, ctx.cfg);
    if (cands.empty()) fail("no candidates survive pruning");
    DtwOptions opts;
    opts.band = band;
    std::vector<DtwRank> ranked = rank_by_dtw(ref, cands, opts);

    ctx.header("find-velocity");
    if (!ctx.json) *ctx.out << "rank\tid\tbytes\tdistance\n";
    for (size_t i = 0; i < ranked.size() && i < top; ++i) {
        const DtwRank& r = ranked[i];
        std::string bytes = std::to_string(r.id.span.start);
        if (r.id.span.width == 2) bytes += "-" + std::to_string(r.id.span.start + 1);
        if (ctx.json) {
            nlohmann::json j{{"rank", i + 1},
                             {"id", hex_id(r.id.can_id)},
                             {"bytes", bytes},
                             {"candidate", r.id.str()},
                             {"distance", r.distance}};
            *ctx.out << j.dump() << "\n";
        } else {
            *ctx.out << (i + 1) << "\t" << hex_id(r.id.can_id) << "\t" << bytes << "\t"
                     << f4(r.distance) << "\n";
        }
    }
}

void cmd_find_pedals(Ctx& ctx, const std::string& log_path, size_t top) {
    CanLog log = ctx.load_log(log_path);
    std::vector<CandidateSeries> cands = decompose(log, ctx.cfg);
    std::vector<ExclusivityScore> scores = exclusivity_search(cands);
    ctx.header("find-pedals");
    if (!ctx.json) *ctx.out << "rank\ta\tb\tco_active\tactive_a\tactive_b\n";
    for (size_t i = 0; i < scores.size() && i < top; ++i) {
        const ExclusivityScore& s = scores[i];
        if (ctx.json) {
            nlohmann::json j{{"rank", i + 1},
                             {"a", s.a.str()},
                             {"b", s.b.str()},
                             {"co_active", s.co_active_fraction},
                             {"active_a", s.active_fraction_a},
                             {"active_b", s.active_fraction_b}};
            *ctx.out << j.dump() << "\n";
        } else {
            *ctx.out << (i + 1) << "\t" << s.a.str() << "\t" << s.b.str() << "\t"
                     << f4(s.co_active_fraction) << "\t" << f4(s.active_fraction_a) << "\t"
                     << f4(s.active_fraction_b) << "\n";
        }
    }
}

void cmd_find_clutch(Ctx& ctx, const std::string& log_path, const std::string& velocity_id,
                     size_t top) {
    CanLog log = ctx.load_log(log_path);
    std::vector<CandidateSeries> cands = decompose(log, ctx.cfg);
    SeriesId vid = SeriesId::parse(velocity_id);
    const CandidateSeries* velocity = nullptr;
    for (const CandidateSeries& c : cands)
        if (c.id == vid) velocity = &c;
    if (!velocity) fail("velocity candidate " + vid.str() + " not among surviving candidates");

    std::vector<Episode> episodes = find_accel_episodes(*velocity);
    std::vector<SpikePlatformScore> scores = spike_platform_search(cands, episodes);
    ctx.header("find-clutch");
    if (!ctx.json)
        *ctx.out << "rank\tspike\tplatform\tmatched\tepisodes\n";
    for (size_t i = 0; i < scores.size() && i < top; ++i) {
        const SpikePlatformScore& s = scores[i];
        if (ctx.json) {
            nlohmann::json j{{"rank", i + 1},
                             {"spike", s.spike_candidate.str()},
                             {"platform", s.platform_candidate.str()},
                             {"matched", s.matched_episodes},
                             {"episodes", s.episode_count}};
            *ctx.out << j.dump() << "\n";
        } else {
            *ctx.out << (i + 1) << "\t" << s.spike_candidate.str() << "\t"
                     << s.platform_candidate.str() << "\t" << s.matched_episodes << "\t"
                     << s.episode_count << "\n";
        }
    }
    if (scores.empty() && !ctx.json) *ctx.out << "(no spike/platform pair found)\n";
}

void cmd_train(Ctx& ctx, const std::string& log_path, const std::string& signal,
               const std::string& truth_arg, const std::string& out_path) {
    CanLog log = ctx.load_log(log_path);
    std::vector<SeriesId> truth = parse_truth_list(truth_arg);
    std::vector<CandidateSeries> cands = decompose(log, ctx.cfg);

    FeatureSpec spec = FeatureSpec::full15(ctx.cfg.max_bins);
    std::vector<std::vector<double>> positives, negatives;
    bool found = false;
    for (const CandidateSeries& c : cands) {
        bool is_primary = c.id == truth[0];
        bool is_alias = overlaps_truth(c.id, truth);
        if (is_primary) found = true;
        if (!is_primary && is_alias) continue; // aliases poison neither side
        for (FeatureVector& fv : candidate_feature_vectors(c, ctx.cfg, spec)) {
            if (is_primary)
                positives.push_back(std::move(fv.values));
            else
                negatives.push_back(std::move(fv.values));
        }
    }
    if (!found) fail("truth candidate " + truth[0].str() + " not among surviving candidates");
    if (positives.empty()) fail("truth candidate yields no windows");

    Forest forest = train_forest(positives, negatives, ctx.cfg.forest, ctx.cfg.seed);
    forest.positive_label = signal;
    forest.spec = spec;
    forest.config_hash = ctx.cfg.hash();
    save_model(forest, out_path);

    ctx.header("train");
    if (ctx.json) {
        nlohmann::json j{{"signal", signal},
                         {"positives", positives.size()},
                         {"negatives", negatives.size()},
                         {"trees", forest.trees.size()},
                         {"oob_accuracy", forest.oob_accuracy},
                         {"model", out_path}};
        *ctx.out << j.dump() << "\n";
    } else {
        *ctx.out << "signal\t" << signal << "\npositives\t" << positives.size() << "\nnegatives\t"
                 << negatives.size() << "\ntrees\t" << forest.trees.size() << "\noob_accuracy\t"
                 << f4(forest.oob_accuracy) << "\nmodel\t" << out_path << "\n";
        *ctx.out << "feature\timportance\n";
        for (const auto& [f, imp] : feature_importances(forest))
            *ctx.out << feature_name(f) << "\t" << f4(imp) << "\n";
    }
}

void print_match_report(Ctx& ctx, const MatchReport& report, size_t top) {
    if (ctx.json) {
        nlohmann::json j{{"sensor", report.signal_name},
                         {"total_votes", report.total_votes},
                         {"total_windows", report.total_windows}};
        if (report.rank_of_truth) {
            j["rank"] = *report.rank_of_truth;
            j["precision"] = *report.precision;
            j["recall"] = *report.recall;
            j["gap"] = *report.gap;
        }
        *ctx.out << j.dump() << "\n";
        for (size_t i = 0; i < report.ranked.size() && i < top; ++i) {
            const CandidateVotes& cv = report.ranked[i];
            double share = report.total_votes
                               ? static_cast<double>(cv.votes) / static_cast<double>(report.total_votes)
                               : 0.0;
            nlohmann::json r{{"rank", i + 1},
                             {"candidate", cv.id.str()},
                             {"votes", cv.votes},
                             {"vote_share", share},
                             {"windows", cv.windows}};
            *ctx.out << r.dump() << "\n";
        }
        return;
    }
    *ctx.out << "sensor\trank\tprecision\trecall\tgap\n";
    *ctx.out << report.signal_name << "\t";
    if (report.rank_of_truth) {
        *ctx.out << *report.rank_of_truth << "\t" << f4(*report.precision) << "\t"
                 << f4(*report.recall) << "\t" << f4(*report.gap) << "\n";
    } else {
        *ctx.out << "-\t-\t-\t-\n";
    }
    *ctx.out << "rank\tcandidate\tvotes\tvote_share\twindows\n";
    for (size_t i = 0; i < report.ranked.size() && i < top; ++i) {
        const CandidateVotes& cv = report.ranked[i];
        double share = report.total_votes
                           ? static_cast<double>(cv.votes) / static_cast<double>(report.total_votes)
                           : 0.0;
        *ctx.out << (i + 1) << "\t" << cv.id.str() << "\t" << cv.votes << "\t" << f4(share) << "\t"
                 << cv.windows << "\n";
    }
}

void cmd_match(Ctx& ctx, const std::string& model_path, const std::string& target_path,
               const std::string& truth_arg, size_t top) {
    Forest model = load_model(model_path);
    CanLog target = ctx.load_log(target_path);
    MatchReport report = locate_signal(model, target, ctx.cfg);
    if (!truth_arg.empty()) {
        std::vector<SeriesId> truth = parse_truth_list(truth_arg);
        std::set<SeriesId> truth_set;
        for (const CandidateVotes& cv : report.ranked)
            if (overlaps_truth(cv.id, truth)) truth_set.insert(cv.id);
        truth_set.insert(truth[0]);
        Evaluation ev = evaluate(report, truth_set, truth[0]);
        report.rank_of_truth = ev.rank;
        report.precision = ev.precision;
        report.recall = ev.recall;
        report.gap = ev.gap;
    }
    ctx.header("match");
    print_match_report(ctx, report, top);
}

void cmd_reid(Ctx& ctx, const std::string& signals_arg, const std::string& drives_dir, size_t k,
              uint64_t seed) {
    std::map<std::string, SeriesId> locations;
    size_t pos = 0;
    while (pos < signals_arg.size()) {
        size_t comma = signals_arg.find(',', pos);
        if (comma == std::string::npos) comma = signals_arg.size();
        std::string item = signals_arg.substr(pos, comma - pos);
        size_t eq = item.find('=');
        if (eq == std::string::npos) fail("bad --signals entry '" + item + "' (want name=id:span)");
        locations[item.substr(0, eq)] = SeriesId::parse(item.substr(eq + 1));
        pos = comma + 1;
    }
    for (const char* name : {"acc", "brake", "velo", "rpm"})
        if (!locations.count(name)) fail(std::string("--signals is missing '") + name + "'");

    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(drives_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".log")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) fail("no .log drives found in " + drives_dir);

    std::map<std::string, std::vector<DriverSample>> by_driver;
    for (const std::string& path : files) {
        std::string stem = fs::path(path).stem().string();
        size_t us = stem.rfind('_');
        std::string driver = us == std::string::npos ? stem : stem.substr(0, us);
        CanLog log = ctx.load_log(path);
        std::array<CandidateSeries, 4> sig = {
            normalize(extract_candidate(log, locations["acc"])),
            normalize(extract_candidate(log, locations["brake"])),
            normalize(extract_candidate(log, locations["velo"])),
            normalize(extract_candidate(log, locations["rpm"])),
        };
        std::vector<DriverSample> samples = build_driver_samples(sig, driver, ctx.cfg);
        auto& store = by_driver[driver];
        store.insert(store.end(), samples.begin(), samples.end());
    }

    std::vector<std::vector<DriverSample>> drivers;
    for (auto& [name, samples] : by_driver) drivers.push_back(std::move(samples));
    if (drivers.size() < 2) fail("need drives from at least 2 drivers");
    k = std::min(k, drivers.size());

    std::vector<ReidResult> results = cohort_reid(drivers, k, ctx.cfg, seed ? seed : ctx.cfg.seed);

    ctx.header("reid");
    if (!ctx.json) *ctx.out << "driver_a\tdriver_b\tmean_precision\tfolds\n";
    double mean = 0.0, lo = 1.0, hi = 0.0;
    for (const ReidResult& r : results) {
        mean += r.mean_precision;
        lo = std::min(lo, r.mean_precision);
        hi = std::max(hi, r.mean_precision);
        if (ctx.json) {
            nlohmann::json j{{"driver_a", r.driver_a},
                             {"driver_b", r.driver_b},
                             {"mean_precision", r.mean_precision},
                             {"folds", r.fold_precisions}};
            *ctx.out << j.dump() << "\n";
        } else {
            *ctx.out << r.driver_a << "\t" << r.driver_b << "\t" << f4(r.mean_precision) << "\t";
            for (size_t i = 0; i < r.fold_precisions.size(); ++i)
                *ctx.out << (i ? " " : "") << f4(r.fold_precisions[i]);
            *ctx.out << "\n";
        }
    }
    mean /= static_cast<double>(results.size());
    if (ctx.json) {
        nlohmann::json j{{"pairs", results.size()}, {"mean", mean}, {"worst", lo}, {"best", hi}};
        *ctx.out << j.dump() << "\n";
    } else {
        *ctx.out << "aggregate\tpairs " << results.size() << "\tmean " << f4(mean) << "\tworst "
                 << f4(lo) << "\tbest " << f4(hi) << "\n";
    }
}

ScenarioSpec scenario_from_json(const std::string& text) {
    ScenarioSpec spec;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(std::string("bad scenario json: ") + e.what());
    }
    if (j.contains("duration_s")) spec.duration_s = j["duration_s"].get<double>();
    if (j.contains("v_peak_kmh")) spec.v_peak_kmh = j["v_peak_kmh"].get<double>();
    if (j.contains("layout_seed")) spec.layout_seed = j["layout_seed"].get<uint64_t>();
    if (j.contains("drive_seed")) spec.drive_seed = j["drive_seed"].get<uint64_t>();
    if (j.contains("gps_noise_m")) spec.gps_noise_m = j["gps_noise_m"].get<double>();
    if (j.contains("label")) spec.label = j["label"].get<std::string>();
    if (j.contains("style")) {
        const auto& s = j["style"];
        if (s.is_string()) {
            std::string name = s.get<std::string>();
            if (name == "smooth")
                spec.style = DriverStyle::smooth();
            else if (name == "aggressive")
                spec.style = DriverStyle::aggressive();
            else
                fail("unknown style '" + name + "'");
        } else {
            if (s.contains("accel_level")) spec.style.accel_level = s["accel_level"].get<double>();
            if (s.contains("accel_jitter")) spec.style.accel_jitter = s["accel_jitter"].get<double>();
            if (s.contains("accel_rate")) spec.style.accel_rate = s["accel_rate"].get<double>();
            if (s.contains("brake_level")) spec.style.brake_level = s["brake_level"].get<double>();
            if (s.contains("brake_rate")) spec.style.brake_rate = s["brake_rate"].get<double>();
            if (s.contains("shift_rpm")) spec.style.shift_rpm = s["shift_rpm"].get<double>();
            if (s.contains("slip_s")) spec.style.slip_s = s["slip_s"].get<double>();
            if (s.contains("clutch_rate")) spec.style.clutch_rate = s["clutch_rate"].get<double>();
        }
    }
    if (j.contains("noise")) {
        const auto& n = j["noise"];
        if (n.contains("constants")) spec.noise.constants = n["constants"].get<uint32_t>();
        if (n.contains("counters")) spec.noise.counters = n["counters"].get<uint32_t>();
        if (n.contains("multis")) spec.noise.multis = n["multis"].get<uint32_t>();
        if (n.contains("walks")) spec.noise.walks = n["walks"].get<uint32_t>();
        if (n.contains("smooths")) spec.noise.smooths = n["smooths"].get<uint32_t>();
        if (n.contains("bursts")) spec.noise.bursts = n["bursts"].get<uint32_t>();
    }
    return spec;
}

void cmd_synth(Ctx& ctx, const std::string& scenario_path, bool seed_set, double duration,
               const std::string& out_dir) {
    ScenarioSpec spec;
    if (!scenario_path.empty()) spec = scenario_from_json(read_file(scenario_path));
    if (seed_set) {
        spec.drive_seed = ctx.cfg.seed;
        if (scenario_path.empty()) spec.layout_seed = ctx.cfg.seed;
    }
    if (duration > 0) spec.duration_s = duration;

    SynthDrive drive = generate(spec);
    fs::create_directories(out_dir);
    std::string base = (fs::path(out_dir) / spec.label).string();
    write_file(base + ".log", drive.can_text);
    write_file(base + "_gps.csv", drive.gps_csv);
    write_file(base + "_truth.json", manifest_json(drive.truth));

    ctx.header("synth");
    size_t frames = std::count(drive.can_text.begin(), drive.can_text.end(), '\n');
    if (ctx.json) {
        nlohmann::json j{{"log", base + ".log"},
                         {"gps", base + "_gps.csv"},
                         {"truth", base + "_truth.json"},
                         {"frames", frames},
                         {"ids", drive.truth.dlc_by_id.size()}};
        *ctx.out << j.dump() << "\n";
    } else {
        *ctx.out << "log\t" << base << ".log\ngps\t" << base << "_gps.csv\ntruth\t" << base
                 << "_truth.json\nframes\t" << frames << "\nids\t" << drive.truth.dlc_by_id.size()
                 << "\n";
        for (const auto& [name, sid] : drive.truth.locations)
            *ctx.out << "signal\t" << name << "\t" << sid.str() << "\n";
    }
}

void cmd_config(Ctx& ctx) {
    if (ctx.json) {
        nlohmann::json j = nlohmann::json::parse(ctx.cfg.to_json_text());
        j["hash"] = hash_hex(ctx.cfg.hash());
        *ctx.out << j.dump() << "\n";
    } else {
        *ctx.out << ctx.cfg.to_json_text();
        *ctx.out << "# hash " << hash_hex(ctx.cfg.hash()) << "\n";
    }
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Ctx ctx;
    ctx.out = &out;
    ctx.err = &err;

    CLI::App app{"canlift: sensor signal extraction and driver re-identification from raw CAN logs"};
    ctx.root = &app;
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--config", ctx.config_path, "pipeline config JSON");
    app.add_flag("--json", ctx.json, "line-delimited JSON reports");
    app.add_option("--threads", ctx.threads, "worker threads (0 = all cores)");
    app.add_flag("--strict", ctx.strict, "abort on malformed log lines");
    app.add_option("--window", ctx.window, "window length, seconds");
    app.add_option("--overlap", ctx.overlap, "window overlap fraction [0,1)");
    app.add_option("--min-variation", ctx.min_variation, "variation pruning threshold");
    app.add_option("--max-bins", ctx.max_bins, "binned entropy bin count");
    app.add_option("--max-jump", ctx.max_jump, "GPS velocity outlier limit, km/h");
    app.add_option("--seed", ctx.seed, "master seed");
    app.add_flag("--little-endian", ctx.little_endian, "also emit little-endian pair candidates");

    std::string log_path, gps_path, signal, truth_arg, model_path, out_path, velocity_id;
    std::string spec_name = "full15", only_candidate, signals_arg, drives_dir, scenario_path;
    bool bits = false;
    size_t band = 0, top = 10, kk = 5;
    double duration = 0;

    CLI::App* c_ids = app.add_subcommand("ids", "list message ids with frame counts");
    c_ids->add_option("log", log_path, "CAN log file")->required();

    CLI::App* c_dec = app.add_subcommand("decompose", "candidate manifest for a log");
    c_dec->add_option("log", log_path)->required();
    c_dec->add_flag("--bits", bits, "emit per-id bit distribution CSV instead");

    CLI::App* c_feat = app.add_subcommand("features", "dump window feature vectors as CSV");
    c_feat->add_option("log", log_path)->required();
    c_feat->add_option("--spec", spec_name, "full15 or reid11");
    c_feat->add_option("--candidate", only_candidate, "restrict to one id:span");
    bool with_cid_ce = false;
    c_feat->add_flag("--with-cid-ce", with_cid_ce, "append the extra cid_ce column");

    CLI::App* c_vel = app.add_subcommand("find-velocity", "DTW ranking against GPS velocity");
    c_vel->add_option("log", log_path)->required();
    c_vel->add_option("gps", gps_path)->required();
    c_vel->add_option("--band", band, "Sakoe-Chiba band half-width");
    c_vel->add_option("--top", top, "rows to print");

    CLI::App* c_ped = app.add_subcommand("find-pedals", "brake/accelerator exclusivity ranking");
    c_ped->add_option("log", log_path)->required();
    c_ped->add_option("--top", top);

    CLI::App* c_clu = app.add_subcommand("find-clutch", "RPM spike / clutch platform ranking");
    c_clu->add_option("log", log_path)->required();
    c_clu->add_option("--velocity", velocity_id, "velocity candidate id:span")->required();
    c_clu->add_option("--top", top);

    CLI::App* c_train = app.add_subcommand("train", "train a signal classifier on a base car");
    c_train->add_option("--base", log_path)->required();
    c_train->add_option("--signal", signal)->required();
    c_train->add_option("--truth", truth_arg, "id:span[,id:span...] (first = exact)")->required();
    c_train->add_option("--out", out_path)->required();

    CLI::App* c_match = app.add_subcommand("match", "locate a signal in a target car");
    c_match->add_option("--model", model_path)->required();
    c_match->add_option("--target", log_path)->required();
    c_match->add_option("--truth", truth_arg, "known truth for evaluation");
    c_match->add_option("--top", top);

    CLI::App* c_reid = app.add_subcommand("reid", "pairwise driver re-identification");
    c_reid->add_option("--signals", signals_arg, "acc=..,brake=..,velo=..,rpm=..")->required();
    c_reid->add_option("--drives", drives_dir, "directory of <driver>_<n>.log files")->required();
    c_reid->add_option("--k", kk, "drivers to sample");

    CLI::App* c_synth = app.add_subcommand("synth", "generate a synthetic drive");
    c_synth->add_option("--scenario", scenario_path, "scenario JSON");
    c_synth->add_option("--duration", duration, "drive length, seconds");
    c_synth->add_option("--out", out_path, "output directory")->required();

    CLI::App* c_cfg = app.add_subcommand("config", "print the effective config and its hash");
    (void)c_cfg;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        ctx.finalize();
        if (c_ids->parsed()) cmd_ids(ctx, log_path);
        if (c_dec->parsed()) cmd_decompose(ctx, log_path, bits);
        if (c_feat->parsed()) cmd_features(ctx, log_path, spec_name, only_candidate, with_cid_ce);
        if (c_vel->parsed()) cmd_find_velocity(ctx, log_path, gps_path, band, top);
        if (c_ped->parsed()) cmd_find_pedals(ctx, log_path, top);
        if (c_clu->parsed()) cmd_find_clutch(ctx, log_path, velocity_id, top);
        if (c_train->parsed()) cmd_train(ctx, log_path, signal, truth_arg, out_path);
        if (c_match->parsed()) cmd_match(ctx, model_path, log_path, truth_arg, top);
        if (c_reid->parsed()) cmd_reid(ctx, signals_arg, drives_dir, kk, ctx.cfg.seed);
        if (c_synth->parsed()) cmd_synth(ctx, scenario_path, app.count("--seed") > 0, duration, out_path);
        if (c_cfg->parsed()) cmd_config(ctx);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace canlift::cli
