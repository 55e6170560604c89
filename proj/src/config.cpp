#include "canlift/config.hpp"

#include <cstdio>

#include <json.hpp>

#include "canlift/error.hpp"

namespace canlift {

namespace {

uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

uint64_t PipelineConfig::hash() const {
    std::string canon;
    canon += "window_s=" + fmt_double(window_s) + "\n";
    canon += "overlap=" + fmt_double(overlap) + "\n";
    canon += "min_variation=" + std::to_string(min_variation) + "\n";
    canon += "max_bins=" + std::to_string(max_bins) + "\n";
    canon += "max_jump_kmh=" + fmt_double(max_jump_kmh) + "\n";
    canon += "endianness=" + std::string(endianness == EndianPolicy::BigOnly ? "big" : "big+little") + "\n";
    canon += "n_trees=" + std::to_string(forest.n_trees) + "\n";
    canon += "max_depth=" + std::to_string(forest.max_depth) + "\n";
    canon += "min_samples_leaf=" + std::to_string(forest.min_samples_leaf) + "\n";
    canon += "features_per_split=" + std::to_string(forest.features_per_split) + "\n";
    canon += "bootstrap=" + std::string(forest.bootstrap ? "1" : "0") + "\n";
    canon += "seed=" + std::to_string(seed) + "\n";
    return fnv1a64(canon);
}

std::string hash_hex(uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string PipelineConfig::to_json_text() const {
    nlohmann::json j;
    j["window_s"] = window_s;
    j["overlap"] = overlap;
    j["min_variation"] = min_variation;
    j["max_bins"] = max_bins;
    j["max_jump_kmh"] = max_jump_kmh;
    j["endianness"] = endianness == EndianPolicy::BigOnly ? "big" : "big+little";
    j["forest"] = {{"n_trees", forest.n_trees},
                   {"max_depth", forest.max_depth},
                   {"min_samples_leaf", forest.min_samples_leaf},
                   {"features_per_split", forest.features_per_split},
                   {"bootstrap", forest.bootstrap}};
    j["seed"] = seed;
    return j.dump(2) + "\n";
}

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
    PipelineConfig cfg;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(std::string("bad config json: ") + e.what());
    }
    try {
        if (j.contains("window_s")) cfg.window_s = j["window_s"].get<double>();
        if (j.contains("overlap")) cfg.overlap = j["overlap"].get<double>();
        if (j.contains("min_variation")) cfg.min_variation = j["min_variation"].get<uint32_t>();
        if (j.contains("max_bins")) cfg.max_bins = j["max_bins"].get<uint32_t>();
        if (j.contains("max_jump_kmh")) cfg.max_jump_kmh = j["max_jump_kmh"].get<double>();
        if (j.contains("endianness")) {
            std::string e = j["endianness"].get<std::string>();
            if (e == "big")
                cfg.endianness = EndianPolicy::BigOnly;
            else if (e == "big+little")
                cfg.endianness = EndianPolicy::BigAndLittle;
            else
                fail("bad endianness value: " + e);
        }
        if (j.contains("forest")) {
            const auto& f = j["forest"];
            if (f.contains("n_trees")) cfg.forest.n_trees = f["n_trees"].get<uint32_t>();
            if (f.contains("max_depth")) cfg.forest.max_depth = f["max_depth"].get<uint32_t>();
            if (f.contains("min_samples_leaf"))
                cfg.forest.min_samples_leaf = f["min_samples_leaf"].get<uint32_t>();
            if (f.contains("features_per_split"))
                cfg.forest.features_per_split = f["features_per_split"].get<uint32_t>();
            if (f.contains("bootstrap")) cfg.forest.bootstrap = f["bootstrap"].get<bool>();
        }
        if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        fail(std::string("bad config field: ") + e.what());
    }
    if (cfg.window_s <= 0.0) fail("window_s must be > 0");
    if (cfg.overlap < 0.0 || cfg.overlap >= 1.0) fail("overlap must be in [0, 1)");
    if (cfg.min_variation < 1) fail("min_variation must be >= 1");
    if (cfg.max_bins < 1) fail("max_bins must be >= 1");
    if (cfg.max_jump_kmh <= 0.0) fail("max_jump_kmh must be > 0");
    return cfg;
}

} // namespace canlift
