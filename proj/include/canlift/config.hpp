#pragma once

#include <cstdint>
#include <string>

namespace canlift {

struct ForestParams {
    uint32_t n_trees = 100;
    uint32_t max_depth = 12;
    uint32_t min_samples_leaf = 2;
    uint32_t features_per_split = 0; // 0 = ceil(sqrt(n_features))
    bool bootstrap = true;
};

enum class EndianPolicy : uint8_t { BigOnly, BigAndLittle };

// Shared pipeline parameters. The hash accompanies every model and report;
// artifacts produced under different hashes refuse to combine.
struct PipelineConfig {
    double window_s = 2.5;
    double overlap = 0.25;
    uint32_t min_variation = 7;
    uint32_t max_bins = 10;
    double max_jump_kmh = 30.0;
    EndianPolicy endianness = EndianPolicy::BigOnly;
    ForestParams forest;
    uint64_t seed = 1;

    uint64_t hash() const;
    std::string to_json_text() const;
    static PipelineConfig from_json_text(const std::string& text);
};

std::string hash_hex(uint64_t h);

} // namespace canlift
