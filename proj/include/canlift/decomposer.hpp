#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "canlift/canlog.hpp"
#include "canlift/config.hpp"

namespace canlift {

enum class Endian : uint8_t { Big = 0, Little = 1 };

struct ByteSpan {
    uint8_t start = 0;
    uint8_t width = 1; // 1 or 2
    Endian endian = Endian::Big;

    auto operator<=>(const ByteSpan&) const = default;
};

// Identity of one candidate series: (id, byte span, endianness).
struct SeriesId {
    uint16_t can_id = 0;
    ByteSpan span;

    auto operator<=>(const SeriesId&) const = default;

    std::string str() const;                    // e.g. "0410:1-2" or "0510:2", ":le" suffix for little-endian pairs
    static SeriesId parse(const std::string&);  // inverse of str()
};

// Per-bit probability of 1 across all frames of one id, bit 0 = MSB of byte 0.
struct BitDistribution {
    uint16_t can_id = 0;
    uint8_t dlc = 0;
    size_t frame_count = 0;   // frames actually counted (dominant dlc, data frames)
    size_t dropped = 0;       // minority-dlc or RTR frames that were skipped
    std::vector<double> probs;
};

BitDistribution bit_distribution(const CanLog& log, uint16_t can_id);

// One (id, span) time series cut from the payload stream of an id.
struct CandidateSeries {
    SeriesId id;
    std::vector<double> ts;     // strictly increasing
    std::vector<uint32_t> raw;  // unsigned decode
    size_t distinct = 0;        // distinct raw values over the whole series
    uint32_t norm_max = 0;      // 0 until normalize()
    std::vector<double> norm;   // raw / norm_max, filled by normalize()

    size_t size() const { return ts.size(); }
};

struct DecomposeOptions {
    bool little_endian_pairs = false;
};

// Exhaustive byte + byte-pair split of every id's dominant-dlc stream:
// dlc d yields d single-byte plus d-1 big-endian pair candidates (plus the
// little-endian pairs when enabled). RTR and minority-dlc frames are skipped.
std::vector<CandidateSeries> candidate_series(const CanLog& log, DecomposeOptions opts = {});

// Drops series whose distinct raw value count is below min_variation, and
// constant series regardless of the threshold.
std::vector<CandidateSeries> prune(std::vector<CandidateSeries> series, uint32_t min_variation);

// Scales raw values by the series maximum so that max(norm) == 1 exactly.
// All-zero series are an error (they should have been pruned).
CandidateSeries normalize(CandidateSeries series);

// One sliding-window slice of a normalized candidate.
struct WindowSample {
    SeriesId source;
    double t_start = 0.0;
    double t_end = 0.0;
    std::vector<double> values; // normalized samples with t_start <= t < t_end
    size_t distinct_count = 0;  // distinct raw values inside the window
};

// Windows of `length_s` seconds starting at t0 + k * length_s * (1 - overlap).
// A window is emitted iff it holds >= 2 samples and its distinct raw count
// reaches min_variation. The series must be normalized.
std::vector<WindowSample> windows(const CandidateSeries& series, double length_s, double overlap,
                                  uint32_t min_variation);

// Same, but tiles from an explicit grid origin (used to time-align windows
// across several signals of one drive).
std::vector<WindowSample> windows_from(const CandidateSeries& series, double t0, double t_last,
                                       double length_s, double overlap, uint32_t min_variation);

// generate -> prune -> normalize under one config, id-ordered, with per-id
// peak memory (only survivors are kept).
std::vector<CandidateSeries> decompose(const CanLog& log, const PipelineConfig& cfg);

// Cuts a single known span (no pruning). Errors when the id is absent.
CandidateSeries extract_candidate(const CanLog& log, const SeriesId& id);

} // namespace canlift
