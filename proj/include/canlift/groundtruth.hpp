#pragma once

#include <vector>

#include "canlift/decomposer.hpp"

namespace canlift {

// Thresholds for the bootstrap searches. The signal shapes these hunt for
// are qualitative; every number here is a tunable default validated against
// the synthetic oracle.
struct ExclusivityConfig {
    double grid_dt = 0.1;            // alignment grid, seconds, last-value-hold
    double activity_threshold = 0.05; // normalized level above which a candidate is "active"
    double min_active = 0.05;        // each side must be active this fraction of the time
    size_t min_distinct = 10;        // piecewise-constant candidates are excluded
};

struct ExclusivityScore {
    SeriesId a, b; // a < b
    double co_active_fraction = 0.0;
    double active_fraction_a = 0.0;
    double active_fraction_b = 0.0;
};

// Scores every unordered candidate pair on a common grid; ascending by
// co-activity, break ties toward the more active pair.
std::vector<ExclusivityScore> exclusivity_search(const std::vector<CandidateSeries>& candidates,
                                                 ExclusivityConfig cfg = {});

struct Episode {
    double t_start = 0.0;
    double t_end = 0.0;
};

struct EpisodeConfig {
    double v_low = 0.05;  // normalized start bound
    double v_high = 0.35; // normalized "reached speed" bound
    double eps = 0.02;    // tolerated dip while "rising monotonically"
};

// Maximal tolerance-monotone rises of the velocity candidate from <= v_low
// up to >= v_high (standing-start accelerations).
std::vector<Episode> find_accel_episodes(const CandidateSeries& velocity, EpisodeConfig cfg = {});

struct SpikePlatformConfig {
    double spike_drop = 0.15;       // normalized drop after a local max
    double spike_floor_ratio = 0.35; // dip must stay above this fraction of the peak
    double spike_rerise = 0.10;     // normalized rise after the dip
    double spike_window_s = 2.0;    // max peak-to-dip and dip-to-rise spacing
    double spike_separation_s = 1.5; // dips with a close neighbor dip are not events
    double hysteresis = 0.05;       // zigzag extremum filter
    double platform_band = 0.05;    // platform stays within +/- band of its level
    double platform_min_s = 0.3;
    double platform_level_lo = 0.3; // mid-range pedal region
    double platform_level_hi = 0.7;
    double platform_edge = 0.2;     // level must be entered from above and left downward
    double platform_edge_s = 1.0;
    double cooccur_s = 0.5;         // platform must overlap this neighborhood of a spike
};

struct SpikePlatformScore {
    SeriesId spike_candidate;    // RPM-like role
    SeriesId platform_candidate; // clutch-like role
    size_t episode_count = 0;
    size_t matched_episodes = 0;
};

// Counts episodes where `platform_cand` holds a mid-range platform that
// overlaps the neighborhood of a spike dip in `spike_cand`.
size_t matched_episodes(const CandidateSeries& spike_cand, const CandidateSeries& platform_cand,
                        const std::vector<Episode>& episodes, SpikePlatformConfig cfg = {});

// Ranks all ordered candidate pairs by matched episode count (descending);
// pairs that match nothing are omitted.
std::vector<SpikePlatformScore> spike_platform_search(const std::vector<CandidateSeries>& candidates,
                                                      const std::vector<Episode>& episodes,
                                                      SpikePlatformConfig cfg = {});

} // namespace canlift
