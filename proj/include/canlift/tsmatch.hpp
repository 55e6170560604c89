#pragma once

#include <span>
#include <vector>

#include "canlift/canlog.hpp"
#include "canlift/decomposer.hpp"

namespace canlift {

struct VelocitySeries {
    enum class Provenance { GpsDerived, CanCandidate };
    std::vector<double> ts;  // seconds, strictly increasing
    std::vector<double> kmh; // >= 0
    Provenance provenance = Provenance::GpsDerived;
};

// Mean velocity between neighboring fixes (haversine, Earth radius 6371 km),
// timestamped at the later fix.
VelocitySeries gps_to_velocity(const GpsTrack& track);

// Iteratively drops samples jumping more than max_jump km/h from the last
// surviving sample; the first sample is always kept.
VelocitySeries remove_velocity_outliers(VelocitySeries v, double max_jump_kmh = 30.0);

struct DtwResult {
    double distance = 0.0;
    size_t path_length = 0;
};

struct DtwOptions {
    size_t band = 0; // Sakoe-Chiba band half-width on the 1 Hz grid; 0 = none
};

// Classic O(|a|*|b|) dynamic program with |a_i - b_j| local cost and
// (diagonal, up, left) moves; D(1,1) = cost(1,1), answer D(|a|,|b|).
DtwResult dtw(std::span<const double> a, std::span<const double> b, DtwOptions opts = {});

struct DtwRank {
    SeriesId id;
    double distance = 0.0;
};

// Candidates and the reference are resampled to a common 1 Hz grid
// (per-second mean for CAN, native for GPS) and min-max normalized before
// DTW; ascending by distance, then by identity.
std::vector<DtwRank> rank_by_dtw(const VelocitySeries& reference,
                                 const std::vector<CandidateSeries>& candidates,
                                 DtwOptions opts = {});
// Serial reference implementation for the parallel kernel above.
std::vector<DtwRank> rank_by_dtw_serial(const VelocitySeries& reference,
                                        const std::vector<CandidateSeries>& candidates,
                                        DtwOptions opts = {});

// Per-second means over [t0 + k, t0 + k + 1); empty seconds hold the last value.
std::vector<double> resample_1hz_mean(const CandidateSeries& series);

std::vector<double> minmax_normalize(std::vector<double> x);

} // namespace canlift
