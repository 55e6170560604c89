#pragma once

#include <array>
#include <string>
#include <vector>

#include "canlift/config.hpp"
#include "canlift/decomposer.hpp"

namespace canlift {

// Fixed signal order for the concatenated fingerprint.
constexpr std::array<const char*, 4> kReidSignalOrder = {"accel", "brake", "velocity", "rpm"};

struct DriverSample {
    std::string driver;
    double t_start = 0.0;
    double t_end = 0.0;
    std::vector<double> values; // 11 re-id features x 4 signals = 44
};

// Windows are tiled on one wall-clock grid shared by all four signals; a
// sample is emitted only when every signal covers the window with at least
// 2 points. Feature order: 11-feature re-id spec per signal, signals in
// kReidSignalOrder.
std::vector<DriverSample> build_driver_samples(const std::array<CandidateSeries, 4>& signals,
                                               const std::string& driver,
                                               const PipelineConfig& cfg);

struct ReidResult {
    std::string driver_a, driver_b;
    std::vector<double> fold_precisions; // 10 entries
    double mean_precision = 0.0;
};

// 10-fold cross-validation with a seeded shuffled fold assignment; per fold
// a balanced forest is trained on the other 9 folds and scored on the held
// out one. Precision is macro-averaged over the two class roles.
ReidResult pairwise_reid(const std::vector<DriverSample>& samples_a,
                         const std::vector<DriverSample>& samples_b, const PipelineConfig& cfg,
                         uint64_t seed);

// Samples k drivers with the seeded generator and runs pairwise_reid on all
// C(k,2) pairs.
std::vector<ReidResult> cohort_reid(const std::vector<std::vector<DriverSample>>& drivers,
                                    size_t k, const PipelineConfig& cfg, uint64_t seed);

} // namespace canlift
