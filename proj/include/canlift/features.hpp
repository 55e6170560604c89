#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "canlift/decomposer.hpp"

namespace canlift {

// Registry of window statistics. The first 15 form the default battery;
// CidCe belongs to the discarded superset and is opt-in only.
enum class Feature : uint8_t {
    CountAboveMean,
    CountBelowMean,
    LongestStrikeAboveMean,
    LongestStrikeBelowMean,
    BinnedEntropy,
    MeanAbsChange,
    MeanChange,
    Minimum,
    Maximum,
    Mean,
    Median,
    StdDev,
    Variance,
    Kurtosis,
    Skewness,
    CidCe,
};

const char* feature_name(Feature f);
Feature feature_from_name(const std::string& name);

struct FeatureSpec {
    std::vector<Feature> names; // canonical registry order
    uint32_t max_bins = 10;

    static FeatureSpec full15(uint32_t max_bins = 10);
    static FeatureSpec reid11(uint32_t max_bins = 10);
    static FeatureSpec by_name(const std::string& spec_name, uint32_t max_bins = 10);
};

struct FeatureVector {
    SeriesId source;
    double t_start = 0.0;
    double t_end = 0.0;
    std::vector<double> values; // aligned to FeatureSpec::names
};

// Individual statistics. Counting comparisons are strict: values equal to
// the mean count on neither side.
size_t count_above_mean(std::span<const double> x);
size_t count_below_mean(std::span<const double> x);
size_t longest_strike_above_mean(std::span<const double> x);
size_t longest_strike_below_mean(std::span<const double> x);

// Shannon entropy (natural log) of the histogram over max_bins equidistant
// bins spanning [min, max]; the maximum falls into the last bin.
double binned_entropy(std::span<const double> x, uint32_t max_bins);

// Denominator is the number of consecutive differences (n - 1); windows with
// fewer than 2 samples yield 0.
double mean_abs_change(std::span<const double> x);
double mean_change(std::span<const double> x);

struct Moments {
    double min, max, mean, median, std_dev, variance, kurtosis, skewness;
};

// Population (biased) moments; excess kurtosis; midpoint median for even n.
// Constant input falls back to 0 for std/variance/kurtosis/skewness.
Moments moments_and_order_stats(std::span<const double> x);

double cid_ce(std::span<const double> x);

double compute_feature(Feature f, std::span<const double> x, uint32_t max_bins);

FeatureVector extract(const WindowSample& window, const FeatureSpec& spec);

} // namespace canlift
