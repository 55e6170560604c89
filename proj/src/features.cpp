#include "canlift/features.hpp"

#include <algorithm>
#include <cmath>

#include "canlift/error.hpp"

namespace canlift {

namespace {

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

const char* kFeatureNames[] = {
    "count_above_mean",
    "count_below_mean",
    "longest_strike_above_mean",
    "longest_strike_below_mean",
    "binned_entropy",
    "mean_abs_change",
    "mean_change",
    "minimum",
    "maximum",
    "mean",
    "median",
    "std_dev",
    "variance",
    "kurtosis",
    "skewness",
    "cid_ce",
};

} // namespace

const char* feature_name(Feature f) { return kFeatureNames[static_cast<size_t>(f)]; }

Feature feature_from_name(const std::string& name) {
    for (size_t i = 0; i < std::size(kFeatureNames); ++i)
        if (name == kFeatureNames[i]) return static_cast<Feature>(i);
    fail("unknown feature '" + name + "'");
}

FeatureSpec FeatureSpec::full15(uint32_t max_bins) {
    FeatureSpec s;
    s.max_bins = max_bins;
    for (uint8_t i = 0; i <= static_cast<uint8_t>(Feature::Skewness); ++i)
        s.names.push_back(static_cast<Feature>(i));
    return s;
}

FeatureSpec FeatureSpec::reid11(uint32_t max_bins) {
    FeatureSpec s;
    s.max_bins = max_bins;
    s.names = {Feature::CountAboveMean,   Feature::CountBelowMean,
               Feature::LongestStrikeAboveMean, Feature::LongestStrikeBelowMean,
               Feature::MeanAbsChange,    Feature::Minimum,
               Feature::Maximum,          Feature::Mean,
               Feature::Median,           Feature::StdDev,
               Feature::Variance};
    return s;
}

FeatureSpec FeatureSpec::by_name(const std::string& spec_name, uint32_t max_bins) {
    if (spec_name == "full15") return full15(max_bins);
    if (spec_name == "reid11") return reid11(max_bins);
    fail("unknown feature spec '" + spec_name + "' (expected full15 or reid11)");
}

size_t count_above_mean(std::span<const double> x) {
    double m = mean_of(x);
    size_t n = 0;
    for (double v : x)
        if (v > m) ++n;
    return n;
}

size_t count_below_mean(std::span<const double> x) {
    double m = mean_of(x);
    size_t n = 0;
    for (double v : x)
        if (v < m) ++n;
    return n;
}

size_t longest_strike_above_mean(std::span<const double> x) {
    double m = mean_of(x);
    size_t best = 0, run = 0;
    for (double v : x) {
        run = (v > m) ? run + 1 : 0;
        best = std::max(best, run);
    }
    return best;
}

size_t longest_strike_below_mean(std::span<const double> x) {
    double m = mean_of(x);
    size_t best = 0, run = 0;
    for (double v : x) {
        run = (v < m) ? run + 1 : 0;
        best = std::max(best, run);
    }
    return best;
}

double binned_entropy(std::span<const double> x, uint32_t max_bins) {
    if (max_bins < 1) fail("max_bins must be >= 1");
    double lo = x[0], hi = x[0];
    for (double v : x) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) return 0.0; // single occupied bin
    std::vector<size_t> count(max_bins, 0);
    double scale = static_cast<double>(max_bins) / (hi - lo);
    for (double v : x) {
        auto k = static_cast<size_t>((v - lo) * scale);
        if (k >= max_bins) k = max_bins - 1; // max value goes to the last bin
        ++count[k];
    }
    double ent = 0.0;
    double n = static_cast<double>(x.size());
    for (size_t c : count) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / n;
        ent -= p * std::log(p);
    }
    return ent;
}

double mean_abs_change(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    double s = 0.0;
    for (size_t i = 0; i + 1 < x.size(); ++i) s += std::abs(x[i + 1] - x[i]);
    return s / static_cast<double>(x.size() - 1);
}

double mean_change(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    // telescopes to (x_n - x_1) / (n - 1)
    return (x.back() - x.front()) / static_cast<double>(x.size() - 1);
}

Moments moments_and_order_stats(std::span<const double> x) {
    Moments m{};
    size_t n = x.size();
    m.min = x[0];
    m.max = x[0];
    double sum = 0.0;
    for (double v : x) {
        m.min = std::min(m.min, v);
        m.max = std::max(m.max, v);
        sum += v;
    }
    m.mean = sum / static_cast<double>(n);

    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    m.median = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        double d = v - m.mean;
        double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    m.variance = m2;
    m.std_dev = std::sqrt(m2);
    if (m2 > 0.0) {
        m.skewness = m3 / (m2 * m.std_dev);
        m.kurtosis = m4 / (m2 * m2) - 3.0;
    } else {
        m.skewness = 0.0;
        m.kurtosis = 0.0;
    }
    return m;
}

double cid_ce(std::span<const double> x) {
    double s = 0.0;
    for (size_t i = 0; i + 1 < x.size(); ++i) {
        double d = x[i + 1] - x[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double compute_feature(Feature f, std::span<const double> x, uint32_t max_bins) {
    switch (f) {
        case Feature::CountAboveMean: return static_cast<double>(count_above_mean(x));
        case Feature::CountBelowMean: return static_cast<double>(count_below_mean(x));
        case Feature::LongestStrikeAboveMean:
            return static_cast<double>(longest_strike_above_mean(x));
        case Feature::LongestStrikeBelowMean:
            return static_cast<double>(longest_strike_below_mean(x));
        case Feature::BinnedEntropy: return binned_entropy(x, max_bins);
        case Feature::MeanAbsChange: return mean_abs_change(x);
        case Feature::MeanChange: return mean_change(x);
        case Feature::Minimum: return moments_and_order_stats(x).min;
        case Feature::Maximum: return moments_and_order_stats(x).max;
        case Feature::Mean: return moments_and_order_stats(x).mean;
        case Feature::Median: return moments_and_order_stats(x).median;
        case Feature::StdDev: return moments_and_order_stats(x).std_dev;
        case Feature::Variance: return moments_and_order_stats(x).variance;
        case Feature::Kurtosis: return moments_and_order_stats(x).kurtosis;
        case Feature::Skewness: return moments_and_order_stats(x).skewness;
        case Feature::CidCe: return cid_ce(x);
    }
    fail("unreachable feature");
}

FeatureVector extract(const WindowSample& window, const FeatureSpec& spec) {
    if (window.values.empty()) fail("cannot extract features from an empty window");
    FeatureVector out;
    out.source = window.source;
    out.t_start = window.t_start;
    out.t_end = window.t_end;
    out.values.reserve(spec.names.size());

    std::span<const double> x(window.values);
    bool need_moments = false;
    for (Feature f : spec.names)
        if (f >= Feature::Minimum && f <= Feature::Skewness) need_moments = true;
    Moments m{};
    if (need_moments) m = moments_and_order_stats(x);

    for (Feature f : spec.names) {
        switch (f) {
            case Feature::Minimum: out.values.push_back(m.min); break;
            case Feature::Maximum: out.values.push_back(m.max); break;
            case Feature::Mean: out.values.push_back(m.mean); break;
            case Feature::Median: out.values.push_back(m.median); break;
            case Feature::StdDev: out.values.push_back(m.std_dev); break;
            case Feature::Variance: out.values.push_back(m.variance); break;
            case Feature::Kurtosis: out.values.push_back(m.kurtosis); break;
            case Feature::Skewness: out.values.push_back(m.skewness); break;
            default: out.values.push_back(compute_feature(f, x, spec.max_bins));
        }
    }
    return out;
}

} // namespace canlift
