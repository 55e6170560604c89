#include "canlift/tsmatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "canlift/error.hpp"
#include "canlift/parallel.hpp"

namespace canlift {

namespace {

constexpr double kEarthRadiusKm = 6371.0;

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    double p1 = lat1 * M_PI / 180.0;
    double p2 = lat2 * M_PI / 180.0;
    double dp = (lat2 - lat1) * M_PI / 180.0;
    double dl = (lon2 - lon1) * M_PI / 180.0;
    double a = std::sin(dp / 2) * std::sin(dp / 2) +
               std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

} // namespace

VelocitySeries gps_to_velocity(const GpsTrack& track) {
    if (track.points.size() < 2) fail("gps_to_velocity needs at least 2 points");
    VelocitySeries v;
    v.provenance = VelocitySeries::Provenance::GpsDerived;
    v.ts.reserve(track.points.size() - 1);
    v.kmh.reserve(track.points.size() - 1);
    for (size_t i = 0; i + 1 < track.points.size(); ++i) {
        const GpsPoint& a = track.points[i];
        const GpsPoint& b = track.points[i + 1];
        double dt = b.timestamp - a.timestamp;
        if (dt <= 0.0) fail("gps_to_velocity: duplicate or non-increasing timestamps");
        double km = haversine_km(a.lat, a.lon, b.lat, b.lon);
        v.ts.push_back(b.timestamp);
        v.kmh.push_back(km / (dt / 3600.0));
    }
    return v;
}

VelocitySeries remove_velocity_outliers(VelocitySeries v, double max_jump_kmh) {
    if (max_jump_kmh <= 0.0) fail("max_jump must be > 0");
    if (v.ts.empty()) return v;
    VelocitySeries out;
    out.provenance = v.provenance;
    out.ts.push_back(v.ts[0]);
    out.kmh.push_back(v.kmh[0]);
    for (size_t i = 1; i < v.ts.size(); ++i) {
        if (std::abs(v.kmh[i] - out.kmh.back()) > max_jump_kmh) continue;
        out.ts.push_back(v.ts[i]);
        out.kmh.push_back(v.kmh[i]);
    }
    return out;
}

DtwResult dtw(std::span<const double> a, std::span<const double> b, DtwOptions opts) {
    size_t n = a.size(), m = b.size();
    if (n == 0 || m == 0) fail("dtw: empty input series");

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // Band half-width mapped onto the longer axis; widen so a path exists.
    size_t band = opts.band;
    if (band > 0) band = std::max(band, (n > m ? n - m : m - n) + 1);

    std::vector<double> d(n * m, kInf);
    auto at = [&](size_t i, size_t j) -> double& { return d[i * m + j]; };

    for (size_t i = 0; i < n; ++i) {
        size_t jc = (n > 1) ? (i * (m - 1)) / (n - 1) : 0;
        size_t j0 = (band > 0 && jc > band) ? jc - band : 0;
        size_t j1 = (band > 0) ? std::min(m, jc + band + 1) : m;
        for (size_t j = j0; j < j1; ++j) {
            double cost = std::abs(a[i] - b[j]);
            if (i == 0 && j == 0) {
                at(i, j) = cost;
                continue;
            }
            double best = kInf;
            if (i > 0 && j > 0) best = at(i - 1, j - 1);
            if (i > 0) best = std::min(best, at(i - 1, j));
            if (j > 0) best = std::min(best, at(i, j - 1));
            at(i, j) = cost + best;
        }
    }

    DtwResult r;
    r.distance = at(n - 1, m - 1);
    if (!std::isfinite(r.distance)) fail("dtw: band leaves no admissible path");

    // Backtrack for the path length; ties prefer the diagonal, then up.
    size_t i = n - 1, j = m - 1, len = 1;
    while (i > 0 || j > 0) {
        double diag = (i > 0 && j > 0) ? at(i - 1, j - 1) : kInf;
        double up = (i > 0) ? at(i - 1, j) : kInf;
        double left = (j > 0) ? at(i, j - 1) : kInf;
        if (diag <= up && diag <= left) {
            --i;
            --j;
        } else if (up <= left) {
            --i;
        } else {
            --j;
        }
        ++len;
    }
    r.path_length = len;
    return r;
}

std::vector<double> resample_1hz_mean(const CandidateSeries& series) {
    if (series.norm.empty()) fail("resample_1hz_mean requires a normalized series");
    double t0 = series.ts.front();
    auto buckets = static_cast<size_t>(std::floor(series.ts.back() - t0)) + 1;
    std::vector<double> out;
    out.reserve(buckets);
    size_t i = 0;
    double last = series.norm.front();
    for (size_t k = 0; k < buckets; ++k) {
        double end = t0 + static_cast<double>(k + 1);
        double sum = 0.0;
        size_t cnt = 0;
        while (i < series.ts.size() && series.ts[i] < end) {
            sum += series.norm[i];
            ++cnt;
            ++i;
        }
        if (cnt > 0) last = sum / static_cast<double>(cnt);
        out.push_back(last);
    }
    return out;
}

std::vector<double> minmax_normalize(std::vector<double> x) {
    if (x.empty()) return x;
    double lo = x[0], hi = x[0];
    for (double v : x) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) {
        std::fill(x.begin(), x.end(), 0.0);
        return x;
    }
    double inv = 1.0 / (hi - lo);
    for (double& v : x) v = (v - lo) * inv;
    return x;
}

namespace {

template <class Loop>
std::vector<DtwRank> rank_impl(const VelocitySeries& reference,
                               const std::vector<CandidateSeries>& candidates, DtwOptions opts,
                               Loop&& loop) {
    std::vector<double> ref = minmax_normalize(reference.kmh);
    std::vector<DtwRank> out(candidates.size());
    loop(candidates.size(), [&](size_t i) {
        std::vector<double> cand = minmax_normalize(resample_1hz_mean(candidates[i]));
        out[i] = {candidates[i].id, dtw(ref, cand, opts).distance};
    });
    std::sort(out.begin(), out.end(), [](const DtwRank& a, const DtwRank& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.id < b.id;
    });
    return out;
}

} // namespace

std::vector<DtwRank> rank_by_dtw(const VelocitySeries& reference,
                                 const std::vector<CandidateSeries>& candidates, DtwOptions opts) {
    return rank_impl(reference, candidates, opts,
                     [](size_t n, auto&& fn) { parallel_for(n, fn); });
}

std::vector<DtwRank> rank_by_dtw_serial(const VelocitySeries& reference,
                                        const std::vector<CandidateSeries>& candidates,
                                        DtwOptions opts) {
    return rank_impl(reference, candidates, opts,
                     [](size_t n, auto&& fn) { serial_for(n, fn); });
}

} // namespace canlift
