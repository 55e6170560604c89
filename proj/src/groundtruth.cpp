#include "canlift/groundtruth.hpp"

#include <algorithm>
#include <cmath>

#include "canlift/error.hpp"
#include "canlift/parallel.hpp"

namespace canlift {

namespace {

// Last-value-hold sampling of a normalized candidate onto grid points
// t0, t0+dt, ... (count points). Grid starts at or after the first sample.
std::vector<double> sample_grid(const CandidateSeries& s, double t0, double dt, size_t count) {
    std::vector<double> out(count);
    size_t i = 0;
    double last = s.norm.front();
    for (size_t k = 0; k < count; ++k) {
        double t = t0 + static_cast<double>(k) * dt;
        while (i < s.ts.size() && s.ts[i] <= t) {
            last = s.norm[i];
            ++i;
        }
        out[k] = last;
    }
    return out;
}

struct Extremum {
    size_t idx;
    bool is_max;
};

// Alternating significant extrema with hysteresis; micro-wiggles below the
// threshold are ignored.
std::vector<Extremum> zigzag(const std::vector<double>& v, double hysteresis) {
    std::vector<Extremum> out;
    if (v.size() < 2) return out;
    int dir = 0; // +1 rising toward a max, -1 falling toward a min
    size_t max_i = 0, min_i = 0;
    for (size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[max_i]) max_i = i;
        if (v[i] < v[min_i]) min_i = i;
        if (dir >= 0 && v[i] <= v[max_i] - hysteresis) {
            out.push_back({max_i, true});
            dir = -1;
            min_i = i;
        } else if (dir <= 0 && v[i] >= v[min_i] + hysteresis) {
            out.push_back({min_i, false});
            dir = 1;
            max_i = i;
        }
    }
    return out;
}

struct Interval {
    double t0, t1;
};

// Spike dips: local max followed within the window by a drop of at least
// spike_drop that stays above spike_floor_ratio * peak, then a re-rise.
// A qualifying dip must be an isolated event: candidates that oscillate
// continuously (walks, noisy counters) produce dense dips and match nothing.
std::vector<double> spike_dips(const CandidateSeries& s, const SpikePlatformConfig& cfg) {
    std::vector<Extremum> ex = zigzag(s.norm, cfg.hysteresis);
    std::vector<double> all_dips;
    std::vector<char> qualified;
    for (size_t k = 0; k + 1 < ex.size(); ++k) {
        if (!ex[k].is_max || ex[k + 1].is_max) continue;
        size_t pi = ex[k].idx, di = ex[k + 1].idx;
        all_dips.push_back(s.ts[di]);
        qualified.push_back(0);
        double peak = s.norm[pi], dip = s.norm[di];
        if (s.ts[di] - s.ts[pi] > cfg.spike_window_s) continue;
        if (peak - dip < cfg.spike_drop) continue;
        if (dip < cfg.spike_floor_ratio * peak) continue;
        bool rerise = false;
        for (size_t i = di + 1; i < s.size() && s.ts[i] - s.ts[di] <= cfg.spike_window_s; ++i) {
            if (s.norm[i] >= dip + cfg.spike_rerise) {
                rerise = true;
                break;
            }
        }
        qualified.back() = rerise;
    }
    std::vector<double> dips;
    for (size_t k = 0; k < all_dips.size(); ++k) {
        if (!qualified[k]) continue;
        bool near_prev = k > 0 && all_dips[k] - all_dips[k - 1] < cfg.spike_separation_s;
        bool near_next =
            k + 1 < all_dips.size() && all_dips[k + 1] - all_dips[k] < cfg.spike_separation_s;
        if (!near_prev && !near_next) dips.push_back(all_dips[k]);
    }
    return dips;
}

size_t count_episode_matches(const std::vector<double>& dips, const std::vector<Interval>& plats,
                             const std::vector<Episode>& episodes, double cooccur_s) {
    size_t matched = 0;
    for (const Episode& ep : episodes) {
        bool hit = false;
        for (double td : dips) {
            if (td < ep.t_start || td > ep.t_end) continue;
            for (const Interval& p : plats) {
                if (p.t1 >= td - cooccur_s && p.t0 <= td + cooccur_s) {
                    hit = true;
                    break;
                }
            }
            if (hit) break;
        }
        matched += hit;
    }
    return matched;
}

std::vector<Interval> platforms(const CandidateSeries& s, const SpikePlatformConfig& cfg) {
    std::vector<Interval> out;
    size_t n = s.size();
    size_t i = 0;
    while (i < n) {
        double level = s.norm[i];
        size_t j = i;
        while (j + 1 < n && std::abs(s.norm[j + 1] - level) <= cfg.platform_band) ++j;
        double dur = s.ts[j] - s.ts[i];
        if (dur >= cfg.platform_min_s) {
            double mean = 0.0;
            for (size_t k = i; k <= j; ++k) mean += s.norm[k];
            mean /= static_cast<double>(j - i + 1);
            bool mid = mean >= cfg.platform_level_lo && mean <= cfg.platform_level_hi;
            if (mid) {
                // must be a pause in a release: entered from above, left downward
                bool from_above = false, to_below = false;
                for (size_t k = i; k-- > 0 && s.ts[i] - s.ts[k] <= cfg.platform_edge_s;)
                    if (s.norm[k] >= level + cfg.platform_edge) {
                        from_above = true;
                        break;
                    }
                for (size_t k = j + 1; k < n && s.ts[k] - s.ts[j] <= cfg.platform_edge_s; ++k)
                    if (s.norm[k] <= level - cfg.platform_edge) {
                        to_below = true;
                        break;
                    }
                if (from_above && to_below) out.push_back({s.ts[i], s.ts[j]});
            }
            i = j + 1;
        } else {
            ++i;
        }
    }
    return out;
}

} // namespace

std::vector<ExclusivityScore> exclusivity_search(const std::vector<CandidateSeries>& candidates,
                                                 ExclusivityConfig cfg) {
    std::vector<const CandidateSeries*> cands;
    for (const CandidateSeries& c : candidates) {
        if (c.norm.empty()) fail("exclusivity_search requires normalized candidates");
        if (c.distinct >= cfg.min_distinct) cands.push_back(&c);
    }
    if (cands.size() < 2) fail("exclusivity_search needs at least 2 eligible candidates");

    double t0 = cands[0]->ts.front(), t1 = cands[0]->ts.back();
    for (const CandidateSeries* c : cands) {
        t0 = std::max(t0, c->ts.front());
        t1 = std::min(t1, c->ts.back());
    }
    if (t1 <= t0) fail("exclusivity_search: candidates do not overlap in time");
    auto grid_n = static_cast<size_t>(std::floor((t1 - t0) / cfg.grid_dt)) + 1;

    std::vector<std::vector<uint8_t>> active(cands.size());
    std::vector<double> active_frac(cands.size());
    parallel_for(cands.size(), [&](size_t i) {
        std::vector<double> g = sample_grid(*cands[i], t0, cfg.grid_dt, grid_n);
        std::vector<uint8_t> a(grid_n);
        size_t on = 0;
        for (size_t k = 0; k < grid_n; ++k) {
            a[k] = g[k] > cfg.activity_threshold;
            on += a[k];
        }
        active[i] = std::move(a);
        active_frac[i] = static_cast<double>(on) / static_cast<double>(grid_n);
    });

    std::vector<std::pair<size_t, size_t>> pairs;
    for (size_t i = 0; i < cands.size(); ++i)
        for (size_t j = i + 1; j < cands.size(); ++j)
            if (active_frac[i] >= cfg.min_active && active_frac[j] >= cfg.min_active)
                pairs.emplace_back(i, j);

    std::vector<ExclusivityScore> out(pairs.size());
    parallel_for(pairs.size(), [&](size_t p) {
        auto [i, j] = pairs[p];
        size_t both = 0;
        for (size_t k = 0; k < grid_n; ++k) both += active[i][k] & active[j][k];
        ExclusivityScore s;
        s.a = std::min(cands[i]->id, cands[j]->id);
        s.b = std::max(cands[i]->id, cands[j]->id);
        s.co_active_fraction = static_cast<double>(both) / static_cast<double>(grid_n);
        s.active_fraction_a = cands[i]->id == s.a ? active_frac[i] : active_frac[j];
        s.active_fraction_b = cands[i]->id == s.a ? active_frac[j] : active_frac[i];
        out[p] = s;
    });

    std::sort(out.begin(), out.end(), [](const ExclusivityScore& x, const ExclusivityScore& y) {
        if (x.co_active_fraction != y.co_active_fraction)
            return x.co_active_fraction < y.co_active_fraction;
        double mx = std::min(x.active_fraction_a, x.active_fraction_b);
        double my = std::min(y.active_fraction_a, y.active_fraction_b);
        if (mx != my) return mx > my;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    return out;
}

std::vector<Episode> find_accel_episodes(const CandidateSeries& velocity, EpisodeConfig cfg) {
    if (velocity.norm.empty()) fail("find_accel_episodes requires a normalized candidate");
    std::vector<Episode> out;
    const std::vector<double>& v = velocity.norm;
    size_t n = v.size();
    size_t i = 0;
    while (i + 1 < n) {
        // maximal run that never dips more than eps below its running max
        size_t peak = i;
        double vmax = v[i];
        size_t j = i + 1;
        while (j < n && v[j] >= vmax - cfg.eps) {
            if (v[j] >= vmax) {
                vmax = v[j];
                peak = j;
            }
            ++j;
        }
        if (v[i] <= cfg.v_low && vmax >= cfg.v_high)
            out.push_back({velocity.ts[i], velocity.ts[peak]});
        i = std::max(j, i + 1);
    }
    return out;
}

size_t matched_episodes(const CandidateSeries& spike_cand, const CandidateSeries& platform_cand,
                        const std::vector<Episode>& episodes, SpikePlatformConfig cfg) {
    return count_episode_matches(spike_dips(spike_cand, cfg), platforms(platform_cand, cfg),
                                 episodes, cfg.cooccur_s);
}

std::vector<SpikePlatformScore> spike_platform_search(const std::vector<CandidateSeries>& candidates,
                                                      const std::vector<Episode>& episodes,
                                                      SpikePlatformConfig cfg) {
    if (episodes.empty()) return {};
    for (const CandidateSeries& c : candidates)
        if (c.norm.empty()) fail("spike_platform_search requires normalized candidates");

    // Precompute per-candidate dips and platforms once, then score episode
    // co-occurrence across all ordered pairs.
    size_t n = candidates.size();
    std::vector<std::vector<double>> dips(n);
    std::vector<std::vector<Interval>> plats(n);
    parallel_for(n, [&](size_t i) {
        dips[i] = spike_dips(candidates[i], cfg);
        plats[i] = platforms(candidates[i], cfg);
    });

    std::vector<SpikePlatformScore> out;
    for (size_t a = 0; a < n; ++a) {
        if (dips[a].empty()) continue;
        for (size_t b = 0; b < n; ++b) {
            if (a == b || plats[b].empty()) continue;
            size_t matched = count_episode_matches(dips[a], plats[b], episodes, cfg.cooccur_s);
            if (matched > 0)
                out.push_back({candidates[a].id, candidates[b].id, episodes.size(), matched});
        }
    }
    std::sort(out.begin(), out.end(), [](const SpikePlatformScore& x, const SpikePlatformScore& y) {
        if (x.matched_episodes != y.matched_episodes) return x.matched_episodes > y.matched_episodes;
        if (x.spike_candidate != y.spike_candidate) return x.spike_candidate < y.spike_candidate;
        return x.platform_candidate < y.platform_candidate;
    });
    return out;
}

} // namespace canlift
