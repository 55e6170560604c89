#include "canlift/decomposer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "canlift/error.hpp"

namespace canlift {

namespace {

uint8_t dominant_dlc_of(const CanLog& log, const std::vector<uint32_t>& idxs) {
    std::array<size_t, 9> count{};
    for (uint32_t i : idxs)
        if (!log.frames[i].rtr()) ++count[log.frames[i].dlc];
    uint8_t best = 0;
    for (uint8_t d = 1; d <= 8; ++d)
        if (count[d] >= count[best]) best = d;
    return best;
}

size_t count_distinct(std::vector<uint32_t> values) {
    std::sort(values.begin(), values.end());
    return static_cast<size_t>(std::unique(values.begin(), values.end()) - values.begin());
}

CandidateSeries cut_series(const CanLog& log, const std::vector<uint32_t>& idxs, uint8_t dlc,
                           SeriesId sid) {
    CandidateSeries s;
    s.id = sid;
    s.ts.reserve(idxs.size());
    s.raw.reserve(idxs.size());
    double last_ts = -1.0;
    for (uint32_t i : idxs) {
        const CanFrame& f = log.frames[i];
        if (f.rtr() || f.dlc != dlc) continue;
        if (!s.ts.empty() && f.timestamp <= last_ts) continue; // keep first of duplicate stamps
        uint32_t v;
        if (sid.span.width == 1) {
            v = f.payload[sid.span.start];
        } else if (sid.span.endian == Endian::Big) {
            v = static_cast<uint32_t>(f.payload[sid.span.start]) << 8 |
                f.payload[sid.span.start + 1];
        } else {
            v = static_cast<uint32_t>(f.payload[sid.span.start + 1]) << 8 |
                f.payload[sid.span.start];
        }
        s.ts.push_back(f.timestamp);
        s.raw.push_back(v);
        last_ts = f.timestamp;
    }
    s.distinct = count_distinct(s.raw);
    return s;
}

std::vector<SeriesId> spans_for(uint16_t can_id, uint8_t dlc, const DecomposeOptions& opts) {
    std::vector<SeriesId> out;
    for (uint8_t b = 0; b < dlc; ++b) out.push_back({can_id, {b, 1, Endian::Big}});
    for (uint8_t b = 0; b + 1 < dlc; ++b) out.push_back({can_id, {b, 2, Endian::Big}});
    if (opts.little_endian_pairs)
        for (uint8_t b = 0; b + 1 < dlc; ++b) out.push_back({can_id, {b, 2, Endian::Little}});
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

std::string SeriesId::str() const {
    char buf[32];
    if (span.width == 1) {
        std::snprintf(buf, sizeof buf, "%04x:%u", can_id, span.start);
    } else {
        std::snprintf(buf, sizeof buf, "%04x:%u-%u%s", can_id, span.start, span.start + 1,
                      span.endian == Endian::Little ? ":le" : "");
    }
    return buf;
}

SeriesId SeriesId::parse(const std::string& text) {
    SeriesId sid;
    unsigned id = 0, start = 0, end = 0;
    char suffix[8] = {0};
    if (std::sscanf(text.c_str(), "%x:%u-%u:%2s", &id, &start, &end, suffix) >= 3) {
        if (end != start + 1) fail("bad span in '" + text + "': pairs must be adjacent bytes");
        sid.span.width = 2;
        sid.span.endian = (suffix[0] == 'l') ? Endian::Little : Endian::Big;
    } else if (std::sscanf(text.c_str(), "%x:%u", &id, &start) == 2) {
        sid.span.width = 1;
    } else {
        fail("bad candidate identity '" + text + "' (expected id:byte or id:byte-byte)");
    }
    if (id > 0x7FF) fail("bad candidate identity '" + text + "': id > 0x7ff");
    if (start + sid.span.width > 8) fail("bad candidate identity '" + text + "': span exceeds 8 bytes");
    sid.can_id = static_cast<uint16_t>(id);
    sid.span.start = static_cast<uint8_t>(start);
    return sid;
}

BitDistribution bit_distribution(const CanLog& log, uint16_t can_id) {
    auto it = log.index.find(can_id);
    if (it == log.index.end() || it->second.empty()) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04x", can_id);
        fail(std::string("unknown can id ") + buf);
    }

    BitDistribution bd;
    bd.can_id = can_id;
    bd.dlc = dominant_dlc_of(log, it->second);
    std::vector<size_t> ones(static_cast<size_t>(bd.dlc) * 8, 0);
    for (uint32_t i : it->second) {
        const CanFrame& f = log.frames[i];
        if (f.rtr() || f.dlc != bd.dlc) {
            ++bd.dropped;
            continue;
        }
        ++bd.frame_count;
        for (size_t bit = 0; bit < ones.size(); ++bit)
            if (f.payload[bit / 8] & (0x80u >> (bit % 8))) ++ones[bit];
    }
    if (bd.frame_count == 0) fail("can id has no data frames");
    bd.probs.resize(ones.size());
    for (size_t bit = 0; bit < ones.size(); ++bit)
        bd.probs[bit] = static_cast<double>(ones[bit]) / static_cast<double>(bd.frame_count);
    return bd;
}

std::vector<CandidateSeries> candidate_series(const CanLog& log, DecomposeOptions opts) {
    std::vector<CandidateSeries> out;
    for (const auto& [id, idxs] : log.index) {
        uint8_t dlc = dominant_dlc_of(log, idxs);
        if (dlc == 0) continue; // RTR-only or zero-length payloads
        for (const SeriesId& sid : spans_for(id, dlc, opts)) {
            CandidateSeries s = cut_series(log, idxs, dlc, sid);
            if (!s.ts.empty()) out.push_back(std::move(s));
        }
    }
    return out;
}

std::vector<CandidateSeries> prune(std::vector<CandidateSeries> series, uint32_t min_variation) {
    if (min_variation < 1) fail("min_variation must be >= 1");
    std::vector<CandidateSeries> out;
    out.reserve(series.size());
    for (CandidateSeries& s : series)
        if (s.distinct > 1 && s.distinct >= min_variation) out.push_back(std::move(s));
    return out;
}

CandidateSeries normalize(CandidateSeries s) {
    uint32_t mx = 0;
    for (uint32_t v : s.raw) mx = std::max(mx, v);
    if (mx == 0) fail("cannot normalize all-zero series " + s.id.str());
    s.norm_max = mx;
    s.norm.resize(s.raw.size());
    // direct division: the maximum maps to exactly 1.0
    for (size_t i = 0; i < s.raw.size(); ++i)
        s.norm[i] = static_cast<double>(s.raw[i]) / static_cast<double>(mx);
    return s;
}

std::vector<WindowSample> windows_from(const CandidateSeries& series, double t0, double t_last,
                                       double length_s, double overlap, uint32_t min_variation) {
    if (length_s <= 0.0) fail("window length must be > 0");
    if (overlap < 0.0 || overlap >= 1.0) fail("overlap must be in [0, 1)");
    if (series.norm.size() != series.raw.size()) fail("windows() requires a normalized series");

    std::vector<WindowSample> out;
    double span = t_last - t0;
    if (span < length_s) return out;
    double stride = length_s * (1.0 - overlap);
    auto k_max = static_cast<size_t>(std::floor((span - length_s) / stride + 1e-9));

    size_t lo = 0;
    std::vector<uint32_t> scratch;
    for (size_t k = 0; k <= k_max; ++k) {
        double ws = t0 + static_cast<double>(k) * stride;
        double we = ws + length_s;
        while (lo < series.ts.size() && series.ts[lo] < ws) ++lo;
        size_t hi = lo;
        while (hi < series.ts.size() && series.ts[hi] < we) ++hi;
        if (hi - lo < 2) continue;

        scratch.assign(series.raw.begin() + static_cast<long>(lo),
                       series.raw.begin() + static_cast<long>(hi));
        size_t distinct = count_distinct(std::move(scratch));
        if (distinct < min_variation) continue;

        WindowSample w;
        w.source = series.id;
        w.t_start = ws;
        w.t_end = we;
        w.values.assign(series.norm.begin() + static_cast<long>(lo),
                        series.norm.begin() + static_cast<long>(hi));
        w.distinct_count = distinct;
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<WindowSample> windows(const CandidateSeries& series, double length_s, double overlap,
                                  uint32_t min_variation) {
    if (series.ts.empty()) return {};
    return windows_from(series, series.ts.front(), series.ts.back(), length_s, overlap,
                        min_variation);
}

CandidateSeries extract_candidate(const CanLog& log, const SeriesId& id) {
    auto it = log.index.find(id.can_id);
    if (it == log.index.end() || it->second.empty())
        fail("extract_candidate: id of " + id.str() + " not present in log");
    uint8_t dlc = dominant_dlc_of(log, it->second);
    if (id.span.start + id.span.width > dlc)
        fail("extract_candidate: span " + id.str() + " exceeds dlc " + std::to_string(dlc));
    CandidateSeries s = cut_series(log, it->second, dlc, id);
    if (s.ts.empty()) fail("extract_candidate: no data frames for " + id.str());
    return s;
}

std::vector<CandidateSeries> decompose(const CanLog& log, const PipelineConfig& cfg) {
    DecomposeOptions opts;
    opts.little_endian_pairs = cfg.endianness == EndianPolicy::BigAndLittle;
    std::vector<CandidateSeries> out;
    for (const auto& [id, idxs] : log.index) {
        uint8_t dlc = dominant_dlc_of(log, idxs);
        if (dlc == 0) continue;
        for (const SeriesId& sid : spans_for(id, dlc, opts)) {
            CandidateSeries s = cut_series(log, idxs, dlc, sid);
            if (s.ts.empty()) continue;
            if (s.distinct <= 1 || s.distinct < cfg.min_variation) continue;
            out.push_back(normalize(std::move(s)));
        }
    }
    return out;
}

} // namespace canlift
