#include "canlift/canlog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "canlift/error.hpp"

namespace canlift {

namespace {

constexpr size_t kMaxStoredErrors = 20;

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

struct Tokenizer {
    std::string_view line;
    size_t pos = 0;

    std::string_view next() {
        while (pos < line.size() && line[pos] == ' ') ++pos;
        size_t start = pos;
        while (pos < line.size() && line[pos] != ' ') ++pos;
        return line.substr(start, pos - start);
    }
};

// Returns empty string on success, error message otherwise.
std::string parse_frame_line(std::string_view line, CanFrame& out) {
    Tokenizer tok{line};

    std::string_view ts = tok.next();
    if (ts.empty()) return "missing timestamp";
    double t = 0.0;
    auto [p, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), t);
    if (ec != std::errc() || p != ts.data() + ts.size()) return "bad timestamp";
    if (!std::isfinite(t) || t <= 0.0) return "timestamp not finite and positive";
    out.timestamp = t;

    std::string_view id = tok.next();
    if (id.empty() || id.size() > 8) return "bad can id";
    uint32_t idv = 0;
    for (char c : id) {
        int d = hex_digit(c);
        if (d < 0) return "bad can id hex";
        idv = idv * 16 + static_cast<uint32_t>(d);
    }
    if (idv > 0x7FF) return "extended 29-bit id not supported (id > 0x7ff)";
    out.can_id = static_cast<uint16_t>(idv);

    std::string_view rtr = tok.next();
    if (rtr.size() != 3) return "request field must be 3 characters";
    uint8_t bits = 0;
    for (char c : rtr) {
        if (c != '0' && c != '1') return "request field must be binary";
        bits = static_cast<uint8_t>(bits << 1 | (c == '1'));
    }
    out.rtr_bits = bits;

    std::string_view dlc = tok.next();
    if (dlc.size() != 1) return "dlc must be one hex digit";
    int d = hex_digit(dlc[0]);
    if (d < 0 || d > 8) return "dlc out of range 0..8";
    out.dlc = static_cast<uint8_t>(d);

    out.payload.fill(0);
    for (int i = 0; i < d; ++i) {
        std::string_view b = tok.next();
        if (b.size() != 2) return "payload byte count does not match dlc";
        int hi = hex_digit(b[0]);
        int lo = hex_digit(b[1]);
        if (hi < 0 || lo < 0) return "bad payload hex";
        out.payload[static_cast<size_t>(i)] = static_cast<uint8_t>(hi * 16 + lo);
    }
    if (!tok.next().empty()) return "trailing fields after payload";
    return {};
}

bool blank(std::string_view s) {
    for (char c : s)
        if (c != ' ' && c != '\t' && c != '\r') return false;
    return true;
}

} // namespace

CanLog parse_log(std::string_view text, ParseMode mode, ParseStats* stats) {
    CanLog log;
    ParseStats local;
    ParseStats& st = stats ? *stats : local;

    size_t line_no = 0;
    size_t begin = 0;
    while (begin < text.size()) {
        size_t end = text.find('\n', begin);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(begin, end - begin);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        begin = end + 1;
        if (blank(line)) continue;

        ++st.lines;
        CanFrame f;
        std::string err = parse_frame_line(line, f);
        if (err.empty()) {
            log.frames.push_back(f);
            ++st.parsed;
        } else {
            if (mode == ParseMode::Strict)
                fail("line " + std::to_string(line_no) + ": " + err);
            ++st.skipped;
            if (st.errors.size() < kMaxStoredErrors)
                st.errors.push_back("line " + std::to_string(line_no) + ": " + err);
        }
    }

    std::stable_sort(log.frames.begin(), log.frames.end(),
                     [](const CanFrame& a, const CanFrame& b) { return a.timestamp < b.timestamp; });
    for (uint32_t i = 0; i < log.frames.size(); ++i)
        log.index[log.frames[i].can_id].push_back(i);
    return log;
}

std::string serialize(const CanFrame& f) {
    char buf[96];
    int n = std::snprintf(buf, sizeof buf, "%.6f %04x %c%c%c %x", f.timestamp, f.can_id,
                          (f.rtr_bits & 4) ? '1' : '0', (f.rtr_bits & 2) ? '1' : '0',
                          (f.rtr_bits & 1) ? '1' : '0', f.dlc);
    std::string out(buf, static_cast<size_t>(n));
    for (int i = 0; i < f.dlc; ++i) {
        std::snprintf(buf, sizeof buf, " %02x", f.payload[static_cast<size_t>(i)]);
        out += buf;
    }
    return out;
}

std::string serialize(const CanLog& log) {
    std::string out;
    out.reserve(log.frames.size() * 64);
    for (const CanFrame& f : log.frames) {
        out += serialize(f);
        out += '\n';
    }
    return out;
}

std::vector<IdSummary> ids(const CanLog& log) {
    std::vector<IdSummary> out;
    out.reserve(log.index.size());
    for (const auto& [id, idxs] : log.index) {
        std::array<size_t, 9> dlc_count{};
        for (uint32_t i : idxs) ++dlc_count[log.frames[i].dlc];
        uint8_t best = 0;
        for (uint8_t d = 1; d <= 8; ++d)
            if (dlc_count[d] >= dlc_count[best]) best = d; // ties -> larger dlc
        out.push_back({id, idxs.size(), best});
    }
    return out;
}

GpsTrack parse_gps(std::string_view csv) {
    GpsTrack track;
    size_t line_no = 0;
    size_t begin = 0;
    while (begin < csv.size()) {
        size_t end = csv.find('\n', begin);
        if (end == std::string_view::npos) end = csv.size();
        std::string_view line = csv.substr(begin, end - begin);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        begin = end + 1;
        if (blank(line)) continue;

        double vals[3];
        size_t pos = 0;
        for (int i = 0; i < 3; ++i) {
            size_t comma = (i < 2) ? line.find(',', pos) : line.size();
            if (comma == std::string_view::npos)
                fail("gps line " + std::to_string(line_no) + ": expected 3 fields");
            std::string_view field = line.substr(pos, comma - pos);
            auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), vals[i]);
            if (ec != std::errc() || p != field.data() + field.size() || !std::isfinite(vals[i]))
                fail("gps line " + std::to_string(line_no) + ": non-numeric field");
            pos = comma + 1;
        }
        if (vals[1] < -90.0 || vals[1] > 90.0)
            fail("gps line " + std::to_string(line_no) + ": latitude out of range");
        if (vals[2] < -180.0 || vals[2] > 180.0)
            fail("gps line " + std::to_string(line_no) + ": longitude out of range");
        if (!track.points.empty() && vals[0] <= track.points.back().timestamp)
            fail("gps line " + std::to_string(line_no) + ": timestamps not strictly increasing");
        track.points.push_back({vals[0], vals[1], vals[2]});
    }
    return track;
}

} // namespace canlift
