#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace canlift {

// One stripped CAN frame: 11-bit id, up to 8 data bytes. The 3-character
// request field from the log is kept verbatim (as 3 bits); any nonzero
// value means remote-transmission-request.
struct CanFrame {
    double timestamp = 0.0; // seconds since Unix epoch, microsecond precision
    uint16_t can_id = 0;    // 0..0x7FF
    uint8_t rtr_bits = 0;   // raw 3-bit request field
    uint8_t dlc = 0;        // 0..8
    std::array<uint8_t, 8> payload{};

    bool rtr() const { return rtr_bits != 0; }
};

struct LogMeta {
    std::string source; // car model / drive identifier
};

// Frames sorted by timestamp plus a per-id index into the frame array.
struct CanLog {
    std::vector<CanFrame> frames;
    std::map<uint16_t, std::vector<uint32_t>> index;
    LogMeta meta;
};

enum class ParseMode { Lenient, Strict };

struct ParseStats {
    size_t lines = 0;
    size_t parsed = 0;
    size_t skipped = 0;
    std::vector<std::string> errors; // first few, line-numbered
};

// Canonical log format, one frame per line:
//   <timestamp> <id-hex-4> <rtr-3bit> <dlc-hex-1> <byte-hex>*dlc
// Lenient mode skips malformed lines and counts them; strict mode throws
// on the first malformed line. Frames are sorted by timestamp after load.
CanLog parse_log(std::string_view text, ParseMode mode = ParseMode::Lenient,
                 ParseStats* stats = nullptr);

std::string serialize(const CanFrame& frame);
std::string serialize(const CanLog& log);

struct IdSummary {
    uint16_t can_id;
    size_t frame_count;
    uint8_t dominant_dlc; // most frequent dlc; ties go to the larger one
};

std::vector<IdSummary> ids(const CanLog& log);

struct GpsPoint {
    double timestamp; // seconds
    double lat;       // degrees, [-90, 90]
    double lon;       // degrees, [-180, 180]
};

struct GpsTrack {
    std::vector<GpsPoint> points;
};

// Header-less CSV "timestamp,lat,lon". Timestamps must be strictly
// increasing; any malformed or out-of-range line is an error.
GpsTrack parse_gps(std::string_view csv);

} // namespace canlift
