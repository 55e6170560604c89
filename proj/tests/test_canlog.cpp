#include <doctest.h>

#include <algorithm>

#include "canlift/canlog.hpp"
#include "canlift/error.hpp"
#include "canlift/rng.hpp"

using namespace canlift;

namespace {

const char* kSampleRows =
    "1481492683.285052 0208 000 8 00 00 32 00 0e 32 fe 3c\n"
    "1497323915.123844 018e 000 8 03 03 00 00 00 00 07 3f\n"
    "1497323915.112910 00f1 000 6 28 00 00 40 00 00\n";

} // namespace

TEST_CASE("documented example rows parse to exact field values") {
    CanLog log = parse_log(kSampleRows);
    REQUIRE(log.frames.size() == 3);

    const CanFrame& f = log.frames[0];
    CHECK(f.timestamp == doctest::Approx(1481492683.285052).epsilon(1e-12));
    CHECK(f.can_id == 0x0208);
    CHECK(f.rtr() == false);
    CHECK(f.dlc == 8);
    CHECK(f.payload[0] == 0x00);
    CHECK(f.payload[2] == 0x32);
    CHECK(f.payload[4] == 0x0e);
    CHECK(f.payload[5] == 0x32);
    CHECK(f.payload[7] == 0x3c);

    // sorted by timestamp: the 00f1 row precedes the 018e row
    CHECK(log.frames[1].can_id == 0x00f1);
    CHECK(log.frames[1].dlc == 6);
    CHECK(log.frames[1].payload[0] == 0x28);
    CHECK(log.frames[1].payload[3] == 0x40);
    CHECK(log.frames[2].can_id == 0x018e);
}

TEST_CASE("empty input yields an empty log") {
    CanLog log = parse_log("");
    CHECK(log.frames.empty());
    CHECK(log.index.empty());
    CHECK(ids(log).empty());
}

TEST_CASE("dlc/payload mismatch is skipped in lenient mode and fatal in strict mode") {
    std::string bad = "100.0 0100 000 8 00 01 02 03 04 05 06\n"; // 7 bytes, dlc 8
    ParseStats stats;
    CanLog log = parse_log(bad, ParseMode::Lenient, &stats);
    CHECK(log.frames.empty());
    CHECK(stats.skipped == 1);
    CHECK_THROWS_AS(parse_log(bad, ParseMode::Strict), Error);
}

TEST_CASE("extended 29-bit ids are rejected") {
    std::string line = "100.0 1fffff00 000 1 ff\n";
    ParseStats stats;
    parse_log(line, ParseMode::Lenient, &stats);
    CHECK(stats.skipped == 1);
    CHECK_THROWS_WITH_AS(parse_log("100.0 0800 000 1 ff\n", ParseMode::Strict),
                         doctest::Contains("29-bit"), Error);
}

TEST_CASE("malformed fields are line-level errors") {
    CHECK_THROWS_AS(parse_log("abc 0100 000 0\n", ParseMode::Strict), Error);       // timestamp
    CHECK_THROWS_AS(parse_log("-5.0 0100 000 0\n", ParseMode::Strict), Error);      // non-positive
    CHECK_THROWS_AS(parse_log("1.0 01zz 000 0\n", ParseMode::Strict), Error);       // id hex
    CHECK_THROWS_AS(parse_log("1.0 0100 00 0\n", ParseMode::Strict), Error);        // rtr width
    CHECK_THROWS_AS(parse_log("1.0 0100 002 0\n", ParseMode::Strict), Error);       // rtr binary
    CHECK_THROWS_AS(parse_log("1.0 0100 000 9 00\n", ParseMode::Strict), Error);    // dlc range
    CHECK_THROWS_AS(parse_log("1.0 0100 000 1 0g\n", ParseMode::Strict), Error);    // payload hex
    CHECK_THROWS_AS(parse_log("1.0 0100 000 1 00 11\n", ParseMode::Strict), Error); // trailing
}

TEST_CASE("rtr flag: any nonzero request field sets it, field round-trips") {
    CanLog log = parse_log("1.0 0100 100 2 aa bb\n2.0 0100 000 2 aa bb\n");
    REQUIRE(log.frames.size() == 2);
    CHECK(log.frames[0].rtr());
    CHECK_FALSE(log.frames[1].rtr());
    CHECK(serialize(log.frames[0]).substr(0, 19) == "1.000000 0100 100 2");
}

TEST_CASE("round-trip: serialize(parse(x)) reproduces canonical lines") {
    CanLog log = parse_log(kSampleRows);
    std::string canon = serialize(log);
    // canonical form is time-sorted
    CHECK(canon ==
          "1481492683.285052 0208 000 8 00 00 32 00 0e 32 fe 3c\n"
          "1497323915.112910 00f1 000 6 28 00 00 40 00 00\n"
          "1497323915.123844 018e 000 8 03 03 00 00 00 00 07 3f\n");
    // and a second round trip is a fixed point
    CHECK(serialize(parse_log(canon)) == canon);
}

TEST_CASE("parse is insensitive to line order") {
    std::string shuffled =
        "1497323915.123844 018e 000 8 03 03 00 00 00 00 07 3f\n"
        "1481492683.285052 0208 000 8 00 00 32 00 0e 32 fe 3c\n"
        "1497323915.112910 00f1 000 6 28 00 00 40 00 00\n";
    CHECK(serialize(parse_log(shuffled)) == serialize(parse_log(kSampleRows)));
}

TEST_CASE("ids() counts frames per id and reports the dominant dlc") {
    std::string text;
    for (int i = 0; i < 3; ++i)
        text += std::to_string(10 + i) + ".0 0208 000 8 00 00 00 00 00 00 00 00\n";
    text += "9.0 018e 000 8 01 02 03 04 05 06 07 08\n";
    CanLog log = parse_log(text);
    auto table = ids(log);
    REQUIRE(table.size() == 2);
    CHECK(table[0].can_id == 0x18e);
    CHECK(table[0].frame_count == 1);
    CHECK(table[0].dominant_dlc == 8);
    CHECK(table[1].can_id == 0x208);
    CHECK(table[1].frame_count == 3);
    CHECK(table[1].dominant_dlc == 8);

    size_t total = 0;
    for (const auto& row : table) total += row.frame_count;
    CHECK(total == log.frames.size());
}

TEST_CASE("ids() dlc tie breaks toward the larger dlc") {
    std::string text =
        "1.0 0100 000 6 00 00 00 00 00 00\n"
        "2.0 0100 000 8 00 00 00 00 00 00 00 00\n";
    auto table = ids(parse_log(text));
    REQUIRE(table.size() == 1);
    CHECK(table[0].dominant_dlc == 8);
}

TEST_CASE("sum of ids() frame counts equals total frames on random logs") {
    Rng rng(42);
    std::string text;
    for (int i = 0; i < 500; ++i) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.6f %04x 000 2 %02x %02x\n", 1000.0 + rng.uniform() * 100,
                      static_cast<unsigned>(0x100 + rng.below(8)),
                      static_cast<unsigned>(rng.below(256)), static_cast<unsigned>(rng.below(256)));
        text += buf;
    }
    CanLog log = parse_log(text);
    size_t total = 0;
    for (const auto& row : ids(log)) total += row.frame_count;
    CHECK(total == log.frames.size());
    CHECK(std::is_sorted(log.frames.begin(), log.frames.end(),
                         [](const CanFrame& a, const CanFrame& b) {
                             return a.timestamp < b.timestamp;
                         }));
}

TEST_CASE("gps csv parses points and validates ranges") {
    GpsTrack track = parse_gps("10.0,47.5,19.05\n11.0,47.5001,19.05\n");
    REQUIRE(track.points.size() == 2);
    CHECK(track.points[1].lat == doctest::Approx(47.5001));

    CHECK(parse_gps("").points.empty());
    CHECK_THROWS_AS(parse_gps("11.0,47.5,19.05\n10.0,47.5,19.05\n"), Error); // decreasing time
    CHECK_THROWS_AS(parse_gps("1.0,95.0,19.05\n"), Error);                  // latitude range
    CHECK_THROWS_AS(parse_gps("1.0,47.5,190.5\n"), Error);                  // longitude range
    CHECK_THROWS_AS(parse_gps("1.0,47.5\n"), Error);                        // field count
    CHECK_THROWS_AS(parse_gps("1.0,aa,19.0\n"), Error);                     // numeric
}
