#include <doctest.h>

#include <algorithm>

#include "canlift/canlog.hpp"
#include "canlift/decomposer.hpp"
#include "canlift/error.hpp"
#include "canlift/rng.hpp"

#include "helpers.hpp"

using namespace canlift;
using testutil::make_normalized;
using testutil::make_series;

namespace {

std::string one_byte_log(const std::vector<uint8_t>& payloads) {
    std::string text;
    char buf[64];
    for (size_t i = 0; i < payloads.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6f 0123 000 1 %02x\n", 1.0 + 0.01 * (double)i,
                      payloads[i]);
        text += buf;
    }
    return text;
}

} // namespace

TEST_CASE("bit probabilities count set bits msb-first") {
    CanLog log = parse_log(one_byte_log({0xA0, 0x80})); // 0b10100000, 0b10000000
    BitDistribution bd = bit_distribution(log, 0x123);
    REQUIRE(bd.probs.size() == 8);
    CHECK(bd.probs[0] == 1.0);
    CHECK(bd.probs[1] == 0.0);
    CHECK(bd.probs[2] == 0.5);
    for (size_t i = 3; i < 8; ++i) CHECK(bd.probs[i] == 0.0);
}

TEST_CASE("bit probabilities: all-zero payloads and alternating ff/00") {
    CanLog zeros = parse_log(one_byte_log(std::vector<uint8_t>(16, 0x00)));
    for (double p : bit_distribution(zeros, 0x123).probs) CHECK(p == 0.0);

    std::vector<uint8_t> alt(1000);
    for (size_t i = 0; i < alt.size(); ++i) alt[i] = (i % 2) ? 0xFF : 0x00;
    for (double p : bit_distribution(parse_log(one_byte_log(alt)), 0x123).probs) CHECK(p == 0.5);

    CHECK_THROWS_AS(bit_distribution(zeros, 0x777), Error);
}

TEST_CASE("bit distribution is invariant under frame reordering") {
    Rng rng(9);
    std::vector<uint8_t> payloads(200);
    for (auto& p : payloads) p = static_cast<uint8_t>(rng.below(256));
    std::string fwd = one_byte_log(payloads);

    std::vector<std::string> lines;
    size_t pos = 0;
    while (pos < fwd.size()) {
        size_t nl = fwd.find('\n', pos);
        lines.push_back(fwd.substr(pos, nl - pos + 1));
        pos = nl + 1;
    }
    rng.shuffle(lines);
    std::string shuffled;
    for (const auto& l : lines) shuffled += l;

    CHECK(bit_distribution(parse_log(fwd), 0x123).probs ==
          bit_distribution(parse_log(shuffled), 0x123).probs);
}

TEST_CASE("byte and pair split yields d + (d-1) candidates") {
    // dlc 8 -> 8 singles + 7 pairs
    std::string text =
        "1.0 0410 000 8 00 0e 32 00 00 00 00 00\n"
        "1.01 0410 000 8 00 0e 33 00 00 00 00 00\n";
    auto cands = candidate_series(parse_log(text));
    CHECK(cands.size() == 15);

    // dlc 1 -> exactly 1
    CHECK(candidate_series(parse_log(one_byte_log({0x01, 0x02}))).size() == 1);

    // little-endian pairs double the pair pool
    DecomposeOptions le;
    le.little_endian_pairs = true;
    CHECK(candidate_series(parse_log(text), le).size() == 22);
}

TEST_CASE("pair candidates decode big-endian: payload [0e 32] -> 3634") {
    std::string text =
        "1.0 0208 000 8 00 00 32 00 0e 32 fe 3c\n"
        "1.01 0208 000 8 00 00 32 00 0e 33 fe 3c\n";
    auto cands = candidate_series(parse_log(text));
    const CandidateSeries* pair45 = nullptr;
    for (const auto& c : cands)
        if (c.id.span.start == 4 && c.id.span.width == 2) pair45 = &c;
    REQUIRE(pair45);
    CHECK(pair45->raw[0] == 3634);
    CHECK(pair45->id.str() == "0208:4-5");
}

TEST_CASE("endianness identity: big-endian pair equals 256*high + low sample-wise") {
    Rng rng(5);
    std::string text;
    char buf[96];
    for (int i = 0; i < 300; ++i) {
        std::snprintf(buf, sizeof buf, "%.6f 0300 000 2 %02x %02x\n", 1.0 + 0.01 * i,
                      static_cast<unsigned>(rng.below(256)), static_cast<unsigned>(rng.below(256)));
        text += buf;
    }
    auto cands = candidate_series(parse_log(text));
    REQUIRE(cands.size() == 3);
    const CandidateSeries *hi = nullptr, *lo = nullptr, *pair = nullptr;
    for (const auto& c : cands) {
        if (c.id.span.width == 2) pair = &c;
        else if (c.id.span.start == 0) hi = &c;
        else lo = &c;
    }
    REQUIRE((hi && lo && pair));
    for (size_t i = 0; i < pair->raw.size(); ++i)
        CHECK(pair->raw[i] == 256u * hi->raw[i] + lo->raw[i]);
}

TEST_CASE("rtr frames carry no data and are excluded from candidates") {
    std::string text =
        "1.0 0100 000 1 10\n"
        "1.5 0100 100 1 ff\n"
        "2.0 0100 000 1 20\n";
    auto cands = candidate_series(parse_log(text));
    REQUIRE(cands.size() == 1);
    CHECK(cands[0].raw == std::vector<uint32_t>{0x10, 0x20});
}

TEST_CASE("prune drops constants and low-variation series") {
    std::vector<CandidateSeries> series;
    series.push_back(make_series(std::vector<uint32_t>(100, 7)));         // constant
    series.push_back(make_series({0, 1, 0, 1, 0, 1, 0, 1}));             // 2 distinct
    std::vector<uint32_t> rich;
    for (uint32_t i = 0; i < 300; ++i) rich.push_back(i % 101);
    series.push_back(make_series(rich)); // 101 distinct

    auto kept = prune(std::move(series), 7);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].distinct == 101);
}

TEST_CASE("prune is monotone in the threshold") {
    Rng rng(11);
    std::vector<CandidateSeries> pool;
    for (int s = 0; s < 40; ++s) {
        std::vector<uint32_t> raw;
        auto levels = 1 + rng.below(40);
        for (int i = 0; i < 200; ++i) raw.push_back(static_cast<uint32_t>(rng.below(levels)));
        pool.push_back(make_series(std::move(raw)));
    }
    size_t prev = prune(pool, 1).size();
    for (uint32_t mv : {2u, 4u, 7u, 12u, 20u, 40u}) {
        size_t now = prune(pool, mv).size();
        CHECK(now <= prev);
        prev = now;
    }
}

TEST_CASE("normalize scales by the series maximum") {
    CandidateSeries s = make_normalized({0, 50, 100});
    CHECK(s.norm == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(s.norm_max == 100);

    CandidateSeries single = make_normalized({3634});
    CHECK(single.norm == std::vector<double>{1.0});

    CHECK_THROWS_AS(normalize(make_series({0, 0, 0})), Error);
}

TEST_CASE("normalization maps each drive's own maximum to 1") {
    // same signal, different drive scaling
    std::vector<uint32_t> a, b;
    for (uint32_t i = 0; i <= 50; ++i) a.push_back(i);
    for (uint32_t i = 0; i <= 200; ++i) b.push_back(i);
    CandidateSeries na = make_normalized(std::move(a));
    CandidateSeries nb = make_normalized(std::move(b));
    CHECK(*std::max_element(na.norm.begin(), na.norm.end()) == 1.0);
    CHECK(*std::max_element(nb.norm.begin(), nb.norm.end()) == 1.0);
}

TEST_CASE("normalized series stay in [0,1] with max exactly 1 (random)") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<uint32_t> raw;
        auto n = 2 + rng.below(300);
        for (size_t i = 0; i < n; ++i) raw.push_back(static_cast<uint32_t>(rng.below(5000)));
        raw[rng.below(n)] = 1 + static_cast<uint32_t>(rng.below(5000)); // ensure nonzero
        CandidateSeries s = make_normalized(std::move(raw));
        double mx = 0.0;
        for (double v : s.norm) {
            CHECK(v >= 0.0);
            mx = std::max(mx, v);
        }
        CHECK(mx == 1.0);
    }
}

TEST_CASE("window grid: 10 s series, 2.5 s windows, 25% overlap") {
    std::vector<uint32_t> raw;
    for (int i = 0; i <= 1000; ++i) raw.push_back(static_cast<uint32_t>(i));
    CandidateSeries s = make_normalized(std::move(raw)); // 10 s at 100 Hz
    auto ws = windows(s, 2.5, 0.25, 1);
    REQUIRE(ws.size() == 5);
    double starts[5] = {0.0, 1.875, 3.75, 5.625, 7.5};
    for (size_t i = 0; i < 5; ++i) {
        CHECK(ws[i].t_start == doctest::Approx(starts[i]).epsilon(1e-12));
        CHECK(ws[i].t_end - ws[i].t_start == doctest::Approx(2.5));
    }
}

TEST_CASE("zero overlap tiles disjoint windows") {
    std::vector<uint32_t> raw(1001);
    for (size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<uint32_t>(i);
    CandidateSeries s = make_normalized(std::move(raw));
    auto ws = windows(s, 2.5, 0.0, 1);
    REQUIRE(ws.size() == 4);
    for (size_t i = 1; i < ws.size(); ++i) CHECK(ws[i].t_start == ws[i - 1].t_end);
}

TEST_CASE("windows with fewer than 2 samples or low variation are not emitted") {
    // 10 s span with a 4 s data gap in the middle
    CandidateSeries s;
    s.id = {0x100, {0, 1}};
    for (int i = 0; i <= 300; ++i) {
        double t = 0.01 * i;
        if (t > 3.0 && t < 7.0) continue;
        s.ts.push_back(t);
        s.raw.push_back(static_cast<uint32_t>(i));
    }
    for (int i = 701; i <= 1000; ++i) {
        s.ts.push_back(0.01 * i);
        s.raw.push_back(static_cast<uint32_t>(i));
    }
    std::vector<uint32_t> d = s.raw;
    std::sort(d.begin(), d.end());
    s.distinct = static_cast<size_t>(std::unique(d.begin(), d.end()) - d.begin());
    s = normalize(std::move(s));

    auto ws = windows(s, 2.5, 0.25, 1);
    for (const auto& w : ws) CHECK(w.values.size() >= 2);
    // the window starting at 3.75 lies wholly inside the gap
    for (const auto& w : ws) CHECK(w.t_start != doctest::Approx(3.75));

    // per-window variation threshold
    CandidateSeries flat = make_normalized(std::vector<uint32_t>{1, 1, 1, 1, 2, 1, 1, 1}, 0.5);
    CHECK(windows(flat, 2.5, 0.25, 7).empty());
}

TEST_CASE("window count matches the stride formula") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        auto n = static_cast<size_t>(300 + rng.below(2000));
        std::vector<uint32_t> raw;
        for (size_t i = 0; i < n; ++i) raw.push_back(static_cast<uint32_t>(rng.below(1000)));
        CandidateSeries s = make_normalized(std::move(raw));
        double length = 2.5, overlap = 0.25;
        double span = s.ts.back() - s.ts.front();
        double stride = length * (1.0 - overlap);
        auto expect = static_cast<size_t>(std::floor((span - length) / stride + 1e-9)) + 1;
        // min_variation 1 and dense uniform sampling: no window fails emission
        CHECK(windows(s, length, overlap, 1).size() == expect);
    }
}

TEST_CASE("overlap >= 1 is rejected") {
    CandidateSeries s = make_normalized({1, 2, 3, 4});
    CHECK_THROWS_AS(windows(s, 2.5, 1.0, 1), Error);
    CHECK_THROWS_AS(windows(s, 0.0, 0.25, 1), Error);
}

TEST_CASE("series id parse/str round trip") {
    for (const char* txt : {"0410:1-2", "0510:2", "0208:4-5", "07ff:0", "0410:1-2:le"}) {
        SeriesId sid = SeriesId::parse(txt);
        CHECK(sid.str() == txt);
    }
    CHECK_THROWS_AS(SeriesId::parse("0410:1-3"), Error); // non-adjacent pair
    CHECK_THROWS_AS(SeriesId::parse("0410:9"), Error);
    CHECK_THROWS_AS(SeriesId::parse("fff0:1"), Error);
    CHECK_THROWS_AS(SeriesId::parse("garbage"), Error);
}
