#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "canlift/decomposer.hpp"

namespace canlift {

// Driving personality knobs. Two canned styles are separable enough for the
// re-identification suite; the control experiments reuse one style twice.
struct DriverStyle {
    double accel_level = 0.62;  // typical pedal position while accelerating
    double accel_jitter = 0.05; // OU jitter amplitude on the pedal
    double accel_rate = 3.0;    // pedal travel rate, 1/s
    double brake_level = 0.5;   // typical braking pressure
    double brake_rate = 2.5;    // brake application rate, 1/s
    double shift_rpm = 3100.0;  // upshift threshold
    double slip_s = 0.45;       // clutch slip platform duration
    double clutch_rate = 6.0;   // clutch pedal travel rate, 1/s

    static DriverStyle smooth();
    static DriverStyle aggressive();
};

struct NoiseCensus {
    uint32_t constants = 5;
    uint32_t counters = 4;
    uint32_t multis = 4;  // switch among <= 4 values; pruned by design
    uint32_t walks = 5;   // reflected random walks; survive pruning
    uint32_t smooths = 3; // sine mixtures; survive pruning
    uint32_t bursts = 2;  // on-demand channels, mostly constant
};

struct LayoutEntry {
    std::string channel; // "velocity", "rpm", "accel", "brake", "clutch", "walk#0", ...
    uint16_t can_id = 0;
    ByteSpan span;
    double scale = 1.0;
    double offset = 0.0;
};

struct ScenarioSpec {
    double duration_s = 600.0;
    double v_peak_kmh = 120.0; // speed-limited top speed, hit once per drive
    DriverStyle style;
    NoiseCensus noise;
    uint64_t layout_seed = 1;
    uint64_t drive_seed = 1;
    double gps_noise_m = 3.0;
    double epoch = 1500000000.0;
    std::string label = "synth";
    std::vector<LayoutEntry> layout; // generated from layout_seed when empty
};

// 100 Hz physical sampling.
struct PhysicalSeries {
    double dt = 0.01;
    std::vector<double> t;
    std::vector<double> velocity_kmh;
    std::vector<double> rpm;
    std::vector<double> accel;  // [0, 1]
    std::vector<double> brake;  // [0, 1]
    std::vector<double> clutch; // [0, 1]

    size_t size() const { return t.size(); }
};

struct GroundTruth {
    std::map<std::string, SeriesId> locations; // signal name -> exact span
    std::vector<LayoutEntry> layout;
    std::map<uint16_t, uint8_t> dlc_by_id;
    PhysicalSeries physical;

    // Every candidate identity within the signal's id whose span intersects
    // the true span (sensors leak into overlapping byte cuts).
    std::set<SeriesId> truth_set(const std::string& signal, bool little_endian = false) const;
};

struct SynthDrive {
    std::string can_text;
    std::string gps_csv;
    GroundTruth truth;
};

// Longitudinal point-mass with a fixed gear map: accelerator drives,
// brake decelerates (never both), gear shifts produce the RPM dip-and-rise
// and the clutch slip platform.
PhysicalSeries simulate_drive(const ScenarioSpec& spec);

std::vector<LayoutEntry> default_layout(uint64_t layout_seed, const NoiseCensus& census,
                                        const std::set<uint16_t>& exclude_ids = {});

// Fills layout from layout_seed if the spec carries none.
ScenarioSpec resolve(ScenarioSpec spec);

// Quantizes every signal into its byte span at 10 ms cadence, interleaves
// noise channels, derives the 1 Hz GPS track from the velocity series.
SynthDrive encode_log(const PhysicalSeries& phys, const ScenarioSpec& spec);

SynthDrive generate(const ScenarioSpec& spec);

struct CarPair {
    ScenarioSpec base_spec, target_spec;
    SynthDrive base, target;
};

// Same driver-style physics, disjoint layouts (ids, spans, scales, offsets,
// noise census all differ).
CarPair make_car_pair(uint64_t seed);

// Ground-truth manifest (signal -> id:span, scale, offset) as JSON text.
std::string manifest_json(const GroundTruth& truth);

} // namespace canlift
