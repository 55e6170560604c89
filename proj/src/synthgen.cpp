#include "canlift/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "canlift/error.hpp"
#include "canlift/rng.hpp"

namespace canlift {

namespace {

constexpr double kDt = 0.01;
constexpr double kIdleRpm = 800.0;
constexpr double kRevLimit = 3725.0;
constexpr double kGearRpmPerKmh[6] = {0.0, 125.0, 72.0, 50.0, 38.0, 31.0};
constexpr double kDriveAccel = 2.9; // m/s^2 at full pedal
constexpr double kBrakeAccel = 6.5;
constexpr double kDragCoef = 0.00042;
constexpr double kRollResist = 0.06;
constexpr double kFreeRevGain = 2200.0; // rpm per unit pedal, disengaged

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

double clampd(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

double move_toward(double x, double target, double step) {
    if (x < target) return std::min(target, x + step);
    return std::max(target, x - step);
}

// Ornstein-Uhlenbeck wiggle for pedal micro-adjustments.
struct Ou {
    double tau;
    double sd;
    double value = 0.0;

    void step(double dt, Rng& rng) {
        value += -value * dt / tau + sd * std::sqrt(2.0 * dt / tau) * rng.normal();
    }
};

// Clutch release: fast drop to the slip level, a short platform while the
// shafts connect, then a fast drop to zero.
struct ClutchRelease {
    enum class Phase { None, Fast1, Slip, Fast2 };
    Phase phase = Phase::None;
    double slip_level = 0.5;
    double slip_left = 0.0;

    void start(double slip_s, Rng& rng) {
        phase = Phase::Fast1;
        slip_level = clampd(0.5 + 0.02 * rng.normal(), 0.42, 0.58);
        slip_left = slip_s * (0.85 + 0.3 * rng.uniform());
    }

    bool active() const { return phase != Phase::None; }

    double step(double clutch, double rate, double dt, Rng& rng) {
        switch (phase) {
            case Phase::None: return clutch;
            case Phase::Fast1:
                clutch = move_toward(clutch, slip_level, 2.0 * rate * dt);
                if (clutch <= slip_level + 1e-9) phase = Phase::Slip;
                return clutch;
            case Phase::Slip:
                slip_left -= dt;
                if (slip_left <= 0.0) phase = Phase::Fast2;
                return clampd(slip_level + 0.008 * rng.normal(), 0.0, 1.0);
            case Phase::Fast2:
                clutch = move_toward(clutch, 0.0, 0.8 * rate * dt);
                if (clutch <= 1e-9) phase = Phase::None;
                return clutch;
        }
        return clutch;
    }
};

struct CyclePlan {
    double idle_s = 3.0;
    double target1 = 60.0; // km/h
    double cruise1_s = 8.0;
    bool mid_slow = false;
    double mid_target = 30.0;
    double target2 = 70.0;
    double cruise2_s = 6.0;
    bool highway = false;
    bool hard_stop = false;
};

CyclePlan make_plan(size_t cycle, const ScenarioSpec& spec, Rng& planner) {
    CyclePlan p;
    p.idle_s = planner.uniform(2.0, 5.0);
    bool want_highway = spec.duration_s >= 240.0 && cycle == 1;
    if (want_highway) {
        p.highway = true;
        p.target1 = spec.v_peak_kmh;
        p.cruise1_s = planner.uniform(16.0, 24.0);
        p.hard_stop = true; // hard stop after the fast stretch pins the brake max
        return p;
    }
    // early cycles always reach episode speeds; later ones roam wider
    p.target1 = (cycle <= 4) ? planner.uniform(52.0, 88.0) : planner.uniform(38.0, 88.0);
    p.cruise1_s = planner.uniform(4.0, 14.0);
    p.mid_slow = cycle > 4 && planner.uniform() < 0.45;
    if (p.mid_slow) {
        p.mid_target = planner.uniform(15.0, p.target1 - 12.0);
        p.target2 = planner.uniform(p.mid_target + 12.0, 90.0);
        p.cruise2_s = planner.uniform(4.0, 10.0);
    }
    return p;
}

enum class Mode {
    Idle,
    LaunchPress,
    LaunchRelease,
    Accel,
    ShiftPress,
    ShiftHold,
    ShiftRelease,
    Cruise,
    Coast,
    Brake,
    BrakeRelease,
    Stopping,
    StopSettle,
};

} // namespace

DriverStyle DriverStyle::smooth() {
    DriverStyle s;
    s.accel_level = 0.55;
    s.accel_jitter = 0.03;
    s.accel_rate = 2.2;
    s.brake_level = 0.42;
    s.brake_rate = 1.8;
    s.shift_rpm = 2800.0;
    s.slip_s = 0.58;
    s.clutch_rate = 4.5;
    return s;
}

DriverStyle DriverStyle::aggressive() {
    DriverStyle s;
    s.accel_level = 0.85;
    s.accel_jitter = 0.10;
    s.accel_rate = 5.0;
    s.brake_level = 0.72;
    s.brake_rate = 4.2;
    s.shift_rpm = 3550.0;
    s.slip_s = 0.34;
    s.clutch_rate = 7.5;
    return s;
}

PhysicalSeries simulate_drive(const ScenarioSpec& spec) {
    const DriverStyle& st = spec.style;
    Rng root(spec.drive_seed ? spec.drive_seed : 1);
    Rng planner = root.split(1);
    Rng jitter_rng = root.split(2);
    Rng clutch_rng = root.split(3);

    auto n = static_cast<size_t>(std::llround(spec.duration_s / kDt));
    PhysicalSeries out;
    out.dt = kDt;
    out.t.reserve(n);
    out.velocity_kmh.reserve(n);
    out.rpm.reserve(n);
    out.accel.reserve(n);
    out.brake.reserve(n);
    out.clutch.reserve(n);

    double v = 0.0; // m/s
    double rpm = kIdleRpm;
    double acc = 0.0, brake = 0.0, clutch = 0.0;
    int gear = 0;

    Mode mode = Mode::Idle;
    size_t cycle = 0;
    CyclePlan plan = make_plan(cycle, spec, planner);
    double timer = plan.idle_s;
    int leg = 0; // 0 = toward target1, 1 = toward target2 after a mid slowdown
    double brake_target_kmh = 0.0;
    double brake_strength = st.brake_level;
    double coast_wait = 0.0;
    double kick_left = 0.0;
    bool kicked = false;
    ClutchRelease release;
    Ou jitter{0.7, st.accel_jitter};

    const double v_peak_mps = spec.v_peak_kmh / 3.6;

    for (size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i) * kDt;
        double v_kmh = v * 3.6;
        jitter.step(kDt, jitter_rng);

        double acc_t = 0.0, brake_t = 0.0;
        bool clutch_press = false; // pull toward 1 at clutch_rate
        double cur_target = (leg == 0) ? plan.target1 : plan.target2;

        switch (mode) {
            case Mode::Idle:
                brake_t = 0.25;
                timer -= kDt;
                if (timer <= 0.0) {
                    gear = 1;
                    leg = 0;
                    kicked = false;
                    mode = Mode::LaunchPress;
                }
                break;
            case Mode::LaunchPress:
                clutch_press = true;
                if (clutch >= 0.97) {
                    release.start(st.slip_s, clutch_rng);
                    mode = Mode::LaunchRelease;
                }
                break;
            case Mode::LaunchRelease:
                acc_t = st.accel_level * (0.35 + 0.65 * (1.0 - clutch));
                if (!release.active()) mode = Mode::Accel;
                break;
            case Mode::Accel:
                acc_t = clamp01(st.accel_level + jitter.value);
                if (plan.highway && !kicked && gear >= 3) {
                    kicked = true;
                    kick_left = 1.5;
                }
                if (kick_left > 0.0) {
                    kick_left -= kDt;
                    acc_t = 1.0; // pinned kickdown, hits full scale every drive
                }
                if (rpm >= st.shift_rpm && gear < 5) {
                    mode = Mode::ShiftPress;
                } else if (v_kmh >= cur_target - 1.0) {
                    timer = (leg == 0) ? plan.cruise1_s : plan.cruise2_s;
                    mode = Mode::Cruise;
                }
                break;
            case Mode::ShiftPress:
                acc_t = 0.03;
                clutch_press = true;
                if (clutch >= 0.97) {
                    ++gear;
                    timer = 0.08;
                    mode = Mode::ShiftHold;
                }
                break;
            case Mode::ShiftHold:
                acc_t = 0.03;
                clutch_press = true;
                timer -= kDt;
                if (timer <= 0.0) {
                    release.start(st.slip_s, clutch_rng);
                    mode = Mode::ShiftRelease;
                }
                break;
            case Mode::ShiftRelease:
                acc_t = st.accel_level * (0.3 + 0.7 * (1.0 - clutch));
                if (!release.active())
                    mode = (v_kmh >= cur_target - 1.0) ? Mode::Cruise : Mode::Accel;
                if (mode == Mode::Cruise) timer = (leg == 0) ? plan.cruise1_s : plan.cruise2_s;
                break;
            case Mode::Cruise: {
                double hold = (kDragCoef * v * v + kRollResist) / kDriveAccel;
                acc_t = clamp01(hold + 0.06 * (cur_target - v_kmh) + 0.5 * jitter.value);
                if (rpm >= st.shift_rpm && gear < 5) {
                    mode = Mode::ShiftPress;
                    break;
                }
                timer -= kDt;
                if (timer <= 0.0) {
                    coast_wait = planner.uniform(0.3, 0.8);
                    if (leg == 0 && plan.mid_slow) {
                        brake_target_kmh = plan.mid_target;
                        brake_strength = st.brake_level * planner.uniform(0.85, 1.15);
                    } else {
                        brake_target_kmh = 0.0;
                        brake_strength = plan.hard_stop ? std::min(0.97, st.brake_level + 0.35)
                                                        : st.brake_level * planner.uniform(0.85, 1.15);
                    }
                    mode = Mode::Coast;
                }
                break;
            }
            case Mode::Coast:
                acc_t = 0.0;
                if (acc <= 0.0) {
                    coast_wait -= kDt;
                    if (coast_wait <= 0.0) mode = Mode::Brake;
                }
                break;
            case Mode::Brake:
                brake_t = brake_strength;
                if (v_kmh <= brake_target_kmh + 1.5)
                    mode = (brake_target_kmh <= 0.5) ? Mode::Stopping : Mode::BrakeRelease;
                if (mode == Mode::Stopping) brake_t = brake_strength * 0.8;
                break;
            case Mode::BrakeRelease:
                brake_t = 0.0;
                if (brake <= 0.0) {
                    leg = 1;
                    mode = Mode::Accel;
                }
                break;
            case Mode::Stopping:
                brake_t = brake_strength * 0.8;
                if (v_kmh < 12.0) clutch_press = true; // declutch while braking to a stop
                if (v <= 0.02) {
                    v = 0.0;
                    gear = 0;
                    mode = Mode::StopSettle;
                }
                break;
            case Mode::StopSettle:
                brake_t = 0.25;
                if (clutch <= 0.02) {
                    ++cycle;
                    plan = make_plan(cycle, spec, planner);
                    timer = plan.idle_s;
                    mode = Mode::Idle;
                }
                break;
        }

        // pedals never overlap: the state machine gives gas only when the
        // brake is fully released and vice versa
        if (brake_t > 0.0) acc_t = 0.0;
        if (acc > 0.0) brake_t = 0.0;

        acc = move_toward(acc, clamp01(acc_t), st.accel_rate * kDt * (acc_t < acc ? 2.0 : 1.0));
        brake = move_toward(brake, clamp01(brake_t), st.brake_rate * kDt * (brake_t < brake ? 1.6 : 1.0));
        if (clutch_press)
            clutch = move_toward(clutch, 1.0, st.clutch_rate * 1.6 * kDt);
        else if (release.active())
            clutch = release.step(clutch, st.clutch_rate, kDt, clutch_rng);
        else
            clutch = move_toward(clutch, 0.0, st.clutch_rate * kDt);

        if (acc > 0.0 && brake > 0.0) fail("simulate_drive: pedal exclusivity violated");

        // drivetrain
        double engage = (clutch >= 0.8) ? 0.0 : (clutch <= 0.3 ? 1.0 : (0.8 - clutch) / 0.5);
        double drive = (gear >= 1) ? engage * acc * kDriveAccel : 0.0;
        double dv = drive - brake * kBrakeAccel - kDragCoef * v * v - (v > 0.0 ? kRollResist : 0.0);
        v = std::max(0.0, v + dv * kDt);
        v = std::min(v, v_peak_mps); // speed limiter pins the per-drive maximum

        v_kmh = v * 3.6;
        double engaged_rpm = (gear >= 1) ? std::max(kIdleRpm, v_kmh * kGearRpmPerKmh[gear]) : kIdleRpm;
        double free_rpm = kIdleRpm + acc * kFreeRevGain;
        double w = clampd((clutch - 0.25) / 0.5, 0.0, 1.0);
        double rpm_target = (1.0 - w) * engaged_rpm + w * free_rpm;
        double tau = 0.10 + 0.25 * w;
        rpm += (rpm_target - rpm) * kDt / tau;
        rpm = clampd(rpm, kIdleRpm * 0.95, kRevLimit);

        out.t.push_back(t);
        out.velocity_kmh.push_back(v_kmh);
        out.rpm.push_back(rpm);
        out.accel.push_back(acc);
        out.brake.push_back(brake);
        out.clutch.push_back(clutch);
    }
    return out;
}

// ---- layout --------------------------------------------------------------

namespace {

struct Slot {
    uint16_t can_id;
    uint8_t byte;
};

uint16_t draw_id(Rng& rng, std::set<uint16_t>& used, const std::set<uint16_t>& exclude) {
    for (;;) {
        auto id = static_cast<uint16_t>(0x100 + rng.below(0x700));
        if (used.count(id) || exclude.count(id)) continue;
        used.insert(id);
        return id;
    }
}

} // namespace

std::vector<LayoutEntry> default_layout(uint64_t layout_seed, const NoiseCensus& census,
                                        const std::set<uint16_t>& exclude_ids) {
    Rng rng(layout_seed ? layout_seed : 1);
    std::set<uint16_t> used;
    std::vector<LayoutEntry> out;

    // signal ids first; 2-byte signals keep their raw maximum under 1536 so
    // the high byte alone stays below the variation threshold
    struct SignalPlan {
        const char* name;
        uint8_t width;
        double phys_max;
    };
    const SignalPlan signals[] = {
        {"velocity", 2, 135.0}, {"rpm", 2, 4800.0}, {"accel", 1, 1.0},
        {"brake", 1, 1.0},      {"clutch", 1, 1.0},
    };

    std::vector<Slot> free_slots;
    for (const SignalPlan& sp : signals) {
        uint16_t id = draw_id(rng, used, exclude_ids);
        auto start = static_cast<uint8_t>(rng.below(9 - sp.width));
        LayoutEntry e;
        e.channel = sp.name;
        e.can_id = id;
        e.span = {start, sp.width, Endian::Big};
        if (sp.width == 2) {
            double raw_max = rng.uniform(950.0, 1480.0);
            e.offset = std::floor(rng.uniform(0.0, 30.0));
            e.scale = (raw_max - e.offset) / sp.phys_max;
        } else {
            // pedals rest at raw zero; an offset would read as permanent
            // pedal activity
            e.scale = std::floor(rng.uniform(150.0, 235.0));
            e.offset = 0.0;
        }
        out.push_back(e);
        // the byte after a 1-byte pedal stays constant: its pair composite is
        // then an affine copy of the pedal instead of a novel mixed channel
        uint8_t reserved = (sp.width == 1) ? static_cast<uint8_t>(start + 1) : 255;
        for (uint8_t b = 0; b < 8; ++b) {
            if (b >= start && b < start + sp.width) continue;
            if (b == reserved) continue;
            free_slots.push_back({id, b});
        }
    }

    // noise channels: a couple ride along inside the signal ids, the rest
    // get ids of their own (2-3 channels per id)
    std::vector<std::string> noise;
    for (uint32_t i = 0; i < census.counters; ++i) noise.push_back("counter#" + std::to_string(i));
    for (uint32_t i = 0; i < census.walks; ++i) noise.push_back("walk#" + std::to_string(i));
    for (uint32_t i = 0; i < census.smooths; ++i) noise.push_back("smooth#" + std::to_string(i));
    for (uint32_t i = 0; i < census.bursts; ++i) noise.push_back("burst#" + std::to_string(i));
    for (uint32_t i = 0; i < census.multis; ++i) noise.push_back("multi#" + std::to_string(i));
    for (uint32_t i = 0; i < census.constants; ++i) noise.push_back("const#" + std::to_string(i));

    rng.shuffle(free_slots);
    size_t rideshare = std::min<size_t>(free_slots.size(), noise.size() / 2);
    size_t slot_i = 0;
    std::vector<Slot> noise_slots;
    size_t channels_left = noise.size();
    while (noise_slots.size() < channels_left - std::min(channels_left, rideshare)) {
        uint16_t id = draw_id(rng, used, exclude_ids);
        size_t per_id = 2 + rng.below(2); // 2-3 channels per noise id
        std::vector<uint8_t> bytes{0, 1, 2, 3, 4, 5, 6, 7};
        rng.shuffle(bytes);
        for (size_t k = 0; k < per_id; ++k) noise_slots.push_back({id, bytes[k]});
    }

    for (const std::string& name : noise) {
        Slot s{};
        if (slot_i < rideshare) {
            s = free_slots[slot_i];
        } else {
            size_t j = slot_i - rideshare;
            if (j >= noise_slots.size()) break; // census larger than the drawn slots; drop the overflow
            s = noise_slots[j];
        }
        ++slot_i;
        LayoutEntry e;
        e.channel = name;
        e.can_id = s.can_id;
        e.span = {s.byte, 1, Endian::Big};
        e.scale = std::floor(rng.uniform(1.0, 7.0)); // walk step span / decoration
        e.offset = std::floor(rng.uniform(0.0, 256.0));
        out.push_back(e);
    }
    return out;
}

ScenarioSpec resolve(ScenarioSpec spec) {
    if (spec.layout.empty()) spec.layout = default_layout(spec.layout_seed, spec.noise);
    return spec;
}

// ---- encoding ------------------------------------------------------------

namespace {

// Per-frame state machine behind one noise byte.
struct NoiseChannel {
    enum class Kind { Constant, Counter, Multi, Walk, Smooth, Burst } kind = Kind::Constant;
    Rng rng{0};
    double value = 0.0;
    // multi/burst switching
    double next_switch = 0.0;
    std::array<uint8_t, 4> levels{};
    // walk
    int step_span = 1;
    // smooth
    double f1 = 0.05, f2 = 0.2, p1 = 0.0, p2 = 0.0, a1 = 80.0, a2 = 40.0;
    // burst
    double burst_until = -1.0;
    double burst_level = 0.0;

    static NoiseChannel make(const std::string& name, const LayoutEntry& e, Rng rng_in) {
        NoiseChannel c;
        c.rng = rng_in;
        if (name.starts_with("const")) {
            c.kind = Kind::Constant;
            c.value = e.offset;
        } else if (name.starts_with("counter")) {
            c.kind = Kind::Counter;
            c.value = std::floor(c.rng.uniform(0.0, 256.0));
        } else if (name.starts_with("multi")) {
            c.kind = Kind::Multi;
            for (auto& l : c.levels) l = static_cast<uint8_t>(c.rng.below(256));
            c.value = c.levels[0];
        } else if (name.starts_with("walk")) {
            c.kind = Kind::Walk;
            c.step_span = 1 + static_cast<int>(e.scale);
            c.value = std::floor(c.rng.uniform(40.0, 215.0));
        } else if (name.starts_with("smooth")) {
            c.kind = Kind::Smooth;
            c.f1 = c.rng.uniform(0.015, 0.08);
            c.f2 = c.rng.uniform(0.1, 0.35);
            c.p1 = c.rng.uniform(0.0, 2.0 * M_PI);
            c.p2 = c.rng.uniform(0.0, 2.0 * M_PI);
            c.a1 = c.rng.uniform(60.0, 95.0);
            c.a2 = c.rng.uniform(15.0, 40.0);
        } else if (name.starts_with("burst")) {
            c.kind = Kind::Burst;
            c.value = 0.0;
            c.next_switch = c.rng.uniform(5.0, 40.0);
        }
        return c;
    }

    uint8_t sample(double t) {
        switch (kind) {
            case Kind::Constant: return static_cast<uint8_t>(value);
            case Kind::Counter: {
                auto v = static_cast<uint8_t>(value);
                value = std::fmod(value + 1.0, 256.0);
                return v;
            }
            case Kind::Multi:
                if (t >= next_switch) {
                    value = levels[rng.below(4)];
                    next_switch = t + rng.uniform(1.0, 9.0);
                }
                return static_cast<uint8_t>(value);
            case Kind::Walk: {
                auto span = static_cast<uint64_t>(2 * step_span + 1);
                value += static_cast<double>(static_cast<long long>(rng.below(span)) - step_span);
                if (value < 0.0) value = -value;
                if (value > 255.0) value = 510.0 - value;
                return static_cast<uint8_t>(value);
            }
            case Kind::Smooth: {
                double s = 128.0 + a1 * std::sin(2.0 * M_PI * f1 * t + p1) +
                           a2 * std::sin(2.0 * M_PI * f2 * t + p2);
                return static_cast<uint8_t>(clampd(s, 0.0, 255.0));
            }
            case Kind::Burst:
                if (t >= next_switch && burst_until < t) {
                    burst_level = std::floor(rng.uniform(60.0, 250.0));
                    burst_until = t + rng.uniform(1.5, 7.0);
                    next_switch = burst_until + rng.uniform(8.0, 45.0);
                }
                if (t <= burst_until)
                    value = move_toward(value, burst_level, 500.0 * 0.01);
                else
                    value = move_toward(value, 0.0, 500.0 * 0.01);
                return static_cast<uint8_t>(clampd(value, 0.0, 255.0));
        }
        return 0;
    }
};

struct PendingFrame {
    double t;
    uint16_t can_id;
    std::array<uint8_t, 8> payload;
};

const std::vector<double>* signal_series(const PhysicalSeries& p, const std::string& name) {
    if (name == "velocity") return &p.velocity_kmh;
    if (name == "rpm") return &p.rpm;
    if (name == "accel") return &p.accel;
    if (name == "brake") return &p.brake;
    if (name == "clutch") return &p.clutch;
    return nullptr;
}

} // namespace

std::set<SeriesId> GroundTruth::truth_set(const std::string& signal, bool little_endian) const {
    auto it = locations.find(signal);
    if (it == locations.end()) fail("unknown signal '" + signal + "' in ground truth");
    const SeriesId& loc = it->second;
    uint8_t dlc = 8;
    if (auto d = dlc_by_id.find(loc.can_id); d != dlc_by_id.end()) dlc = d->second;

    std::set<SeriesId> out;
    uint8_t lo = loc.span.start;
    uint8_t hi = static_cast<uint8_t>(loc.span.start + loc.span.width); // exclusive
    for (uint8_t b = lo; b < hi; ++b) out.insert({loc.can_id, {b, 1, Endian::Big}});
    for (int b = static_cast<int>(lo) - 1; b < static_cast<int>(hi); ++b) {
        if (b < 0 || b + 2 > dlc) continue;
        out.insert({loc.can_id, {static_cast<uint8_t>(b), 2, Endian::Big}});
        if (little_endian) out.insert({loc.can_id, {static_cast<uint8_t>(b), 2, Endian::Little}});
    }
    return out;
}

SynthDrive encode_log(const PhysicalSeries& phys, const ScenarioSpec& spec_in) {
    ScenarioSpec spec = resolve(spec_in);
    if (phys.size() == 0) fail("encode_log: empty physical series");

    SynthDrive drive;
    drive.truth.layout = spec.layout;
    drive.truth.physical = phys;

    // group layout by id
    std::map<uint16_t, std::vector<const LayoutEntry*>> by_id;
    for (const LayoutEntry& e : spec.layout) by_id[e.can_id].push_back(&e);
    for (auto& [id, entries] : by_id) {
        drive.truth.dlc_by_id[id] = 8;
        for (const LayoutEntry* e : entries)
            if (signal_series(phys, e->channel))
                drive.truth.locations[e->channel] = {id, e->span};
    }

    Rng enc_root(spec.drive_seed * 0x9e3779b97f4a7c15ULL + spec.layout_seed + 7);

    // per-id frame schedule: signal ids at 10 ms, noise ids slower
    std::vector<PendingFrame> frames;
    size_t channel_index = 0;
    for (auto& [id, entries] : by_id) {
        bool has_signal = false;
        for (const LayoutEntry* e : entries)
            if (signal_series(phys, e->channel)) has_signal = true;

        Rng id_rng = enc_root.split(0x1000 + id);
        double period = 0.01;
        if (!has_signal) {
            constexpr double choices[3] = {0.02, 0.05, 0.1};
            period = choices[id_rng.below(3)];
        }
        double phase = id_rng.uniform(0.0, period);

        std::vector<NoiseChannel> noise;
        std::vector<const LayoutEntry*> noise_entries;
        std::vector<const LayoutEntry*> signal_entries;
        for (const LayoutEntry* e : entries) {
            if (signal_series(phys, e->channel)) {
                signal_entries.push_back(e);
            } else {
                noise_entries.push_back(e);
                noise.push_back(NoiseChannel::make(e->channel, *e, enc_root.split(0x2000 + channel_index)));
            }
            ++channel_index;
        }

        double duration = phys.t.back() + phys.dt;
        for (double t = phase; t < duration; t += period) {
            PendingFrame f;
            f.t = t;
            f.can_id = id;
            f.payload.fill(0);
            auto idx = static_cast<size_t>(std::llround(t / phys.dt));
            if (idx >= phys.size()) idx = phys.size() - 1;
            for (const LayoutEntry* e : signal_entries) {
                const std::vector<double>* series = signal_series(phys, e->channel);
                auto raw = std::llround((*series)[idx] * e->scale + e->offset);
                long long limit = e->span.width == 2 ? 65535 : 255;
                if (raw < 0 || raw > limit)
                    fail("encode_log: '" + e->channel + "' overflows its span (scenario bug)");
                if (e->span.width == 2) {
                    f.payload[e->span.start] = static_cast<uint8_t>(raw >> 8);
                    f.payload[e->span.start + 1] = static_cast<uint8_t>(raw & 0xFF);
                } else {
                    f.payload[e->span.start] = static_cast<uint8_t>(raw);
                }
            }
            for (size_t c = 0; c < noise.size(); ++c)
                f.payload[noise_entries[c]->span.start] = noise[c].sample(t);
            frames.push_back(f);
        }
    }

    std::sort(frames.begin(), frames.end(), [](const PendingFrame& a, const PendingFrame& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.can_id < b.can_id;
    });

    drive.can_text.reserve(frames.size() * 64);
    char buf[96];
    for (const PendingFrame& f : frames) {
        int m = std::snprintf(buf, sizeof buf, "%.6f %04x 000 8", spec.epoch + f.t, f.can_id);
        drive.can_text.append(buf, static_cast<size_t>(m));
        for (int b = 0; b < 8; ++b) {
            std::snprintf(buf, sizeof buf, " %02x", f.payload[static_cast<size_t>(b)]);
            drive.can_text.append(buf, 3);
        }
        drive.can_text += '\n';
    }

    // GPS: integrate position from the velocity series with a slowly turning
    // heading, 1 Hz fixes, AR(1) noise with the configured accuracy, and the
    // occasional hard glitch for the outlier filter to chew on.
    Rng gps_rng = enc_root.split(0x3000);
    Ou omega{10.0, 0.05};
    double psi = gps_rng.uniform(0.0, 2.0 * M_PI);
    double x = 0.0, y = 0.0;
    std::vector<double> xs, ys;
    xs.reserve(phys.size());
    ys.reserve(phys.size());
    for (size_t i = 0; i < phys.size(); ++i) {
        double v = phys.velocity_kmh[i] / 3.6;
        omega.step(phys.dt, gps_rng);
        psi += omega.value * phys.dt * std::min(1.0, v / 5.0);
        x += v * std::cos(psi) * phys.dt;
        y += v * std::sin(psi) * phys.dt;
        xs.push_back(x);
        ys.push_back(y);
    }
    const double lat0 = 47.47, lon0 = 19.05;
    const double m_per_deg_lat = 111320.0;
    const double m_per_deg_lon = m_per_deg_lat * std::cos(lat0 * M_PI / 180.0);
    double rho = std::exp(-1.0 / 30.0);
    double innov = spec.gps_noise_m * std::sqrt(1.0 - rho * rho);
    double nx = 0.0, ny = 0.0;
    auto seconds = static_cast<size_t>(std::floor(phys.t.back()));
    for (size_t k = 0; k <= seconds; ++k) {
        double t = static_cast<double>(k) + 0.4;
        auto idx = static_cast<size_t>(std::llround(t / phys.dt));
        if (idx >= phys.size()) break;
        nx = rho * nx + innov * gps_rng.normal();
        ny = rho * ny + innov * gps_rng.normal();
        double gx = xs[idx] + nx, gy = ys[idx] + ny;
        if (gps_rng.uniform() < 0.008) {
            gx += (gps_rng.uniform() < 0.5 ? -1.0 : 1.0) * gps_rng.uniform(20.0, 80.0);
            gy += (gps_rng.uniform() < 0.5 ? -1.0 : 1.0) * gps_rng.uniform(20.0, 80.0);
        }
        int m = std::snprintf(buf, sizeof buf, "%.6f,%.7f,%.7f\n", spec.epoch + t,
                              lat0 + gy / m_per_deg_lat, lon0 + gx / m_per_deg_lon);
        drive.gps_csv.append(buf, static_cast<size_t>(m));
    }
    return drive;
}

SynthDrive generate(const ScenarioSpec& spec_in) {
    ScenarioSpec spec = resolve(spec_in);
    return encode_log(simulate_drive(spec), spec);
}

CarPair make_car_pair(uint64_t seed) {
    Rng root(seed ? seed : 1);

    CarPair pair;
    pair.base_spec.label = "base";
    pair.base_spec.layout_seed = root.split(1).seed();
    pair.base_spec.drive_seed = root.split(2).seed();
    pair.base_spec.duration_s = 1800.0;
    pair.base_spec.layout = default_layout(pair.base_spec.layout_seed, pair.base_spec.noise);

    std::set<uint16_t> base_ids;
    for (const LayoutEntry& e : pair.base_spec.layout) base_ids.insert(e.can_id);

    pair.target_spec = pair.base_spec;
    pair.target_spec.label = "target";
    pair.target_spec.layout_seed = root.split(3).seed();
    pair.target_spec.drive_seed = root.split(4).seed();
    NoiseCensus target_noise; // a different channel mix
    target_noise.constants = 4;
    target_noise.counters = 5;
    target_noise.multis = 3;
    target_noise.walks = 6;
    target_noise.smooths = 2;
    target_noise.bursts = 3;
    pair.target_spec.noise = target_noise;
    pair.target_spec.layout =
        default_layout(pair.target_spec.layout_seed, target_noise, base_ids);

    for (const LayoutEntry& a : pair.base_spec.layout)
        for (const LayoutEntry& b : pair.target_spec.layout)
            if (a.can_id == b.can_id) fail("make_car_pair: layouts share a can id");

    pair.base = generate(pair.base_spec);
    pair.target = generate(pair.target_spec);
    return pair;
}

std::string manifest_json(const GroundTruth& truth) {
    nlohmann::json j;
    for (const auto& [name, sid] : truth.locations) {
        const LayoutEntry* entry = nullptr;
        for (const LayoutEntry& e : truth.layout)
            if (e.channel == name) entry = &e;
        nlohmann::json s;
        s["candidate"] = sid.str();
        if (entry) {
            s["scale"] = entry->scale;
            s["offset"] = entry->offset;
        }
        j["signals"][name] = s;
    }
    for (const LayoutEntry& e : truth.layout) {
        nlohmann::json s;
        s["channel"] = e.channel;
        s["candidate"] = SeriesId{e.can_id, e.span}.str();
        s["scale"] = e.scale;
        s["offset"] = e.offset;
        j["layout"].push_back(s);
    }
    return j.dump(2) + "\n";
}

} // namespace canlift
