#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dvfsim/engine.hpp"
#include "dvfsim/sensitivity.hpp"

namespace dvfsim {

struct VfState {
    uint64_t freq_hz = 0;
    double voltage = 0.0;

    bool operator==(const VfState&) const = default;
};

// 1.3 GHz .. 2.2 GHz in 100 MHz steps with a linear 0.75 V .. 1.05 V ramp.
std::vector<VfState> default_vf_states();

struct TransitionModel {
    uint64_t latency_ps = 4'000;
    int64_t energy_pj = 0;

    bool operator==(const TransitionModel&) const = default;
};

// Paper-derived default: the switch blackout is 0.4% of the epoch
// (4 ns @ 1 us, 40 ns @ 10 us, 200 ns @ 50 us, 400 ns @ 100 us).
uint64_t default_transition_latency_ps(uint64_t epoch_len_ps);

struct RangeClamp {
    uint64_t f_min_hz = 0;
    uint64_t f_max_hz = UINT64_MAX;

    bool contains(uint64_t f) const { return f >= f_min_hz && f <= f_max_hz; }
    bool operator==(const RangeClamp&) const = default;
};

enum class ObjectiveKind : uint8_t { EdnP, EnergyBounded };

struct Objective {
    ObjectiveKind kind = ObjectiveKind::EdnP;
    int n = 2;                   // EDP: n=1, ED2P: n=2
    double max_perf_loss = 0.05;  // EnergyBounded only

    static Objective edp() { return {ObjectiveKind::EdnP, 1, 0.0}; }
    static Objective ed2p() { return {ObjectiveKind::EdnP, 2, 0.0}; }
    static Objective energy_bounded(double max_loss) {
        return {ObjectiveKind::EnergyBounded, 0, max_loss};
    }
    bool operator==(const Objective&) const = default;
};

// Expected instructions per state, clamped at zero.
std::vector<double> predicted_work_curve(const SensitivityEstimate& est,
                                         std::span<const VfState> states);
std::vector<double> predicted_work_curve(const StallCounters& counters,
                                         std::span<const VfState> states);

// Exhaustive argmin over the clamped states. EDnP minimizes P/W^(n+1), the
// per-unit-work form of E*D^n in fixed-time epochs; EnergyBounded picks the
// cheapest state whose work stays within max_perf_loss of the fastest clamped
// state. Ties break toward the lower frequency. An infeasible bound returns
// the fastest clamped state.
uint32_t select_frequency(std::span<const double> work, std::span<const double> power,
                          std::span<const VfState> states, const Objective& obj,
                          const RangeClamp& clamp);

struct TransitionCharge {
    bool changed = false;
    uint64_t latency_ps = 0;
    int64_t energy_pj = 0;
};

// Cost of moving `domain` to `next` for the upcoming epoch. The stall itself
// is enacted by run_epoch when it sees the changed assignment; this function
// only prices it, so oracle sample runs and the re-execution stay identical.
TransitionCharge apply_transition(const SimState& state, uint32_t domain, const VfState& next,
                                  const TransitionModel& tm);

}  // namespace dvfsim
