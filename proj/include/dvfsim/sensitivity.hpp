#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dvfsim/engine.hpp"

namespace dvfsim {

// Linear work model for one epoch: instructions(f) = i0 + s * f.
struct SensitivityEstimate {
    double s = 0.0;   // instructions per Hz per epoch
    double i0 = 0.0;  // frequency-independent instructions
    uint64_t source_freq_hz = 0;

    double predict(uint64_t freq_hz) const {
        double w = i0 + s * static_cast<double>(freq_hz);
        return w > 0.0 ? w : 0.0;
    }
    bool operator==(const SensitivityEstimate&) const = default;
};

// Core/asynchronous split of one CU's epoch under one of the §2.3-style
// models. t_core_s + t_async_s equals the epoch length.
struct StallCounters {
    double t_core_s = 0.0;
    double t_async_s = 0.0;
    uint64_t committed = 0;  // critical instructions this epoch
    uint64_t f1_hz = 0;      // frequency the counters were measured at
};

enum class EstimatorKind : uint8_t { StallCu, Lead, Crit, CrispS, WfStall };

const char* estimator_name(EstimatorKind kind);

// Per-CU counters for a CU-level estimator. WfStall is wavefront-level and is
// handled by estimate_wavefront instead.
std::vector<StallCounters> collect_counters(const EpochResult& epoch, EstimatorKind kind);

// Fixed-epoch inversion of T_f2 = T_async + (f1/f2) T_core: the instructions
// a CU would commit in the same wall-clock epoch at frequency f2.
double predict_cu_instructions(const StallCounters& counters, uint64_t f2_hz);

// Wavefront STALL model: S = IPC_wf * T_core_wf with ready-wait cycles counted
// as core time (scheduler contention scales with frequency).
SensitivityEstimate estimate_wavefront(uint64_t exec_cycles, uint64_t ready_wait_cycles,
                                       uint64_t committed, uint64_t epoch_len_ps,
                                       uint64_t freq_hz);
SensitivityEstimate estimate_wavefront(const SlotSnapshot& slot, uint64_t epoch_len_ps,
                                       uint64_t freq_hz);

SensitivityEstimate aggregate_domain(std::span<const SensitivityEstimate> estimates);

struct LinearFit {
    SensitivityEstimate estimate;
    double r2 = 0.0;
};

// Ordinary least squares over (frequency, instructions) samples. Requires at
// least two distinct frequencies. R² is 1 for zero-variance counts.
LinearFit fit_linear(std::span<const std::pair<uint64_t, double>> samples);

}  // namespace dvfsim
