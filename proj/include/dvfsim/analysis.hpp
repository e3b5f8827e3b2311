#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dvfsim {

// max(0, 1 - |predicted - actual| / actual); caller must exclude actual == 0.
double prediction_accuracy(double predicted, double actual);

// Run-level accuracy: mean over included (epoch, domain) pairs; pairs with
// zero actual work are excluded and counted separately.
struct AccuracyStats {
    double sum = 0.0;
    uint64_t included = 0;
    uint64_t excluded = 0;

    void add(double predicted, double actual);
    double mean() const { return included == 0 ? 0.0 : sum / static_cast<double>(included); }
};

// Mean |S_t - S_{t-1}| over the series, relative to the series' mean |S|.
double consecutive_variability(std::span<const double> series);

enum class PcScope : uint8_t { Wavefront, Cu, Gpu };

// One per-wavefront estimate observation, in execution order.
struct PcSample {
    uint64_t scope_key = 0;  // wavefront or CU identity, 0 for GPU scope
    uint64_t start_pc = 0;
    double s = 0.0;
};

// Groups samples by (scope_key, start_pc >> offset_bits) and measures the
// mean change between consecutive group members, relative to the stream's
// mean |S|. Returns -1 when no PC repeats within any group.
double same_pc_variability(std::span<const PcSample> samples, uint32_t offset_bits);

std::vector<std::pair<uint32_t, double>> offset_sweep(std::span<const PcSample> samples,
                                                      std::span<const uint32_t> offsets);

// Fraction of selections landing on each state; sums to 1 when any exist.
std::vector<double> time_share(std::span<const uint32_t> selected_states, uint32_t n_states);

}  // namespace dvfsim
