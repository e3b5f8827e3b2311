#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dvfsim/controller.hpp"
#include "dvfsim/engine.hpp"
#include "dvfsim/power.hpp"
#include "dvfsim/sensitivity.hpp"

namespace dvfsim {

// n_states sample rows; column j is a permutation of the state indices, so
// every domain sees every frequency exactly once across the samples.
struct SampleAssignment {
    uint32_t n_states = 0;
    uint32_t n_domains = 0;
    std::vector<uint32_t> m;  // row-major: m[k * n_domains + j]

    uint32_t at(uint32_t sample, uint32_t domain) const {
        return m[static_cast<size_t>(sample) * n_domains + domain];
    }
};

// Cyclic square: m[k][j] = (j + k + seed) mod n_states.
SampleAssignment latin_square(uint32_t n_states, uint32_t n_domains, uint64_t seed);

struct OracleResult {
    uint32_t n_states = 0;
    uint32_t n_domains = 0;
    uint32_t n_cus = 0;
    uint32_t n_slots = 0;

    // critical instructions committed, indexed [domain * n_states + state]
    std::vector<uint64_t> domain_counts;
    // per-slot critical counts, indexed [(cu * n_slots + slot) * n_states + state]
    std::vector<uint64_t> slot_counts;
    std::vector<uint64_t> slot_start_pc;  // per cu*slot (identical across samples)
    std::vector<uint8_t> slot_active;     // slot did work in at least one sample

    std::vector<uint32_t> selected;          // per domain, filled by select_and_reexecute
    std::vector<double> validation_error;    // per domain, filled by select_and_reexecute

    uint64_t count(uint32_t domain, uint32_t state) const {
        return domain_counts[static_cast<size_t>(domain) * n_states + state];
    }
    uint64_t slot_count(uint32_t cu, uint32_t slot, uint32_t state) const {
        return slot_counts[(static_cast<size_t>(cu) * n_slots + slot) * n_states + state];
    }
};

// Runs every sample row on its own snapshot of `state`; the input state is
// untouched. Rows may execute on worker threads; results merge by row index.
OracleResult sample_epoch(const SimState& state, const SampleAssignment& assign,
                          std::span<const VfState> states, uint64_t epoch_len_ps,
                          bool parallel = false);

// Oracle step 4: pick each domain's objective-optimal state from its sampled
// work curve, advance the real state once under the combined assignment, and
// record the sample-vs-reexecution validation error per domain.
EpochResult select_and_reexecute(SimState& state, OracleResult& oracle,
                                 std::span<const VfState> states, const Objective& obj,
                                 const RangeClamp& clamp, const PowerParams& power,
                                 uint64_t epoch_len_ps);

// Least-squares sensitivity over the domain's sampled (frequency, count) pairs.
SensitivityEstimate oracle_sensitivity(const OracleResult& oracle, uint32_t domain,
                                       std::span<const VfState> states);

// Same fit for one wavefront slot's sampled counts (feeds ACCPC).
SensitivityEstimate oracle_slot_sensitivity(const OracleResult& oracle, uint32_t cu,
                                            uint32_t slot, std::span<const VfState> states);

}  // namespace dvfsim
