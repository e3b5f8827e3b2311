#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dvfsim/workload.hpp"

namespace dvfsim {

inline constexpr uint64_t kPsPerSecond = 1'000'000'000'000ull;

struct EngineConfig {
    uint32_t n_cus = 64;
    uint32_t n_slots = 40;
    uint32_t n_banks = 16;
    uint64_t mem_freq_hz = 1'600'000'000;  // memory domain is never rescaled
    uint32_t base_latency_memcycles = 480;  // ~300 ns
    uint32_t service_time_memcycles = 4;
    uint32_t cus_per_domain = 1;
    uint64_t transition_latency_ps = 4'000;  // issue blackout after a V/f switch

    uint32_t n_domains() const { return (n_cus + cus_per_domain - 1) / cus_per_domain; }
    uint64_t mem_cycle_ps() const { return kPsPerSecond / mem_freq_hz; }
    uint64_t base_latency_ps() const { return base_latency_memcycles * mem_cycle_ps(); }
    uint64_t service_time_ps() const { return service_time_memcycles * mem_cycle_ps(); }
    uint32_t cus_in_domain(uint32_t d) const {
        uint64_t b = static_cast<uint64_t>(d) * cus_per_domain;
        uint64_t e = b + cus_per_domain;
        if (e > n_cus) e = n_cus;
        return static_cast<uint32_t>(e - b);
    }

    bool operator==(const EngineConfig&) const = default;
};

enum class SlotStatus : uint8_t { Empty, Ready, Exec, BlockedWaitcnt, Done };

// One of the n_slots wavefront slots of a CU. Counters are per-slot so that a
// mid-epoch redispatch keeps the cycle accounting exact; exec + ready_wait +
// stall + idle always equals the CU cycles elapsed this epoch.
struct WavefrontSlot {
    uint64_t pc = 0;
    uint64_t uid = 0;  // 0 while the slot has never held a wavefront
    uint32_t age_rank = 0;
    SlotStatus status = SlotStatus::Empty;
    uint32_t exec_left = 0;
    uint32_t outstanding_loads = 0;
    uint32_t outstanding_stores = 0;
    uint32_t wait_bound = 0;  // bound of the WAITCNT currently blocking
    std::vector<uint32_t> branch_trips;

    // per-epoch counters
    uint64_t start_pc = 0;
    uint64_t exec_cycles = 0;
    uint64_t ready_wait_cycles = 0;
    uint64_t stall_cycles = 0;
    uint64_t idle_cycles = 0;
    uint64_t store_stall_cycles = 0;  // subset of stall_cycles
    uint64_t committed = 0;
    uint64_t critical = 0;

    uint32_t outstanding() const { return outstanding_loads + outstanding_stores; }
    bool operator==(const WavefrontSlot&) const = default;
};

struct CuEpochCounters {
    uint64_t cycles = 0;
    uint64_t issued = 0;
    uint64_t mem_stall = 0;    // no wavefront ready, at least one blocked at WAITCNT
    uint64_t store_stall = 0;  // mem_stall cycles where only stores block progress
    uint64_t overlap = 0;      // issued while a load was in flight
    uint64_t idle = 0;
    uint64_t committed = 0;
    uint64_t critical = 0;
    uint64_t lead_async_ps = 0;  // leading-load latency booked at completion
    uint64_t crit_async_ps = 0;  // critical-path load latency booked at completion

    bool operator==(const CuEpochCounters&) const = default;
};

struct CuState {
    uint32_t id = 0;
    uint32_t domain = 0;
    std::vector<WavefrontSlot> slots;
    uint32_t next_age_rank = 0;
    uint32_t remaining_dispatch = 0;  // current kernel's wavefronts not yet placed

    // §2.3 model bookkeeping, persistent across epochs
    uint32_t in_flight_loads = 0;
    uint64_t lead_req_id = 0;  // 0 = no leading load outstanding
    uint64_t lead_issue_ps = 0;
    uint64_t crit_head_ps = 0;

    CuEpochCounters epoch;

    bool operator==(const CuState&) const = default;
};

struct MemRequest {
    uint64_t completion_ps = 0;
    uint64_t issue_ps = 0;
    uint64_t req_id = 0;
    uint32_t cu = 0;
    uint32_t slot = 0;
    uint64_t wf_uid = 0;
    bool is_load = false;

    bool operator==(const MemRequest&) const = default;
};

struct MemBank {
    std::deque<MemRequest> in_flight;  // FIFO; completion times are monotone
    uint64_t last_completion_ps = 0;

    bool operator==(const MemBank&) const = default;
};

// Full simulator state. A snapshot is a plain copy; copies share only the
// immutable kernel list and evolve independently and bit-identically.
struct SimState {
    EngineConfig cfg;
    std::shared_ptr<const std::vector<Kernel>> kernels;
    uint32_t current_kernel = 0;
    uint64_t now_ps = 0;
    uint64_t epoch_index = 0;
    std::vector<CuState> cus;
    std::vector<MemBank> banks;
    std::vector<uint64_t> domain_freq_hz;  // 0 until first assignment
    uint64_t next_uid = 1;
    uint64_t next_req_id = 1;
    uint64_t active_wavefronts = 0;
    uint64_t remaining_total = 0;
    uint64_t completion_ps = 0;  // commit time of the last instruction, once done
    uint64_t rng_state = 0;      // reserved; the core model is deterministic

    const Kernel& kernel() const { return (*kernels)[current_kernel]; }
    bool all_done() const {
        return active_wavefronts == 0 && remaining_total == 0 &&
               current_kernel + 1 >= kernels->size();
    }

    bool operator==(const SimState&) const = default;
};

struct SlotSnapshot {
    uint32_t cu = 0;
    uint32_t slot = 0;
    uint64_t start_pc = 0;
    uint64_t end_pc = 0;
    uint8_t resident = 0;     // slot held a wavefront this epoch
    uint8_t live_at_end = 0;  // still has instructions to run
    uint64_t exec_cycles = 0;
    uint64_t ready_wait_cycles = 0;
    uint64_t stall_cycles = 0;
    uint64_t idle_cycles = 0;
    uint64_t store_stall_cycles = 0;
    uint64_t committed = 0;
    uint64_t critical = 0;

    bool operator==(const SlotSnapshot&) const = default;
};

struct EpochResult {
    uint64_t epoch_index = 0;
    uint64_t epoch_len_ps = 0;
    uint32_t n_domains = 0;
    uint32_t cus_per_domain = 1;
    std::vector<uint64_t> freq_hz;      // per domain, as applied this epoch
    std::vector<uint8_t> transitioned;  // per domain
    std::vector<CuEpochCounters> cu;
    std::vector<SlotSnapshot> slots;  // n_cus * n_slots, slot-major within cu

    uint64_t domain_critical(uint32_t d) const;
    uint64_t domain_committed(uint32_t d) const;
    uint64_t domain_cycles(uint32_t d) const;
    uint64_t domain_issued(uint32_t d) const;
    uint32_t cu_begin(uint32_t d) const { return d * cus_per_domain; }
    uint32_t cu_end(uint32_t d) const;

    bool operator==(const EpochResult&) const = default;
};

SimState make_sim_state(const EngineConfig& cfg, std::vector<Kernel> kernels);

// Advances the state by exactly epoch_len_ps of wall time with each domain
// running at its assigned frequency. A domain whose frequency differs from the
// previous epoch issues nothing for cfg.transition_latency_ps.
EpochResult run_epoch(SimState& state, std::span<const uint64_t> domain_freq_hz,
                      uint64_t epoch_len_ps);

// Oldest-first pick among Ready slots; ties break toward the lower slot index.
std::optional<uint32_t> schedule_next(const CuState& cu);

// Committed instructions excluding WAITCNT and BRANCH, summed per domain.
std::vector<uint64_t> count_critical(const EpochResult& epoch);

inline SimState snapshot(const SimState& state) { return state; }

}  // namespace dvfsim
