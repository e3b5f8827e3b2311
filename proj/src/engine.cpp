#include "dvfsim/engine.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace dvfsim {

namespace {

constexpr uint64_t kNoEvent = std::numeric_limits<uint64_t>::max();

void dispatch_into(SimState& st, CuState& cu, uint32_t slot_idx) {
    WavefrontSlot& slot = cu.slots[slot_idx];
    slot.pc = 0;
    slot.uid = st.next_uid++;
    slot.age_rank = cu.next_age_rank++;
    slot.status = SlotStatus::Ready;
    slot.exec_left = 0;
    slot.outstanding_loads = 0;
    slot.outstanding_stores = 0;
    slot.wait_bound = 0;
    slot.branch_trips.assign(st.kernel().n_branches, 0);
    --cu.remaining_dispatch;
    --st.remaining_total;
    ++st.active_wavefronts;
}

void fill_free_slots(SimState& st, CuState& cu) {
    for (uint32_t i = 0; i < cu.slots.size() && cu.remaining_dispatch > 0; ++i) {
        SlotStatus s = cu.slots[i].status;
        if (s == SlotStatus::Empty || s == SlotStatus::Done) dispatch_into(st, cu, i);
    }
}

void dispatch_kernel(SimState& st) {
    const Kernel& k = st.kernel();
    st.remaining_total = k.wavefront_count;
    for (auto& cu : st.cus) cu.remaining_dispatch = 0;
    for (uint32_t w = 0; w < k.wavefront_count; ++w)
        ++st.cus[w % st.cfg.n_cus].remaining_dispatch;
    for (auto& cu : st.cus) fill_free_slots(st, cu);
}

void enqueue_request(SimState& st, CuState& cu, uint32_t slot_idx, uint64_t t, uint32_t bank_idx,
                     bool is_load) {
    MemBank& bank = st.banks[bank_idx];
    uint64_t completion =
        std::max(t + st.cfg.base_latency_ps(), bank.last_completion_ps + st.cfg.service_time_ps());
    bank.last_completion_ps = completion;
    WavefrontSlot& slot = cu.slots[slot_idx];
    uint64_t rid = st.next_req_id++;
    bank.in_flight.push_back({completion, t, rid, cu.id, slot_idx, slot.uid, is_load});
    if (is_load) {
        bool no_loads_in_flight = cu.in_flight_loads == 0;
        ++slot.outstanding_loads;
        ++cu.in_flight_loads;
        if (no_loads_in_flight) {  // the definition of a leading load
            cu.lead_req_id = rid;
            cu.lead_issue_ps = t;
        }
    } else {
        ++slot.outstanding_stores;
    }
}

void finish_wavefront(SimState& st, CuState& cu, uint32_t slot_idx, uint64_t t) {
    cu.slots[slot_idx].status = SlotStatus::Done;
    --st.active_wavefronts;
    if (cu.remaining_dispatch > 0) {
        dispatch_into(st, cu, slot_idx);
        return;
    }
    if (st.active_wavefronts == 0 && st.remaining_total == 0) {
        if (st.current_kernel + 1 < st.kernels->size()) {
            ++st.current_kernel;
            dispatch_kernel(st);
        } else {
            st.completion_ps = t;
        }
    }
}

void commit(SimState& st, CuState& cu, uint32_t slot_idx, uint64_t t) {
    WavefrontSlot& slot = cu.slots[slot_idx];
    const Kernel& k = st.kernel();
    const Instruction& inst = k.at_pc(slot.pc);

    ++slot.committed;
    ++cu.epoch.committed;
    if (inst.kind != InstKind::Waitcnt && inst.kind != InstKind::Branch) {
        ++slot.critical;
        ++cu.epoch.critical;
    }

    uint64_t next_pc = slot.pc + kInstBytes;
    switch (inst.kind) {
        case InstKind::Compute:
        case InstKind::Waitcnt:
            break;
        case InstKind::Load:
            enqueue_request(st, cu, slot_idx, t, static_cast<uint32_t>(inst.arg0), true);
            break;
        case InstKind::Store:
            enqueue_request(st, cu, slot_idx, t, static_cast<uint32_t>(inst.arg0), false);
            break;
        case InstKind::Branch: {
            uint32_t ord = k.branch_ordinal(slot.pc);
            if (++slot.branch_trips[ord] < inst.arg1) {
                next_pc = inst.arg0;
            } else {
                slot.branch_trips[ord] = 0;  // re-armed for the next loop entry
            }
            break;
        }
        case InstKind::EndKernel:
            finish_wavefront(st, cu, slot_idx, t);
            return;
    }

    slot.pc = next_pc;
    const Instruction& next = k.at_pc(next_pc);
    if (next.kind == InstKind::Waitcnt && slot.outstanding() > next.arg0) {
        slot.status = SlotStatus::BlockedWaitcnt;
        slot.wait_bound = static_cast<uint32_t>(next.arg0);
    } else {
        slot.status = SlotStatus::Ready;
    }
}

void issue(SimState& st, CuState& cu, uint32_t slot_idx, uint64_t t) {
    WavefrontSlot& slot = cu.slots[slot_idx];
    const Instruction& inst = st.kernel().at_pc(slot.pc);
    slot.status = SlotStatus::Exec;
    slot.exec_left = inst.kind == InstKind::Compute ? static_cast<uint32_t>(inst.arg0) : 1;
    ++slot.exec_cycles;
    if (--slot.exec_left == 0) commit(st, cu, slot_idx, t);
}

void apply_completion(SimState& st, uint32_t bank_idx) {
    MemBank& bank = st.banks[bank_idx];
    MemRequest req = bank.in_flight.front();
    bank.in_flight.pop_front();

    CuState& cu = st.cus[req.cu];
    if (req.is_load) {
        --cu.in_flight_loads;
        if (cu.lead_req_id == req.req_id) {
            cu.epoch.lead_async_ps += req.completion_ps - cu.lead_issue_ps;
            cu.lead_req_id = 0;
        }
        uint64_t from = std::max(req.issue_ps, cu.crit_head_ps);
        if (req.completion_ps > from) {
            cu.epoch.crit_async_ps += req.completion_ps - from;
            cu.crit_head_ps = req.completion_ps;
        }
    }

    WavefrontSlot& slot = cu.slots[req.slot];
    if (slot.uid != req.wf_uid) return;  // slot was re-dispatched; drop silently
    if (req.is_load)
        --slot.outstanding_loads;
    else
        --slot.outstanding_stores;
    if (slot.status == SlotStatus::BlockedWaitcnt && slot.outstanding() <= slot.wait_bound)
        slot.status = SlotStatus::Ready;
}

void step_cycle(SimState& st, CuState& cu, uint64_t t, bool transition_stalled) {
    ++cu.epoch.cycles;

    int chosen = -1;
    if (!transition_stalled) {
        if (auto pick = schedule_next(cu)) chosen = static_cast<int>(*pick);
    }

    bool any_ready = false, any_blocked = false, any_exec = false;
    bool blocked_store_only = true;
    const uint32_t n = static_cast<uint32_t>(cu.slots.size());
    for (uint32_t i = 0; i < n; ++i) {
        WavefrontSlot& slot = cu.slots[i];
        switch (slot.status) {
            case SlotStatus::Ready:
                any_ready = true;
                if (static_cast<int>(i) == chosen)
                    issue(st, cu, i, t);
                else
                    ++slot.ready_wait_cycles;
                break;
            case SlotStatus::Exec:
                any_exec = true;
                ++slot.exec_cycles;
                if (--slot.exec_left == 0) commit(st, cu, i, t);
                break;
            case SlotStatus::BlockedWaitcnt:
                any_blocked = true;
                ++slot.stall_cycles;
                if (slot.outstanding_loads <= slot.wait_bound)
                    ++slot.store_stall_cycles;  // loads alone would not block
                else
                    blocked_store_only = false;
                break;
            case SlotStatus::Done:
            case SlotStatus::Empty:
                ++slot.idle_cycles;
                break;
        }
    }

    if (chosen >= 0) {
        ++cu.epoch.issued;
        if (cu.in_flight_loads > 0) ++cu.epoch.overlap;
    } else if (any_ready) {
        // transition blackout with runnable work: neither stall nor idle
    } else if (any_blocked) {
        ++cu.epoch.mem_stall;
        if (blocked_store_only) ++cu.epoch.store_stall;
    } else if (!any_exec) {
        ++cu.epoch.idle;
    }
}

void check_epoch_invariants(const SimState& st, const EpochResult& res) {
    for (const auto& cu : st.cus) {
        uint64_t slot_committed = 0, slot_critical = 0;
        for (const auto& slot : cu.slots) {
            uint64_t sum = slot.exec_cycles + slot.ready_wait_cycles + slot.stall_cycles +
                           slot.idle_cycles;
            if (sum != cu.epoch.cycles)
                throw std::logic_error("cycle conservation violated on cu " +
                                       std::to_string(cu.id));
            slot_committed += slot.committed;
            slot_critical += slot.critical;
        }
        if (slot_committed != cu.epoch.committed || slot_critical != cu.epoch.critical)
            throw std::logic_error("per-wavefront counts do not sum to cu counts on cu " +
                                   std::to_string(cu.id));
    }
    (void)res;
}

}  // namespace

uint32_t EpochResult::cu_end(uint32_t d) const {
    return std::min<uint32_t>((d + 1) * cus_per_domain, static_cast<uint32_t>(cu.size()));
}

uint64_t EpochResult::domain_critical(uint32_t d) const {
    uint64_t sum = 0;
    for (uint32_t j = cu_begin(d); j < cu_end(d); ++j) sum += cu[j].critical;
    return sum;
}

uint64_t EpochResult::domain_committed(uint32_t d) const {
    uint64_t sum = 0;
    for (uint32_t j = cu_begin(d); j < cu_end(d); ++j) sum += cu[j].committed;
    return sum;
}

uint64_t EpochResult::domain_cycles(uint32_t d) const {
    uint64_t sum = 0;
    for (uint32_t j = cu_begin(d); j < cu_end(d); ++j) sum += cu[j].cycles;
    return sum;
}

uint64_t EpochResult::domain_issued(uint32_t d) const {
    uint64_t sum = 0;
    for (uint32_t j = cu_begin(d); j < cu_end(d); ++j) sum += cu[j].issued;
    return sum;
}

SimState make_sim_state(const EngineConfig& cfg, std::vector<Kernel> kernels) {
    if (cfg.n_cus == 0 || cfg.n_slots == 0 || cfg.n_banks == 0)
        throw std::invalid_argument("engine config: n_cus, n_slots, n_banks must be >= 1");
    if (cfg.mem_freq_hz == 0) throw std::invalid_argument("engine config: mem_freq_hz is 0");
    if (cfg.cus_per_domain == 0)
        throw std::invalid_argument("engine config: cus_per_domain must be >= 1");
    if (kernels.empty()) throw std::invalid_argument("no kernels to run");

    for (auto& k : kernels) {
        k.validate();
        for (const auto& inst : k.instructions)
            if ((inst.kind == InstKind::Load || inst.kind == InstKind::Store) &&
                inst.arg0 >= cfg.n_banks)
                throw std::invalid_argument("kernel " + k.name + ": bank " +
                                            std::to_string(inst.arg0) + " out of range");
    }

    SimState st;
    st.cfg = cfg;
    st.kernels = std::make_shared<const std::vector<Kernel>>(std::move(kernels));
    st.cus.resize(cfg.n_cus);
    for (uint32_t j = 0; j < cfg.n_cus; ++j) {
        st.cus[j].id = j;
        st.cus[j].domain = j / cfg.cus_per_domain;
        st.cus[j].slots.resize(cfg.n_slots);
    }
    st.banks.resize(cfg.n_banks);
    st.domain_freq_hz.assign(cfg.n_domains(), 0);
    dispatch_kernel(st);
    return st;
}

std::optional<uint32_t> schedule_next(const CuState& cu) {
    int best = -1;
    uint32_t best_rank = 0;
    for (uint32_t i = 0; i < cu.slots.size(); ++i) {
        const WavefrontSlot& slot = cu.slots[i];
        if (slot.status != SlotStatus::Ready) continue;
        if (best < 0 || slot.age_rank < best_rank) {
            best = static_cast<int>(i);
            best_rank = slot.age_rank;
        }
    }
    if (best < 0) return std::nullopt;
    return static_cast<uint32_t>(best);
}

std::vector<uint64_t> count_critical(const EpochResult& epoch) {
    std::vector<uint64_t> out(epoch.n_domains, 0);
    for (uint32_t d = 0; d < epoch.n_domains; ++d) out[d] = epoch.domain_critical(d);
    return out;
}

EpochResult run_epoch(SimState& st, std::span<const uint64_t> domain_freq_hz,
                      uint64_t epoch_len_ps) {
    const EngineConfig& cfg = st.cfg;
    const uint32_t n_domains = cfg.n_domains();
    if (domain_freq_hz.size() != n_domains)
        throw std::invalid_argument("frequency assignment must cover every domain");
    if (epoch_len_ps == 0) throw std::invalid_argument("epoch_len_ps must be > 0");
    for (uint64_t f : domain_freq_hz)
        if (f == 0) throw std::invalid_argument("assigned frequency is 0");

    const uint64_t t0 = st.now_ps;
    const uint64_t t1 = t0 + epoch_len_ps;

    EpochResult res;
    res.epoch_index = st.epoch_index;
    res.epoch_len_ps = epoch_len_ps;
    res.n_domains = n_domains;
    res.cus_per_domain = cfg.cus_per_domain;
    res.freq_hz.assign(domain_freq_hz.begin(), domain_freq_hz.end());
    res.transitioned.assign(n_domains, 0);

    std::vector<uint64_t> stall_until(n_domains, t0);
    for (uint32_t d = 0; d < n_domains; ++d) {
        if (st.domain_freq_hz[d] != 0 && st.domain_freq_hz[d] != domain_freq_hz[d]) {
            stall_until[d] = t0 + cfg.transition_latency_ps;
            res.transitioned[d] = 1;
        }
        st.domain_freq_hz[d] = domain_freq_hz[d];
    }

    // Cycle grid per CU: cycle i fires at t0 + floor(i * epoch_len / n_cycles),
    // tracked incrementally so the schedule is exact in integer picoseconds.
    struct Cursor {
        uint64_t n_cycles;
        uint64_t left;
        uint64_t t;
        uint64_t acc;
        uint64_t dq, dr;
    };
    std::vector<Cursor> cursors(cfg.n_cus);
    for (uint32_t j = 0; j < cfg.n_cus; ++j) {
        uint64_t f = domain_freq_hz[st.cus[j].domain];
        uint64_t n = static_cast<uint64_t>((static_cast<unsigned __int128>(epoch_len_ps) * f) /
                                           kPsPerSecond);
        cursors[j] = {n, n, t0, 0, n ? epoch_len_ps / n : 0, n ? epoch_len_ps % n : 0};
    }

    for (auto& cu : st.cus) {
        cu.epoch = CuEpochCounters{};
        for (auto& slot : cu.slots) {
            slot.start_pc = slot.pc;
            slot.exec_cycles = slot.ready_wait_cycles = slot.stall_cycles = slot.idle_cycles =
                slot.store_stall_cycles = 0;
            slot.committed = slot.critical = 0;
        }
    }

    while (true) {
        uint64_t t_mem = kNoEvent;
        uint32_t mem_bank = 0;
        for (uint32_t b = 0; b < cfg.n_banks; ++b) {
            const auto& q = st.banks[b].in_flight;
            if (!q.empty() && q.front().completion_ps < t_mem) {
                t_mem = q.front().completion_ps;
                mem_bank = b;
            }
        }
        if (t_mem > t1) t_mem = kNoEvent;  // later epochs will drain it

        uint64_t t_cu = kNoEvent;
        for (uint32_t j = 0; j < cfg.n_cus; ++j)
            if (cursors[j].left > 0 && cursors[j].t < t_cu) t_cu = cursors[j].t;

        if (t_mem == kNoEvent && t_cu == kNoEvent) break;

        if (t_mem <= t_cu) {
            apply_completion(st, mem_bank);
            continue;
        }

        for (uint32_t j = 0; j < cfg.n_cus; ++j) {
            Cursor& c = cursors[j];
            if (c.left == 0 || c.t != t_cu) continue;
            CuState& cu = st.cus[j];
            step_cycle(st, cu, t_cu, t_cu < stall_until[cu.domain]);
            --c.left;
            c.t += c.dq;
            c.acc += c.dr;
            if (c.acc >= c.n_cycles) {
                ++c.t;
                c.acc -= c.n_cycles;
            }
        }
    }

    st.now_ps = t1;
    ++st.epoch_index;

    res.cu.reserve(cfg.n_cus);
    res.slots.reserve(static_cast<size_t>(cfg.n_cus) * cfg.n_slots);
    for (const auto& cu : st.cus) {
        res.cu.push_back(cu.epoch);
        for (uint32_t i = 0; i < cu.slots.size(); ++i) {
            const WavefrontSlot& s = cu.slots[i];
            SlotSnapshot snap;
            snap.cu = cu.id;
            snap.slot = i;
            snap.start_pc = s.start_pc;
            snap.end_pc = s.pc;
            snap.resident = s.uid != 0;
            snap.live_at_end = s.status == SlotStatus::Ready || s.status == SlotStatus::Exec ||
                               s.status == SlotStatus::BlockedWaitcnt;
            snap.exec_cycles = s.exec_cycles;
            snap.ready_wait_cycles = s.ready_wait_cycles;
            snap.stall_cycles = s.stall_cycles;
            snap.idle_cycles = s.idle_cycles;
            snap.store_stall_cycles = s.store_stall_cycles;
            snap.committed = s.committed;
            snap.critical = s.critical;
            res.slots.push_back(snap);
        }
    }

    check_epoch_invariants(st, res);
    return res;
}

}  // namespace dvfsim
