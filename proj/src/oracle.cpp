#include "dvfsim/oracle.hpp"

#include <cmath>
#include <future>
#include <stdexcept>

namespace dvfsim {

SampleAssignment latin_square(uint32_t n_states, uint32_t n_domains, uint64_t seed) {
    if (n_states == 0) throw std::invalid_argument("latin_square needs n_states >= 1");
    if (n_domains == 0) throw std::invalid_argument("latin_square needs n_domains >= 1");
    SampleAssignment a;
    a.n_states = n_states;
    a.n_domains = n_domains;
    a.m.resize(static_cast<size_t>(n_states) * n_domains);
    uint32_t rot = static_cast<uint32_t>(seed % n_states);
    for (uint32_t k = 0; k < n_states; ++k)
        for (uint32_t j = 0; j < n_domains; ++j)
            a.m[static_cast<size_t>(k) * n_domains + j] = (j + k + rot) % n_states;
    return a;
}

namespace {

struct SampleRow {
    std::vector<uint64_t> domain_critical;  // per domain
    std::vector<uint64_t> slot_critical;    // per cu*slot
    std::vector<uint64_t> slot_start_pc;
    std::vector<uint8_t> slot_active;
};

SampleRow run_sample(const SimState& base, const SampleAssignment& assign, uint32_t row,
                     std::span<const VfState> states, uint64_t epoch_len_ps) {
    SimState copy = base;
    std::vector<uint64_t> freqs(assign.n_domains);
    for (uint32_t j = 0; j < assign.n_domains; ++j)
        freqs[j] = states[assign.at(row, j)].freq_hz;
    EpochResult res = run_epoch(copy, freqs, epoch_len_ps);

    SampleRow out;
    out.domain_critical.resize(res.n_domains);
    for (uint32_t d = 0; d < res.n_domains; ++d) out.domain_critical[d] = res.domain_critical(d);
    out.slot_critical.reserve(res.slots.size());
    out.slot_start_pc.reserve(res.slots.size());
    out.slot_active.reserve(res.slots.size());
    for (const auto& s : res.slots) {
        out.slot_critical.push_back(s.critical);
        out.slot_start_pc.push_back(s.start_pc);
        bool active = s.resident && (s.exec_cycles + s.ready_wait_cycles + s.stall_cycles) > 0;
        out.slot_active.push_back(active ? 1 : 0);
    }
    return out;
}

}  // namespace

OracleResult sample_epoch(const SimState& state, const SampleAssignment& assign,
                          std::span<const VfState> states, uint64_t epoch_len_ps,
                          bool parallel) {
    if (assign.n_states != states.size())
        throw std::invalid_argument("sample assignment does not match the state list");
    if (assign.n_domains != state.cfg.n_domains())
        throw std::invalid_argument("sample assignment does not match the domain count");

    const uint32_t n_states = assign.n_states;
    std::vector<SampleRow> rows(n_states);
    if (parallel && n_states > 1) {
        std::vector<std::future<SampleRow>> futures;
        futures.reserve(n_states);
        for (uint32_t k = 0; k < n_states; ++k)
            futures.push_back(std::async(std::launch::async, run_sample, std::cref(state),
                                         std::cref(assign), k, states, epoch_len_ps));
        for (uint32_t k = 0; k < n_states; ++k) rows[k] = futures[k].get();
    } else {
        for (uint32_t k = 0; k < n_states; ++k)
            rows[k] = run_sample(state, assign, k, states, epoch_len_ps);
    }

    OracleResult out;
    out.n_states = n_states;
    out.n_domains = assign.n_domains;
    out.n_cus = state.cfg.n_cus;
    out.n_slots = state.cfg.n_slots;
    out.domain_counts.assign(static_cast<size_t>(out.n_domains) * n_states, 0);
    size_t n_all_slots = static_cast<size_t>(out.n_cus) * out.n_slots;
    out.slot_counts.assign(n_all_slots * n_states, 0);
    out.slot_start_pc.assign(n_all_slots, 0);
    out.slot_active.assign(n_all_slots, 0);

    for (uint32_t k = 0; k < n_states; ++k) {
        const SampleRow& row = rows[k];
        for (uint32_t d = 0; d < out.n_domains; ++d) {
            uint32_t s = assign.at(k, d);
            out.domain_counts[static_cast<size_t>(d) * n_states + s] = row.domain_critical[d];
        }
        for (size_t i = 0; i < n_all_slots; ++i) {
            uint32_t cu = static_cast<uint32_t>(i / out.n_slots);
            uint32_t s = assign.at(k, cu / state.cfg.cus_per_domain);
            out.slot_counts[i * n_states + s] = row.slot_critical[i];
            out.slot_start_pc[i] = row.slot_start_pc[i];
            if (row.slot_active[i]) out.slot_active[i] = 1;
        }
    }
    return out;
}

EpochResult select_and_reexecute(SimState& state, OracleResult& oracle,
                                 std::span<const VfState> states, const Objective& obj,
                                 const RangeClamp& clamp, const PowerParams& power,
                                 uint64_t epoch_len_ps) {
    const uint32_t n_domains = oracle.n_domains;
    oracle.selected.assign(n_domains, 0);
    std::vector<uint64_t> freqs(n_domains);
    for (uint32_t d = 0; d < n_domains; ++d) {
        std::vector<double> work(oracle.n_states);
        for (uint32_t s = 0; s < oracle.n_states; ++s)
            work[s] = static_cast<double>(oracle.count(d, s));
        std::vector<double> pw = predicted_power_curve(power, states, work,
                                                       state.cfg.cus_in_domain(d), epoch_len_ps);
        uint32_t sel = select_frequency(work, pw, states, obj, clamp);
        oracle.selected[d] = sel;
        freqs[d] = states[sel].freq_hz;
    }

    EpochResult res = run_epoch(state, freqs, epoch_len_ps);

    oracle.validation_error.assign(n_domains, 0.0);
    for (uint32_t d = 0; d < n_domains; ++d) {
        uint64_t sampled = oracle.count(d, oracle.selected[d]);
        uint64_t actual = res.domain_critical(d);
        if (sampled == 0)
            oracle.validation_error[d] = actual == 0 ? 0.0 : 1.0;
        else
            oracle.validation_error[d] =
                std::abs(static_cast<double>(actual) - static_cast<double>(sampled)) /
                static_cast<double>(sampled);
    }
    return res;
}

SensitivityEstimate oracle_sensitivity(const OracleResult& oracle, uint32_t domain,
                                       std::span<const VfState> states) {
    std::vector<std::pair<uint64_t, double>> samples;
    samples.reserve(oracle.n_states);
    for (uint32_t s = 0; s < oracle.n_states; ++s)
        samples.emplace_back(states[s].freq_hz, static_cast<double>(oracle.count(domain, s)));
    return fit_linear(samples).estimate;
}

SensitivityEstimate oracle_slot_sensitivity(const OracleResult& oracle, uint32_t cu,
                                            uint32_t slot, std::span<const VfState> states) {
    std::vector<std::pair<uint64_t, double>> samples;
    samples.reserve(oracle.n_states);
    for (uint32_t s = 0; s < oracle.n_states; ++s)
        samples.emplace_back(states[s].freq_hz,
                             static_cast<double>(oracle.slot_count(cu, slot, s)));
    return fit_linear(samples).estimate;
}

}  // namespace dvfsim
