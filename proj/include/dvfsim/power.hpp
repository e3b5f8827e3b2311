#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dvfsim/controller.hpp"

namespace dvfsim {

struct PowerParams {
    double c_eff_per_cu_nf = 3.0;   // effective switched capacitance per CU, nF
    double leakage_w_per_cu = 0.5;  // flat across the IVR voltage range
    std::vector<double> ivr_efficiency;  // per state; empty means 0.9 everywhere
    double activity_alpha = 1.0;  // activity = clamp(alpha * utilization + beta)
    double activity_beta = 0.0;
    double mem_power_w = 0.0;  // fixed-frequency memory domain, totals only

    double efficiency(size_t state_idx) const {
        return state_idx < ivr_efficiency.size() ? ivr_efficiency[state_idx] : 0.9;
    }
    double activity(double utilization) const;
};

// (C V^2 A f + leakage) / efficiency for a domain of n_cus compute units.
double domain_power(const PowerParams& params, const VfState& vf, size_t state_idx,
                    double activity, uint32_t n_cus);

struct PowerSplit {
    double dynamic_w = 0.0;  // IVR loss folded into both components
    double leakage_w = 0.0;
    double total_w() const { return dynamic_w + leakage_w; }
};
PowerSplit domain_power_split(const PowerParams& params, const VfState& vf, size_t state_idx,
                              double activity, uint32_t n_cus);

// Per-state power curve consistent with a predicted work curve: the activity
// at each state is the predicted issue-slot utilization.
std::vector<double> predicted_power_curve(const PowerParams& params,
                                          std::span<const VfState> states,
                                          std::span<const double> work, uint32_t n_cus,
                                          uint64_t epoch_len_ps);

// 1 W over 1 ps is exactly 1 picojoule; rounding happens once per charge.
int64_t epoch_energy_pj(double power_w, uint64_t duration_ps);

double ednp(double energy_j, double delay_s, int n);

struct EnergyLedger {
    struct Entry {
        uint64_t epoch = 0;
        uint32_t domain = 0;
        int64_t dynamic_pj = 0;
        int64_t leakage_pj = 0;
        int64_t transition_pj = 0;
    };
    std::vector<Entry> entries;
    int64_t memory_pj = 0;

    void add(uint64_t epoch, uint32_t domain, int64_t dyn, int64_t leak, int64_t trans) {
        entries.push_back({epoch, domain, dyn, leak, trans});
    }
    int64_t dynamic_total_pj() const;
    int64_t leakage_total_pj() const;
    int64_t transition_total_pj() const;
    int64_t total_pj() const;
    double total_j() const { return static_cast<double>(total_pj()) * 1e-12; }
};

}  // namespace dvfsim
