#include "dvfsim/power.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dvfsim {

double PowerParams::activity(double utilization) const {
    return std::clamp(activity_alpha * utilization + activity_beta, 0.0, 1.0);
}

PowerSplit domain_power_split(const PowerParams& params, const VfState& vf, size_t state_idx,
                              double activity, uint32_t n_cus) {
    double eta = params.efficiency(state_idx);
    if (eta <= 0.0 || eta > 1.0) throw std::invalid_argument("ivr efficiency must be in (0,1]");
    double c = params.c_eff_per_cu_nf * 1e-9 * n_cus;
    PowerSplit split;
    split.dynamic_w =
        c * vf.voltage * vf.voltage * activity * static_cast<double>(vf.freq_hz) / eta;
    split.leakage_w = params.leakage_w_per_cu * n_cus / eta;
    return split;
}

double domain_power(const PowerParams& params, const VfState& vf, size_t state_idx,
                    double activity, uint32_t n_cus) {
    return domain_power_split(params, vf, state_idx, activity, n_cus).total_w();
}

std::vector<double> predicted_power_curve(const PowerParams& params,
                                          std::span<const VfState> states,
                                          std::span<const double> work, uint32_t n_cus,
                                          uint64_t epoch_len_ps) {
    if (work.size() != states.size())
        throw std::invalid_argument("work curve must cover every state");
    std::vector<double> power(states.size());
    for (size_t i = 0; i < states.size(); ++i) {
        double cycles = static_cast<double>(epoch_len_ps) * 1e-12 *
                        static_cast<double>(states[i].freq_hz);
        double util = cycles > 0.0 ? work[i] / (cycles * n_cus) : 0.0;
        power[i] = domain_power(params, states[i], i, params.activity(util), n_cus);
    }
    return power;
}

int64_t epoch_energy_pj(double power_w, uint64_t duration_ps) {
    return std::llround(power_w * static_cast<double>(duration_ps));
}

double ednp(double energy_j, double delay_s, int n) {
    return energy_j * std::pow(delay_s, n);
}

int64_t EnergyLedger::dynamic_total_pj() const {
    int64_t sum = 0;
    for (const auto& e : entries) sum += e.dynamic_pj;
    return sum;
}

int64_t EnergyLedger::leakage_total_pj() const {
    int64_t sum = 0;
    for (const auto& e : entries) sum += e.leakage_pj;
    return sum;
}

int64_t EnergyLedger::transition_total_pj() const {
    int64_t sum = 0;
    for (const auto& e : entries) sum += e.transition_pj;
    return sum;
}

int64_t EnergyLedger::total_pj() const {
    return dynamic_total_pj() + leakage_total_pj() + transition_total_pj() + memory_pj;
}

}  // namespace dvfsim
