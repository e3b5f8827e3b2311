#include "dvfsim/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dvfsim {

const char* estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::StallCu: return "STALL";
        case EstimatorKind::Lead: return "LEAD";
        case EstimatorKind::Crit: return "CRIT";
        case EstimatorKind::CrispS: return "CRISP";
        case EstimatorKind::WfStall: return "WF_STALL";
    }
    return "?";
}

std::vector<StallCounters> collect_counters(const EpochResult& epoch, EstimatorKind kind) {
    const double epoch_s = static_cast<double>(epoch.epoch_len_ps) * 1e-12;
    std::vector<StallCounters> out(epoch.cu.size());
    for (size_t j = 0; j < epoch.cu.size(); ++j) {
        const CuEpochCounters& c = epoch.cu[j];
        uint32_t domain = static_cast<uint32_t>(j) / epoch.cus_per_domain;
        uint64_t f = epoch.freq_hz[domain];
        double t_async = 0.0;
        switch (kind) {
            case EstimatorKind::StallCu:
                t_async = static_cast<double>(c.mem_stall) / static_cast<double>(f);
                break;
            case EstimatorKind::Lead:
                t_async = static_cast<double>(c.lead_async_ps) * 1e-12;
                break;
            case EstimatorKind::Crit:
                t_async = static_cast<double>(c.crit_async_ps) * 1e-12;
                break;
            case EstimatorKind::CrispS: {
                // Critical-path time plus store-only stalls minus the memory
                // latency already hidden under issue activity.
                double f_s = static_cast<double>(f);
                t_async = static_cast<double>(c.crit_async_ps) * 1e-12 +
                          static_cast<double>(c.store_stall) / f_s -
                          static_cast<double>(c.overlap) / f_s;
                break;
            }
            case EstimatorKind::WfStall:
                throw std::invalid_argument(
                    "WF_STALL is wavefront-level; use estimate_wavefront");
        }
        t_async = std::clamp(t_async, 0.0, epoch_s);
        out[j] = {epoch_s - t_async, t_async, c.critical, f};
    }
    return out;
}

double predict_cu_instructions(const StallCounters& counters, uint64_t f2_hz) {
    double epoch_s = counters.t_core_s + counters.t_async_s;
    double scaled = counters.t_async_s + (static_cast<double>(counters.f1_hz) /
                                          static_cast<double>(f2_hz)) *
                                             counters.t_core_s;
    if (scaled <= 0.0) return static_cast<double>(counters.committed);
    return static_cast<double>(counters.committed) * epoch_s / scaled;
}

SensitivityEstimate estimate_wavefront(uint64_t exec_cycles, uint64_t ready_wait_cycles,
                                       uint64_t committed, uint64_t epoch_len_ps,
                                       uint64_t freq_hz) {
    const double f = static_cast<double>(freq_hz);
    const double epoch_s = static_cast<double>(epoch_len_ps) * 1e-12;
    double t_core = static_cast<double>(exec_cycles + ready_wait_cycles) / f;
    double ipc = static_cast<double>(committed) / (epoch_s * f);
    SensitivityEstimate est;
    est.s = ipc * t_core;
    est.i0 = static_cast<double>(committed) - est.s * f;
    est.source_freq_hz = freq_hz;
    return est;
}

SensitivityEstimate estimate_wavefront(const SlotSnapshot& slot, uint64_t epoch_len_ps,
                                       uint64_t freq_hz) {
    return estimate_wavefront(slot.exec_cycles, slot.ready_wait_cycles, slot.critical,
                              epoch_len_ps, freq_hz);
}

SensitivityEstimate aggregate_domain(std::span<const SensitivityEstimate> estimates) {
    SensitivityEstimate sum;
    for (const auto& e : estimates) {
        sum.s += e.s;
        sum.i0 += e.i0;
        if (sum.source_freq_hz == 0) sum.source_freq_hz = e.source_freq_hz;
    }
    return sum;
}

LinearFit fit_linear(std::span<const std::pair<uint64_t, double>> samples) {
    if (samples.size() < 2) throw std::invalid_argument("fit_linear needs >= 2 samples");

    double mean_f = 0.0, mean_i = 0.0;
    for (const auto& [f, i] : samples) {
        mean_f += static_cast<double>(f);
        mean_i += i;
    }
    mean_f /= static_cast<double>(samples.size());
    mean_i /= static_cast<double>(samples.size());

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [f, i] : samples) {
        double df = static_cast<double>(f) - mean_f;
        double di = i - mean_i;
        sxx += df * df;
        sxy += df * di;
        syy += di * di;
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_linear needs >= 2 distinct frequencies");

    LinearFit fit;
    fit.estimate.s = sxy / sxx;
    fit.estimate.i0 = mean_i - fit.estimate.s * mean_f;
    fit.estimate.source_freq_hz = 0;

    if (syy <= 0.0) {
        fit.r2 = 1.0;  // constant counts: the flat line is an exact fit
        return fit;
    }
    double ss_res = 0.0;
    for (const auto& [f, i] : samples) {
        double r = i - (fit.estimate.i0 + fit.estimate.s * static_cast<double>(f));
        ss_res += r * r;
    }
    fit.r2 = 1.0 - ss_res / syy;
    return fit;
}

}  // namespace dvfsim
