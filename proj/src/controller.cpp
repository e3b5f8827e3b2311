#include "dvfsim/controller.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dvfsim {

std::vector<VfState> default_vf_states() {
    std::vector<VfState> states;
    states.reserve(10);
    for (int i = 0; i < 10; ++i) {
        uint64_t f = 1'300'000'000ull + 100'000'000ull * static_cast<uint64_t>(i);
        double v = 0.75 + 0.30 * static_cast<double>(i) / 9.0;
        states.push_back({f, v});
    }
    return states;
}

uint64_t default_transition_latency_ps(uint64_t epoch_len_ps) {
    return epoch_len_ps / 250;
}

std::vector<double> predicted_work_curve(const SensitivityEstimate& est,
                                         std::span<const VfState> states) {
    std::vector<double> work(states.size());
    for (size_t i = 0; i < states.size(); ++i) work[i] = est.predict(states[i].freq_hz);
    return work;
}

std::vector<double> predicted_work_curve(const StallCounters& counters,
                                         std::span<const VfState> states) {
    std::vector<double> work(states.size());
    for (size_t i = 0; i < states.size(); ++i) {
        double w = predict_cu_instructions(counters, states[i].freq_hz);
        work[i] = w > 0.0 ? w : 0.0;
    }
    return work;
}

uint32_t select_frequency(std::span<const double> work, std::span<const double> power,
                          std::span<const VfState> states, const Objective& obj,
                          const RangeClamp& clamp) {
    if (work.size() != states.size() || power.size() != states.size())
        throw std::invalid_argument("work/power curves must cover every state");
    if (states.empty()) throw std::invalid_argument("no V/f states");

    int fastest = -1;
    for (size_t i = 0; i < states.size(); ++i)
        if (clamp.contains(states[i].freq_hz) &&
            (fastest < 0 || states[i].freq_hz > states[fastest].freq_hz))
            fastest = static_cast<int>(i);
    if (fastest < 0) throw std::invalid_argument("clamp excludes every V/f state");

    if (obj.kind == ObjectiveKind::EdnP) {
        if (obj.n != 1 && obj.n != 2) throw std::invalid_argument("EDnP n must be 1 or 2");
        int best = -1;
        double best_score = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < states.size(); ++i) {
            if (!clamp.contains(states[i].freq_hz)) continue;
            double score = work[i] > 0.0
                               ? power[i] / std::pow(work[i], obj.n + 1)
                               : std::numeric_limits<double>::infinity();
            if (best < 0 || score < best_score ||
                (score == best_score && states[i].freq_hz < states[best].freq_hz)) {
                best = static_cast<int>(i);
                best_score = score;
            }
        }
        return static_cast<uint32_t>(best);
    }

    if (obj.max_perf_loss <= 0.0 || obj.max_perf_loss >= 1.0)
        throw std::invalid_argument("max_perf_loss must be in (0,1)");
    double threshold = (1.0 - obj.max_perf_loss) * work[fastest];
    int best = -1;
    for (size_t i = 0; i < states.size(); ++i) {
        if (!clamp.contains(states[i].freq_hz)) continue;
        if (work[i] < threshold) continue;
        if (best < 0 || power[i] < power[best] ||
            (power[i] == power[best] && states[i].freq_hz < states[best].freq_hz))
            best = static_cast<int>(i);
    }
    if (best < 0) return static_cast<uint32_t>(fastest);  // never violate performance intent
    return static_cast<uint32_t>(best);
}

TransitionCharge apply_transition(const SimState& state, uint32_t domain, const VfState& next,
                                  const TransitionModel& tm) {
    if (domain >= state.domain_freq_hz.size())
        throw std::invalid_argument("domain out of range");
    uint64_t current = state.domain_freq_hz[domain];
    if (current == 0 || current == next.freq_hz) return {};
    return {true, tm.latency_ps, tm.energy_pj};
}

}  // namespace dvfsim
