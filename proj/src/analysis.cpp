#include "dvfsim/analysis.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace dvfsim {

double prediction_accuracy(double predicted, double actual) {
    if (actual <= 0.0) throw std::invalid_argument("prediction_accuracy needs actual > 0");
    double acc = 1.0 - std::abs(predicted - actual) / actual;
    return acc > 0.0 ? acc : 0.0;
}

void AccuracyStats::add(double predicted, double actual) {
    if (actual <= 0.0) {
        ++excluded;
        return;
    }
    sum += prediction_accuracy(predicted, actual);
    ++included;
}

double consecutive_variability(std::span<const double> series) {
    if (series.size() < 2)
        throw std::invalid_argument("consecutive_variability needs >= 2 samples");
    double mean_abs = 0.0;
    for (double s : series) mean_abs += std::abs(s);
    mean_abs /= static_cast<double>(series.size());
    if (mean_abs == 0.0) return 0.0;

    double delta = 0.0;
    for (size_t t = 1; t < series.size(); ++t) delta += std::abs(series[t] - series[t - 1]);
    return delta / static_cast<double>(series.size() - 1) / mean_abs;
}

double same_pc_variability(std::span<const PcSample> samples, uint32_t offset_bits) {
    struct GroupState {
        double last = 0.0;
        bool seen = false;
    };
    std::unordered_map<uint64_t, GroupState> groups;
    groups.reserve(samples.size());

    double mean_abs = 0.0;
    double delta_sum = 0.0;
    uint64_t pairs = 0;
    for (const PcSample& sample : samples) {
        mean_abs += std::abs(sample.s);
        // scope_key stays in the high bits, block id in the low bits
        uint64_t key = (sample.scope_key << 40) ^ (sample.start_pc >> offset_bits);
        GroupState& g = groups[key];
        if (g.seen) {
            delta_sum += std::abs(sample.s - g.last);
            ++pairs;
        }
        g.last = sample.s;
        g.seen = true;
    }
    if (pairs == 0) return -1.0;
    mean_abs /= static_cast<double>(samples.size());
    if (mean_abs == 0.0) return 0.0;
    return delta_sum / static_cast<double>(pairs) / mean_abs;
}

std::vector<std::pair<uint32_t, double>> offset_sweep(std::span<const PcSample> samples,
                                                      std::span<const uint32_t> offsets) {
    std::vector<std::pair<uint32_t, double>> out;
    out.reserve(offsets.size());
    for (uint32_t o : offsets) out.emplace_back(o, same_pc_variability(samples, o));
    return out;
}

std::vector<double> time_share(std::span<const uint32_t> selected_states, uint32_t n_states) {
    std::vector<double> share(n_states, 0.0);
    if (selected_states.empty()) return share;
    for (uint32_t s : selected_states) {
        if (s >= n_states) throw std::invalid_argument("state index out of range");
        share[s] += 1.0;
    }
    for (double& f : share) f /= static_cast<double>(selected_states.size());
    return share;
}

}  // namespace dvfsim
