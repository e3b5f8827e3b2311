#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "dvfsim/controller.hpp"
#include "dvfsim/power.hpp"

using namespace dvfsim;

namespace {

// Independent argmin used to pin select_frequency against refactors.
uint32_t brute_force_select(std::span<const double> work, std::span<const double> power,
                            std::span<const VfState> states, const Objective& obj,
                            const RangeClamp& clamp) {
    int best = -1;
    double best_score = 0.0;
    if (obj.kind == ObjectiveKind::EdnP) {
        for (size_t i = 0; i < states.size(); ++i) {
            if (!clamp.contains(states[i].freq_hz)) continue;
            double score = work[i] > 0.0 ? power[i] / std::pow(work[i], obj.n + 1)
                                         : std::numeric_limits<double>::infinity();
            if (best < 0 || score < best_score ||
                (score == best_score && states[i].freq_hz < states[best].freq_hz)) {
                best = static_cast<int>(i);
                best_score = score;
            }
        }
        return static_cast<uint32_t>(best);
    }
    int fastest = -1;
    for (size_t i = 0; i < states.size(); ++i)
        if (clamp.contains(states[i].freq_hz) &&
            (fastest < 0 || states[i].freq_hz > states[fastest].freq_hz))
            fastest = static_cast<int>(i);
    double thr = (1.0 - obj.max_perf_loss) * work[fastest];
    for (size_t i = 0; i < states.size(); ++i) {
        if (!clamp.contains(states[i].freq_hz) || work[i] < thr) continue;
        if (best < 0 || power[i] < power[best] ||
            (power[i] == power[best] && states[i].freq_hz < states[best].freq_hz))
            best = static_cast<int>(i);
    }
    return best < 0 ? static_cast<uint32_t>(fastest) : static_cast<uint32_t>(best);
}

}  // namespace

TEST_CASE("default V/f table has ten states with increasing voltage") {
    auto states = default_vf_states();
    REQUIRE(states.size() == 10);
    CHECK(states.front().freq_hz == 1'300'000'000);
    CHECK(states.back().freq_hz == 2'200'000'000);
    for (size_t i = 1; i < states.size(); ++i) {
        CHECK(states[i].freq_hz == states[i - 1].freq_hz + 100'000'000);
        CHECK(states[i].voltage > states[i - 1].voltage);
    }
    CHECK(states.front().voltage == doctest::Approx(0.75));
    CHECK(states.back().voltage == doctest::Approx(1.05));
}

TEST_CASE("transition latency default scales with epoch length") {
    CHECK(default_transition_latency_ps(1'000'000) == 4'000);        // 4 ns at 1 us
    CHECK(default_transition_latency_ps(10'000'000) == 40'000);      // 40 ns at 10 us
    CHECK(default_transition_latency_ps(50'000'000) == 200'000);     // 200 ns at 50 us
    CHECK(default_transition_latency_ps(100'000'000) == 400'000);    // 400 ns at 100 us
}

TEST_CASE("predicted work curve evaluates the linear model per state") {
    auto states = default_vf_states();
    SensitivityEstimate est{2e-7, 1000.0, 0};  // 200 instructions per GHz
    auto work = predicted_work_curve(est, states);
    CHECK(work.front() == doctest::Approx(1260.0));
    CHECK(work.back() == doctest::Approx(1440.0));

    SensitivityEstimate flat{0.0, 500.0, 0};
    for (double w : predicted_work_curve(flat, states)) CHECK(w == doctest::Approx(500.0));
}

TEST_CASE("negative sensitivity clamps to a monotone non-negative curve") {
    auto states = default_vf_states();
    SensitivityEstimate noisy{-4e-7, 600.0, 0};
    auto work = predicted_work_curve(noisy, states);
    for (size_t i = 1; i < work.size(); ++i) CHECK(work[i] <= work[i - 1]);
    for (double w : work) CHECK(w >= 0.0);
    CHECK(work.back() == 0.0);  // 600 - 880 clamps
}

TEST_CASE("zero sensitivity selects the minimum frequency") {
    auto states = default_vf_states();
    std::vector<double> work(states.size(), 800.0);
    std::vector<double> power;
    for (const auto& s : states) power.push_back(1e-9 * s.freq_hz);
    for (int n : {1, 2}) {
        Objective obj{ObjectiveKind::EdnP, n, 0.0};
        CHECK(select_frequency(work, power, states, obj, {}) == 0);
    }
}

TEST_CASE("constant power with increasing work selects the maximum frequency") {
    auto states = default_vf_states();
    std::vector<double> work;
    for (const auto& s : states) work.push_back(1e-7 * s.freq_hz);
    std::vector<double> power(states.size(), 5.0);
    CHECK(select_frequency(work, power, states, Objective::ed2p(), {}) == states.size() - 1);
}

TEST_CASE("selection matches brute force on the worked example") {
    auto states = default_vf_states();
    std::vector<double> work, power;
    for (const auto& s : states) {
        double f_ghz = static_cast<double>(s.freq_hz) * 1e-9;
        work.push_back(1000.0 + 200.0 * f_ghz);
        power.push_back(0.5 * s.voltage * s.voltage * f_ghz);
    }
    Objective obj = Objective::ed2p();
    CHECK(select_frequency(work, power, states, obj, {}) ==
          brute_force_select(work, power, states, obj, {}));
}

TEST_CASE("selected state always lies inside the clamp") {
    auto states = default_vf_states();
    std::vector<double> work, power;
    for (const auto& s : states) {
        work.push_back(2e-7 * s.freq_hz);
        power.push_back(1e-9 * s.freq_hz);
    }
    RangeClamp clamp{1'500'000'000, 1'900'000'000};
    for (int n : {1, 2}) {
        uint32_t sel = select_frequency(work, power, states, {ObjectiveKind::EdnP, n, 0.0},
                                        clamp);
        CHECK(clamp.contains(states[sel].freq_hz));
    }
}

TEST_CASE("selection is invariant under positive scaling of either curve") {
    auto states = default_vf_states();
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> work, power;
        for (size_t i = 0; i < states.size(); ++i) {
            work.push_back(100.0 + static_cast<double>(rng() % 10'000));
            power.push_back(1.0 + static_cast<double>(rng() % 1'000) / 100.0);
        }
        Objective obj{ObjectiveKind::EdnP, trial % 2 ? 1 : 2, 0.0};
        uint32_t base = select_frequency(work, power, states, obj, {});
        std::vector<double> work2 = work, power2 = power;
        for (auto& w : work2) w *= 37.5;
        for (auto& p : power2) p *= 0.004;
        CHECK(select_frequency(work2, power2, states, obj, {}) == base);
    }
}

TEST_CASE("higher sensitivity never lowers the selected frequency") {
    auto states = default_vf_states();
    std::vector<double> power;
    for (const auto& s : states)
        power.push_back(3e-9 * s.voltage * s.voltage * static_cast<double>(s.freq_hz) * 0.7 +
                        0.5);
    uint32_t prev = 0;
    for (double s_per_ghz = 0.0; s_per_ghz <= 1000.0; s_per_ghz += 50.0) {
        SensitivityEstimate est{s_per_ghz * 1e-9, 500.0, 0};
        auto work = predicted_work_curve(est, states);
        uint32_t sel = select_frequency(work, power, states, Objective::ed2p(), {});
        CHECK(sel >= prev);
        prev = sel;
    }
}

TEST_CASE("energy-bounded objective keeps work above the floor") {
    auto states = default_vf_states();
    std::vector<double> work, power;
    for (const auto& s : states) {
        double f_ghz = static_cast<double>(s.freq_hz) * 1e-9;
        work.push_back(400.0 + 300.0 * f_ghz);
        power.push_back(2.0 * f_ghz * s.voltage * s.voltage);
    }
    Objective obj = Objective::energy_bounded(0.05);
    uint32_t sel = select_frequency(work, power, states, obj, {});
    CHECK(work[sel] >= 0.95 * work.back());
    CHECK(sel < states.size() - 1);  // some slack exists at 5%

    // a nearly-zero budget leaves only the fastest state feasible
    Objective tight = Objective::energy_bounded(1e-12);
    CHECK(select_frequency(work, power, states, tight, {}) == states.size() - 1);

    Objective invalid{ObjectiveKind::EnergyBounded, 0, 0.0};
    CHECK_THROWS_AS(select_frequency(work, power, states, invalid, {}), std::invalid_argument);
}

TEST_CASE("selection equals brute force on randomized instances") {
    auto states = default_vf_states();
    std::mt19937_64 rng(42);
    int mismatches = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<double> work, power;
        double base = static_cast<double>(rng() % 2000);
        double slope = static_cast<double>(rng() % 500);
        for (const auto& s : states) {
            double f_ghz = static_cast<double>(s.freq_hz) * 1e-9;
            work.push_back(std::max(0.0, base + slope * f_ghz));
            power.push_back(0.1 + 2.5 * f_ghz * s.voltage * s.voltage);
        }
        Objective obj;
        switch (trial % 3) {
            case 0: obj = Objective::edp(); break;
            case 1: obj = Objective::ed2p(); break;
            default: obj = Objective::energy_bounded(0.02 + (trial % 7) * 0.01); break;
        }
        if (select_frequency(work, power, states, obj, {}) !=
            brute_force_select(work, power, states, obj, {}))
            ++mismatches;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("apply_transition prices only real changes") {
    EngineConfig cfg;
    cfg.n_cus = 2;
    Kernel k;
    k.name = "t";
    k.wavefront_count = 1;
    k.instructions = {Instruction::compute(0, 1), Instruction::end_kernel(4)};
    SimState st = make_sim_state(cfg, {k});
    TransitionModel tm{4'000, 250};

    // before any epoch every domain is unpriced
    CHECK_FALSE(apply_transition(st, 0, {1'700'000'000, 0.9}, tm).changed);

    std::vector<uint64_t> f{1'700'000'000, 1'700'000'000};
    run_epoch(st, f, 1'000'000);
    TransitionCharge same = apply_transition(st, 0, {1'700'000'000, 0.9}, tm);
    CHECK_FALSE(same.changed);
    CHECK(same.energy_pj == 0);

    TransitionCharge change = apply_transition(st, 1, {1'800'000'000, 0.92}, tm);
    CHECK(change.changed);
    CHECK(change.latency_ps == 4'000);
    CHECK(change.energy_pj == 250);
}
