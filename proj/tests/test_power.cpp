#include <doctest.h>

#include <stdexcept>

#include "dvfsim/power.hpp"

using namespace dvfsim;

TEST_CASE("domain power follows C V^2 A f plus leakage over efficiency") {
    PowerParams p;
    p.c_eff_per_cu_nf = 1.0;
    p.leakage_w_per_cu = 0.0;
    p.ivr_efficiency = {1.0};
    VfState vf{1'000'000'000, 0.8};
    CHECK(domain_power(p, vf, 0, 0.5, 1) == doctest::Approx(0.32));
}

TEST_CASE("zero activity leaves only leakage") {
    PowerParams p;
    p.c_eff_per_cu_nf = 2.0;
    p.leakage_w_per_cu = 0.7;
    p.ivr_efficiency = {0.9};
    VfState vf{2'000'000'000, 1.0};
    CHECK(domain_power(p, vf, 0, 0.0, 1) == doctest::Approx(0.7 / 0.9));
}

TEST_CASE("dynamic power is linear in frequency at fixed voltage") {
    PowerParams p;
    p.leakage_w_per_cu = 0.0;
    p.ivr_efficiency = {1.0, 1.0};
    VfState a{1'000'000'000, 0.9}, b{2'000'000'000, 0.9};
    CHECK(domain_power(p, b, 1, 0.6, 4) == doctest::Approx(2.0 * domain_power(p, a, 0, 0.6, 4)));
}

TEST_CASE("power is strictly increasing in f for an increasing voltage table") {
    PowerParams p;
    auto states = default_vf_states();
    double prev = 0.0;
    for (size_t i = 0; i < states.size(); ++i) {
        double w = domain_power(p, states[i], i, 0.5, 1);
        CHECK(w > prev);
        prev = w;
    }
}

TEST_CASE("epoch energy converts watts over picoseconds to picojoules") {
    CHECK(epoch_energy_pj(1.0, 1'000'000) == 1'000'000);  // 1 W for 1 us = 1 uJ
    CHECK(epoch_energy_pj(2.5, 400) == 1000);
    CHECK(epoch_energy_pj(0.0, 123'456) == 0);
}

TEST_CASE("ednp composes energy and delay") {
    CHECK(ednp(2.0, 3.0, 2) == doctest::Approx(18.0));
    CHECK(ednp(2.0, 3.0, 1) == doctest::Approx(6.0));
    CHECK(ednp(5.0, 1.0, 2) == doctest::Approx(5.0));
}

TEST_CASE("the energy ledger closes exactly in integer picojoules") {
    EnergyLedger ledger;
    int64_t want_dyn = 0, want_leak = 0, want_trans = 0;
    for (int e = 0; e < 1000; ++e) {
        int64_t d = 1000 + e * 7, l = 500 + e % 13, t = e % 3 ? 0 : 25;
        ledger.add(e, e % 4, d, l, t);
        want_dyn += d;
        want_leak += l;
        want_trans += t;
    }
    ledger.memory_pj = 123'456'789;
    CHECK(ledger.dynamic_total_pj() == want_dyn);
    CHECK(ledger.leakage_total_pj() == want_leak);
    CHECK(ledger.transition_total_pj() == want_trans);
    CHECK(ledger.total_pj() == want_dyn + want_leak + want_trans + 123'456'789);
}

TEST_CASE("activity model clamps the mapped utilization") {
    PowerParams p;
    p.activity_alpha = 2.0;
    p.activity_beta = -0.1;
    CHECK(p.activity(0.3) == doctest::Approx(0.5));
    CHECK(p.activity(0.9) == 1.0);
    CHECK(p.activity(0.0) == 0.0);
}

TEST_CASE("predicted power curve reflects the work curve's utilization") {
    PowerParams p;
    auto states = default_vf_states();
    std::vector<double> flat_work(states.size(), 850.0);
    auto power = predicted_power_curve(p, states, flat_work, 1, 1'000'000);
    REQUIRE(power.size() == states.size());
    // same work at higher f means lower utilization; V^2 still forces growth
    for (size_t i = 1; i < power.size(); ++i) CHECK(power[i] > power[i - 1]);
}
