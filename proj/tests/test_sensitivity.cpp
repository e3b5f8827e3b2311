#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "dvfsim/engine.hpp"
#include "dvfsim/sensitivity.hpp"

using namespace dvfsim;

namespace {

Kernel manual_kernel(std::vector<Instruction> insts, uint32_t wavefronts = 1) {
    Kernel k;
    k.name = "manual";
    k.wavefront_count = wavefronts;
    for (size_t i = 0; i < insts.size(); ++i) insts[i].pc = i * 4;
    k.instructions = std::move(insts);
    k.validate();
    return k;
}

EngineConfig latency_100ns_config() {
    EngineConfig cfg;
    cfg.n_cus = 1;
    cfg.base_latency_memcycles = 160;  // 100 ns at 1.6 GHz
    cfg.service_time_memcycles = 1;
    return cfg;
}

}  // namespace

TEST_CASE("STALL counters cover a fully blocked epoch") {
    EngineConfig cfg;
    cfg.n_cus = 1;
    cfg.base_latency_memcycles = 160'000;  // 100 us, far beyond the epoch
    Kernel k = manual_kernel({Instruction::load(0, 0), Instruction::waitcnt(0, 0),
                              Instruction::end_kernel(0)});
    SimState st = make_sim_state(cfg, {k});
    std::vector<uint64_t> f{1'000'000'000};
    run_epoch(st, f, 1'000'000);  // load issues, wavefront blocks
    EpochResult res = run_epoch(st, f, 1'000'000);  // blocked throughout

    auto counters = collect_counters(res, EstimatorKind::StallCu);
    CHECK(counters[0].t_async_s == doctest::Approx(1e-6));
    CHECK(counters[0].t_core_s == doctest::Approx(0.0));
}

TEST_CASE("leading load ignores overlapped loads") {
    // load A at t=0, load B at t=50ns while A is still in flight
    std::vector<Instruction> insts{Instruction::load(0, 0)};
    for (int i = 0; i < 49; ++i) insts.push_back(Instruction::compute(0, 1));
    insts.push_back(Instruction::load(0, 1));
    insts.push_back(Instruction::waitcnt(0, 0));
    insts.push_back(Instruction::end_kernel(0));
    SimState st = make_sim_state(latency_100ns_config(), {manual_kernel(std::move(insts))});
    std::vector<uint64_t> f{1'000'000'000};
    EpochResult res = run_epoch(st, f, 1'000'000);

    auto lead = collect_counters(res, EstimatorKind::Lead);
    CHECK(lead[0].t_async_s == doctest::Approx(100e-9));
}

TEST_CASE("critical path chains dependent loads") {
    // A: 0 -> 100 ns; waitcnt; 19 computes; B: 120 -> 220 ns
    std::vector<Instruction> insts{Instruction::load(0, 0), Instruction::waitcnt(0, 0)};
    for (int i = 0; i < 19; ++i) insts.push_back(Instruction::compute(0, 1));
    insts.push_back(Instruction::load(0, 1));
    insts.push_back(Instruction::waitcnt(0, 0));
    insts.push_back(Instruction::end_kernel(0));
    SimState st = make_sim_state(latency_100ns_config(), {manual_kernel(std::move(insts))});
    std::vector<uint64_t> f{1'000'000'000};
    EpochResult res = run_epoch(st, f, 1'000'000);

    auto crit = collect_counters(res, EstimatorKind::Crit);
    CHECK(crit[0].t_async_s == doctest::Approx(200e-9));

    // both loads lead here (never overlapped), so LEAD agrees
    auto lead = collect_counters(res, EstimatorKind::Lead);
    CHECK(lead[0].t_async_s == doctest::Approx(200e-9));
}

TEST_CASE("CRISP adds store stalls on top of the critical path") {
    EngineConfig cfg = latency_100ns_config();
    Kernel k = manual_kernel({Instruction::store(0, 0), Instruction::waitcnt(0, 0),
                              Instruction::end_kernel(0)});
    SimState st = make_sim_state(cfg, {k});
    std::vector<uint64_t> f{1'000'000'000};
    EpochResult res = run_epoch(st, f, 1'000'000);

    auto crit = collect_counters(res, EstimatorKind::Crit);
    CHECK(crit[0].t_async_s == doctest::Approx(0.0));  // stores are off the load path
    auto crisp = collect_counters(res, EstimatorKind::CrispS);
    CHECK(crisp[0].t_async_s == doctest::Approx(99e-9));  // blocked cycles 1..99
}

TEST_CASE("predict_cu_instructions inverts the time-dilation model") {
    StallCounters c{0.6e-6, 0.4e-6, 1000, 2'000'000'000};
    CHECK(predict_cu_instructions(c, 1'000'000'000) == doctest::Approx(625.0));

    StallCounters pure_core{1e-6, 0.0, 1000, 2'000'000'000};
    CHECK(predict_cu_instructions(pure_core, 1'000'000'000) == doctest::Approx(500.0));

    StallCounters pure_mem{0.0, 1e-6, 1000, 2'000'000'000};
    CHECK(predict_cu_instructions(pure_mem, 1'000'000'000) == doctest::Approx(1000.0));
    CHECK(predict_cu_instructions(pure_mem, 3'000'000'000) == doctest::Approx(1000.0));
}

TEST_CASE("prediction is self-consistent at the source frequency") {
    StallCounters c{0.37e-6, 0.63e-6, 777, 1'700'000'000};
    CHECK(predict_cu_instructions(c, 1'700'000'000) == doctest::Approx(777.0));
}

TEST_CASE("prediction is monotone in target frequency and bounded") {
    StallCounters c{0.5e-6, 0.5e-6, 800, 1'500'000'000};
    double prev = 0.0;
    for (uint64_t f = 1'000'000'000; f <= 3'000'000'000; f += 100'000'000) {
        double w = predict_cu_instructions(c, f);
        CHECK(w >= prev);
        prev = w;
    }
    double bound = 800.0 * 1e-6 / c.t_async_s;
    CHECK(prev <= bound);
}

TEST_CASE("wavefront estimate matches the closed form") {
    // 1000 cycles at 1 GHz, 400 stalled, 600 in core, 300 committed
    SensitivityEstimate est = estimate_wavefront(500, 100, 300, 1'000'000, 1'000'000'000);
    CHECK(est.s == doctest::Approx(1.8e-7));   // 180 instructions per GHz
    CHECK(est.i0 == doctest::Approx(120.0));
    CHECK(est.predict(1'000'000'000) == doctest::Approx(300.0));
}

TEST_CASE("fully stalled wavefront has zero sensitivity") {
    SensitivityEstimate est = estimate_wavefront(0, 0, 0, 1'000'000, 1'000'000'000);
    CHECK(est.s == 0.0);
    CHECK(est.i0 == 0.0);
}

TEST_CASE("never-stalled wavefront has zero intercept") {
    SensitivityEstimate est = estimate_wavefront(700, 300, 1000, 1'000'000, 1'000'000'000);
    CHECK(est.s == doctest::Approx(1e-6));
    CHECK(est.i0 == doctest::Approx(0.0));
}

TEST_CASE("aggregate_domain sums component-wise") {
    std::vector<SensitivityEstimate> ests{{1e-9, 10.0, 1}, {2e-9, 20.0, 1}, {3e-9, 30.0, 1}};
    SensitivityEstimate sum = aggregate_domain(ests);
    CHECK(sum.s == doctest::Approx(6e-9));
    CHECK(sum.i0 == doctest::Approx(60.0));

    SensitivityEstimate single = aggregate_domain(std::span(ests.data(), 1));
    CHECK(single.s == ests[0].s);

    CHECK(aggregate_domain({}).s == 0.0);
}

TEST_CASE("aggregation is partition independent") {
    std::vector<SensitivityEstimate> all{{1e-9, 1, 1}, {2e-9, 2, 1}, {3e-9, 3, 1}, {4e-9, 4, 1}};
    SensitivityEstimate flat = aggregate_domain(all);
    SensitivityEstimate left = aggregate_domain(std::span(all.data(), 2));
    SensitivityEstimate right = aggregate_domain(std::span(all.data() + 2, 2));
    SensitivityEstimate split = aggregate_domain(std::vector<SensitivityEstimate>{left, right});
    CHECK(split.s == doctest::Approx(flat.s));
    CHECK(split.i0 == doctest::Approx(flat.i0));
}

TEST_CASE("fit_linear recovers a collinear model exactly") {
    std::vector<std::pair<uint64_t, double>> samples{
        {1'000'000'000, 600.0}, {2'000'000'000, 700.0}, {3'000'000'000, 800.0}};
    LinearFit fit = fit_linear(samples);
    CHECK(fit.estimate.s == doctest::Approx(1e-7).epsilon(1e-12));
    CHECK(fit.estimate.i0 == doctest::Approx(500.0).epsilon(1e-12));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit_linear on constant counts reports zero slope and unit R2") {
    std::vector<std::pair<uint64_t, double>> samples{
        {1'000'000'000, 42.0}, {2'000'000'000, 42.0}, {3'000'000'000, 42.0}};
    LinearFit fit = fit_linear(samples);
    CHECK(fit.estimate.s == 0.0);
    CHECK(fit.r2 == 1.0);
}

TEST_CASE("fit_linear rejects degenerate inputs") {
    std::vector<std::pair<uint64_t, double>> one{{1'000'000'000, 1.0}};
    CHECK_THROWS_AS(fit_linear(one), std::invalid_argument);
    std::vector<std::pair<uint64_t, double>> same{{1'000'000'000, 1.0}, {1'000'000'000, 2.0}};
    CHECK_THROWS_AS(fit_linear(same), std::invalid_argument);
}

TEST_CASE("fit_linear recovers synthetic linear data") {
    std::vector<std::pair<uint64_t, double>> samples;
    for (int i = 0; i < 10; ++i) {
        uint64_t f = 1'300'000'000 + 100'000'000ull * i;
        samples.emplace_back(f, 250.0 + 3.5e-7 * static_cast<double>(f));
    }
    LinearFit fit = fit_linear(samples);
    CHECK(fit.estimate.s == doctest::Approx(3.5e-7).epsilon(1e-9));
    CHECK(fit.estimate.i0 == doctest::Approx(250.0).epsilon(1e-9));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-9));
}
