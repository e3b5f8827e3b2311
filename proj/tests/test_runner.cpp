#include <doctest.h>

#include <stdexcept>

#include <json.hpp>

#include "dvfsim/config.hpp"
#include "dvfsim/runner.hpp"

using namespace dvfsim;
using nlohmann::json;

namespace {

RunConfig small_config() {
    RunConfig cfg = parse_run_config(json::object());
    cfg.engine.n_cus = 2;
    cfg.workload.kind = WorkloadConfig::Kind::Loop;
    cfg.workload.body_len = 64;
    cfg.workload.mem_ratio = 0.3;
    cfg.workload.trip_count = 60;
    cfg.workload.wavefront_count = 16;
    cfg.max_epochs = 500;
    return cfg;
}

// report bytes without the config echo (configs may differ intentionally)
std::string report_body(const RunReport& rep) {
    auto j = rep.to_json();
    j.erase("config");
    return j.dump();
}

}  // namespace

TEST_CASE("identical configs produce byte-identical reports") {
    RunConfig cfg = small_config();
    cfg.policy = PolicyKind::PcStall;
    RunReport a = run_policy(cfg);
    RunReport b = run_policy(cfg);
    CHECK(a.to_json().dump() == b.to_json().dump());
    CHECK(a.trace_csv() == b.trace_csv());
    CHECK(a.completed);
}

TEST_CASE("oracle runs are deterministic with parallel sampling") {
    RunConfig cfg = small_config();
    cfg.policy = PolicyKind::Oracle;
    cfg.workload.trip_count = 40;
    cfg.parallel_sampling = true;
    RunReport a = run_policy(cfg);
    cfg.parallel_sampling = false;
    RunReport b = run_policy(cfg);
    CHECK(report_body(a) == report_body(b));
    CHECK(a.trace_csv() == b.trace_csv());
    CHECK(a.completed);
}

TEST_CASE("single-domain oracle predicts with perfect accuracy") {
    RunConfig cfg = small_config();
    cfg.engine.n_cus = 1;
    cfg.workload.wavefront_count = 8;
    cfg.workload.trip_count = 40;
    cfg.policy = PolicyKind::Oracle;
    RunReport rep = run_policy(cfg);
    CHECK(rep.completed);
    CHECK(rep.accuracy.included > 0);
    CHECK(rep.accuracy.mean() == doctest::Approx(1.0));
}

TEST_CASE("a zero-sensitivity workload settles at the minimum frequency") {
    RunConfig cfg = small_config();
    cfg.engine.n_cus = 1;
    cfg.engine.base_latency_memcycles = 160'000;  // 100 us: counts are flat in f
    cfg.workload.body_len = 2;
    cfg.workload.mem_ratio = 1.0;
    cfg.workload.wavefront_count = 1;
    cfg.workload.trip_count = 30;
    cfg.policy = PolicyKind::PcStall;
    cfg.max_epochs = 40;
    RunReport rep = run_policy(cfg);
    REQUIRE_FALSE(rep.time_share_by_domain.empty());
    const auto& share = rep.time_share_by_domain[0];
    CHECK(share[0] == doctest::Approx(1.0));  // every selected epoch at f_min
}

TEST_CASE("static runs hold one state for the whole run") {
    RunConfig cfg = small_config();
    cfg.policy = PolicyKind::Static;
    cfg.static_freq_hz = 1'700'000'000;
    RunReport rep = run_policy(cfg);
    uint32_t idx = cfg.state_index(1'700'000'000);
    CHECK(rep.time_share_by_domain[0][idx] == doctest::Approx(1.0));
    CHECK(rep.accuracy.included == 0);  // statics make no predictions
    for (const auto& row : rep.trace) CHECK(row.transitioned == 0);
}

TEST_CASE("pcstall reaches a high steady hit ratio on a small loop") {
    RunConfig cfg = small_config();
    cfg.workload.body_len = 48;
    cfg.workload.mem_ratio = 0.25;
    cfg.policy = PolicyKind::PcStall;
    RunReport rep = run_policy(cfg);
    CHECK(rep.pc_hit_ratio > 0.8);
}

TEST_CASE("reactive baselines converge on a steady workload") {
    RunConfig cfg = small_config();
    cfg.engine.n_cus = 1;
    cfg.workload.mem_ratio = 0.0;
    cfg.workload.body_len = 32;
    cfg.workload.trip_count = 900;
    cfg.workload.wavefront_count = 4;
    cfg.policy = PolicyKind::Stall;
    RunReport rep = run_policy(cfg);
    CHECK(rep.accuracy.mean() > 0.95);
}

TEST_CASE("energy totals close against the per-epoch trace") {
    RunConfig cfg = small_config();
    cfg.policy = PolicyKind::PcStall;
    cfg.power.mem_power_w = 2.0;
    RunReport rep = run_policy(cfg);
    int64_t dyn = 0, leak = 0, trans = 0;
    for (const auto& row : rep.trace) {
        dyn += row.dynamic_pj;
        leak += row.leakage_pj;
        trans += row.transition_pj;
    }
    CHECK(dyn == rep.dynamic_pj);
    CHECK(leak == rep.leakage_pj);
    CHECK(trans == rep.transition_pj);
    CHECK(rep.total_pj == dyn + leak + trans + rep.memory_pj);
}

TEST_CASE("config defaults round-trip through json") {
    RunConfig cfg = parse_run_config(json::object());
    auto j1 = run_config_to_json(cfg);
    RunConfig back = parse_run_config(j1);
    CHECK(run_config_to_json(back).dump() == j1.dump());
}

TEST_CASE("config errors name the offending field") {
    json j;
    j["workload"]["kind"] = "file";
    try {
        parse_run_config(j);
        FAIL("expected a config error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("workload.path") != std::string::npos);
    }

    json bad_policy;
    bad_policy["policy"] = "ACCPC";
    bad_policy["oracle_sampling"] = "off";
    try {
        parse_run_config(bad_policy);
        FAIL("expected a config error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("oracle_sampling") != std::string::npos);
    }

    json bad_static;
    bad_static["policy"] = "STATIC";
    bad_static["static_freq_mhz"] = 1750;  // not a legal state
    auto errors = validate_run_config_json(bad_static);
    REQUIRE_FALSE(errors.empty());
    CHECK(errors[0].find("states") != std::string::npos);
}

TEST_CASE("matrix reports normalized metrics against the static baseline") {
    MatrixConfig m;
    m.base = small_config();
    m.base.workload.trip_count = 30;
    m.policies = {PolicyKind::PcStall, PolicyKind::Stall};
    m.static_freqs_hz = {1'300'000'000, 1'700'000'000, 2'200'000'000};
    m.epoch_lens_ps = {m.base.epoch_len_ps};
    m.granularities = {1};
    m.workloads = {m.base.workload};
    m.baseline_freq_hz = 1'700'000'000;

    MatrixReport rep = run_matrix(m);
    REQUIRE(rep.rows.size() == 5);  // 3 statics + 2 policies
    const MatrixRow* baseline = nullptr;
    for (const auto& row : rep.rows)
        if (row.policy == "STATIC-1700") baseline = &row;
    REQUIRE(baseline != nullptr);
    CHECK(baseline->norm_ed2p == doctest::Approx(1.0));
    CHECK(baseline->norm_edp == doctest::Approx(1.0));
    CHECK_FALSE(rep.summaries.empty());
}

TEST_CASE("matrix rejects a baseline outside the legal states") {
    json j;
    j["baseline_freq_mhz"] = 1750;
    CHECK_THROWS_AS(parse_matrix_config(j), std::invalid_argument);
}
