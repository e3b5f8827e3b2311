#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dvfsim/controller.hpp"
#include "dvfsim/engine.hpp"
#include "dvfsim/power.hpp"
#include "dvfsim/predictor.hpp"
#include "dvfsim/workload.hpp"

namespace dvfsim {

enum class PolicyKind : uint8_t {
    Static,
    Stall,
    Lead,
    Crit,
    Crisp,
    AccReac,
    PcStall,
    AccPc,
    Oracle,
};

const char* policy_name(PolicyKind kind);
PolicyKind policy_from_name(const std::string& name);

// True for designs fed by the fork-pre-execute sampler rather than hardware
// counters (Table-III "Accurate Estimate" rows plus the oracle itself).
bool policy_needs_sampling(PolicyKind kind);

struct WorkloadConfig {
    enum class Kind : uint8_t { Loop, Phased, File };
    Kind kind = Kind::Phased;

    // loop
    uint32_t body_len = 32;
    double mem_ratio = 0.0;
    uint32_t bank_spread = 16;
    uint32_t trip_count = 100;
    uint32_t wavefront_count = 40;
    uint32_t waitcnt_distance = 0;

    // phased
    PhaseProfile profile;

    // file
    std::string path;

    std::vector<Kernel> build(uint64_t seed, uint64_t epoch_len_ps) const;
    std::string label() const;
};

struct RunConfig {
    int schema_version = 1;
    uint64_t seed = 0;
    WorkloadConfig workload;
    EngineConfig engine;
    uint64_t epoch_len_ps = 1'000'000;
    std::vector<VfState> states;  // ascending frequency
    RangeClamp clamp;
    TransitionModel transition;
    PowerParams power;
    PcTableConfig table;
    uint32_t table_scope_cus = 1;
    PolicyKind policy = PolicyKind::PcStall;
    uint64_t static_freq_hz = 1'700'000'000;
    uint64_t initial_freq_hz = 1'700'000'000;
    Objective objective = Objective::ed2p();
    uint32_t max_epochs = 20'000;
    int oracle_sampling = 0;  // -1 off, 0 auto, 1 forced on
    bool parallel_sampling = true;
    std::string out_dir;
    bool epoch_trace = true;
    bool wf_trace = false;

    uint32_t state_index(uint64_t freq_hz) const;  // throws if not a legal state
};

RunConfig parse_run_config(const nlohmann::json& j);
nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);

// Structural + semantic checks; each entry names the offending field.
std::vector<std::string> validate_run_config_json(const nlohmann::json& j);

struct MatrixConfig {
    RunConfig base;
    std::vector<PolicyKind> policies;
    std::vector<uint64_t> static_freqs_hz;
    std::vector<uint64_t> epoch_lens_ps;   // defaults to {base.epoch_len_ps}
    std::vector<uint32_t> granularities;   // defaults to {base.engine.cus_per_domain}
    std::vector<WorkloadConfig> workloads; // defaults to {base.workload}
    uint64_t baseline_freq_hz = 1'700'000'000;
};

MatrixConfig parse_matrix_config(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);

}  // namespace dvfsim
