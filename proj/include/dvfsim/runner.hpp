#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dvfsim/analysis.hpp"
#include "dvfsim/config.hpp"

namespace dvfsim {

struct EpochDomainTrace {
    uint64_t epoch = 0;
    uint32_t domain = 0;
    uint32_t state = 0;
    uint64_t freq_hz = 0;
    uint8_t transitioned = 0;
    uint64_t critical = 0;
    uint64_t committed = 0;
    uint8_t has_prediction = 0;
    double predicted = 0.0;
    double est_s = 0.0;   // measured wavefront-level domain sensitivity this epoch
    double est_i0 = 0.0;
    double activity = 0.0;
    int64_t dynamic_pj = 0;
    int64_t leakage_pj = 0;
    int64_t transition_pj = 0;
    uint64_t issued = 0;
    uint64_t cycles = 0;
    uint64_t mem_stall = 0;
};

struct WfTraceRow {
    uint64_t epoch = 0;
    uint32_t cu = 0;
    uint32_t slot = 0;
    uint64_t start_pc = 0;
    uint64_t end_pc = 0;
    uint64_t committed = 0;
    uint64_t critical = 0;
    uint64_t exec = 0;
    uint64_t ready_wait = 0;
    uint64_t stall = 0;
    uint64_t idle = 0;
    double s = 0.0;
    double i0 = 0.0;
};

struct RunReport {
    nlohmann::ordered_json config_json;
    std::string workload_name;
    uint64_t n_epochs = 0;
    bool completed = false;
    uint64_t completion_ps = 0;
    int64_t dynamic_pj = 0;
    int64_t leakage_pj = 0;
    int64_t transition_pj = 0;
    int64_t memory_pj = 0;
    int64_t total_pj = 0;
    double energy_j = 0.0;
    double delay_s = 0.0;
    double edp = 0.0;
    double ed2p = 0.0;
    AccuracyStats accuracy;
    std::vector<std::vector<double>> time_share_by_domain;
    double pc_hit_ratio = -1.0;
    std::vector<EpochDomainTrace> trace;
    std::vector<WfTraceRow> wf_trace;
    // per-epoch per-domain controller objective values (EDnP runs): the
    // realized P/W^(n+1) of the applied state, for oracle-optimality checks
    std::vector<double> epoch_objective;

    nlohmann::ordered_json to_json() const;
    std::string trace_csv() const;
    std::string wf_trace_csv() const;
};

RunReport run_policy(const RunConfig& cfg);

struct MatrixRow {
    std::string workload;
    std::string policy;  // "STATIC-1700" style for statics
    uint64_t epoch_len_ps = 0;
    uint32_t cus_per_domain = 0;
    double energy_j = 0.0;
    double delay_s = 0.0;
    double edp = 0.0;
    double ed2p = 0.0;
    double norm_edp = 0.0;   // vs static baseline at the same epoch/granularity
    double norm_ed2p = 0.0;
    double accuracy = -1.0;  // -1 when the policy makes no predictions
};

struct MatrixReport {
    std::vector<MatrixRow> rows;
    // geomean of normalized metrics across workloads per (policy, epoch, granularity)
    struct Summary {
        std::string policy;
        uint64_t epoch_len_ps = 0;
        uint32_t cus_per_domain = 0;
        double geomean_norm_ed2p = 0.0;
        double geomean_norm_edp = 0.0;
        double mean_accuracy = -1.0;
    };
    std::vector<Summary> summaries;

    nlohmann::ordered_json to_json() const;
    std::string csv() const;
};

MatrixReport run_matrix(const MatrixConfig& cfg);

// Writes report JSON (and CSV traces when enabled) under cfg.out_dir.
void write_report_files(const RunConfig& cfg, const RunReport& report);

}  // namespace dvfsim
