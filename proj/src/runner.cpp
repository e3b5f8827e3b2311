#include "dvfsim/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "dvfsim/oracle.hpp"

namespace dvfsim {

namespace {

EstimatorKind estimator_for(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Stall: return EstimatorKind::StallCu;
        case PolicyKind::Lead: return EstimatorKind::Lead;
        case PolicyKind::Crit: return EstimatorKind::Crit;
        case PolicyKind::Crisp: return EstimatorKind::CrispS;
        default: return EstimatorKind::WfStall;
    }
}

bool is_reactive_baseline(PolicyKind kind) {
    return kind == PolicyKind::Stall || kind == PolicyKind::Lead ||
           kind == PolicyKind::Crit || kind == PolicyKind::Crisp;
}

bool uses_table(PolicyKind kind) {
    return kind == PolicyKind::PcStall || kind == PolicyKind::AccPc;
}

bool slot_active(const SlotSnapshot& s) {
    return s.resident && (s.exec_cycles + s.ready_wait_cycles + s.stall_cycles) > 0;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct PolicyState {
    std::vector<PcTable> tables;  // one per scope group of CUs
    std::vector<SensitivityEstimate> slot_last;
    std::vector<std::optional<SensitivityEstimate>> domain_last;
    std::vector<StallCounters> cu_counters;
    bool has_history = false;
};

}  // namespace

RunReport run_policy(const RunConfig& cfg) {
    auto kernels = cfg.workload.build(cfg.seed, cfg.epoch_len_ps);
    EngineConfig ecfg = cfg.engine;
    ecfg.transition_latency_ps = cfg.transition.latency_ps;
    SimState st = make_sim_state(ecfg, std::move(kernels));

    const uint32_t n_domains = ecfg.n_domains();
    const uint32_t n_states = static_cast<uint32_t>(cfg.states.size());
    const uint32_t n_slots_total = ecfg.n_cus * ecfg.n_slots;
    const uint32_t initial_state = cfg.state_index(cfg.initial_freq_hz);
    const uint32_t static_state =
        cfg.policy == PolicyKind::Static ? cfg.state_index(cfg.static_freq_hz) : 0;
    const uint32_t scope = std::max<uint32_t>(1, cfg.table_scope_cus);

    PolicyState ps;
    if (uses_table(cfg.policy))
        ps.tables.assign((ecfg.n_cus + scope - 1) / scope, PcTable(cfg.table));
    ps.slot_last.assign(n_slots_total, SensitivityEstimate{});
    ps.domain_last.assign(n_domains, std::nullopt);

    const bool wants_sampling = policy_needs_sampling(cfg.policy) || cfg.oracle_sampling > 0;

    RunReport rep;
    rep.config_json = run_config_to_json(cfg);
    rep.workload_name = st.kernel().name;
    EnergyLedger ledger;
    std::vector<std::vector<uint32_t>> selections(n_domains);

    uint64_t epoch = 0;
    for (; !st.all_done() && epoch < cfg.max_epochs; ++epoch) {
        const uint64_t epoch_start_ps = st.now_ps;
        std::vector<uint32_t> sel(n_domains, initial_state);
        std::vector<double> predicted(n_domains, 0.0);
        bool has_sel = false;
        bool has_pred = false;

        OracleResult oracle;
        bool have_oracle = false;
        EpochResult res;

        if (cfg.policy == PolicyKind::Oracle) {
            auto square = latin_square(n_states, n_domains, cfg.seed + epoch);
            oracle = sample_epoch(st, square, cfg.states, cfg.epoch_len_ps,
                                  cfg.parallel_sampling);
            have_oracle = true;
            res = select_and_reexecute(st, oracle, cfg.states, cfg.objective, cfg.clamp,
                                       cfg.power, cfg.epoch_len_ps);
            sel = oracle.selected;
            for (uint32_t d = 0; d < n_domains; ++d)
                predicted[d] = static_cast<double>(oracle.count(d, sel[d]));
            has_sel = has_pred = true;
        } else {
            if (cfg.policy == PolicyKind::Static) {
                sel.assign(n_domains, static_state);
                has_sel = true;
            } else if (ps.has_history) {
                for (uint32_t d = 0; d < n_domains; ++d) {
                    std::vector<double> work(n_states, 0.0);
                    uint32_t cu_b = d * ecfg.cus_per_domain;
                    uint32_t cu_e = cu_b + ecfg.cus_in_domain(d);
                    if (is_reactive_baseline(cfg.policy)) {
                        for (uint32_t j = cu_b; j < cu_e; ++j)
                            for (uint32_t s = 0; s < n_states; ++s) {
                                double w = predict_cu_instructions(ps.cu_counters[j],
                                                                   cfg.states[s].freq_hz);
                                work[s] += w > 0.0 ? w : 0.0;
                            }
                    } else if (cfg.policy == PolicyKind::AccReac) {
                        work = predicted_work_curve(reactive_predict(ps.domain_last[d]),
                                                    cfg.states);
                    } else {  // PCSTALL / ACCPC: per-wavefront table lookups
                        SensitivityEstimate est;
                        std::vector<uint64_t> pcs;
                        std::vector<SensitivityEstimate> fbs;
                        for (uint32_t j = cu_b; j < cu_e; ++j) {
                            pcs.clear();
                            fbs.clear();
                            const CuState& cu = st.cus[j];
                            for (uint32_t i = 0; i < cu.slots.size(); ++i) {
                                const WavefrontSlot& slot = cu.slots[i];
                                if (slot.status == SlotStatus::Done ||
                                    slot.status == SlotStatus::Empty)
                                    continue;
                                pcs.push_back(slot.pc);
                                fbs.push_back(ps.slot_last[j * ecfg.n_slots + i]);
                            }
                            SensitivityEstimate cu_est =
                                predict_domain(ps.tables[j / scope], pcs, fbs);
                            est.s += cu_est.s;
                            est.i0 += cu_est.i0;
                        }
                        work = predicted_work_curve(est, cfg.states);
                    }
                    auto pw = predicted_power_curve(cfg.power, cfg.states, work,
                                                    ecfg.cus_in_domain(d), cfg.epoch_len_ps);
                    sel[d] = select_frequency(work, pw, cfg.states, cfg.objective, cfg.clamp);
                    predicted[d] = work[sel[d]];
                }
                has_sel = has_pred = true;
            }

            std::optional<SimState> pre;
            if (wants_sampling) pre = snapshot(st);

            std::vector<uint64_t> freqs(n_domains);
            for (uint32_t d = 0; d < n_domains; ++d) freqs[d] = cfg.states[sel[d]].freq_hz;
            res = run_epoch(st, freqs, cfg.epoch_len_ps);

            if (wants_sampling) {
                auto square = latin_square(n_states, n_domains, cfg.seed + epoch);
                oracle = sample_epoch(*pre, square, cfg.states, cfg.epoch_len_ps,
                                      cfg.parallel_sampling);
                have_oracle = true;
            }
        }

        // measured wavefront-level estimates: trace series + PCSTALL updates
        std::vector<SensitivityEstimate> measured(n_domains);
        for (const SlotSnapshot& snap : res.slots) {
            if (!slot_active(snap)) continue;
            uint32_t d = snap.cu / ecfg.cus_per_domain;
            SensitivityEstimate est = estimate_wavefront(snap, cfg.epoch_len_ps, res.freq_hz[d]);
            measured[d].s += est.s;
            measured[d].i0 += est.i0;
            uint32_t idx = snap.cu * ecfg.n_slots + snap.slot;
            if (cfg.policy == PolicyKind::PcStall) {
                ps.tables[snap.cu / scope].update(snap.start_pc, est);
                ps.slot_last[idx] = est;
            }
            if (cfg.wf_trace) {
                rep.wf_trace.push_back({epoch, snap.cu, snap.slot, snap.start_pc, snap.end_pc,
                                        snap.committed, snap.critical, snap.exec_cycles,
                                        snap.ready_wait_cycles, snap.stall_cycles,
                                        snap.idle_cycles, est.s, est.i0});
            }
        }
        if (cfg.policy == PolicyKind::AccPc && have_oracle) {
            for (uint32_t idx = 0; idx < n_slots_total; ++idx) {
                if (!oracle.slot_active[idx]) continue;
                uint32_t cu = idx / ecfg.n_slots;
                SensitivityEstimate est =
                    oracle_slot_sensitivity(oracle, cu, idx % ecfg.n_slots, cfg.states);
                ps.tables[cu / scope].update(oracle.slot_start_pc[idx], est);
                ps.slot_last[idx] = est;
            }
        }
        if (cfg.policy == PolicyKind::AccReac && have_oracle)
            for (uint32_t d = 0; d < n_domains; ++d)
                ps.domain_last[d] = oracle_sensitivity(oracle, d, cfg.states);
        if (is_reactive_baseline(cfg.policy))
            ps.cu_counters = collect_counters(res, estimator_for(cfg.policy));
        ps.has_history = true;

        if (has_pred)
            for (uint32_t d = 0; d < n_domains; ++d)
                rep.accuracy.add(predicted[d], static_cast<double>(res.domain_critical(d)));
        if (has_sel)
            for (uint32_t d = 0; d < n_domains; ++d) selections[d].push_back(sel[d]);

        // Energy covers [epoch start, completion] in the final epoch so that
        // trailing idle time is not billed differently across policies.
        bool final_epoch = st.all_done();
        uint64_t dur = cfg.epoch_len_ps;
        if (final_epoch && st.completion_ps > epoch_start_ps &&
            st.completion_ps <= epoch_start_ps + cfg.epoch_len_ps)
            dur = st.completion_ps - epoch_start_ps;

        for (uint32_t d = 0; d < n_domains; ++d) {
            uint64_t cycles = res.domain_cycles(d);
            uint64_t issued = res.domain_issued(d);
            double util = cycles ? static_cast<double>(issued) / static_cast<double>(cycles)
                                 : 0.0;
            double act = cfg.power.activity(util);
            PowerSplit split = domain_power_split(cfg.power, cfg.states[sel[d]], sel[d], act,
                                                  ecfg.cus_in_domain(d));
            int64_t dyn_pj = epoch_energy_pj(split.dynamic_w, dur);
            int64_t leak_pj = epoch_energy_pj(split.leakage_w, dur);
            int64_t trans_pj = res.transitioned[d] ? cfg.transition.energy_pj : 0;
            ledger.add(epoch, d, dyn_pj, leak_pj, trans_pj);

            if (cfg.epoch_trace) {
                EpochDomainTrace row;
                row.epoch = epoch;
                row.domain = d;
                row.state = sel[d];
                row.freq_hz = res.freq_hz[d];
                row.transitioned = res.transitioned[d];
                row.critical = res.domain_critical(d);
                row.committed = res.domain_committed(d);
                row.has_prediction = has_pred ? 1 : 0;
                row.predicted = predicted[d];
                row.est_s = measured[d].s;
                row.est_i0 = measured[d].i0;
                row.activity = act;
                row.dynamic_pj = dyn_pj;
                row.leakage_pj = leak_pj;
                row.transition_pj = trans_pj;
                row.issued = issued;
                row.cycles = cycles;
                uint64_t stall = 0;
                for (uint32_t j = res.cu_begin(d); j < res.cu_end(d); ++j)
                    stall += res.cu[j].mem_stall;
                row.mem_stall = stall;
                rep.trace.push_back(row);
            }
        }
        ledger.memory_pj += epoch_energy_pj(cfg.power.mem_power_w, dur);
    }

    rep.n_epochs = epoch;
    rep.completed = st.all_done();
    rep.completion_ps = rep.completed ? st.completion_ps : st.now_ps;
    rep.dynamic_pj = ledger.dynamic_total_pj();
    rep.leakage_pj = ledger.leakage_total_pj();
    rep.transition_pj = ledger.transition_total_pj();
    rep.memory_pj = ledger.memory_pj;
    rep.total_pj = ledger.total_pj();
    rep.energy_j = ledger.total_j();
    rep.delay_s = static_cast<double>(rep.completion_ps) * 1e-12;
    rep.edp = ednp(rep.energy_j, rep.delay_s, 1);
    rep.ed2p = ednp(rep.energy_j, rep.delay_s, 2);
    rep.time_share_by_domain.resize(n_domains);
    for (uint32_t d = 0; d < n_domains; ++d)
        rep.time_share_by_domain[d] = time_share(selections[d], n_states);
    if (uses_table(cfg.policy)) {
        uint64_t lookups = 0, hits = 0;
        for (const auto& t : ps.tables) {
            lookups += t.lookups();
            hits += t.hits();
        }
        rep.pc_hit_ratio = lookups ? static_cast<double>(hits) / static_cast<double>(lookups)
                                   : 0.0;
    }
    return rep;
}

nlohmann::ordered_json RunReport::to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["workload"] = workload_name;
    j["config"] = config_json;
    j["completed"] = completed;
    j["n_epochs"] = n_epochs;
    j["completion_ps"] = completion_ps;
    nlohmann::ordered_json e;
    e["dynamic_pj"] = dynamic_pj;
    e["leakage_pj"] = leakage_pj;
    e["transition_pj"] = transition_pj;
    e["memory_pj"] = memory_pj;
    e["total_pj"] = total_pj;
    j["energy"] = e;
    j["energy_j"] = energy_j;
    j["delay_s"] = delay_s;
    j["edp"] = edp;
    j["ed2p"] = ed2p;
    nlohmann::ordered_json a;
    a["mean"] = accuracy.mean();
    a["included"] = accuracy.included;
    a["excluded"] = accuracy.excluded;
    j["accuracy"] = a;
    j["time_share"] = time_share_by_domain;
    j["pc_hit_ratio"] = pc_hit_ratio;
    return j;
}

std::string RunReport::trace_csv() const {
    std::ostringstream os;
    os << "epoch,domain,state,freq_mhz,transitioned,critical,committed,has_prediction,"
          "predicted,est_s,est_i0,activity,dynamic_pj,leakage_pj,transition_pj,issued,cycles,"
          "mem_stall\n";
    for (const auto& r : trace) {
        os << r.epoch << ',' << r.domain << ',' << r.state << ',' << r.freq_hz / 1'000'000
           << ',' << static_cast<int>(r.transitioned) << ',' << r.critical << ','
           << r.committed << ',' << static_cast<int>(r.has_prediction) << ','
           << fmt_double(r.predicted) << ',' << fmt_double(r.est_s) << ','
           << fmt_double(r.est_i0) << ',' << fmt_double(r.activity) << ',' << r.dynamic_pj
           << ',' << r.leakage_pj << ',' << r.transition_pj << ',' << r.issued << ','
           << r.cycles << ',' << r.mem_stall << '\n';
    }
    return os.str();
}

std::string RunReport::wf_trace_csv() const {
    std::ostringstream os;
    os << "epoch,cu,slot,start_pc,end_pc,committed,critical,exec,ready_wait,stall,idle,s,i0\n";
    char pc[24];
    for (const auto& r : wf_trace) {
        std::snprintf(pc, sizeof(pc), "0x%04llX", static_cast<unsigned long long>(r.start_pc));
        os << r.epoch << ',' << r.cu << ',' << r.slot << ',' << pc << ',';
        std::snprintf(pc, sizeof(pc), "0x%04llX", static_cast<unsigned long long>(r.end_pc));
        os << pc << ',' << r.committed << ',' << r.critical << ',' << r.exec << ','
           << r.ready_wait << ',' << r.stall << ',' << r.idle << ',' << fmt_double(r.s) << ','
           << fmt_double(r.i0) << '\n';
    }
    return os.str();
}

MatrixReport run_matrix(const MatrixConfig& m) {
    MatrixReport rep;
    const bool default_latency =
        m.base.transition.latency_ps == default_transition_latency_ps(m.base.epoch_len_ps);

    for (const auto& workload : m.workloads) {
        for (uint64_t epoch_len : m.epoch_lens_ps) {
            for (uint32_t gran : m.granularities) {
                RunConfig base = m.base;
                base.workload = workload;
                base.epoch_len_ps = epoch_len;
                base.engine.cus_per_domain = gran;
                if (default_latency)
                    base.transition.latency_ps = default_transition_latency_ps(epoch_len);
                base.engine.transition_latency_ps = base.transition.latency_ps;
                base.epoch_trace = false;
                base.wf_trace = false;

                RunConfig bl = base;
                bl.policy = PolicyKind::Static;
                bl.static_freq_hz = m.baseline_freq_hz;
                RunReport bl_rep = run_policy(bl);
                if (bl_rep.ed2p <= 0.0)
                    throw std::runtime_error("baseline run produced non-positive ED2P");

                auto add_row = [&](const std::string& name, const RunReport& r,
                                   bool has_acc) {
                    MatrixRow row;
                    row.workload = r.workload_name;
                    row.policy = name;
                    row.epoch_len_ps = epoch_len;
                    row.cus_per_domain = gran;
                    row.energy_j = r.energy_j;
                    row.delay_s = r.delay_s;
                    row.edp = r.edp;
                    row.ed2p = r.ed2p;
                    row.norm_edp = r.edp / bl_rep.edp;
                    row.norm_ed2p = r.ed2p / bl_rep.ed2p;
                    row.accuracy = has_acc ? r.accuracy.mean() : -1.0;
                    rep.rows.push_back(row);
                };

                add_row("STATIC-" + std::to_string(m.baseline_freq_hz / 1'000'000), bl_rep,
                        false);
                for (uint64_t f : m.static_freqs_hz) {
                    if (f == m.baseline_freq_hz) continue;
                    RunConfig c = base;
                    c.policy = PolicyKind::Static;
                    c.static_freq_hz = f;
                    add_row("STATIC-" + std::to_string(f / 1'000'000), run_policy(c), false);
                }
                for (PolicyKind p : m.policies) {
                    if (p == PolicyKind::Static) continue;
                    RunConfig c = base;
                    c.policy = p;
                    add_row(policy_name(p), run_policy(c), true);
                }
            }
        }
    }

    // geomeans across workloads per (policy, epoch, granularity)
    struct Key {
        std::string policy;
        uint64_t epoch;
        uint32_t gran;
        bool operator<(const Key& o) const {
            return std::tie(policy, epoch, gran) < std::tie(o.policy, o.epoch, o.gran);
        }
    };
    std::map<Key, std::vector<const MatrixRow*>> groups;
    for (const auto& row : rep.rows)
        groups[{row.policy, row.epoch_len_ps, row.cus_per_domain}].push_back(&row);
    for (const auto& [key, rows] : groups) {
        MatrixReport::Summary s;
        s.policy = key.policy;
        s.epoch_len_ps = key.epoch;
        s.cus_per_domain = key.gran;
        double log_ed2p = 0.0, log_edp = 0.0, acc = 0.0;
        size_t acc_n = 0;
        for (const MatrixRow* r : rows) {
            log_ed2p += std::log(r->norm_ed2p);
            log_edp += std::log(r->norm_edp);
            if (r->accuracy >= 0.0) {
                acc += r->accuracy;
                ++acc_n;
            }
        }
        s.geomean_norm_ed2p = std::exp(log_ed2p / static_cast<double>(rows.size()));
        s.geomean_norm_edp = std::exp(log_edp / static_cast<double>(rows.size()));
        s.mean_accuracy = acc_n ? acc / static_cast<double>(acc_n) : -1.0;
        rep.summaries.push_back(s);
    }
    return rep;
}

nlohmann::ordered_json MatrixReport::to_json() const {
    nlohmann::ordered_json j;
    auto rows_json = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json rj;
        rj["workload"] = r.workload;
        rj["policy"] = r.policy;
        rj["epoch_len_ns"] = r.epoch_len_ps / 1000;
        rj["cus_per_domain"] = r.cus_per_domain;
        rj["energy_j"] = r.energy_j;
        rj["delay_s"] = r.delay_s;
        rj["edp"] = r.edp;
        rj["ed2p"] = r.ed2p;
        rj["norm_edp"] = r.norm_edp;
        rj["norm_ed2p"] = r.norm_ed2p;
        rj["accuracy"] = r.accuracy;
        rows_json.push_back(rj);
    }
    j["rows"] = rows_json;
    auto sum_json = nlohmann::ordered_json::array();
    for (const auto& s : summaries) {
        nlohmann::ordered_json sj;
        sj["policy"] = s.policy;
        sj["epoch_len_ns"] = s.epoch_len_ps / 1000;
        sj["cus_per_domain"] = s.cus_per_domain;
        sj["geomean_norm_ed2p"] = s.geomean_norm_ed2p;
        sj["geomean_norm_edp"] = s.geomean_norm_edp;
        sj["mean_accuracy"] = s.mean_accuracy;
        sum_json.push_back(sj);
    }
    j["summaries"] = sum_json;
    return j;
}

std::string MatrixReport::csv() const {
    std::ostringstream os;
    os << "workload,policy,epoch_len_ns,cus_per_domain,energy_j,delay_s,edp,ed2p,norm_edp,"
          "norm_ed2p,accuracy\n";
    for (const auto& r : rows) {
        os << r.workload << ',' << r.policy << ',' << r.epoch_len_ps / 1000 << ','
           << r.cus_per_domain << ',' << fmt_double(r.energy_j) << ',' << fmt_double(r.delay_s)
           << ',' << fmt_double(r.edp) << ',' << fmt_double(r.ed2p) << ','
           << fmt_double(r.norm_edp) << ',' << fmt_double(r.norm_ed2p) << ','
           << fmt_double(r.accuracy) << '\n';
    }
    return os.str();
}

void write_report_files(const RunConfig& cfg, const RunReport& report) {
    if (cfg.out_dir.empty()) return;
    std::filesystem::create_directories(cfg.out_dir);
    auto dir = std::filesystem::path(cfg.out_dir);
    {
        std::ofstream f(dir / "report.json", std::ios::binary);
        f << report.to_json().dump(2) << "\n";
    }
    if (cfg.epoch_trace) {
        std::ofstream f(dir / "trace.csv", std::ios::binary);
        f << report.trace_csv();
    }
    if (cfg.wf_trace) {
        std::ofstream f(dir / "wf_trace.csv", std::ios::binary);
        f << report.wf_trace_csv();
    }
}

}  // namespace dvfsim
