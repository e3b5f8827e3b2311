#include "dvfsim/config.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace dvfsim {

namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
    throw std::invalid_argument(field + ": " + what);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        field_error(key, "wrong type");
    }
}

uint64_t mhz_to_hz(uint64_t mhz) { return mhz * 1'000'000ull; }

}  // namespace

const char* policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Static: return "STATIC";
        case PolicyKind::Stall: return "STALL";
        case PolicyKind::Lead: return "LEAD";
        case PolicyKind::Crit: return "CRIT";
        case PolicyKind::Crisp: return "CRISP";
        case PolicyKind::AccReac: return "ACCREAC";
        case PolicyKind::PcStall: return "PCSTALL";
        case PolicyKind::AccPc: return "ACCPC";
        case PolicyKind::Oracle: return "ORACLE";
    }
    return "?";
}

PolicyKind policy_from_name(const std::string& name) {
    for (PolicyKind k :
         {PolicyKind::Static, PolicyKind::Stall, PolicyKind::Lead, PolicyKind::Crit,
          PolicyKind::Crisp, PolicyKind::AccReac, PolicyKind::PcStall, PolicyKind::AccPc,
          PolicyKind::Oracle})
        if (name == policy_name(k)) return k;
    field_error("policy", "unknown policy '" + name + "'");
}

bool policy_needs_sampling(PolicyKind kind) {
    return kind == PolicyKind::AccReac || kind == PolicyKind::AccPc ||
           kind == PolicyKind::Oracle;
}

std::vector<Kernel> WorkloadConfig::build(uint64_t seed, uint64_t epoch_len_ps) const {
    switch (kind) {
        case Kind::Loop:
            return {generate_loop_kernel(body_len, mem_ratio, bank_spread, trip_count,
                                         wavefront_count, seed, waitcnt_distance)};
        case Kind::Phased: {
            PhaseProfile p = profile;
            p.seed = p.seed ? p.seed : seed;
            p.epoch_len_ps = epoch_len_ps;
            return {generate_phased_workload(p)};
        }
        case Kind::File:
            return {load_workload_file(path)};
    }
    throw std::logic_error("unreachable workload kind");
}

std::string WorkloadConfig::label() const {
    switch (kind) {
        case Kind::Loop:
            return "loop_b" + std::to_string(body_len) + "_m" +
                   std::to_string(static_cast<int>(mem_ratio * 100));
        case Kind::Phased: {
            std::string s = "phased";
            for (const auto& p : profile.phases)
                s += "_" + std::to_string(static_cast<int>(p.compute_fraction * 100));
            return s;
        }
        case Kind::File: {
            auto pos = path.find_last_of('/');
            return pos == std::string::npos ? path : path.substr(pos + 1);
        }
    }
    return "?";
}

uint32_t RunConfig::state_index(uint64_t freq_hz) const {
    for (size_t i = 0; i < states.size(); ++i)
        if (states[i].freq_hz == freq_hz) return static_cast<uint32_t>(i);
    field_error("states", "frequency " + std::to_string(freq_hz / 1'000'000) +
                              " MHz is not a legal V/f state");
}

namespace {

WorkloadConfig parse_workload(const json& j) {
    WorkloadConfig w;
    std::string kind = get_or<std::string>(j, "kind", "phased");
    if (kind == "loop")
        w.kind = WorkloadConfig::Kind::Loop;
    else if (kind == "phased")
        w.kind = WorkloadConfig::Kind::Phased;
    else if (kind == "file")
        w.kind = WorkloadConfig::Kind::File;
    else
        field_error("workload.kind", "must be loop, phased, or file");

    w.body_len = get_or<uint32_t>(j, "body_len", 32);
    w.mem_ratio = get_or<double>(j, "mem_ratio", 0.0);
    w.bank_spread = get_or<uint32_t>(j, "bank_spread", 16);
    w.trip_count = get_or<uint32_t>(j, "trip_count", 100);
    w.wavefront_count = get_or<uint32_t>(j, "wavefront_count", 40);
    w.waitcnt_distance = get_or<uint32_t>(j, "waitcnt_distance", 0);
    w.path = get_or<std::string>(j, "path", "");

    w.profile.phase_length_epochs = get_or<uint32_t>(j, "phase_length_epochs", 2);
    w.profile.loop_body_len = get_or<uint32_t>(j, "loop_body_len", 32);
    w.profile.iterations = get_or<uint32_t>(j, "iterations", 20);
    w.profile.bank_spread = w.bank_spread;
    w.profile.wavefront_count = w.wavefront_count;
    w.profile.seed = get_or<uint64_t>(j, "profile_seed", 0);
    if (j.contains("phases")) {
        for (const auto& pj : j.at("phases")) {
            PhaseSpec p;
            if (pj.is_number()) {
                p.compute_fraction = pj.get<double>();
            } else {
                p.compute_fraction = get_or<double>(pj, "compute_fraction", 1.0);
                p.length_epochs = get_or<uint32_t>(pj, "length_epochs", 0);
            }
            w.profile.phases.push_back(p);
        }
    } else if (w.kind == WorkloadConfig::Kind::Phased) {
        w.profile.phases = {{1.0, 0}, {0.1, 0}};  // default compute/memory alternation
    }
    return w;
}

json workload_to_json(const WorkloadConfig& w) {
    nlohmann::ordered_json j;
    switch (w.kind) {
        case WorkloadConfig::Kind::Loop: j["kind"] = "loop"; break;
        case WorkloadConfig::Kind::Phased: j["kind"] = "phased"; break;
        case WorkloadConfig::Kind::File: j["kind"] = "file"; break;
    }
    j["body_len"] = w.body_len;
    j["mem_ratio"] = w.mem_ratio;
    j["bank_spread"] = w.bank_spread;
    j["trip_count"] = w.trip_count;
    j["wavefront_count"] = w.wavefront_count;
    j["waitcnt_distance"] = w.waitcnt_distance;
    j["phase_length_epochs"] = w.profile.phase_length_epochs;
    j["loop_body_len"] = w.profile.loop_body_len;
    j["iterations"] = w.profile.iterations;
    j["profile_seed"] = w.profile.seed;
    auto phases = nlohmann::ordered_json::array();
    for (const auto& p : w.profile.phases) {
        nlohmann::ordered_json pj;
        pj["compute_fraction"] = p.compute_fraction;
        pj["length_epochs"] = p.length_epochs;
        phases.push_back(pj);
    }
    j["phases"] = phases;
    j["path"] = w.path;
    return j;
}

}  // namespace

RunConfig parse_run_config(const json& j) {
    RunConfig cfg;
    cfg.schema_version = get_or<int>(j, "schema_version", 1);
    if (cfg.schema_version != 1) field_error("schema_version", "unsupported version");
    cfg.seed = get_or<uint64_t>(j, "seed", 0);

    if (j.contains("workload")) cfg.workload = parse_workload(j.at("workload"));

    if (j.contains("engine")) {
        const json& e = j.at("engine");
        cfg.engine.n_cus = get_or<uint32_t>(e, "n_cus", 64);
        cfg.engine.n_slots = get_or<uint32_t>(e, "n_slots", 40);
        cfg.engine.n_banks = get_or<uint32_t>(e, "n_banks", 16);
        cfg.engine.mem_freq_hz = mhz_to_hz(get_or<uint64_t>(e, "mem_freq_mhz", 1600));
        cfg.engine.base_latency_memcycles = get_or<uint32_t>(e, "base_latency_memcycles", 480);
        cfg.engine.service_time_memcycles = get_or<uint32_t>(e, "service_time_memcycles", 4);
        cfg.engine.cus_per_domain = get_or<uint32_t>(e, "cus_per_domain", 1);
    }
    cfg.epoch_len_ps = get_or<uint64_t>(j, "epoch_len_ns", 1000) * 1000ull;

    if (j.contains("vf")) {
        const json& v = j.at("vf");
        if (v.contains("states")) {
            for (const auto& sj : v.at("states")) {
                VfState s;
                s.freq_hz = mhz_to_hz(sj.at("freq_mhz").get<uint64_t>());
                s.voltage = sj.at("voltage").get<double>();
                cfg.states.push_back(s);
            }
        }
        int64_t lat_ns = get_or<int64_t>(v, "transition_latency_ns", -1);
        if (lat_ns >= 0) cfg.transition.latency_ps = static_cast<uint64_t>(lat_ns) * 1000ull;
        cfg.transition.energy_pj = get_or<int64_t>(v, "transition_energy_pj", 0);
        if (v.contains("clamp")) {
            const json& c = v.at("clamp");
            uint64_t lo = get_or<uint64_t>(c, "f_min_mhz", 0);
            uint64_t hi = get_or<uint64_t>(c, "f_max_mhz", 0);
            if (lo) cfg.clamp.f_min_hz = mhz_to_hz(lo);
            if (hi) cfg.clamp.f_max_hz = mhz_to_hz(hi);
        }
        if (lat_ns < 0) cfg.transition.latency_ps = default_transition_latency_ps(cfg.epoch_len_ps);
    } else {
        cfg.transition.latency_ps = default_transition_latency_ps(cfg.epoch_len_ps);
    }
    if (cfg.states.empty()) cfg.states = default_vf_states();
    std::sort(cfg.states.begin(), cfg.states.end(),
              [](const VfState& a, const VfState& b) { return a.freq_hz < b.freq_hz; });
    cfg.engine.transition_latency_ps = cfg.transition.latency_ps;

    if (j.contains("power")) {
        const json& p = j.at("power");
        cfg.power.c_eff_per_cu_nf = get_or<double>(p, "c_eff_per_cu_nf", 3.0);
        cfg.power.leakage_w_per_cu = get_or<double>(p, "leakage_w_per_cu", 0.5);
        cfg.power.activity_alpha = get_or<double>(p, "activity_alpha", 1.0);
        cfg.power.activity_beta = get_or<double>(p, "activity_beta", 0.0);
        cfg.power.mem_power_w = get_or<double>(p, "mem_power_w", 0.0);
        if (p.contains("ivr_efficiency"))
            cfg.power.ivr_efficiency = p.at("ivr_efficiency").get<std::vector<double>>();
    }

    if (j.contains("table")) {
        const json& t = j.at("table");
        cfg.table.entries = get_or<uint32_t>(t, "entries", 128);
        cfg.table.offset_bits = get_or<uint32_t>(t, "offset_bits", 4);
        cfg.table.quantized = get_or<bool>(t, "quantized", false);
        cfg.table_scope_cus = get_or<uint32_t>(t, "scope_cus", 1);
    }

    cfg.policy = policy_from_name(get_or<std::string>(j, "policy", "PCSTALL"));
    cfg.static_freq_hz = mhz_to_hz(get_or<uint64_t>(j, "static_freq_mhz", 1700));
    cfg.initial_freq_hz = mhz_to_hz(get_or<uint64_t>(j, "initial_freq_mhz", 1700));

    if (j.contains("objective")) {
        const json& o = j.at("objective");
        std::string kind = get_or<std::string>(o, "kind", "ed2p");
        if (kind == "ed2p")
            cfg.objective = Objective::ed2p();
        else if (kind == "edp")
            cfg.objective = Objective::edp();
        else if (kind == "energy_bounded")
            cfg.objective = Objective::energy_bounded(get_or<double>(o, "max_perf_loss", 0.05));
        else
            field_error("objective.kind", "must be ed2p, edp, or energy_bounded");
    }

    cfg.max_epochs = get_or<uint32_t>(j, "max_epochs", 20'000);
    std::string sampling = get_or<std::string>(j, "oracle_sampling", "auto");
    if (sampling == "auto")
        cfg.oracle_sampling = 0;
    else if (sampling == "on")
        cfg.oracle_sampling = 1;
    else if (sampling == "off")
        cfg.oracle_sampling = -1;
    else
        field_error("oracle_sampling", "must be auto, on, or off");
    cfg.parallel_sampling = get_or<bool>(j, "parallel_sampling", true);

    if (j.contains("output")) {
        const json& o = j.at("output");
        cfg.out_dir = get_or<std::string>(o, "dir", "");
        cfg.epoch_trace = get_or<bool>(o, "epoch_trace", true);
        cfg.wf_trace = get_or<bool>(o, "wf_trace", false);
    }

    // cross-field checks
    if (cfg.policy == PolicyKind::Static) cfg.state_index(cfg.static_freq_hz);
    cfg.state_index(cfg.initial_freq_hz);
    if (policy_needs_sampling(cfg.policy) && cfg.oracle_sampling < 0)
        field_error("oracle_sampling",
                    std::string(policy_name(cfg.policy)) + " requires oracle sampling");
    bool any_in_clamp = false;
    for (const auto& s : cfg.states) any_in_clamp |= cfg.clamp.contains(s.freq_hz);
    if (!any_in_clamp) field_error("vf.clamp", "clamp excludes every V/f state");
    if (cfg.workload.kind == WorkloadConfig::Kind::File && cfg.workload.path.empty())
        field_error("workload.path", "file workload needs a path");
    if (cfg.engine.n_cus == 0) field_error("engine.n_cus", "must be >= 1");
    if (cfg.engine.cus_per_domain == 0) field_error("engine.cus_per_domain", "must be >= 1");
    if (cfg.epoch_len_ps == 0) field_error("epoch_len_ns", "must be >= 1");
    return cfg;
}

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["schema_version"] = cfg.schema_version;
    j["seed"] = cfg.seed;
    j["workload"] = workload_to_json(cfg.workload);
    nlohmann::ordered_json e;
    e["n_cus"] = cfg.engine.n_cus;
    e["n_slots"] = cfg.engine.n_slots;
    e["n_banks"] = cfg.engine.n_banks;
    e["mem_freq_mhz"] = cfg.engine.mem_freq_hz / 1'000'000;
    e["base_latency_memcycles"] = cfg.engine.base_latency_memcycles;
    e["service_time_memcycles"] = cfg.engine.service_time_memcycles;
    e["cus_per_domain"] = cfg.engine.cus_per_domain;
    j["engine"] = e;
    j["epoch_len_ns"] = cfg.epoch_len_ps / 1000;
    nlohmann::ordered_json v;
    auto states = nlohmann::ordered_json::array();
    for (const auto& s : cfg.states) {
        nlohmann::ordered_json sj;
        sj["freq_mhz"] = s.freq_hz / 1'000'000;
        sj["voltage"] = s.voltage;
        states.push_back(sj);
    }
    v["states"] = states;
    v["transition_latency_ns"] = cfg.transition.latency_ps / 1000;
    v["transition_energy_pj"] = cfg.transition.energy_pj;
    nlohmann::ordered_json cl;
    cl["f_min_mhz"] = cfg.clamp.f_min_hz ? cfg.clamp.f_min_hz / 1'000'000 : 0;
    cl["f_max_mhz"] = cfg.clamp.f_max_hz != UINT64_MAX ? cfg.clamp.f_max_hz / 1'000'000 : 0;
    v["clamp"] = cl;
    j["vf"] = v;
    nlohmann::ordered_json p;
    p["c_eff_per_cu_nf"] = cfg.power.c_eff_per_cu_nf;
    p["leakage_w_per_cu"] = cfg.power.leakage_w_per_cu;
    p["ivr_efficiency"] = cfg.power.ivr_efficiency;
    p["activity_alpha"] = cfg.power.activity_alpha;
    p["activity_beta"] = cfg.power.activity_beta;
    p["mem_power_w"] = cfg.power.mem_power_w;
    j["power"] = p;
    nlohmann::ordered_json t;
    t["entries"] = cfg.table.entries;
    t["offset_bits"] = cfg.table.offset_bits;
    t["quantized"] = cfg.table.quantized;
    t["scope_cus"] = cfg.table_scope_cus;
    j["table"] = t;
    j["policy"] = policy_name(cfg.policy);
    j["static_freq_mhz"] = cfg.static_freq_hz / 1'000'000;
    j["initial_freq_mhz"] = cfg.initial_freq_hz / 1'000'000;
    nlohmann::ordered_json o;
    o["kind"] = cfg.objective.kind == ObjectiveKind::EnergyBounded ? "energy_bounded"
                : cfg.objective.n == 1                             ? "edp"
                                                                   : "ed2p";
    o["max_perf_loss"] = cfg.objective.max_perf_loss;
    j["objective"] = o;
    j["max_epochs"] = cfg.max_epochs;
    j["oracle_sampling"] =
        cfg.oracle_sampling == 0 ? "auto" : (cfg.oracle_sampling > 0 ? "on" : "off");
    j["parallel_sampling"] = cfg.parallel_sampling;
    return j;
}

std::vector<std::string> validate_run_config_json(const nlohmann::json& j) {
    std::vector<std::string> errors;
    try {
        RunConfig cfg = parse_run_config(j);
        cfg.workload.build(cfg.seed, cfg.epoch_len_ps);  // generator/file checks
    } catch (const std::exception& e) {
        errors.emplace_back(e.what());
    }
    return errors;
}

MatrixConfig parse_matrix_config(const nlohmann::json& j) {
    MatrixConfig m;
    if (j.contains("base")) m.base = parse_run_config(j.at("base"));
    if (j.contains("policies"))
        for (const auto& pj : j.at("policies")) m.policies.push_back(policy_from_name(pj));
    else
        m.policies = {PolicyKind::Oracle, PolicyKind::AccPc, PolicyKind::PcStall,
                      PolicyKind::AccReac, PolicyKind::Crisp, PolicyKind::Crit,
                      PolicyKind::Lead, PolicyKind::Stall};
    if (j.contains("static_freqs_mhz"))
        for (const auto& f : j.at("static_freqs_mhz"))
            m.static_freqs_hz.push_back(mhz_to_hz(f.get<uint64_t>()));
    else
        m.static_freqs_hz = {1'300'000'000, 1'700'000'000, 2'200'000'000};
    if (j.contains("epoch_lens_ns"))
        for (const auto& e : j.at("epoch_lens_ns"))
            m.epoch_lens_ps.push_back(e.get<uint64_t>() * 1000ull);
    else
        m.epoch_lens_ps = {m.base.epoch_len_ps};
    if (j.contains("granularities"))
        for (const auto& g : j.at("granularities")) m.granularities.push_back(g.get<uint32_t>());
    else
        m.granularities = {m.base.engine.cus_per_domain};
    if (j.contains("workloads"))
        for (const auto& w : j.at("workloads")) m.workloads.push_back(parse_workload(w));
    else
        m.workloads = {m.base.workload};
    m.baseline_freq_hz = mhz_to_hz(get_or<uint64_t>(j, "baseline_freq_mhz", 1700));
    m.base.state_index(m.baseline_freq_hz);  // baseline must be a legal state
    return m;
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file: " + path);
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config parse error in " + path + ": " + e.what());
    }
}

}  // namespace dvfsim
