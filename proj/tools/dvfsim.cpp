#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dvfsim/analysis.hpp"
#include "dvfsim/config.hpp"
#include "dvfsim/predictor.hpp"
#include "dvfsim/runner.hpp"

namespace {

using nlohmann::json;

void fail(const std::string& what) {
    json err;
    err["error"] = what;
    std::cerr << err.dump() << "\n";
    std::exit(1);
}

json apply_overrides(json j, const std::vector<std::string>& sets) {
    for (const auto& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) fail("--set expects key.path=value, got '" + kv + "'");
        std::string path = "/" + kv.substr(0, eq);
        for (auto& c : path)
            if (c == '.') c = '/';
        std::string value = kv.substr(eq + 1);
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::exception&) {
            parsed = value;  // bare strings stay strings
        }
        j[json::json_pointer(path)] = parsed;
    }
    return j;
}

struct TraceData {
    std::vector<std::vector<double>> domain_s;           // per domain S series
    std::vector<std::vector<uint32_t>> domain_states;    // per domain selected states
    uint32_t n_states = 0;
};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

TraceData load_epoch_trace(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("cannot open trace: " + path);
    std::string line;
    if (!std::getline(f, line)) fail("empty trace: " + path);
    auto header = split_csv(line);
    auto col = [&](const std::string& name) -> size_t {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        fail("trace has no column '" + name + "'");
        return 0;
    };
    size_t c_domain = col("domain"), c_state = col("state"), c_s = col("est_s");

    TraceData td;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto tok = split_csv(line);
        auto d = static_cast<size_t>(std::stoul(tok[c_domain]));
        if (td.domain_s.size() <= d) {
            td.domain_s.resize(d + 1);
            td.domain_states.resize(d + 1);
        }
        td.domain_s[d].push_back(std::stod(tok[c_s]));
        auto s = static_cast<uint32_t>(std::stoul(tok[c_state]));
        td.domain_states[d].push_back(s);
        td.n_states = std::max(td.n_states, s + 1);
    }
    return td;
}

std::vector<dvfsim::PcSample> load_wf_trace(const std::string& path, dvfsim::PcScope scope,
                                            uint32_t n_slots) {
    std::ifstream f(path);
    if (!f) fail("cannot open wf trace: " + path);
    std::string line;
    if (!std::getline(f, line)) fail("empty wf trace: " + path);
    auto header = split_csv(line);
    auto col = [&](const std::string& name) -> size_t {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        fail("wf trace has no column '" + name + "'");
        return 0;
    };
    size_t c_cu = col("cu"), c_slot = col("slot"), c_pc = col("start_pc"), c_s = col("s");

    std::vector<dvfsim::PcSample> samples;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto tok = split_csv(line);
        dvfsim::PcSample p;
        auto cu = std::stoul(tok[c_cu]);
        auto slot = std::stoul(tok[c_slot]);
        switch (scope) {
            case dvfsim::PcScope::Wavefront: p.scope_key = cu * n_slots + slot + 1; break;
            case dvfsim::PcScope::Cu: p.scope_key = cu + 1; break;
            case dvfsim::PcScope::Gpu: p.scope_key = 0; break;
        }
        p.start_pc = std::stoull(tok[c_pc], nullptr, 0);
        p.s = std::stod(tok[c_s]);
        samples.push_back(p);
    }
    return samples;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& sets,
            const std::string& out_dir) {
    json j = config_path.empty() ? json::object() : dvfsim::load_json_file(config_path);
    j = apply_overrides(j, sets);
    dvfsim::RunConfig cfg = dvfsim::parse_run_config(j);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    dvfsim::RunReport rep = dvfsim::run_policy(cfg);
    dvfsim::write_report_files(cfg, rep);
    std::cout << rep.to_json().dump(2) << "\n";
    return 0;
}

int cmd_matrix(const std::string& config_path, const std::vector<std::string>& sets,
               const std::string& out_dir) {
    json j = dvfsim::load_json_file(config_path);
    j = apply_overrides(j, sets);
    dvfsim::MatrixConfig cfg = dvfsim::parse_matrix_config(j);
    dvfsim::MatrixReport rep = dvfsim::run_matrix(cfg);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream fj(std::filesystem::path(out_dir) / "matrix.json", std::ios::binary);
        fj << rep.to_json().dump(2) << "\n";
        std::ofstream fc(std::filesystem::path(out_dir) / "matrix.csv", std::ios::binary);
        fc << rep.csv();
    }
    std::cout << rep.to_json().dump(2) << "\n";
    return 0;
}

int cmd_analyze(const std::string& what, const std::string& trace_path,
                const std::string& scope_name, std::vector<uint32_t> offsets,
                uint32_t n_slots) {
    json out;
    if (what == "variability") {
        TraceData td = load_epoch_trace(trace_path);
        auto arr = json::array();
        for (size_t d = 0; d < td.domain_s.size(); ++d)
            arr.push_back(td.domain_s[d].size() >= 2
                              ? dvfsim::consecutive_variability(td.domain_s[d])
                              : 0.0);
        out["consecutive_variability"] = arr;
    } else if (what == "time-share") {
        TraceData td = load_epoch_trace(trace_path);
        auto arr = json::array();
        for (auto& states : td.domain_states)
            arr.push_back(dvfsim::time_share(states, td.n_states));
        out["time_share"] = arr;
    } else if (what == "same-pc" || what == "offset-sweep") {
        dvfsim::PcScope scope = dvfsim::PcScope::Wavefront;
        if (scope_name == "CU")
            scope = dvfsim::PcScope::Cu;
        else if (scope_name == "GPU")
            scope = dvfsim::PcScope::Gpu;
        else if (scope_name != "WF")
            fail("scope must be WF, CU, or GPU");
        auto samples = load_wf_trace(trace_path, scope, n_slots);
        if (what == "same-pc") {
            out["same_pc_variability"] = dvfsim::same_pc_variability(samples, 4);
        } else {
            if (offsets.empty()) offsets = {0, 1, 2, 3, 4, 5, 6, 7, 8};
            auto sweep = dvfsim::offset_sweep(samples, offsets);
            auto arr = json::array();
            for (auto& [o, v] : sweep) {
                json row;
                row["offset_bits"] = o;
                row["variability"] = v;
                arr.push_back(row);
            }
            out["offset_sweep"] = arr;
        }
    } else {
        fail("unknown analysis '" + what + "'");
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_validate(const std::string& config_path) {
    json j = dvfsim::load_json_file(config_path);
    auto errors = dvfsim::validate_run_config_json(j);
    if (errors.empty()) {
        std::cout << "{\"valid\":true}\n";
        return 0;
    }
    json out;
    out["valid"] = false;
    out["errors"] = errors;
    std::cerr << out.dump() << "\n";
    return 1;
}

int cmd_storage(uint32_t entries, uint32_t slots) {
    nlohmann::ordered_json out;
    out["PCSTALL"] = dvfsim::storage_bytes(dvfsim::PredictorKind::PcStall, entries, slots);
    out["CRISP"] = dvfsim::storage_bytes(dvfsim::PredictorKind::Crisp, entries, slots);
    out["CRIT"] = dvfsim::storage_bytes(dvfsim::PredictorKind::Crit, entries, slots);
    out["LEAD"] = dvfsim::storage_bytes(dvfsim::PredictorKind::Lead, entries, slots);
    out["STALL"] = dvfsim::storage_bytes(dvfsim::PredictorKind::Stall, entries, slots);
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GPU DVFS simulator with PC-indexed sensitivity prediction"};
    app.require_subcommand(1);

    std::string config_path, out_dir, trace_path, what, scope = "WF";
    std::vector<std::string> sets;
    std::vector<uint32_t> offsets;
    uint32_t entries = 128, slots = 40;

    auto* run = app.add_subcommand("run", "Run one policy to completion");
    run->add_option("-c,--config", config_path, "JSON run config");
    run->add_option("-o,--out", out_dir, "Output directory for report and traces");
    run->add_option("--set", sets, "Override config keys, e.g. --set policy=\\\"ORACLE\\\"");

    auto* matrix = app.add_subcommand("matrix", "Run a policy comparison matrix");
    matrix->add_option("-c,--config", config_path, "JSON matrix config")->required();
    matrix->add_option("-o,--out", out_dir, "Output directory");
    matrix->add_option("--set", sets, "Override config keys");

    auto* analyze = app.add_subcommand("analyze", "Post-process run traces");
    analyze->add_option("--what", what, "variability|time-share|same-pc|offset-sweep")
        ->required();
    analyze->add_option("--trace", trace_path, "trace.csv or wf_trace.csv")->required();
    analyze->add_option("--scope", scope, "WF|CU|GPU (same-pc grouping)");
    analyze->add_option("--offsets", offsets, "offset bit widths for the sweep");
    analyze->add_option("--slots", slots, "wavefront slots per CU (scope keys)");

    auto* validate = app.add_subcommand("validate-config", "Check a run config");
    validate->add_option("-c,--config", config_path, "JSON run config")->required();

    auto* storage = app.add_subcommand("storage-report", "Hardware storage per predictor");
    storage->add_option("--entries", entries, "PC table entries");
    storage->add_option("--slots", slots, "wavefront slots per CU");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, sets, out_dir);
        if (matrix->parsed()) return cmd_matrix(config_path, sets, out_dir);
        if (analyze->parsed()) return cmd_analyze(what, trace_path, scope, offsets, slots);
        if (validate->parsed()) return cmd_validate(config_path);
        if (storage->parsed()) return cmd_storage(entries, slots);
    } catch (const std::exception& e) {
        fail(e.what());
    }
    return 0;
}
