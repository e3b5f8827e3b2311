#include "dvfsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dvfsim {

namespace {

// Unbiased modulo draw. std::uniform_int_distribution is not pinned across
// standard library implementations; mt19937_64 output is.
uint64_t rng_below(std::mt19937_64& rng, uint64_t n) {
    return n <= 1 ? 0 : rng() % n;
}

std::string hex_pc(uint64_t pc) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "0x%04llX", static_cast<unsigned long long>(pc));
    return buf;
}

[[noreturn]] void pc_error(uint64_t pc, const std::string& what) {
    throw std::invalid_argument("pc " + hex_pc(pc) + ": " + what);
}

}  // namespace

const char* inst_kind_name(InstKind kind) {
    switch (kind) {
        case InstKind::Compute: return "COMPUTE";
        case InstKind::Load: return "LOAD";
        case InstKind::Store: return "STORE";
        case InstKind::Waitcnt: return "WAITCNT";
        case InstKind::Branch: return "BRANCH";
        case InstKind::EndKernel: return "ENDKERNEL";
    }
    return "?";
}

Instruction Instruction::compute(uint64_t pc, uint32_t issue_cycles) {
    return {pc, InstKind::Compute, issue_cycles, 0};
}
Instruction Instruction::load(uint64_t pc, uint32_t bank) { return {pc, InstKind::Load, bank, 0}; }
Instruction Instruction::store(uint64_t pc, uint32_t bank) { return {pc, InstKind::Store, bank, 0}; }
Instruction Instruction::waitcnt(uint64_t pc, uint32_t max_outstanding) {
    return {pc, InstKind::Waitcnt, max_outstanding, 0};
}
Instruction Instruction::branch(uint64_t pc, uint64_t target_pc, uint32_t trip_count) {
    return {pc, InstKind::Branch, target_pc, trip_count};
}
Instruction Instruction::end_kernel(uint64_t pc) { return {pc, InstKind::EndKernel, 0, 0}; }

void Kernel::validate() {
    if (instructions.empty()) throw std::invalid_argument("no instructions");
    if (wavefront_count < 1) throw std::invalid_argument("wavefront_count must be >= 1");

    const uint64_t limit = instructions.size() * kInstBytes;
    branch_ordinals.assign(instructions.size(), 0);
    n_branches = 0;
    for (size_t i = 0; i < instructions.size(); ++i) {
        const Instruction& inst = instructions[i];
        if (inst.pc != i * kInstBytes)
            pc_error(inst.pc, "pcs must be contiguous multiples of 4 starting at 0x0000");
        switch (inst.kind) {
            case InstKind::Compute:
                if (inst.arg0 < 1) pc_error(inst.pc, "COMPUTE issue cycles must be >= 1");
                break;
            case InstKind::Branch:
                if (inst.arg0 % kInstBytes != 0 || inst.arg0 >= limit)
                    pc_error(inst.pc, "BRANCH target " + hex_pc(inst.arg0) +
                                          " is not an instruction in this kernel");
                if (inst.arg1 < 1) pc_error(inst.pc, "BRANCH trip count must be >= 1");
                branch_ordinals[i] = n_branches++;
                break;
            default:
                break;
        }
    }
    if (instructions.back().kind != InstKind::EndKernel)
        pc_error(instructions.back().pc, "kernel must end with ENDKERNEL");
}

namespace {

enum class SlotKind : uint8_t { Compute, Mem };

// Emits one loop body: `body_len` slots of which `n_mem` are memory ops, each
// drained by a WAITCNT(0) `waitcnt_distance` slots later (flushed before the
// backward branch so the loop never accumulates outstanding requests).
void emit_body(std::vector<Instruction>& out, uint32_t body_len, uint32_t n_mem,
               uint32_t bank_spread, uint32_t waitcnt_distance, std::mt19937_64& rng) {
    std::vector<SlotKind> slots(body_len, SlotKind::Compute);
    std::vector<uint32_t> order(body_len);
    for (uint32_t i = 0; i < body_len; ++i) order[i] = i;
    for (uint32_t i = 0; i < body_len; ++i) {
        uint32_t j = i + static_cast<uint32_t>(rng_below(rng, body_len - i));
        std::swap(order[i], order[j]);
    }
    for (uint32_t i = 0; i < n_mem && i < body_len; ++i) slots[order[i]] = SlotKind::Mem;

    auto next_pc = [&out] { return out.size() * kInstBytes; };
    std::vector<uint32_t> pending;  // countdown of slots until each WAITCNT is due
    for (uint32_t s = 0; s < body_len; ++s) {
        if (slots[s] == SlotKind::Mem) {
            uint32_t bank = static_cast<uint32_t>(rng_below(rng, bank_spread));
            bool is_store = rng_below(rng, 4) == 0;
            out.push_back(is_store ? Instruction::store(next_pc(), bank)
                                   : Instruction::load(next_pc(), bank));
            pending.push_back(waitcnt_distance);
        } else {
            out.push_back(Instruction::compute(next_pc(), 1));
        }
        bool due = false;
        for (auto& p : pending) {
            if (p == 0) due = true;
        }
        if (due) {
            out.push_back(Instruction::waitcnt(next_pc(), 0));
            pending.clear();  // WAITCNT(0) drains everything outstanding
        }
        for (auto& p : pending) --p;
    }
    if (!pending.empty()) out.push_back(Instruction::waitcnt(next_pc(), 0));
}

}  // namespace

Kernel generate_loop_kernel(uint32_t body_len, double mem_ratio, uint32_t bank_spread,
                            uint32_t trip_count, uint32_t wavefront_count, uint64_t seed,
                            uint32_t waitcnt_distance) {
    if (body_len < 2) throw std::invalid_argument("body_len must be >= 2");
    if (trip_count < 1) throw std::invalid_argument("trip_count must be >= 1");
    if (bank_spread == 0) throw std::invalid_argument("bank_spread must be >= 1");
    if (mem_ratio < 0.0 || mem_ratio > 1.0)
        throw std::invalid_argument("mem_ratio must be in [0,1]");

    std::mt19937_64 rng(seed);
    Kernel k;
    k.name = "loop_b" + std::to_string(body_len) + "_m" +
             std::to_string(static_cast<int>(mem_ratio * 100)) + "_s" + std::to_string(seed);
    k.wavefront_count = wavefront_count;

    auto n_mem = static_cast<uint32_t>(mem_ratio * body_len);
    emit_body(k.instructions, body_len, n_mem, bank_spread, waitcnt_distance, rng);
    k.instructions.push_back(
        Instruction::branch(k.instructions.size() * kInstBytes, 0, trip_count));
    k.instructions.push_back(Instruction::end_kernel(k.instructions.size() * kInstBytes));
    k.validate();
    return k;
}

double assumed_commit_rate(double compute_fraction, uint32_t wavefront_count) {
    const double kMemLatencyCycles = 510.0;  // ~300 ns at the 1.7 GHz reference
    double m = 1.0 - std::clamp(compute_fraction, 0.0, 1.0);
    if (m <= 1e-12) return 1.0;
    double insts_per_window = 1.0 / m + 1.0;  // ops until the next blocking WAITCNT
    double rate = wavefront_count * insts_per_window / (insts_per_window + kMemLatencyCycles);
    return std::min(1.0, rate);
}

Kernel generate_phased_workload(const PhaseProfile& profile) {
    if (profile.phases.empty()) throw std::invalid_argument("phases list is empty");
    if (profile.loop_body_len < 1) throw std::invalid_argument("loop_body_len must be >= 1");
    if (profile.bank_spread == 0) throw std::invalid_argument("bank_spread must be >= 1");
    for (const auto& p : profile.phases)
        if (p.compute_fraction < 0.0 || p.compute_fraction > 1.0)
            throw std::invalid_argument("compute_fraction must be in [0,1]");

    const double kRefFreqHz = 1.7e9;  // sizing baseline
    const double epoch_cycles = static_cast<double>(profile.epoch_len_ps) * 1e-12 * kRefFreqHz;

    Kernel k;
    k.name = "phased_p" + std::to_string(profile.phases.size()) + "_s" +
             std::to_string(profile.seed);
    k.wavefront_count = profile.wavefront_count;

    std::mt19937_64 rng(profile.seed);
    uint32_t body_len = std::max<uint32_t>(2, profile.loop_body_len);
    for (size_t pi = 0; pi < profile.phases.size(); ++pi) {
        const PhaseSpec& phase = profile.phases[pi];
        uint32_t len_epochs =
            phase.length_epochs ? phase.length_epochs : profile.phase_length_epochs;
        double c = std::clamp(phase.compute_fraction, 0.0, 1.0);
        auto n_mem = static_cast<uint32_t>((1.0 - c) * body_len);

        uint64_t chunk_start = k.instructions.size() * kInstBytes;
        emit_body(k.instructions, body_len, n_mem, profile.bank_spread, 0, rng);
        double rate = assumed_commit_rate(c, profile.wavefront_count);
        double insts_per_iter =
            static_cast<double>(k.instructions.size() - chunk_start / kInstBytes) + 1.0;
        auto iters = static_cast<uint32_t>(std::max<long long>(
            1, std::llround(len_epochs * epoch_cycles * rate / insts_per_iter)));
        k.instructions.push_back(
            Instruction::branch(k.instructions.size() * kInstBytes, chunk_start, iters));
    }
    k.instructions.push_back(
        Instruction::branch(k.instructions.size() * kInstBytes, 0, profile.iterations));
    k.instructions.push_back(Instruction::end_kernel(k.instructions.size() * kInstBytes));
    k.validate();
    return k;
}

std::string serialize_kernel(const Kernel& kernel) {
    nlohmann::ordered_json header;
    header["name"] = kernel.name;
    header["wavefront_count"] = kernel.wavefront_count;

    std::ostringstream os;
    os << header.dump() << "\n";
    for (const Instruction& inst : kernel.instructions) {
        os << hex_pc(inst.pc) << " " << inst_kind_name(inst.kind);
        switch (inst.kind) {
            case InstKind::Compute:
            case InstKind::Load:
            case InstKind::Store:
            case InstKind::Waitcnt:
                os << " " << inst.arg0;
                break;
            case InstKind::Branch:
                os << " " << hex_pc(inst.arg0) << " " << inst.arg1;
                break;
            case InstKind::EndKernel:
                break;
        }
        os << "\n";
    }
    return os.str();
}

namespace {

uint64_t parse_u64(const std::string& tok, int line, const char* what) {
    try {
        size_t pos = 0;
        uint64_t v = std::stoull(tok, &pos, 0);  // accepts 0x.. and decimal
        if (pos != tok.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("line " + std::to_string(line) + ": bad " + what + " '" +
                                    tok + "'");
    }
}

}  // namespace

Kernel parse_kernel(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int line_no = 0;

    Kernel k;
    if (!std::getline(is, line)) throw std::invalid_argument("no instructions");
    ++line_no;
    try {
        auto header = nlohmann::json::parse(line);
        k.name = header.at("name").get<std::string>();
        k.wavefront_count = header.at("wavefront_count").get<uint32_t>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("line 1: bad header: " + std::string(e.what()));
    }

    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<std::string> tok;
        std::string t;
        while (ls >> t) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok.size() < 2)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": missing kind");

        uint64_t pc = parse_u64(tok[0], line_no, "pc");
        const std::string& kind = tok[1];
        auto want_args = [&](size_t n) {
            if (tok.size() != 2 + n)
                throw std::invalid_argument("line " + std::to_string(line_no) + ": " + kind +
                                            " expects " + std::to_string(n) + " argument(s)");
        };
        if (kind == "COMPUTE") {
            want_args(1);
            k.instructions.push_back(Instruction::compute(
                pc, static_cast<uint32_t>(parse_u64(tok[2], line_no, "issue cycles"))));
        } else if (kind == "LOAD" || kind == "STORE") {
            want_args(1);
            auto bank = static_cast<uint32_t>(parse_u64(tok[2], line_no, "bank"));
            k.instructions.push_back(kind == "LOAD" ? Instruction::load(pc, bank)
                                                    : Instruction::store(pc, bank));
        } else if (kind == "WAITCNT") {
            want_args(1);
            k.instructions.push_back(Instruction::waitcnt(
                pc, static_cast<uint32_t>(parse_u64(tok[2], line_no, "bound"))));
        } else if (kind == "BRANCH") {
            want_args(2);
            k.instructions.push_back(
                Instruction::branch(pc, parse_u64(tok[2], line_no, "target"),
                                    static_cast<uint32_t>(parse_u64(tok[3], line_no, "trips"))));
        } else if (kind == "ENDKERNEL") {
            want_args(0);
            k.instructions.push_back(Instruction::end_kernel(pc));
        } else {
            throw std::invalid_argument("line " + std::to_string(line_no) +
                                        ": unknown kind '" + kind + "'");
        }
    }
    if (k.instructions.empty()) throw std::invalid_argument("no instructions");
    k.validate();
    return k;
}

Kernel load_workload_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open workload file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_kernel(buf.str());
}

void save_workload_file(const Kernel& kernel, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot write workload file: " + path);
    f << serialize_kernel(kernel);
}

}  // namespace dvfsim
