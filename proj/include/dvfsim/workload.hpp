#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dvfsim {

// Instruction word size in bytes. PC arithmetic everywhere assumes this.
inline constexpr uint64_t kInstBytes = 4;

enum class InstKind : uint8_t {
    Compute,    // arg0 = issue cycles (>= 1)
    Load,       // arg0 = bank index
    Store,      // arg0 = bank index
    Waitcnt,    // arg0 = max outstanding memory ops allowed to proceed
    Branch,     // arg0 = target pc (bytes), arg1 = trip count (>= 1)
    EndKernel,
};

const char* inst_kind_name(InstKind kind);

struct Instruction {
    uint64_t pc = 0;
    InstKind kind = InstKind::Compute;
    uint64_t arg0 = 0;
    uint32_t arg1 = 0;

    static Instruction compute(uint64_t pc, uint32_t issue_cycles = 1);
    static Instruction load(uint64_t pc, uint32_t bank);
    static Instruction store(uint64_t pc, uint32_t bank);
    static Instruction waitcnt(uint64_t pc, uint32_t max_outstanding = 0);
    static Instruction branch(uint64_t pc, uint64_t target_pc, uint32_t trip_count);
    static Instruction end_kernel(uint64_t pc);

    bool operator==(const Instruction&) const = default;
};

struct Kernel {
    std::string name;
    uint32_t wavefront_count = 1;
    std::vector<Instruction> instructions;

    // Dense ordinal per Branch instruction, filled by validate(); wavefronts
    // keep one trip counter per ordinal.
    std::vector<uint32_t> branch_ordinals;
    uint32_t n_branches = 0;

    const Instruction& at_pc(uint64_t pc) const { return instructions[pc / kInstBytes]; }
    uint32_t branch_ordinal(uint64_t pc) const { return branch_ordinals[pc / kInstBytes]; }

    // Checks all instruction invariants (contiguous 4-byte PCs from 0, branch
    // targets in range, trailing EndKernel) and builds branch ordinals.
    // Throws std::invalid_argument naming the offending pc.
    void validate();

    bool operator==(const Kernel& o) const {
        return name == o.name && wavefront_count == o.wavefront_count &&
               instructions == o.instructions;
    }
};

struct PhaseSpec {
    double compute_fraction = 1.0;  // 1.0 = pure compute, 0.0 = pure memory
    uint32_t length_epochs = 0;     // 0 = use PhaseProfile::phase_length_epochs
};

// Drives synthesis of periodic workloads whose frequency sensitivity swings
// between phases. Each phase becomes an inner loop sized to span roughly
// phase_length_epochs at the 1.7 GHz reference; the phase sequence repeats
// `iterations` times under one outer loop.
struct PhaseProfile {
    uint32_t phase_length_epochs = 2;
    std::vector<PhaseSpec> phases;
    uint32_t loop_body_len = 32;
    uint64_t seed = 0;

    uint32_t wavefront_count = 40;
    uint32_t iterations = 20;
    uint64_t epoch_len_ps = 1'000'000;  // sizing reference only
    uint32_t bank_spread = 16;
};

Kernel generate_loop_kernel(uint32_t body_len, double mem_ratio, uint32_t bank_spread,
                            uint32_t trip_count, uint32_t wavefront_count, uint64_t seed,
                            uint32_t waitcnt_distance = 0);

Kernel generate_phased_workload(const PhaseProfile& profile);

// Rough instruction commit rate (per CU cycle) the generator assumes when
// sizing phases; compute_fraction in [0,1].
double assumed_commit_rate(double compute_fraction, uint32_t wavefront_count);

std::string serialize_kernel(const Kernel& kernel);
Kernel parse_kernel(const std::string& text);
Kernel load_workload_file(const std::string& path);
void save_workload_file(const Kernel& kernel, const std::string& path);

}  // namespace dvfsim
