#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dvfsim/sensitivity.hpp"

namespace dvfsim {

enum class PredictorKind : uint8_t {
    Stall,
    Lead,
    Crit,
    Crisp,
    AccReac,
    PcStall,
    AccPc,
    Oracle,
};

const char* predictor_name(PredictorKind kind);

struct PcTableConfig {
    uint32_t entries = 128;
    uint32_t offset_bits = 4;  // 16-byte blocks, ~4 instructions per entry
    bool quantized = false;    // hardware-faithful 8-bit payload when set
    double s_lsb = 1e-9;       // 1 instruction/GHz per step
    double i0_lsb = 1.0;

    bool operator==(const PcTableConfig&) const = default;
};

uint32_t pc_index(uint64_t pc, const PcTableConfig& cfg);

// Direct-mapped, tag-checked PC-indexed sensitivity table. The tag is the full
// block id (pc >> offset_bits) of the last writer; collisions overwrite.
class PcTable {
  public:
    PcTable() : PcTable(PcTableConfig{}) {}
    explicit PcTable(PcTableConfig cfg);

    const PcTableConfig& config() const { return cfg_; }
    uint32_t index(uint64_t pc) const { return pc_index(pc, cfg_); }

    void update(uint64_t start_pc, SensitivityEstimate est);
    std::optional<SensitivityEstimate> lookup(uint64_t pc);

    uint64_t lookups() const { return lookups_; }
    uint64_t hits() const { return hits_; }
    double hit_ratio() const;
    void reset_stats() { lookups_ = hits_ = 0; }
    void clear();

    std::string dump() const;
    static PcTable load(const std::string& text);

    bool operator==(const PcTable&) const = default;

  private:
    struct Entry {
        uint64_t tag = 0;
        SensitivityEstimate est;
        bool valid = false;
        bool operator==(const Entry&) const = default;
    };
    PcTableConfig cfg_;
    std::vector<Entry> entries_;
    uint64_t lookups_ = 0;
    uint64_t hits_ = 0;
};

// Per-wavefront lookups summed into a domain estimate; a missing entry
// contributes the wavefront's fallback (its own last estimate, or zero).
SensitivityEstimate predict_domain(PcTable& table, std::span<const uint64_t> wavefront_pcs,
                                   std::span<const SensitivityEstimate> fallbacks);

// Last-value prediction: the elapsed epoch's estimate, or zero before any
// epoch has completed.
SensitivityEstimate reactive_predict(const std::optional<SensitivityEstimate>& last_epoch);

// Hardware storage per predictor instance in bytes. PCSTALL scales with the
// table and slot count; the baseline models are fixed-cost counters.
uint64_t storage_bytes(PredictorKind kind, uint32_t table_entries = 128,
                       uint32_t n_slots = 40);

}  // namespace dvfsim
