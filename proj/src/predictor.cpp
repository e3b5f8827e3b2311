#include "dvfsim/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace dvfsim {

const char* predictor_name(PredictorKind kind) {
    switch (kind) {
        case PredictorKind::Stall: return "STALL";
        case PredictorKind::Lead: return "LEAD";
        case PredictorKind::Crit: return "CRIT";
        case PredictorKind::Crisp: return "CRISP";
        case PredictorKind::AccReac: return "ACCREAC";
        case PredictorKind::PcStall: return "PCSTALL";
        case PredictorKind::AccPc: return "ACCPC";
        case PredictorKind::Oracle: return "ORACLE";
    }
    return "?";
}

uint32_t pc_index(uint64_t pc, const PcTableConfig& cfg) {
    return static_cast<uint32_t>((pc >> cfg.offset_bits) % cfg.entries);
}

PcTable::PcTable(PcTableConfig cfg) : cfg_(cfg) {
    if (cfg_.entries == 0) throw std::invalid_argument("pc table needs >= 1 entry");
    entries_.resize(cfg_.entries);
}

namespace {

double quantize(double v, double lsb) {
    double q = std::round(v / lsb);
    q = std::clamp(q, -128.0, 127.0);  // signed 8-bit payload
    return q * lsb;
}

}  // namespace

void PcTable::update(uint64_t start_pc, SensitivityEstimate est) {
    if (cfg_.quantized) {
        est.s = quantize(est.s, cfg_.s_lsb);
        est.i0 = quantize(est.i0, cfg_.i0_lsb);
    }
    Entry& e = entries_[index(start_pc)];
    e.tag = start_pc >> cfg_.offset_bits;
    e.est = est;
    e.valid = true;
}

std::optional<SensitivityEstimate> PcTable::lookup(uint64_t pc) {
    ++lookups_;
    const Entry& e = entries_[index(pc)];
    if (!e.valid || e.tag != (pc >> cfg_.offset_bits)) return std::nullopt;
    ++hits_;
    return e.est;
}

double PcTable::hit_ratio() const {
    return lookups_ == 0 ? 0.0 : static_cast<double>(hits_) / static_cast<double>(lookups_);
}

void PcTable::clear() {
    entries_.assign(cfg_.entries, Entry{});
    reset_stats();
}

std::string PcTable::dump() const {
    std::ostringstream os;
    os << "pc-table v1 entries=" << cfg_.entries << " offset_bits=" << cfg_.offset_bits
       << " quantized=" << (cfg_.quantized ? 1 : 0) << "\n";
    char buf[96];
    for (size_t i = 0; i < entries_.size(); ++i) {
        const Entry& e = entries_[i];
        if (!e.valid) continue;
        std::snprintf(buf, sizeof(buf), "%zu 0x%llX %.17g %.17g %llu\n", i,
                      static_cast<unsigned long long>(e.tag), e.est.s, e.est.i0,
                      static_cast<unsigned long long>(e.est.source_freq_hz));
        os << buf;
    }
    return os.str();
}

PcTable PcTable::load(const std::string& text) {
    std::istringstream is(text);
    std::string header;
    if (!std::getline(is, header)) throw std::invalid_argument("empty pc-table dump");

    PcTableConfig cfg;
    unsigned entries = 0, offset = 0, quantized = 0;
    if (std::sscanf(header.c_str(), "pc-table v1 entries=%u offset_bits=%u quantized=%u",
                    &entries, &offset, &quantized) != 3)
        throw std::invalid_argument("bad pc-table header: " + header);
    cfg.entries = entries;
    cfg.offset_bits = offset;
    cfg.quantized = quantized != 0;

    PcTable table(cfg);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        size_t idx = 0;
        unsigned long long tag = 0, src = 0;
        double s = 0.0, i0 = 0.0;
        if (std::sscanf(line.c_str(), "%zu 0x%llx %lg %lg %llu", &idx, &tag, &s, &i0, &src) != 5)
            throw std::invalid_argument("bad pc-table line: " + line);
        if (idx >= table.entries_.size())
            throw std::invalid_argument("pc-table index out of range: " + line);
        table.entries_[idx] = Entry{tag, {s, i0, src}, true};
    }
    return table;
}

SensitivityEstimate predict_domain(PcTable& table, std::span<const uint64_t> wavefront_pcs,
                                   std::span<const SensitivityEstimate> fallbacks) {
    SensitivityEstimate sum;
    for (size_t i = 0; i < wavefront_pcs.size(); ++i) {
        SensitivityEstimate est;
        if (auto hit = table.lookup(wavefront_pcs[i]))
            est = *hit;
        else if (i < fallbacks.size())
            est = fallbacks[i];
        sum.s += est.s;
        sum.i0 += est.i0;
        if (sum.source_freq_hz == 0) sum.source_freq_hz = est.source_freq_hz;
    }
    return sum;
}

SensitivityEstimate reactive_predict(const std::optional<SensitivityEstimate>& last_epoch) {
    return last_epoch.value_or(SensitivityEstimate{});
}

uint64_t storage_bytes(PredictorKind kind, uint32_t table_entries, uint32_t n_slots) {
    switch (kind) {
        case PredictorKind::PcStall:
        case PredictorKind::AccPc:
            // 1-byte sensitivity per entry, 1-byte starting-PC register and a
            // 4-byte stall-time register per wavefront slot.
            return static_cast<uint64_t>(table_entries) + n_slots + 4ull * n_slots;
        case PredictorKind::Crisp: return 668;
        case PredictorKind::Crit: return 660;
        case PredictorKind::Lead: return 18;
        case PredictorKind::Stall: return 4;
        case PredictorKind::AccReac:
        case PredictorKind::Oracle:
            return 0;  // simulation-only designs, no hardware instance
    }
    return 0;
}

}  // namespace dvfsim
