#include <doctest.h>

#include <stdexcept>

#include "dvfsim/predictor.hpp"

using namespace dvfsim;

TEST_CASE("pc_index maps block ids onto table slots") {
    PcTableConfig cfg;  // 128 entries, 4 offset bits
    CHECK(pc_index(0x0000, cfg) == 0);
    CHECK(pc_index(0x0040, cfg) == 4);
    CHECK(pc_index(0x2010, cfg) == 1);  // 0x201 mod 128
}

TEST_CASE("instructions within one 16-byte block share a slot") {
    PcTableConfig cfg;
    CHECK(pc_index(0x0100, cfg) == pc_index(0x010C, cfg));
    CHECK(pc_index(0x0100, cfg) != pc_index(0x0110, cfg));
}

TEST_CASE("update then lookup returns the estimate exactly") {
    PcTable table;
    SensitivityEstimate est{2.5e-8, 17.0, 1'700'000'000};
    table.update(0x0123, est);
    auto hit = table.lookup(0x0123);
    REQUIRE(hit.has_value());
    CHECK(*hit == est);
    // same block, different instruction: still a hit
    auto near = table.lookup(0x0120);
    REQUIRE(near.has_value());
    CHECK(*near == est);
}

TEST_CASE("direct-mapped collisions overwrite, tags catch aliases") {
    PcTable table;
    // 0x0000 and 0x8000 alias (0x800 mod 128 == 0)
    table.update(0x0000, {1e-9, 1.0, 1});
    table.update(0x8000, {2e-9, 2.0, 1});
    CHECK_FALSE(table.lookup(0x0000).has_value());  // tag mismatch after overwrite
    auto hit = table.lookup(0x8000);
    REQUIRE(hit.has_value());
    CHECK(hit->i0 == 2.0);
}

TEST_CASE("negative sensitivity is stored as-is") {
    PcTable table;
    table.update(0x40, {-3e-9, 5.0, 1});
    auto hit = table.lookup(0x40);
    REQUIRE(hit.has_value());
    CHECK(hit->s == -3e-9);
    // clamping happens at prediction time
    CHECK(hit->predict(2'200'000'000) == 0.0);
}

TEST_CASE("predict_domain sums hits and falls back per wavefront") {
    PcTable table;
    table.update(0x0000, {1e-9, 10.0, 1});
    table.update(0x0100, {2e-9, 20.0, 1});

    std::vector<uint64_t> pcs{0x0000, 0x0100};
    std::vector<SensitivityEstimate> fbs(2);
    SensitivityEstimate sum = predict_domain(table, pcs, fbs);
    CHECK(sum.s == doctest::Approx(3e-9));
    CHECK(sum.i0 == doctest::Approx(30.0));

    // all misses with zero fallbacks: cold table behaves reactively-from-zero
    PcTable cold;
    SensitivityEstimate zero = predict_domain(cold, pcs, fbs);
    CHECK(zero.s == 0.0);
    CHECK(zero.i0 == 0.0);

    // all misses with the wavefronts' own last estimates
    fbs[0] = {5e-9, 1.0, 1};
    fbs[1] = {7e-9, 2.0, 1};
    SensitivityEstimate fb = predict_domain(cold, pcs, fbs);
    CHECK(fb.s == doctest::Approx(12e-9));
    CHECK(fb.i0 == doctest::Approx(3.0));
}

TEST_CASE("reactive predictor returns the last estimate or zero") {
    CHECK(reactive_predict(std::nullopt) == SensitivityEstimate{});
    SensitivityEstimate last{4e-9, 3.0, 1};
    CHECK(reactive_predict(last) == last);
}

TEST_CASE("hit ratio counts lookups and hits") {
    PcTable table;
    table.update(0x0000, {});
    table.lookup(0x0000);
    table.lookup(0x0000);
    table.lookup(0x4000);  // miss
    CHECK(table.lookups() == 3);
    CHECK(table.hits() == 2);
    CHECK(table.hit_ratio() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("a 64-instruction loop reaches a perfect steady-state hit ratio") {
    PcTable table;
    // 64 instructions = 16 distinct blocks, no collisions in 128 entries
    for (uint64_t pc = 0; pc < 64 * 4; pc += 4) table.update(pc, {});
    table.reset_stats();
    for (uint64_t pc = 0; pc < 64 * 4; pc += 4) CHECK(table.lookup(pc).has_value());
    CHECK(table.hit_ratio() == 1.0);
}

TEST_CASE("storage accounting reproduces the per-instance byte budget") {
    CHECK(storage_bytes(PredictorKind::PcStall) == 328);
    CHECK(storage_bytes(PredictorKind::Crisp) == 668);
    CHECK(storage_bytes(PredictorKind::Crit) == 660);
    CHECK(storage_bytes(PredictorKind::Lead) == 18);
    CHECK(storage_bytes(PredictorKind::Stall) == 4);
}

TEST_CASE("table dump/load round-trips") {
    PcTableConfig cfg;
    cfg.entries = 32;
    cfg.offset_bits = 4;
    PcTable table(cfg);
    table.update(0x0000, {1.25e-8, 3.5, 1'300'000'000});
    table.update(0x0150, {-2.5e-9, -1.75, 2'200'000'000});
    PcTable back = PcTable::load(table.dump());
    CHECK(back.dump() == table.dump());
    auto hit = back.lookup(0x0150);
    REQUIRE(hit.has_value());
    CHECK(hit->s == -2.5e-9);
    CHECK(hit->source_freq_hz == 2'200'000'000);
}

TEST_CASE("identical update streams give identical tables regardless of scope") {
    PcTable a, b;
    for (int i = 0; i < 200; ++i) {
        uint64_t pc = static_cast<uint64_t>((i * 7) % 96) * 4;
        SensitivityEstimate est{1e-9 * i, 0.5 * i, 1'700'000'000};
        a.update(pc, est);
        b.update(pc, est);
    }
    for (uint64_t pc = 0; pc < 96 * 4; pc += 4) {
        auto ha = a.lookup(pc);
        auto hb = b.lookup(pc);
        CHECK(ha.has_value() == hb.has_value());
        if (ha && hb) CHECK(*ha == *hb);
    }
}

TEST_CASE("quantized mode snaps estimates to the fixed-point grid") {
    PcTableConfig cfg;
    cfg.quantized = true;
    cfg.s_lsb = 1e-9;
    cfg.i0_lsb = 1.0;
    PcTable table(cfg);
    table.update(0x0000, {3.4e-9, 2.6, 1});
    auto hit = table.lookup(0x0000);
    REQUIRE(hit.has_value());
    CHECK(hit->s == doctest::Approx(3e-9));
    CHECK(hit->i0 == doctest::Approx(3.0));

    // saturates at the signed 8-bit range
    table.update(0x0000, {9e-7, 500.0, 1});
    hit = table.lookup(0x0000);
    CHECK(hit->s == doctest::Approx(127e-9));
    CHECK(hit->i0 == doctest::Approx(127.0));
}
