#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <vector>

#include "racecms/bytes.hpp"
#include "racecms/core.hpp"
#include "racecms/errors.hpp"

using namespace racecms;

TEST_CASE("sparse vector construction sorts and deduplicates", "[core]") {
    SparseVector v = SparseVector::from_unsorted({5, 1, 3, 1, 5});
    REQUIRE(v.ids() == std::vector<std::uint32_t>{1, 3, 5});
    REQUIRE(v.size() == 3);
    REQUIRE_FALSE(v.empty());

    SECTION("idempotent on already valid input") {
        SparseVector again = SparseVector::from_unsorted(v.ids());
        REQUIRE(again == v);
    }
    SECTION("insertion order does not matter") {
        REQUIRE(make_sparse_vector({3, 5, 1}) == v);
        REQUIRE(make_sparse_vector({5, 3, 1, 3}) == v);
    }
}

TEST_CASE("sparse vector from_sorted validates the invariant", "[core]") {
    REQUIRE(SparseVector::from_sorted({1, 2, 9}).size() == 3);
    REQUIRE(SparseVector::from_sorted({}).empty());
    REQUIRE(SparseVector::from_sorted({7}).ids() == std::vector<std::uint32_t>{7});
    REQUIRE_THROWS_AS(SparseVector::from_sorted({1, 1, 2}), DomainError);
    REQUIRE_THROWS_AS(SparseVector::from_sorted({2, 1}), DomainError);
}

TEST_CASE("dataset counts and label lookup", "[core]") {
    Dataset ds;
    ds.vectors.push_back(make_sparse_vector({1, 2, 3}));
    ds.vectors.push_back(make_sparse_vector({}));
    ds.vectors.push_back(make_sparse_vector({9}));
    REQUIRE(ds.size() == 3);
    REQUIRE(ds.nonzeros() == 4);

    SECTION("no labels") { REQUIRE_THROWS_AS(ds.label_index(), DomainError); }
    SECTION("valid labels") {
        ds.labels = std::vector<std::uint32_t>{100, 7, 42};
        auto lookup = ds.label_index();
        REQUIRE(lookup.at(100) == 0);
        REQUIRE(lookup.at(7) == 1);
        REQUIRE(lookup.at(42) == 2);
    }
    SECTION("misaligned labels") {
        ds.labels = std::vector<std::uint32_t>{100, 7};
        REQUIRE_THROWS_AS(ds.label_index(), ConfigMismatch);
    }
    SECTION("duplicate labels") {
        ds.labels = std::vector<std::uint32_t>{100, 7, 100};
        REQUIRE_THROWS_AS(ds.label_index(), ConfigMismatch);
    }
}

TEST_CASE("config validation accepts defaults and rejects each bad field", "[core]") {
    SketchConfig cfg;
    REQUIRE_NOTHROW(validate_config(cfg));

    auto expect_invalid = [](SketchConfig bad) {
        REQUIRE_THROWS_AS(validate_config(bad), InvalidConfig);
    };
    SketchConfig bad = cfg;
    bad.K = 0;
    expect_invalid(bad);
    bad = cfg;
    bad.K = 256;
    expect_invalid(bad);
    bad = cfg;
    bad.d = 0;
    expect_invalid(bad);
    bad = cfg;
    bad.d = 1024;
    expect_invalid(bad);
    bad = cfg;
    bad.w = 0;
    expect_invalid(bad);
    bad = cfg;
    bad.w = 1u << 21;
    expect_invalid(bad);
    bad = cfg;
    bad.R = 0;
    expect_invalid(bad);
    bad = cfg;
    bad.r = 1;
    expect_invalid(bad);
    bad = cfg;
    bad.counter_bits = 12;
    expect_invalid(bad);
    bad = cfg;
    bad.storage = static_cast<StorageMode>(9);
    expect_invalid(bad);
    bad = cfg;
    bad.sharing = static_cast<LshSharing>(9);
    expect_invalid(bad);
}

TEST_CASE("config validation enforces the address-space caps", "[core]") {
    SketchConfig cfg;
    cfg.storage = StorageMode::Map; // caps apply regardless of backing store

    SECTION("d*w*R beyond 32 bits") {
        cfg.d = 1023;
        cfg.w = (1u << 21) - 1;
        cfg.R = (1u << 21) - 1;
        REQUIRE_THROWS_AS(validate_config(cfg), InvalidConfig);
    }
    SECTION("d*w*R*r beyond 62 bits") {
        cfg.d = 1023;
        cfg.w = (1u << 21) - 1;
        cfg.R = 2; // d*w*R = 4290770946, still inside 32 bits
        cfg.r = 1200000000;
        REQUIRE_THROWS_AS(validate_config(cfg), InvalidConfig);
        cfg.r = 1000000; // same cells, far below the counter-space cap
        REQUIRE_NOTHROW(validate_config(cfg));
    }
}

TEST_CASE("byte writer and reader round-trip every width", "[core]") {
    ByteWriter wtr;
    wtr.u8(0xAB);
    wtr.u16(0x1234);
    wtr.u32(0xDEADBEEF);
    wtr.u64(0x0123456789ABCDEFull);
    wtr.f32(1.5f);
    wtr.f64(-2.25);
    std::vector<std::uint8_t> buf = wtr.take();
    REQUIRE(buf.size() == 1 + 2 + 4 + 8 + 4 + 8);

    ByteReader rd(buf);
    REQUIRE(rd.u8() == 0xAB);
    REQUIRE(rd.u16() == 0x1234);
    REQUIRE(rd.u32() == 0xDEADBEEF);
    REQUIRE(rd.u64() == 0x0123456789ABCDEFull);
    REQUIRE(rd.f32() == 1.5f);
    REQUIRE(rd.f64() == -2.25);
    REQUIRE(rd.remaining() == 0);
    REQUIRE_NOTHROW(rd.expect_end("buf"));
}

TEST_CASE("byte encoding is little-endian", "[core]") {
    ByteWriter wtr;
    wtr.u32(0x01020304u);
    const auto& b = wtr.bytes();
    REQUIRE(b == std::vector<std::uint8_t>{0x04, 0x03, 0x02, 0x01});
}

TEST_CASE("byte reader fails loudly on truncation and framing errors", "[core]") {
    ByteWriter wtr;
    wtr.magic("ABCD");
    wtr.u16(7);
    std::vector<std::uint8_t> buf = wtr.take();

    SECTION("wrong magic") {
        ByteReader rd(buf);
        REQUIRE_THROWS_AS(rd.expect_magic("ABCE", "thing"), CorruptData);
    }
    SECTION("underflow") {
        ByteReader rd(buf);
        rd.expect_magic("ABCD", "thing");
        REQUIRE_THROWS_AS(rd.u64(), CorruptData);
    }
    SECTION("trailing bytes") {
        ByteReader rd(buf);
        rd.expect_magic("ABCD", "thing");
        REQUIRE_THROWS_AS(rd.expect_end("thing"), CorruptData);
    }
}

TEST_CASE("file write/read round trip", "[core]") {
    std::string path = "core_bytes_roundtrip.tmp";
    std::vector<std::uint8_t> payload = {0, 1, 2, 254, 255};
    write_file(path, payload);
    REQUIRE(read_file(path) == payload);
    std::remove(path.c_str());
    REQUIRE_THROWS_AS(read_file(path), Error);
}

TEST_CASE("error hierarchy and parse error line numbers", "[core]") {
    ParseError err(42, "bad token");
    REQUIRE(err.line() == 42);
    REQUIRE(std::string(err.what()).find("42") != std::string::npos);

    // Corrupt sketch data must be catchable as corrupt data and as the
    // library-wide base error.
    CorruptSketch cs("x");
    REQUIRE(dynamic_cast<const CorruptData*>(&cs) != nullptr);
    REQUIRE(dynamic_cast<const Error*>(&cs) != nullptr);
    REQUIRE(dynamic_cast<const std::runtime_error*>(&cs) != nullptr);
}
