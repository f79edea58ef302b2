// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <bit>
#include <cstring>

#include "support.hpp"
#include "wca/embedding_store.hpp"
#include "wca/encoder.hpp"
#include "wca/error.hpp"

using namespace wca;

namespace {

PrecomputedStore two_ids() {
    PrecomputedStore s(2, false);
    s.insert("img_001", std::vector<float>{0.25f, -1.5f});
    s.insert("img_002", std::vector<float>{3.0f, 1e-7f});
    return s;
}

std::uint64_t format_offset(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_wem1(bytes);
    } catch (const FormatError& e) {
        return e.offset();
    }
    FAIL("expected a format error");
    return 0;
}

}  // namespace

TEST_SUITE("store") {

TEST_CASE("lookup") {
    const auto s = two_ids();
    CHECK(s.lookup("img_001") == Embedding{0.25, -1.5});
    CHECK_THROWS_AS(s.lookup("absent"), MissingEmbeddingError);
    try {
        s.lookup("absent");
    } catch (const MissingEmbeddingError& e) {
        CHECK(e.id() == "absent");
        CHECK(std::string(e.what()).find("absent") != std::string::npos);
    }
}

TEST_CASE("insert validation") {
    PrecomputedStore s(2, true);
    CHECK_NOTHROW(s.insert("a", std::vector<float>{0.6f, 0.8f}));
    CHECK_THROWS_AS(s.insert("a", std::vector<float>{1.0f, 0.0f}), DomainError);
    CHECK_THROWS_AS(s.insert("", std::vector<float>{1.0f, 0.0f}), DomainError);
    CHECK_THROWS_AS(s.insert("b", std::vector<float>{1.0f}), DimensionError);
    CHECK_THROWS_AS(s.insert("c", std::vector<float>{2.0f, 0.0f}), DomainError);  // not unit
    CHECK_THROWS_AS(s.insert("d", std::vector<float>{NAN, 0.0f}), DomainError);
    CHECK_THROWS_AS(s.insert("\xff\xfe", std::vector<float>{1.0f, 0.0f}), DomainError);
    CHECK_THROWS_AS(s.insert(std::string(70000, 'x'), std::vector<float>{1.0f, 0.0f}), DomainError);
    CHECK_NOTHROW(s.insert("caf\xc3\xa9", std::vector<float>{0.0f, 1.0f}));
}

TEST_CASE("empty store is a 13-byte header") {
    const PrecomputedStore s(4, false);
    const auto bytes = encode_wem1(s);
    CHECK(bytes.size() == 13);
    CHECK(std::memcmp(bytes.data(), "WEM1", 4) == 0);
    CHECK(decode_wem1(bytes) == s);
}

TEST_CASE("layout is little-endian and bit-exact") {
    const auto s = two_ids();
    const auto bytes = encode_wem1(s);
    CHECK(bytes.size() == 13 + 2 * (2 + 7 + 8));
    CHECK(bytes[4] == 2);
    CHECK(bytes[8] == 2);
    CHECK(bytes[12] == 0);
    CHECK(bytes[13] == 7);
    CHECK(bytes[14] == 0);
    std::uint32_t bits = 0;
    std::memcpy(&bits, &bytes[22], 4);
    CHECK(bits == std::bit_cast<std::uint32_t>(0.25f));
    const auto back = decode_wem1(bytes);
    CHECK(back == s);
    CHECK(std::bit_cast<std::uint32_t>(back.raw("img_002")[1]) == std::bit_cast<std::uint32_t>(1e-7f));
}

TEST_CASE("file round trip") {
    test::TempDir dir("store");
    const auto s = two_ids();
    write_embedding_file(s, dir / "e.wem1");
    CHECK(read_embedding_file(dir / "e.wem1") == s);
    CHECK_THROWS_AS(read_embedding_file(dir / "missing.wem1"), IoError);
    CHECK_THROWS_AS(write_embedding_file(s, dir / "no/such/dir/e.wem1"), IoError);
}

TEST_CASE("corruptions carry offsets") {
    const auto good = encode_wem1(two_ids());
    auto bad = good;
    bad[0] = 'X';
    bad[1] = 'X';
    bad[2] = 'X';
    bad[3] = 'X';
    CHECK(format_offset(bad) == 0);

    CHECK(format_offset({good.begin(), good.begin() + 8}) == 4);  // truncated header

    bad = good;
    bad[4] = bad[5] = bad[6] = bad[7] = 0;  // dim 0
    CHECK(format_offset(bad) == 4);

    bad = good;
    bad[12] = 2;  // flag
    CHECK(format_offset(bad) == 12);

    CHECK(format_offset({good.begin(), good.end() - 3}) == 13 + 17 + 9);  // truncated payload of record 2

    bad = good;
    bad[8] = 3;  // count says three records
    CHECK(format_offset(bad) == good.size());

    bad = good;
    bad.push_back(0);
    CHECK(format_offset(bad) == good.size());  // trailing bytes

    bad = good;
    bad[13] = 0;  // empty id
    CHECK(format_offset(bad) == 13);

    bad = good;
    std::memcpy(&bad[13 + 17 + 2], "img_001", 7);  // duplicate id
    CHECK(format_offset(bad) == 13 + 17);

    bad = good;
    const float inf = INFINITY;
    std::memcpy(&bad[22], &inf, 4);
    CHECK(format_offset(bad) == 13);

    PrecomputedStore unit(2, true);
    unit.insert("a", std::vector<float>{1.0f, 0.0f});
    bad = encode_wem1(unit);
    const float two = 2.0f;
    std::memcpy(&bad[13 + 3], &two, 4);
    CHECK(format_offset(bad) == 13);
}

TEST_CASE("precomputed backend resolves ids") {
    auto store = std::make_shared<const PrecomputedStore>(two_ids());
    const PrecomputedBackend b(store);
    CHECK(b.dim() == 2);
    CHECK_FALSE(b.wants_pixels());
    CHECK(b.encode_image({"img_002", nullptr}) == Embedding{3.0, static_cast<double>(1e-7f)});
    CHECK_THROWS_AS(b.encode_text({"nope", "text"}), MissingEmbeddingError);
}

TEST_CASE("id scheme") {
    CHECK(patch_id("img", 3) == "img::3");
    CHECK(label_prompt_id("cat") == "cls::cat");
    CHECK(description_id("cat", 0) == "cat::0");
    CHECK(template_prompt_id("cat", 2) == "tpl::cat::2");
}

TEST_CASE("linear encoder examples") {
    CHECK(linear_encode(LinearEncoder::identity(2), Embedding{1, 1}) == Embedding{1, 1});
    CHECK(linear_encode(LinearEncoder(2, 2, {2, 0, 0, 3}), Embedding{1, 1}) == Embedding{2, 3});
    CHECK(LinearEncoder(1, 2, {1, 1}).apply(std::vector<double>{1, -1}) == std::vector<double>{0});
    CHECK_THROWS_AS(LinearEncoder(2, 2, {1, 0, 0, 1}).apply(std::vector<double>{1, 2, 3}), DimensionError);
    CHECK_THROWS(LinearEncoder(2, 2, {1, 0, 0}));
}

TEST_CASE("linear encoder is additive and homogeneous") {
    Rng rng(8);
    for (int t = 0; t < 200; ++t) {
        const std::size_t din = 2 + rng.below(20), dout = 1 + rng.below(20);
        std::vector<double> m(din * dout);
        for (auto& x : m) x = rng.approx_normal();
        const LinearEncoder enc(dout, din, m);
        std::vector<double> x(din), y(din), comb(din);
        const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3);
        for (std::size_t i = 0; i < din; ++i) {
            x[i] = rng.approx_normal();
            y[i] = rng.approx_normal();
            comb[i] = a * x[i] + b * y[i];
        }
        const auto fx = enc.apply(x), fy = enc.apply(y), fc = enc.apply(comb);
        for (std::size_t r = 0; r < dout; ++r) CHECK(std::abs(fc[r] - (a * fx[r] + b * fy[r])) < 1e-9);
    }
}

TEST_CASE("projection encoder is deterministic") {
    const ProjectionEncoder enc(24, 3, 8);
    ImageBuffer img(20, 10);
    for (std::size_t r = 0; r < 10; ++r)
        for (std::size_t c = 0; c < 20; ++c)
            img.set(r, c, {static_cast<std::uint8_t>(r * 20), static_cast<std::uint8_t>(c * 10), 7});
    const auto p = enc.preprocess(img);
    CHECK(p.width() == 8);
    CHECK(p.height() == 8);
    const auto a = enc.encode_image({"x", &p});
    CHECK(a.dim() == 24);
    CHECK(a == enc.encode_image({"x", &p}));
    CHECK(enc.encode_text({"t", "A red square"}) == enc.encode_text({"t", "a RED square"}));
    CHECK_THROWS_AS(enc.encode_text({"t", "  ,, "}), DomainError);
}

}  // TEST_SUITE
