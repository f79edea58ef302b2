// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "wca/fixtures.hpp"
#include "wca/visual_prompt.hpp"

using namespace wca;

TEST_SUITE("fixtures") {

TEST_CASE("recipes have the documented shape") {
    const auto c = make_classify_fixture(0);
    CHECK(c.catalog.size() == 3);
    CHECK(c.crops == 8);
    CHECK(c.catalog[0].descriptions.size() == 5);
    CHECK(c.store.dim() == 16);
    CHECK(c.store.size() == 3 * (1 + 5) + 3 * (1 + 8));

    const auto b = make_bench_fixture(0);
    CHECK(b.catalog.size() == 10);
    CHECK(b.manifest.records.size() == 200);
    CHECK(b.store.size() == 10 * 11 + 200 * 17);
    CHECK(encode_wem1(b.store) == encode_wem1(make_bench_fixture(0).store));
    CHECK(encode_wem1(b.store) != encode_wem1(make_bench_fixture(1).store));
}

TEST_CASE("reference evaluator on a hand case") {
    SyntheticFixture fx{"hand", 0, 1, LabelCatalog(std::vector<DescriptionSet>{{"a", {"d"}}, {"b", {"e"}}}), {}, PrecomputedStore(2, false)};
    fx.manifest.records.push_back({"img", "b"});
    fx.store.insert("cls::a", std::vector<float>{1, 0});
    fx.store.insert("a::0", std::vector<float>{1, 0});
    fx.store.insert("cls::b", std::vector<float>{0, 1});
    fx.store.insert("b::0", std::vector<float>{1, 1});
    fx.store.insert("img", std::vector<float>{0, 2});
    fx.store.insert("img::0", std::vector<float>{0, 3});
    const auto j = oracle_evaluate(fx, "wca");
    CHECK(j["predictions"][0]["predicted"] == "b");
    CHECK(j["predictions"][0]["scores"][0].get<double>() == 0.0);
    CHECK(std::abs(j["predictions"][0]["scores"][1].get<double>() - std::sqrt(0.5)) < 1e-15);
    CHECK(j["top1"] == 1.0);
}

TEST_CASE("oracle orders aggregators on fx-bench-noisy") {
    const auto e = oracle_expected(make_bench_fixture(0), false);
    const double mx = e["aggregations"]["max"]["top1"], avg = e["aggregations"]["avg"]["top1"],
                 wca = e["aggregations"]["wca"]["top1"];
    CHECK(mx <= avg);
    CHECK(avg <= wca);
}

TEST_CASE("golden crop specs mirror the sampler") {
    const auto g = crop_spec_golden(42);
    PromptConfig cfg;
    cfg.seed = 42;
    const auto specs = sample_crop_specs(cfg, 320, 240, "golden");
    REQUIRE(g["specs"].size() == specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        CHECK(g["specs"][i]["gamma"].get<double>() == specs[i].gamma);
        CHECK(g["specs"][i]["left"].get<std::size_t>() == specs[i].left);
    }
}

}  // TEST_SUITE
