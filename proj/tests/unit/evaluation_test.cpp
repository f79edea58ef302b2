// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>
#include <sstream>

#include "support.hpp"
#include "wca/error.hpp"
#include "wca/evaluation.hpp"
#include "wca/fixtures.hpp"

using namespace wca;

namespace {

RunDescription wca_run(std::size_t crops) {
    RunDescription d;
    d.run.prompt.num_crops = crops;
    d.label_template = std::string(kDefaultTemplate);
    d.max_descriptions = kDefaultMaxDescriptions;
    d.backend = "embeddings";
    return d;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("manifest parsing") {
    const auto m = parse_manifest("{\"id\": \"a\", \"label\": \"cat\"}\n\n{\"id\": \"b\", \"label\": \"dog\"}\n", "/data");
    CHECK(m.records.size() == 2);
    CHECK(m.records[1].label == "dog");
    CHECK(m.root == "/data");
    CHECK_THROWS_AS(parse_manifest("{\"id\": \"a\", \"label\": \"x\"}\n{\"id\": \"a\", \"label\": \"y\"}\n"),
                    IngestionError);
    try {
        parse_manifest("{\"id\": \"a\", \"label\": \"x\"}\nnot json\n");
        FAIL("expected an ingestion error");
    } catch (const IngestionError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_manifest("{\"id\": 3, \"label\": \"x\"}\n"), IngestionError);
    CHECK_THROWS_AS(parse_manifest("{\"label\": \"x\"}\n"), IngestionError);
    CHECK_THROWS_AS(load_manifest("/nonexistent/m.jsonl"), IoError);

    const LabelCatalog cat(std::vector<DescriptionSet>{{"cat", {"feline"}}});
    CHECK_THROWS_AS(check_manifest_labels(m, cat), IngestionError);
}

TEST_CASE("constructed perfection gives accuracy one") {
    auto store = std::make_shared<PrecomputedStore>(3, false);
    const std::vector<std::vector<float>> protos{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    std::vector<DescriptionSet> sets;
    DatasetManifest m;
    for (std::size_t k = 0; k < 3; ++k) {
        const std::string label = "c" + std::to_string(k);
        sets.push_back({label, {"only"}});
        store->insert("cls::" + label, protos[k]);
        store->insert(label + "::0", protos[k]);
        for (int n = 0; n < 4; ++n) {
            const std::string id = label + "-" + std::to_string(n);
            m.records.push_back({id, label});
            store->insert(id, protos[k]);
            store->insert(id + "::0", protos[k]);
        }
    }
    const LabelCatalog cat(sets);
    const PrecomputedBackend backend(store);
    const auto r = evaluate(m, cat, backend, wca_run(1));
    CHECK(r.top1 == 1.0);
    CHECK(r.correct == 12);
    CHECK(r.confusion[1][1] == 4);
    CHECK(r.per_class[2].total == 4);
}

TEST_CASE("empty manifest and failing records") {
    const auto fx = make_classify_fixture(0);
    const PrecomputedBackend backend(std::make_shared<const PrecomputedStore>(fx.store));
    CHECK_THROWS_AS(evaluate(DatasetManifest{}, fx.catalog, backend, wca_run(fx.crops)), DomainError);
    DatasetManifest bad = fx.manifest;
    bad.records.push_back({"ghost", fx.catalog[0].label});
    try {
        evaluate(bad, fx.catalog, backend, wca_run(fx.crops), EvalOptions{3});
        FAIL("expected a failure");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("ghost") != std::string::npos);
        CHECK(e.kind() == ErrorKind::Missing);
    }
}

TEST_CASE("results do not depend on the job count") {
    const auto fx = make_bench_fixture(0);
    const PrecomputedBackend backend(std::make_shared<const PrecomputedStore>(fx.store));
    const auto one = report_json(evaluate(fx.manifest, fx.catalog, backend, wca_run(fx.crops), EvalOptions{1}));
    const auto four = report_json(evaluate(fx.manifest, fx.catalog, backend, wca_run(fx.crops), EvalOptions{4}));
    CHECK(one.dump() == four.dump());
    CHECK(one.contains("top1"));
    CHECK(one.contains("per_class"));
    CHECK(one.contains("n"));
    CHECK(one.contains("seed"));
    CHECK(one.contains("config"));
}

TEST_CASE("cache agrees with the uncached run") {
    test::TempDir dir("cache");
    const auto fx = make_bench_fixture(0);
    const PrecomputedBackend backend(std::make_shared<const PrecomputedStore>(fx.store));
    const auto desc = wca_run(fx.crops);
    const auto plain = evaluate(fx.manifest, fx.catalog, backend, desc);
    precompute_cache(fx.manifest, fx.catalog, backend, desc, dir / "c.wem1");
    const auto cache = read_embedding_file(dir / "c.wem1");
    CHECK(cache.size() == fx.manifest.records.size() + fx.catalog.size());
    CHECK(cache.contains(cache_image_id(fx.manifest.records[0].id)));
    CHECK(cache.contains(cache_class_id(fx.catalog[0].label)));

    auto cached_desc = desc;
    cached_desc.backend = "cache";
    const auto cached = evaluate_cached(fx.manifest, fx.catalog, dir / "c.wem1", cached_desc, backend.dim());
    CHECK(cached.timing.crop_preprocess_seconds == 0.0);
    CHECK(cached.timing.encode_seconds == 0.0);
    for (std::size_t i = 0; i < plain.predictions.size(); ++i) {
        CHECK(plain.predictions[i].predicted == cached.predictions[i].predicted);
        for (std::size_t k = 0; k < fx.catalog.size(); ++k)
            CHECK(std::abs(plain.predictions[i].scores[k] - cached.predictions[i].scores[k]) < 1e-6);
    }

    CHECK_THROWS_AS(evaluate_cached(fx.manifest, fx.catalog, dir / "c.wem1", cached_desc, 7), CacheInvalidError);
    auto other = cached_desc;
    other.run.prompt.num_crops = 5;
    CHECK_THROWS_AS(evaluate_cached(fx.manifest, fx.catalog, dir / "c.wem1", other, {}), CacheInvalidError);
    auto avg = cached_desc;
    avg.run.aggregation = Aggregation::Avg;
    CHECK_THROWS_AS(evaluate_cached(fx.manifest, fx.catalog, dir / "c.wem1", avg, {}), ConfigError);
    auto explain = cached_desc;
    explain.run.explain = true;
    CHECK_THROWS_AS(evaluate_cached(fx.manifest, fx.catalog, dir / "c.wem1", explain, {}),
                    ExplanationUnavailableError);
    CHECK_THROWS_AS(precompute_cache(fx.manifest, fx.catalog, backend, avg, dir / "d.wem1"), ConfigError);
}

TEST_CASE("bench schema") {
    const ProjectionEncoder enc(16, 0, 8);
    const LabelCatalog cat(std::vector<DescriptionSet>{{"a", {"x one", "x two"}}, {"b", {"y one"}}});
    std::vector<std::pair<std::string, ImageBuffer>> images;
    for (int i = 0; i < 2; ++i) {
        ImageBuffer img(32, 24);
        for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(i * 50 + 7);
        images.emplace_back("i" + std::to_string(i), img);
    }
    const auto rows = bench_timing(images, cat, enc, RunConfig{}, {10, 20});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].crops == 0);
    CHECK(rows[2].crops == 20);
    for (const auto& r : rows) {
        const double parts = r.crop_preprocess_s + r.encode_s + r.score_s;
        CHECK(parts <= r.total_s * 1.05 + 1e-6);
        CHECK(r.total_s <= parts * 3.0 + 1e-3);
    }
    const auto csv = bench_csv(rows);
    CHECK(csv.rfind("N,crop_preprocess_s,encode_s,score_s,total_s\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK_THROWS_AS(bench_timing({}, cat, enc, RunConfig{}, {10}), DomainError);
    const PrecomputedBackend pre(std::make_shared<const PrecomputedStore>(PrecomputedStore(2, false)));
    CHECK_THROWS_AS(bench_timing(images, cat, pre, RunConfig{}, {10}), ConfigError);
}

}  // TEST_SUITE
