// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <numeric>

#include "support.hpp"
#include "wca/classifier.hpp"
#include "wca/error.hpp"
#include "wca/fixtures.hpp"

using namespace wca;
using doctest::Approx;

namespace {

struct World {
    std::shared_ptr<PrecomputedStore> store;
    std::vector<DescriptionSet> sets;

    explicit World(std::uint32_t dim) : store(std::make_shared<PrecomputedStore>(dim, false)) {}

    void put(const std::string& id, const std::vector<double>& v) {
        store->insert(id, std::vector<float>(v.begin(), v.end()));
    }
    void add_class(const std::string& label, const std::vector<double>& prompt,
                   const std::vector<std::vector<double>>& descs) {
        DescriptionSet s{label, {}};
        put("cls::" + label, prompt);
        for (std::size_t j = 0; j < descs.size(); ++j) {
            s.descriptions.push_back(label + " description " + std::to_string(j));
            put(label + "::" + std::to_string(j), descs[j]);
        }
        sets.push_back(std::move(s));
    }
    void add_image(const std::string& id, const std::vector<double>& whole,
                   const std::vector<std::vector<double>>& patches) {
        put(id, whole);
        for (std::size_t i = 0; i < patches.size(); ++i) put(id + "::" + std::to_string(i), patches[i]);
    }
};

RunConfig config(Aggregation agg, std::size_t crops) {
    RunConfig cfg;
    cfg.aggregation = agg;
    cfg.prompt.num_crops = crops;
    return cfg;
}

}  // namespace

TEST_SUITE("classifier") {

TEST_CASE("perfect alignment wins") {
    World w(4);
    const std::vector<double> p{1, 0, 0, 0};
    w.add_class("A", {1, 1, 0, 0}, {p, p});
    w.add_class("B", {0, 1, 1, 0}, {{0, 1, 0, 0}, {0, 0, 1, 0}});
    w.add_image("img", p, {p, p, p});
    const LabelCatalog cat(w.sets);
    const PrecomputedBackend backend(w.store);
    const Classifier clf(cat, backend, config(Aggregation::Wca, 3));
    const auto r = clf.classify("img");
    CHECK(r.predicted_label == "A");
    CHECK(r.scores[0] == Approx(1.0));
    CHECK(r.scores[1] == Approx(0.0));
    CHECK(r.labels == std::vector<std::string>{"A", "B"});
}

TEST_CASE("single class catalog") {
    World w(2);
    w.add_class("only", {1, 0}, {{0, 1}});
    w.add_image("img", {1, 0}, {{-1, 0.1}});
    const LabelCatalog cat(w.sets);
    const PrecomputedBackend backend(w.store);
    for (auto agg : {Aggregation::Wca, Aggregation::Avg, Aggregation::Max, Aggregation::Llm, Aggregation::Clip}) {
        const auto r = Classifier(cat, backend, config(agg, 1)).classify("img");
        CHECK(r.predicted_label == "only");
    }
}

TEST_CASE("ties go to the first class") {
    CHECK(argmax_first(std::vector<double>{0.5, 0.5, 0.2}) == 0);
    CHECK(argmax_first(std::vector<double>{0.1, 0.5, 0.5}) == 1);
    World w(2);
    w.add_class("first", {1, 0}, {{1, 1}});
    w.add_class("second", {1, 0}, {{1, 1}});
    w.add_image("img", {1, 0}, {{1, 0}});
    const LabelCatalog cat(w.sets);
    const PrecomputedBackend backend(w.store);
    CHECK(Classifier(cat, backend, config(Aggregation::Wca, 1)).classify("img").predicted_label == "first");
}

TEST_CASE("missing embeddings are typed errors") {
    World w(2);
    w.add_class("a", {1, 0}, {{1, 1}});
    w.add_image("img", {1, 0}, {{1, 0}});
    const LabelCatalog cat(w.sets);
    const PrecomputedBackend backend(w.store);
    const Classifier clf(cat, backend, config(Aggregation::Wca, 2));
    CHECK_THROWS_AS(clf.classify("img"), MissingEmbeddingError);
    CHECK_THROWS_AS(clf.classify("other"), MissingEmbeddingError);
    CHECK_THROWS_AS(Classifier(cat, backend, config(Aggregation::ClipE, 1)), MissingEmbeddingError);
}

TEST_CASE("run config validation") {
    RunConfig cfg;
    cfg.lambda = 0.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.aggregation = Aggregation::Mixed;
    CHECK_NOTHROW(cfg.validate());
    cfg.lambda = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.lambda.reset();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    RunConfig ex;
    ex.explain = true;
    ex.aggregation = Aggregation::Avg;
    CHECK_THROWS_AS(ex.validate(), ConfigError);
    CHECK(parse_aggregation("clip-e") == Aggregation::ClipE);
    CHECK_THROWS_AS(parse_aggregation("median"), ConfigError);
}

TEST_CASE("mixed score endpoints") {
    Rng rng(1);
    World w(6);
    for (const char* label : {"x", "y", "z"}) {
        std::vector<std::vector<double>> descs;
        for (int j = 0; j < 4; ++j) {
            const auto e = test::random_embedding(rng, 6);
            descs.emplace_back(e.values().begin(), e.values().end());
        }
        const auto p = test::random_embedding(rng, 6);
        w.add_class(label, {p.values().begin(), p.values().end()}, descs);
    }
    std::vector<std::vector<double>> patches;
    for (int i = 0; i < 5; ++i) {
        const auto e = test::random_embedding(rng, 6);
        patches.emplace_back(e.values().begin(), e.values().end());
    }
    const auto whole = test::random_embedding(rng, 6);
    w.add_image("img", {whole.values().begin(), whole.values().end()}, patches);
    const LabelCatalog cat(w.sets);
    const PrecomputedBackend backend(w.store);

    const auto wca = Classifier(cat, backend, config(Aggregation::Wca, 5)).classify("img");
    RunConfig mixed = config(Aggregation::Mixed, 5);
    mixed.lambda = 0.0;
    const auto m0 = Classifier(cat, backend, mixed).classify("img");
    mixed.lambda = 1.0;
    const auto m1 = Classifier(cat, backend, mixed).classify("img");
    mixed.lambda = 0.25;
    const auto mq = Classifier(cat, backend, mixed).classify("img");

    const auto wstore = PrecomputedBackend(w.store);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::abs(m0.scores[k] - wca.scores[k]) < 1e-12);
        // lambda = 1: the whole image as the single patch.
        std::vector<Embedding> descs;
        for (std::size_t j = 0; j < 4; ++j) descs.push_back(w.store->lookup(cat[k].label + "::" + std::to_string(j)));
        const auto label = w.store->lookup("cls::" + cat[k].label);
        const std::vector<Embedding> only{w.store->lookup("img")};
        const double expect =
            wca_score(cross_matrix(only, descs), WeightVector::uniform(1), desc_weights(label, descs));
        CHECK(std::abs(m1.scores[k] - expect) < 1e-12);
        CHECK(std::abs(mq.scores[k] - (0.25 * m1.scores[k] + 0.75 * wca.scores[k])) < 1e-12);
    }
}

TEST_CASE("clip-e averages template prompts") {
    World w(3);
    w.add_class("a", {1, 0, 0}, {{1, 0, 0}});
    w.add_class("b", {0, 1, 0}, {{0, 1, 0}});
    w.put("tpl::a::0", {1, 0, 0});
    w.put("tpl::a::1", {0, 0, 2});
    w.put("tpl::b::0", {0, 3, 0});
    w.add_image("img", {1, 0, 1}, {{1, 0, 0}});
    const LabelCatalog cat(w.sets);
    const PrecomputedBackend backend(w.store);
    const auto r = Classifier(cat, backend, config(Aggregation::ClipE, 1)).classify("img");
    CHECK(r.predicted_label == "a");
    CHECK(r.scores[0] == Approx(1.0));  // mean of unit templates is parallel to the image
    CHECK(r.scores[1] == Approx(0.0));
}

TEST_CASE("explanations") {
    World w(3);
    w.add_class("solo", {1, 0, 0}, {{1, 1, 0}});
    w.add_class("pair", {0, 1, 0}, {{0, 1, 0}, {0, 1, 1}});
    w.add_image("img", {1, 1, 0}, {{1, 0, 0}, {0, 1, 0}});
    const LabelCatalog cat(w.sets);
    const PrecomputedBackend backend(w.store);
    RunConfig cfg = config(Aggregation::Wca, 2);
    cfg.explain = true;
    const Classifier clf(cat, backend, cfg);
    const auto r = clf.classify("img");
    REQUIRE(r.explanation.size() == 2);
    CHECK(r.explanation[0].label == r.predicted_label);
    for (const auto& ex : r.explanation) {
        const auto k = *cat.find(ex.label);
        double sum = 0.0;
        for (const auto& row : ex.rows) sum += row.contribution;
        CHECK(std::abs(sum - r.scores[k]) < 1e-9);
        CHECK(std::abs(ex.score - r.scores[k]) < 1e-12);
        for (std::size_t i = 1; i < ex.rows.size(); ++i) CHECK(ex.rows[i - 1].contribution >= ex.rows[i].contribution);
    }
    const auto solo = clf.explain_class(clf.prepare("img"), 0);
    REQUIRE(solo.rows.size() == 1);
    CHECK(solo.rows[0].weight == 1.0);
    CHECK(std::abs(solo.rows[0].contribution - r.scores[0]) < 1e-12);

    const auto prepared = clf.prepare("img");
    CHECK_THROWS_AS(clf.classify_augmented("img", *prepared.augmented), ExplanationUnavailableError);
}

TEST_CASE("fixture fx-classify-01 matches the reference evaluator") {
    const auto fx = make_classify_fixture(0);
    const auto expected = oracle_expected(fx, true);
    const PrecomputedBackend backend(std::make_shared<const PrecomputedStore>(fx.store));
    for (const char* agg : {"wca", "avg", "max", "llm", "clip"}) {
        RunConfig cfg = config(parse_aggregation(agg), fx.crops);
        cfg.explain = std::string(agg) == "wca";
        const Classifier clf(fx.catalog, backend, cfg);
        const auto& preds = expected["aggregations"][agg]["predictions"];
        for (std::size_t r = 0; r < fx.manifest.records.size(); ++r) {
            const auto& id = fx.manifest.records[r].id;
            const auto rep = clf.classify(id);
            CAPTURE(agg);
            CAPTURE(id);
            CHECK(rep.predicted_label == preds[r]["predicted"].get<std::string>());
            for (std::size_t k = 0; k < fx.catalog.size(); ++k)
                CHECK(std::abs(rep.scores[k] - preds[r]["scores"][k].get<double>()) < 1e-9);
            if (!cfg.explain) continue;
            const auto& ex = expected["explanations"][id];
            REQUIRE(rep.explanation.size() == ex.size());
            for (std::size_t c = 0; c < ex.size(); ++c) {
                CHECK(rep.explanation[c].label == ex[c]["label"].get<std::string>());
                REQUIRE(rep.explanation[c].rows.size() == ex[c]["rows"].size());
                for (std::size_t j = 0; j < ex[c]["rows"].size(); ++j) {
                    const auto& row = ex[c]["rows"][j];
                    CHECK(rep.explanation[c].rows[j].description == row["description"].get<std::string>());
                    CHECK(std::abs(rep.explanation[c].rows[j].weight - row["weight"].get<double>()) < 1e-9);
                    CHECK(std::abs(rep.explanation[c].rows[j].contribution - row["contribution"].get<double>()) <
                          1e-9);
                }
            }
        }
    }
}

TEST_CASE("catalog permutation keeps the predicted class") {
    const auto fx = make_bench_fixture(0);
    const PrecomputedBackend backend(std::make_shared<const PrecomputedStore>(fx.store));
    std::vector<DescriptionSet> reversed(fx.catalog.classes().rbegin(), fx.catalog.classes().rend());
    const LabelCatalog rev(reversed);
    const Classifier a(fx.catalog, backend, config(Aggregation::Wca, fx.crops));
    const Classifier b(rev, backend, config(Aggregation::Wca, fx.crops));
    for (std::size_t r = 0; r < 40; ++r) {
        const auto& id = fx.manifest.records[r].id;
        CHECK(a.classify(id).predicted_label == b.classify(id).predicted_label);
    }
}

TEST_CASE("pixel backend runs the crop pipeline") {
    const ProjectionEncoder enc(16, 1, 8);
    const LabelCatalog cat(std::vector<DescriptionSet>{{"red", {"a red thing", "crimson"}}, {"blue", {"a blue thing"}}});
    ImageBuffer img(40, 30);
    for (std::size_t r = 0; r < 30; ++r)
        for (std::size_t c = 0; c < 40; ++c) img.set(r, c, {static_cast<std::uint8_t>(c * 6), 20, static_cast<std::uint8_t>(r * 8)});
    for (auto style : {PromptStyle::Crop, PromptStyle::RedCircle, PromptStyle::Blur, PromptStyle::Greyscale}) {
        RunConfig cfg = config(Aggregation::Wca, 6);
        cfg.prompt.style = style;
        cfg.prompt.seed = 3;
        const Classifier clf(cat, enc, cfg);
        const auto a = clf.classify("img", &img);
        const auto b = clf.classify("img", &img);
        CHECK(a.scores == b.scores);
        CHECK(a.timing.crop_preprocess_seconds >= 0.0);
        CHECK(a.timing.encode_seconds > 0.0);
    }
    const Classifier clf(cat, enc, config(Aggregation::Wca, 2));
    CHECK_THROWS(clf.classify("img"));  // pixels required
    CHECK_NOTHROW(Classifier(cat, enc, config(Aggregation::ClipE, 2)).classify("img", &img));
}

}  // TEST_SUITE
