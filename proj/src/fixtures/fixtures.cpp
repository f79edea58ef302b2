// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "wca/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <system_error>

#include "wca/encoder.hpp"
#include "wca/error.hpp"
#include "wca/image.hpp"
#include "wca/visual_prompt.hpp"

namespace wca {

namespace {

using Vec = std::vector<double>;

Vec gaussian(Rng& rng, std::size_t d) {
    Vec v(d);
    for (auto& x : v) x = rng.approx_normal();
    return v;
}

// sum_k coef_k * vec_k, plus `noise` times a fresh gaussian.
Vec mix(Rng& rng, std::initializer_list<std::pair<double, const Vec*>> parts, double noise, std::size_t d) {
    Vec out(d, 0.0);
    for (const auto& [c, v] : parts)
        for (std::size_t i = 0; i < d; ++i) out[i] += c * (*v)[i];
    const Vec e = gaussian(rng, d);
    for (std::size_t i = 0; i < d; ++i) out[i] += noise * e[i];
    return out;
}

void put(PrecomputedStore& store, Rng& rng, std::string id, const Vec& v) {
    const double scale = rng.uniform(0.5, 2.0);
    std::vector<float> f(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) f[i] = static_cast<float>(scale * v[i]);
    store.insert(std::move(id), f);
}

std::string two_digit(std::size_t k) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02zu", k);
    return buf;
}

// --- reference evaluator: plain loops, no engine numerics -------------------

Vec widened(const PrecomputedStore& store, const std::string& id) {
    const auto raw = store.raw(id);
    return Vec(raw.begin(), raw.end());
}

double ref_cos(const Vec& a, const Vec& b) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return ab / (std::sqrt(aa) * std::sqrt(bb));
}

Vec ref_softmax(const Vec& s) {
    double m = s[0];
    for (double x : s) m = std::max(m, x);
    Vec out(s.size());
    double z = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        out[i] = std::exp(s[i] - m);
        z += out[i];
    }
    for (auto& x : out) x /= z;
    return out;
}

struct RefImage {
    Vec whole;
    std::vector<Vec> patches;
    Vec w;
};

struct RefClass {
    Vec label;
    std::vector<Vec> descs;
    Vec v;
};

RefImage ref_image(const SyntheticFixture& fx, const std::string& id) {
    RefImage img;
    img.whole = widened(fx.store, id);
    Vec s;
    for (std::size_t i = 0; i < fx.crops; ++i) {
        img.patches.push_back(widened(fx.store, id + "::" + std::to_string(i)));
        s.push_back(ref_cos(img.whole, img.patches.back()));
    }
    img.w = ref_softmax(s);
    return img;
}

std::vector<RefClass> ref_classes(const SyntheticFixture& fx) {
    std::vector<RefClass> out;
    for (const auto& c : fx.catalog.classes()) {
        RefClass rc;
        rc.label = widened(fx.store, "cls::" + c.label);
        Vec s;
        for (std::size_t j = 0; j < c.descriptions.size(); ++j) {
            rc.descs.push_back(widened(fx.store, c.label + "::" + std::to_string(j)));
            s.push_back(ref_cos(rc.label, rc.descs.back()));
        }
        rc.v = ref_softmax(s);
        out.push_back(std::move(rc));
    }
    return out;
}

double ref_score(const RefImage& img, const RefClass& c, const std::string& agg) {
    const std::size_t n = img.patches.size();
    const std::size_t m = c.descs.size();
    if (agg == "clip") return ref_cos(img.whole, c.label);
    if (agg == "llm") {
        double s = 0.0;
        for (const auto& d : c.descs) s += ref_cos(img.whole, d);
        return s / static_cast<double>(m);
    }
    double total = 0.0;
    double best = -2.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double sim = ref_cos(img.patches[i], c.descs[j]);
            total += (agg == "wca" ? img.w[i] * c.v[j] : 1.0) * sim;
            best = std::max(best, sim);
        }
    if (agg == "max") return best;
    if (agg == "avg") return total / static_cast<double>(n * m);
    if (agg == "wca") return total;
    throw ConfigError("reference evaluator has no aggregation '" + agg + "'");
}

std::size_t first_max(const Vec& s) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < s.size(); ++k)
        if (s[k] > s[best]) best = k;
    return best;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void make_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

}  // namespace

SyntheticFixture make_classify_fixture(std::uint64_t seed) {
    constexpr std::size_t d = 16, classes = 3, crops = 8, descs = 5;
    Rng rng = Rng::stream(seed, "fx-classify-01");
    PrecomputedStore store(d, false);
    std::vector<DescriptionSet> sets;
    std::vector<Vec> protos;
    const char* const labels[classes] = {"heron", "kestrel", "puffin"};
    for (std::size_t k = 0; k < classes; ++k) {
        protos.push_back(gaussian(rng, d));
        DescriptionSet set{labels[k], {}};
        put(store, rng, "cls::" + set.label, mix(rng, {{1.0, &protos[k]}}, 0.3, d));
        for (std::size_t j = 0; j < descs; ++j) {
            set.descriptions.push_back(set.label + " trait " + std::to_string(j));
            put(store, rng, set.label + "::" + std::to_string(j), mix(rng, {{1.0, &protos[k]}}, 0.8, d));
        }
        sets.push_back(std::move(set));
    }
    DatasetManifest manifest;
    for (std::size_t k = 0; k < classes; ++k) {
        const std::string id = "photo-" + two_digit(k);
        manifest.records.push_back({id, labels[k]});
        put(store, rng, id, mix(rng, {{1.0, &protos[k]}}, 0.5, d));
        for (std::size_t i = 0; i < crops; ++i) {
            const double a = rng.uniform(0.0, 1.5);
            put(store, rng, id + "::" + std::to_string(i), mix(rng, {{a, &protos[k]}}, 1.0, d));
        }
    }
    return {"fx-classify-01", seed, crops, LabelCatalog(std::move(sets)), std::move(manifest), std::move(store)};
}

SyntheticFixture make_bench_fixture(std::uint64_t seed) {
    constexpr std::size_t d = 32, classes = 10, per_class = 20, crops = 16, descs = 10;
    constexpr std::size_t relevant = 4, objects = 5;
    Rng rng = Rng::stream(seed, "fx-bench-noisy");
    PrecomputedStore store(d, false);
    std::vector<Vec> protos;
    for (std::size_t k = 0; k < classes; ++k) protos.push_back(gaussian(rng, d));
    const Vec background = gaussian(rng, d);

    std::vector<DescriptionSet> sets;
    for (std::size_t k = 0; k < classes; ++k) {
        DescriptionSet set{"class-" + two_digit(k), {}};
        put(store, rng, "cls::" + set.label, mix(rng, {{1.0, &protos[k]}}, 0.2, d));
        for (std::size_t j = 0; j < descs; ++j) {
            const bool rel = j < relevant;
            set.descriptions.push_back(set.label + (rel ? " detail " : " context ") + std::to_string(j));
            const Vec v = rel ? mix(rng, {{1.0, &protos[k]}}, 1.0, d)
                              : mix(rng, {{0.8, &background}, {0.35, &protos[k]}}, 0.9, d);
            put(store, rng, set.label + "::" + std::to_string(j), v);
        }
        sets.push_back(std::move(set));
    }

    DatasetManifest manifest;
    for (std::size_t k = 0; k < classes; ++k)
        for (std::size_t n = 0; n < per_class; ++n) {
            const std::string id = "bench-" + two_digit(k) + "-" + two_digit(n);
            manifest.records.push_back({id, sets[k].label});
            put(store, rng, id, mix(rng, {{1.0, &protos[k]}, {0.3, &background}}, 2.0, d));
            for (std::size_t i = 0; i < crops; ++i) {
                Vec v;
                if (i < objects) {
                    v = mix(rng, {{1.0, &protos[k]}}, 1.4, d);
                } else if (i % 2 == 0) {
                    const std::size_t other = (k + 1 + rng.below(classes - 1)) % classes;
                    v = mix(rng, {{0.9, &protos[other]}, {0.7, &background}}, 1.0, d);
                } else {
                    v = mix(rng, {{1.0, &background}}, 1.2, d);
                }
                put(store, rng, id + "::" + std::to_string(i), v);
            }
        }
    return {"fx-bench-noisy", seed, crops, LabelCatalog(std::move(sets)), std::move(manifest), std::move(store)};
}

nlohmann::ordered_json oracle_evaluate(const SyntheticFixture& fx, const std::string& aggregation) {
    const auto classes = ref_classes(fx);
    nlohmann::ordered_json preds = nlohmann::ordered_json::array();
    std::size_t correct = 0;
    for (const auto& rec : fx.manifest.records) {
        const RefImage img = ref_image(fx, rec.id);
        Vec scores;
        for (const auto& c : classes) scores.push_back(ref_score(img, c, aggregation));
        const std::string predicted = fx.catalog[first_max(scores)].label;
        if (predicted == rec.label) ++correct;
        preds.push_back({{"id", rec.id}, {"label", rec.label}, {"predicted", predicted}, {"scores", scores}});
    }
    nlohmann::ordered_json j;
    j["top1"] = static_cast<double>(correct) / static_cast<double>(fx.manifest.records.size());
    j["correct"] = correct;
    j["predictions"] = std::move(preds);
    return j;
}

nlohmann::ordered_json oracle_explain(const SyntheticFixture& fx, const std::string& image_id) {
    const auto classes = ref_classes(fx);
    const RefImage img = ref_image(fx, image_id);
    Vec scores;
    for (const auto& c : classes) scores.push_back(ref_score(img, c, "wca"));
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < std::min<std::size_t>(2, order.size()); ++r) {
        const std::size_t k = order[r];
        const RefClass& c = classes[k];
        std::vector<std::pair<double, std::size_t>> contrib;
        for (std::size_t j = 0; j < c.descs.size(); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < img.patches.size(); ++i) s += img.w[i] * ref_cos(img.patches[i], c.descs[j]);
            contrib.emplace_back(c.v[j] * s, j);
        }
        std::stable_sort(contrib.begin(), contrib.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& [value, j] : contrib)
            rows.push_back({{"description", fx.catalog[k].descriptions[j]}, {"weight", c.v[j]}, {"contribution", value}});
        out.push_back({{"label", fx.catalog[k].label}, {"score", scores[k]}, {"rows", std::move(rows)}});
    }
    return out;
}

nlohmann::ordered_json oracle_expected(const SyntheticFixture& fx, bool with_explanations) {
    nlohmann::ordered_json j;
    j["fixture"] = fx.name;
    j["seed"] = fx.seed;
    j["crops"] = fx.crops;
    j["dim"] = fx.store.dim();
    j["classes"] = fx.catalog.size();
    j["images"] = fx.manifest.records.size();
    nlohmann::ordered_json aggs;
    for (const char* agg : {"wca", "avg", "max", "llm", "clip"}) aggs[agg] = oracle_evaluate(fx, agg);
    j["aggregations"] = std::move(aggs);
    if (with_explanations) {
        nlohmann::ordered_json ex;
        for (const auto& rec : fx.manifest.records) ex[rec.id] = oracle_explain(fx, rec.id);
        j["explanations"] = std::move(ex);
    }
    return j;
}

void write_fixture(const SyntheticFixture& fx, const std::filesystem::path& dir, bool with_explanations) {
    make_dir(dir);
    std::string manifest;
    for (const auto& rec : fx.manifest.records)
        manifest += nlohmann::ordered_json{{"id", rec.id}, {"label", rec.label}}.dump() + "\n";
    write_text(dir / "manifest.jsonl", manifest);
    write_text(dir / "descriptions.json", fx.catalog.to_json() + "\n");
    write_embedding_file(fx.store, dir / "embeddings.wem1");
    write_text(dir / "expected.json", oracle_expected(fx, with_explanations).dump(2) + "\n");
}

nlohmann::ordered_json crop_spec_golden(std::uint64_t seed) {
    PromptConfig cfg;
    cfg.seed = seed;
    constexpr std::size_t w = 320, h = 240;
    nlohmann::ordered_json specs = nlohmann::ordered_json::array();
    for (const auto& s : sample_crop_specs(cfg, w, h, "golden"))
        specs.push_back({{"gamma", s.gamma}, {"size", s.size}, {"left", s.left}, {"top", s.top}});
    return {{"image_id", "golden"}, {"width", w},          {"height", h},  {"seed", seed},
            {"alpha", cfg.alpha},   {"beta", cfg.beta},    {"crops", cfg.num_crops}, {"specs", std::move(specs)}};
}

void write_image_fixture(std::uint64_t seed, const std::filesystem::path& dir) {
    make_dir(dir);
    Rng rng = Rng::stream(seed, "fx-images");
    constexpr std::size_t w = 64, h = 48, per_class = 3;
    const struct {
        const char* label;
        Rgb colour;
    } classes[] = {{"ember", {220, 60, 30}}, {"lagoon", {30, 90, 210}}};

    std::string manifest;
    for (const auto& c : classes)
        for (std::size_t n = 0; n < per_class; ++n) {
            ImageBuffer img(w, h);
            for (std::size_t r = 0; r < h; ++r)
                for (std::size_t col = 0; col < w; ++col) {
                    const auto g = static_cast<std::uint8_t>(150 + rng.below(60));
                    img.set(r, col, {g, g, g});
                }
            const std::size_t side = 16 + rng.below(16);
            const std::size_t left = rng.below(w - side + 1);
            const std::size_t top = rng.below(h - side + 1);
            for (std::size_t r = top; r < top + side; ++r)
                for (std::size_t col = left; col < left + side; ++col) img.set(r, col, c.colour);
            const std::string id = std::string(c.label) + "-" + two_digit(n) + ".png";
            write_png(img, dir / id);
            manifest += nlohmann::ordered_json{{"id", id}, {"label", c.label}}.dump() + "\n";
        }
    write_text(dir / "manifest.jsonl", manifest);
    const std::vector<DescriptionSet> sets = {
        {"ember", {"a glowing red square", "warm orange tones", "a bright patch on grey"}},
        {"lagoon", {"a deep blue square", "cool water colours", "a dark patch on grey"}},
    };
    write_text(dir / "descriptions.json", LabelCatalog(sets).to_json() + "\n");
}

void generate_fixtures(std::uint64_t seed, const std::filesystem::path& out_dir) {
    make_dir(out_dir);
    write_fixture(make_classify_fixture(seed), out_dir / "fx-classify-01", true);
    write_fixture(make_bench_fixture(seed), out_dir / "fx-bench-noisy", false);
    write_image_fixture(seed, out_dir / "fx-images");
    make_dir(out_dir / "crop-specs");
    for (const std::uint64_t s : {0ull, 7ull, 42ull})
        write_text(out_dir / "crop-specs" / ("seed-" + std::to_string(s) + ".json"), crop_spec_golden(s).dump(2) + "\n");
}

}  // namespace wca
