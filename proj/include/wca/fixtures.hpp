// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

// Seeded synthetic fixtures and a brute-force reference evaluator.
//
// The reference evaluator (oracle_*) is written with plain loops over the
// widened f32 payloads and shares no code with the scoring or kernel
// modules, so the engine can be checked against it.
//
// Recipes (all draws from Rng::stream(seed, <fixture name>), approx_normal
// unless noted, vectors stored unnormalized as f32):
//
// fx-classify-01: d = 16, 3 classes, 3 images (one per class), 8 patches,
//   5 descriptions. Class prototype p_k ~ N(0, I). Label prompt = p_k +
//   0.3 e. Description j = p_k + 0.8 e. Image of class k: whole = p_k + 0.5 e;
//   patch i = a_i p_k + e with a_i ~ U(0, 1.5). Vectors are then scaled by
//   U(0.5, 2) so norms vary.
//
// fx-bench-noisy: d = 32, 10 classes x 20 images, 16 patches, 10
//   descriptions. Prototypes p_k ~ N(0, I) plus a shared background b.
//   Label prompt = p_k + 0.2 e. Descriptions 0..3 are relevant (p_k + 1.0 e);
//   4..9 are generic (0.8 b + 0.9 e + 0.35 p_k). Each image has 5 object
//   patches (p_k + 1.4 e); the rest are distractors, half carrying another
//   class's prototype (0.9 p_o + 0.7 b + 1.0 e), half pure background
//   (b + 1.2 e). Whole image = p_k + 0.3 b + 2.0 e. Scaled as above.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wca/embedding_store.hpp"
#include "wca/evaluation.hpp"
#include "wca/text_prompt.hpp"

namespace wca {

struct SyntheticFixture {
    std::string name;
    std::uint64_t seed = 0;
    std::size_t crops = 0;  // patches per image
    LabelCatalog catalog;
    DatasetManifest manifest;
    PrecomputedStore store;
};

SyntheticFixture make_classify_fixture(std::uint64_t seed);
SyntheticFixture make_bench_fixture(std::uint64_t seed);

/// Brute-force scores for every record under one aggregation ("wca", "avg",
/// "max", "llm" or "clip"). Returns {top1, predictions:[{id, label,
/// predicted, scores}]}.
nlohmann::ordered_json oracle_evaluate(const SyntheticFixture& fx, const std::string& aggregation);

/// Per-description WCA contributions for the top two classes of one image:
/// [{label, score, rows:[{description, weight, contribution}]}].
nlohmann::ordered_json oracle_explain(const SyntheticFixture& fx, const std::string& image_id);

/// expected.json body: fixture metadata plus oracle results for all
/// aggregations (and explanations for fx-classify-01).
nlohmann::ordered_json oracle_expected(const SyntheticFixture& fx, bool with_explanations);

/// Writes manifest.jsonl, descriptions.json, embeddings.wem1 and
/// expected.json into dir.
void write_fixture(const SyntheticFixture& fx, const std::filesystem::path& dir, bool with_explanations);

/// Crop specs for image "golden" (320 x 240) with default prompt settings;
/// consumed by external exporters as golden files.
nlohmann::ordered_json crop_spec_golden(std::uint64_t seed);

/// Small PNG set (two colour classes) with manifest and descriptions for
/// pixel-backend smoke runs and the timing bench.
void write_image_fixture(std::uint64_t seed, const std::filesystem::path& dir);

/// Everything above under out_dir: fx-classify-01/, fx-bench-noisy/,
/// fx-images/ and crop-specs/seed-{0,7,42}.json. IoError when unwritable.
void generate_fixtures(std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace wca
