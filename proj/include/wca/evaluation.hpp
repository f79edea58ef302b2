// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

// Batch evaluation, augmented-embedding caches and the timing bench.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wca/classifier.hpp"

namespace wca {

struct ManifestRecord {
    std::string id;
    std::string label;
};

struct DatasetManifest {
    std::vector<ManifestRecord> records;
    std::filesystem::path root;  // image ids resolve relative to this
};

/// JSONL, one {"id": ..., "label": ...} object per line; blank lines are
/// skipped. Root defaults to the manifest's directory.
DatasetManifest parse_manifest(std::string_view jsonl, std::filesystem::path root = {});
DatasetManifest load_manifest(const std::filesystem::path& path);

/// IngestionError when a record's label is not in the catalog.
void check_manifest_labels(const DatasetManifest& manifest, const LabelCatalog& catalog);

struct Prediction {
    std::string id;
    std::string label;
    std::string predicted;
    std::vector<double> scores;  // catalog order
};

struct ClassAccuracy {
    std::string label;
    std::size_t correct = 0;
    std::size_t total = 0;
};

/// Everything identifying a run; serialized into the report and the cache
/// sidecar.
struct RunDescription {
    RunConfig run;
    std::optional<std::size_t> max_descriptions;
    std::string label_template;
    std::string backend;  // "embeddings", "model:<name>" or "cache"
};

struct EvalReport {
    std::size_t n = 0;
    std::size_t correct = 0;
    double top1 = 0.0;
    std::vector<ClassAccuracy> per_class;
    std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
    std::vector<Prediction> predictions;              // manifest order
    RunDescription description;
    Timing timing;                // summed over images
    double wall_seconds = 0.0;
};

struct EvalOptions {
    std::size_t jobs = 1;
};

/// Classifies every record (in parallel when jobs > 1) and aggregates top-1
/// accuracy. Fails fast: the first failing record (in manifest order) aborts
/// the run with its id in the message.
EvalReport evaluate(const DatasetManifest& manifest, const LabelCatalog& catalog, const EncoderBackend& backend,
                    const RunDescription& desc, const EvalOptions& opts = {});

/// Scores from a cache written by precompute_cache. When `backend_dim` is
/// set it must match the cache dim.
EvalReport evaluate_cached(const DatasetManifest& manifest, const LabelCatalog& catalog,
                           const std::filesystem::path& cache_path, const RunDescription& desc,
                           std::optional<std::size_t> backend_dim = {});

/// Writes "img::<id>" (augmented image vector) and "cls::<label>" (augmented
/// text vector) records to a WEM1 file plus a "<cache>.json" sidecar holding
/// the settings the vectors depend on.
void precompute_cache(const DatasetManifest& manifest, const LabelCatalog& catalog, const EncoderBackend& backend,
                      const RunDescription& desc, const std::filesystem::path& cache_path,
                      const EvalOptions& opts = {});

std::string cache_image_id(std::string_view image_id);
std::string cache_class_id(std::string_view label);

/// Canonical report body: top1, per_class, n, seed, config, confusion and
/// predictions. Contains no timings, so identical runs serialize identically.
nlohmann::ordered_json report_json(const EvalReport& report);
nlohmann::ordered_json run_config_json(const RunDescription& desc);
nlohmann::ordered_json classification_json(const ClassificationReport& report);

struct BenchRow {
    std::size_t crops = 0;
    double crop_preprocess_s = 0.0;
    double encode_s = 0.0;
    double score_s = 0.0;
    double total_s = 0.0;
};

/// Mean seconds per image for N = 0 (whole image only) and each N in
/// `crop_counts`. Requires a pixel backend.
std::vector<BenchRow> bench_timing(const std::vector<std::pair<std::string, ImageBuffer>>& images,
                                   const LabelCatalog& catalog, const EncoderBackend& backend, const RunConfig& cfg,
                                   const std::vector<std::size_t>& crop_counts);

/// Header "N,crop_preprocess_s,encode_s,score_s,total_s".
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace wca
