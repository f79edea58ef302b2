// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wca/encoder.hpp"
#include "wca/scoring.hpp"
#include "wca/text_prompt.hpp"
#include "wca/visual_prompt.hpp"

namespace wca {

enum class Aggregation { Wca, Avg, Max, Llm, Clip, ClipE, Mixed };

Aggregation parse_aggregation(std::string_view name);  // ConfigError on unknown
std::string_view to_string(Aggregation agg);

struct RunConfig {
    Aggregation aggregation = Aggregation::Wca;
    PromptConfig prompt;
    std::optional<double> lambda;  // only with Aggregation::Mixed
    bool explain = false;

    /// ConfigError on inconsistent settings.
    void validate() const;
};

struct Timing {
    double crop_preprocess_seconds = 0.0;
    double encode_seconds = 0.0;
    double score_seconds = 0.0;

    Timing& operator+=(const Timing& o) {
        crop_preprocess_seconds += o.crop_preprocess_seconds;
        encode_seconds += o.encode_seconds;
        score_seconds += o.score_seconds;
        return *this;
    }
};

struct ExplanationRow {
    std::string description;
    double weight = 0.0;        // v_j
    double contribution = 0.0;  // v_j * sum_i w_i * sims(i, j)
};

struct ClassExplanation {
    std::string label;
    double score = 0.0;
    std::vector<ExplanationRow> rows;  // sorted by contribution, descending
};

struct ClassificationReport {
    std::string image_id;
    std::size_t predicted_index = 0;
    std::string predicted_label;
    std::vector<std::string> labels;  // catalog order
    std::vector<double> scores;       // aligned with labels
    std::vector<ClassExplanation> explanation;  // predicted, then runner-up
    Timing timing;
};

/// Index of the largest score; the first one wins ties.
std::size_t argmax_first(std::span<const double> scores);

/// Per-image embeddings needed by the configured aggregation.
struct PreparedImage {
    std::string id;
    std::optional<Embedding> whole;
    std::optional<UnitRows> patches;
    std::optional<WeightVector> patch_weights;
    std::optional<AugmentedEmbedding> augmented;
    Timing timing;
};

/// Runs the zero-shot pipeline for one catalog and backend. Text-side
/// embeddings, description weights and augmented text vectors are computed
/// once at construction and reused for every image.
class Classifier {
public:
    Classifier(const LabelCatalog& catalog, const EncoderBackend& backend, RunConfig cfg);

    const RunConfig& config() const noexcept { return cfg_; }
    const LabelCatalog& catalog() const noexcept { return catalog_; }
    std::size_t dim() const noexcept { return backend_.dim(); }

    /// Samples crops (pixel backends) or resolves "<id>::<i>" (precomputed
    /// backends) and encodes the whole image when needed.
    PreparedImage prepare(std::string_view image_id, const ImageBuffer* pixels = nullptr) const;

    ClassificationReport classify(std::string_view image_id, const ImageBuffer* pixels = nullptr) const;
    ClassificationReport classify(const PreparedImage& image) const;

    /// Scores from a cached augmented image vector; WCA only, no explanation.
    ClassificationReport classify_augmented(std::string_view image_id, const AugmentedEmbedding& image) const;

    const AugmentedEmbedding& class_augmented(std::size_t k) const;

    /// Explicit-matrix WCA with per-description contributions for class k.
    ClassExplanation explain_class(const PreparedImage& image, std::size_t k) const;

private:
    struct PreparedClass {
        std::optional<Embedding> label;
        std::optional<UnitRows> descriptions;
        std::optional<WeightVector> weights;
        std::optional<AugmentedEmbedding> augmented;
        std::optional<Embedding> ensemble;  // mean of unit template embeddings
    };

    double score_class(const PreparedImage& image, std::size_t k) const;
    double weighted_whole_image_score(const Embedding& whole, std::size_t k) const;
    ClassificationReport finish(std::string_view image_id, std::vector<double> scores) const;

    const LabelCatalog& catalog_;
    const EncoderBackend& backend_;
    RunConfig cfg_;
    std::vector<PreparedClass> classes_;
};

}  // namespace wca
