// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "wca/classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "wca/error.hpp"
#include "wca/kernels.hpp"

namespace wca {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool needs_whole(Aggregation a) { return a != Aggregation::Avg && a != Aggregation::Max; }
bool needs_patches(Aggregation a) {
    return a == Aggregation::Wca || a == Aggregation::Avg || a == Aggregation::Max || a == Aggregation::Mixed;
}
bool needs_descriptions(Aggregation a) { return a != Aggregation::Clip && a != Aggregation::ClipE; }
bool needs_description_weights(Aggregation a) { return a == Aggregation::Wca || a == Aggregation::Mixed; }

// mean_j (u . row_j) for unit rows
double mean_row_dot(std::span<const double> u, const UnitRows& rows) {
    std::vector<double> d(rows.rows());
    kernels::active().dot_rows(u.data(), rows.data().data(), rows.rows(), rows.dim(), d.data());
    double total = 0.0;
    for (double x : d) total += std::clamp(x, -1.0, 1.0);
    return total / static_cast<double>(d.size());
}

std::vector<double> unit_copy(const Embedding& e) {
    const double n = e.norm();
    if (n == 0.0) throw DomainError("embedding has zero norm");
    std::vector<double> u(e.values().begin(), e.values().end());
    for (double& x : u) x /= n;
    return u;
}

}  // namespace

Aggregation parse_aggregation(std::string_view name) {
    if (name == "wca") return Aggregation::Wca;
    if (name == "avg") return Aggregation::Avg;
    if (name == "max") return Aggregation::Max;
    if (name == "llm") return Aggregation::Llm;
    if (name == "clip") return Aggregation::Clip;
    if (name == "clip-e") return Aggregation::ClipE;
    if (name == "mixed") return Aggregation::Mixed;
    throw ConfigError("unknown aggregation '" + std::string(name) +
                      "' (expected wca, avg, max, llm, clip, clip-e or mixed)");
}

std::string_view to_string(Aggregation agg) {
    switch (agg) {
        case Aggregation::Wca: return "wca";
        case Aggregation::Avg: return "avg";
        case Aggregation::Max: return "max";
        case Aggregation::Llm: return "llm";
        case Aggregation::Clip: return "clip";
        case Aggregation::ClipE: return "clip-e";
        case Aggregation::Mixed: return "mixed";
    }
    return "wca";
}

void RunConfig::validate() const {
    prompt.validate();
    if (lambda && aggregation != Aggregation::Mixed)
        throw ConfigError("--lambda is only valid with --agg mixed");
    if (aggregation == Aggregation::Mixed) {
        if (!lambda) throw ConfigError("--agg mixed requires --lambda");
        if (!(*lambda >= 0.0 && *lambda <= 1.0))
            throw ConfigError("--lambda must lie in [0, 1], got " + std::to_string(*lambda));
    }
    if (explain && aggregation != Aggregation::Wca)
        throw ConfigError("--explain is only available with --agg wca");
}

std::size_t argmax_first(std::span<const double> scores) {
    if (scores.empty()) throw DomainError("argmax of an empty score list");
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k)
        if (scores[k] > scores[best]) best = k;
    return best;
}

Classifier::Classifier(const LabelCatalog& catalog, const EncoderBackend& backend, RunConfig cfg)
    : catalog_(catalog), backend_(backend), cfg_(std::move(cfg)) {
    cfg_.validate();
    const Aggregation agg = cfg_.aggregation;
    classes_.resize(catalog_.size());
    for (std::size_t k = 0; k < catalog_.size(); ++k) {
        const DescriptionSet& set = catalog_[k];
        PreparedClass& pc = classes_[k];
        if (agg == Aggregation::Clip || needs_description_weights(agg))
            pc.label = backend_.encode_text({label_prompt_id(set.label), catalog_.prompt_for(k)});
        if (needs_descriptions(agg)) {
            std::vector<Embedding> descs;
            descs.reserve(set.descriptions.size());
            for (std::size_t j = 0; j < set.descriptions.size(); ++j)
                descs.push_back(backend_.encode_text({description_id(set.label, j), set.descriptions[j]}));
            pc.descriptions.emplace(descs);
        }
        if (needs_description_weights(agg)) {
            pc.weights = anchor_weights(*pc.label, *pc.descriptions);
            pc.augmented = augmented_embedding(*pc.descriptions, *pc.weights);
        }
        if (agg == Aggregation::ClipE) {
            std::vector<Embedding> prompts;
            if (backend_.wants_pixels()) {
                for (std::string_view t : kEnsembleTemplates)
                    prompts.push_back(backend_.encode_text({"", label_prompt(set.label, t)}));
            } else {
                for (std::size_t t = 0;; ++t) {
                    try {
                        prompts.push_back(backend_.encode_text({template_prompt_id(set.label, t), ""}));
                    } catch (const MissingEmbeddingError&) {
                        if (t == 0) throw;
                        break;
                    }
                }
            }
            const UnitRows units(prompts);
            std::vector<double> mean(units.dim(), 0.0);
            for (std::size_t t = 0; t < units.rows(); ++t)
                kernels::axpy(1.0 / static_cast<double>(units.rows()), units.row(t), mean);
            pc.ensemble = Embedding(std::move(mean));
        }
        const std::size_t d = backend_.dim();
        if ((pc.label && pc.label->dim() != d) || (pc.descriptions && pc.descriptions->dim() != d))
            throw DimensionError("class '" + set.label + "' text embeddings do not match backend dim " +
                                 std::to_string(d));
    }
}

PreparedImage Classifier::prepare(std::string_view image_id, const ImageBuffer* pixels) const {
    PreparedImage out;
    out.id = std::string(image_id);
    const Aggregation agg = cfg_.aggregation;
    const bool want_whole = needs_whole(agg);
    const bool want_patches = needs_patches(agg);

    std::vector<Embedding> patches;
    if (backend_.wants_pixels()) {
        if (!pixels) throw PreconditionError("backend needs decoded pixels for image '" + out.id + "'");
        auto t0 = Clock::now();
        std::vector<ImageBuffer> inputs;
        std::optional<ImageBuffer> whole_px;
        if (want_whole) whole_px = backend_.preprocess(*pixels);
        if (want_patches) {
            const auto specs = sample_crop_specs(cfg_.prompt, pixels->width(), pixels->height(), image_id);
            inputs.reserve(specs.size());
            for (const auto& s : specs) inputs.push_back(backend_.preprocess(apply_prompt(*pixels, cfg_.prompt.style, s)));
        }
        out.timing.crop_preprocess_seconds = seconds_since(t0);
        t0 = Clock::now();
        if (whole_px) out.whole = backend_.encode_image({out.id, &*whole_px});
        for (std::size_t i = 0; i < inputs.size(); ++i)
            patches.push_back(backend_.encode_image({patch_id(image_id, i), &inputs[i]}));
        out.timing.encode_seconds = seconds_since(t0);
    } else {
        const auto t0 = Clock::now();
        if (want_whole) out.whole = backend_.encode_image({out.id, nullptr});
        if (want_patches)
            for (std::size_t i = 0; i < cfg_.prompt.num_crops; ++i)
                patches.push_back(backend_.encode_image({patch_id(image_id, i), nullptr}));
        out.timing.encode_seconds = seconds_since(t0);
    }

    const auto t0 = Clock::now();
    const std::size_t d = backend_.dim();
    if (out.whole && out.whole->dim() != d)
        throw DimensionError("image '" + out.id + "' has dim " + std::to_string(out.whole->dim()) +
                             ", backend dim is " + std::to_string(d));
    if (want_patches) {
        out.patches.emplace(patches);
        if (out.patches->dim() != d)
            throw DimensionError("patches of image '" + out.id + "' do not match backend dim " + std::to_string(d));
    }
    if (agg == Aggregation::Wca || agg == Aggregation::Mixed) {
        out.patch_weights = anchor_weights(*out.whole, *out.patches);
        out.augmented = augmented_embedding(*out.patches, *out.patch_weights);
    }
    out.timing.score_seconds = seconds_since(t0);
    return out;
}

double Classifier::weighted_whole_image_score(const Embedding& whole, std::size_t k) const {
    const auto u = unit_copy(whole);
    const PreparedClass& pc = classes_[k];
    std::vector<double> d(pc.descriptions->rows());
    kernels::active().dot_rows(u.data(), pc.descriptions->data().data(), d.size(), u.size(), d.data());
    double total = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) total += (*pc.weights)[j] * std::clamp(d[j], -1.0, 1.0);
    return total;
}

double Classifier::score_class(const PreparedImage& image, std::size_t k) const {
    const PreparedClass& pc = classes_[k];
    switch (cfg_.aggregation) {
        case Aggregation::Wca: return augmented_score(*image.augmented, *pc.augmented);
        case Aggregation::Avg: return avg_score(cross_matrix(*image.patches, *pc.descriptions));
        case Aggregation::Max: return max_score(cross_matrix(*image.patches, *pc.descriptions));
        case Aggregation::Llm: return mean_row_dot(unit_copy(*image.whole), *pc.descriptions);
        case Aggregation::Clip: return clip_score(*image.whole, *pc.label);
        case Aggregation::ClipE: return cosine(*image.whole, *pc.ensemble);
        case Aggregation::Mixed:
            return mixed_score(*cfg_.lambda, weighted_whole_image_score(*image.whole, k),
                               augmented_score(*image.augmented, *pc.augmented));
    }
    return 0.0;
}

ClassificationReport Classifier::finish(std::string_view image_id, std::vector<double> scores) const {
    ClassificationReport r;
    r.image_id = std::string(image_id);
    r.predicted_index = argmax_first(scores);
    r.predicted_label = catalog_[r.predicted_index].label;
    r.labels.reserve(catalog_.size());
    for (const auto& c : catalog_.classes()) r.labels.push_back(c.label);
    r.scores = std::move(scores);
    return r;
}

ClassificationReport Classifier::classify(const PreparedImage& image) const {
    const auto t0 = Clock::now();
    std::vector<double> scores(catalog_.size());
    for (std::size_t k = 0; k < catalog_.size(); ++k) scores[k] = score_class(image, k);
    ClassificationReport r = finish(image.id, std::move(scores));
    if (cfg_.explain) {
        r.explanation.push_back(explain_class(image, r.predicted_index));
        if (catalog_.size() > 1) {
            std::size_t runner = r.predicted_index == 0 ? 1 : 0;
            for (std::size_t k = 0; k < catalog_.size(); ++k)
                if (k != r.predicted_index && r.scores[k] > r.scores[runner]) runner = k;
            r.explanation.push_back(explain_class(image, runner));
        }
    }
    r.timing = image.timing;
    r.timing.score_seconds += seconds_since(t0);
    return r;
}

ClassificationReport Classifier::classify(std::string_view image_id, const ImageBuffer* pixels) const {
    return classify(prepare(image_id, pixels));
}

ClassificationReport Classifier::classify_augmented(std::string_view image_id, const AugmentedEmbedding& image) const {
    if (cfg_.aggregation != Aggregation::Wca)
        throw ConfigError("cached augmented embeddings only support --agg wca");
    if (cfg_.explain)
        throw ExplanationUnavailableError(
            "explanations need the explicit similarity matrix; rerun without --cache to use the slow path");
    if (image.dim() != backend_.dim())
        throw CacheInvalidError("cached vector for '" + std::string(image_id) + "' has dim " +
                                std::to_string(image.dim()) + ", expected " + std::to_string(backend_.dim()));
    const auto t0 = Clock::now();
    std::vector<double> scores(catalog_.size());
    for (std::size_t k = 0; k < catalog_.size(); ++k) scores[k] = augmented_score(image, *classes_[k].augmented);
    ClassificationReport r = finish(image_id, std::move(scores));
    r.timing.score_seconds = seconds_since(t0);
    return r;
}

const AugmentedEmbedding& Classifier::class_augmented(std::size_t k) const {
    const auto& a = classes_.at(k).augmented;
    if (!a) throw PreconditionError("augmented text embeddings are only built for --agg wca or mixed");
    return *a;
}

ClassExplanation Classifier::explain_class(const PreparedImage& image, std::size_t k) const {
    const PreparedClass& pc = classes_.at(k);
    if (!image.patches || !image.patch_weights || !pc.descriptions || !pc.weights)
        throw ExplanationUnavailableError("explanation for '" + catalog_[k].label +
                                          "' needs patch and description embeddings (slow path)");
    const CrossAlignMatrix m = cross_matrix(*image.patches, *pc.descriptions);
    const auto contrib = column_contributions(m, *image.patch_weights, *pc.weights);
    ClassExplanation ex;
    ex.label = catalog_[k].label;
    ex.score = wca_score(m, *image.patch_weights, *pc.weights);
    for (std::size_t j = 0; j < contrib.size(); ++j)
        ex.rows.push_back({catalog_[k].descriptions[j], (*pc.weights)[j], contrib[j]});
    std::stable_sort(ex.rows.begin(), ex.rows.end(),
                     [](const ExplanationRow& a, const ExplanationRow& b) { return a.contribution > b.contribution; });
    return ex;
}

}  // namespace wca
