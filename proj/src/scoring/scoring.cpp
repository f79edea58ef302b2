// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "wca/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wca/error.hpp"
#include "wca/kernels.hpp"

namespace wca {

UnitRows::UnitRows(std::span<const Embedding> rows) {
    if (rows.empty()) throw DomainError("need at least one embedding");
    rows_ = rows.size();
    dim_ = rows[0].dim();
    data_.resize(rows_ * dim_);
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < rows_; ++i) {
        const auto src = rows[i].values();
        if (src.size() != dim_)
            throw DimensionError("embedding " + std::to_string(i) + " has dim " + std::to_string(src.size()) +
                                 ", expected " + std::to_string(dim_));
        const double n = std::sqrt(k.sum_squares(src.data(), dim_));
        if (n == 0.0) throw DomainError("embedding " + std::to_string(i) + " has zero norm");
        double* dst = data_.data() + i * dim_;
        for (std::size_t c = 0; c < dim_; ++c) dst[c] = src[c] / n;
    }
}

CrossAlignMatrix::CrossAlignMatrix(std::size_t rows, std::size_t cols, std::vector<double> sims)
    : rows_(rows), cols_(cols), sims_(std::move(sims)) {
    if (rows == 0 || cols == 0) throw DomainError("cross-alignment matrix must be non-empty");
    if (sims_.size() != rows * cols) throw DimensionError("cross-alignment matrix size mismatch");
}

double clip_score(const Embedding& image, const Embedding& label) { return cosine(image, label); }

double llm_score(const Embedding& image, std::span<const Embedding> descriptions) {
    if (descriptions.empty()) throw DomainError("llm score needs at least one description embedding");
    double total = 0.0;
    for (const auto& d : descriptions) total += cosine(image, d);
    return total / static_cast<double>(descriptions.size());
}

CrossAlignMatrix cross_matrix(const UnitRows& patches, const UnitRows& descriptions) {
    if (patches.dim() != descriptions.dim())
        throw DimensionError("patch dim " + std::to_string(patches.dim()) + " != description dim " +
                             std::to_string(descriptions.dim()));
    const std::size_t n = patches.rows(), m = descriptions.rows();
    std::vector<double> sims(n * m);
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < n; ++i)
        k.dot_rows(patches.row(i).data(), descriptions.data().data(), m, patches.dim(), sims.data() + i * m);
    for (double& s : sims) s = std::clamp(s, -1.0, 1.0);
    return CrossAlignMatrix(n, m, std::move(sims));
}

CrossAlignMatrix cross_matrix(std::span<const Embedding> patches, std::span<const Embedding> descriptions) {
    return cross_matrix(UnitRows(patches), UnitRows(descriptions));
}

WeightVector anchor_weights(const Embedding& anchor, const UnitRows& members) {
    if (anchor.dim() != members.dim())
        throw DimensionError("anchor dim " + std::to_string(anchor.dim()) + " != member dim " +
                             std::to_string(members.dim()));
    const double n = anchor.norm();
    if (n == 0.0) throw DomainError("anchor embedding has zero norm");
    std::vector<double> scores(members.rows());
    kernels::active().dot_rows(anchor.values().data(), members.data().data(), members.rows(), members.dim(),
                               scores.data());
    for (double& s : scores) s = std::clamp(s / n, -1.0, 1.0);
    return softmax(scores);
}

WeightVector patch_weights(const Embedding& image, std::span<const Embedding> patches) {
    return anchor_weights(image, UnitRows(patches));
}

WeightVector desc_weights(const Embedding& label, std::span<const Embedding> descriptions) {
    return anchor_weights(label, UnitRows(descriptions));
}

double wca_score(const CrossAlignMatrix& m, const WeightVector& w, const WeightVector& v) {
    if (w.size() != m.rows() || v.size() != m.cols())
        throw DimensionError("weights (" + std::to_string(w.size()) + ", " + std::to_string(v.size()) +
                             ") do not match a " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             " matrix");
    double total = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) row += v[j] * m.at(i, j);
        total += w[i] * row;
    }
    return total;
}

double avg_score(const CrossAlignMatrix& m) {
    double total = 0.0;
    for (double s : m.values()) total += s;
    return total / static_cast<double>(m.values().size());
}

double max_score(const CrossAlignMatrix& m) {
    return *std::max_element(m.values().begin(), m.values().end());
}

std::vector<double> column_contributions(const CrossAlignMatrix& m, const WeightVector& w, const WeightVector& v) {
    if (w.size() != m.rows() || v.size() != m.cols()) throw DimensionError("weights do not match matrix shape");
    std::vector<double> out(m.cols(), 0.0);
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) col += w[i] * m.at(i, j);
        out[j] = v[j] * col;
    }
    return out;
}

AugmentedEmbedding augmented_embedding(const UnitRows& members, const WeightVector& weights) {
    if (weights.size() != members.rows())
        throw DimensionError(std::to_string(weights.size()) + " weights for " + std::to_string(members.rows()) +
                             " embeddings");
    std::vector<double> acc(members.dim(), 0.0);
    for (std::size_t i = 0; i < members.rows(); ++i) kernels::axpy(weights[i], members.row(i), acc);
    return AugmentedEmbedding(Embedding(std::move(acc)));
}

AugmentedEmbedding augmented_image_embedding(std::span<const Embedding> patches, const WeightVector& w) {
    return augmented_embedding(UnitRows(patches), w);
}

AugmentedEmbedding augmented_text_embedding(std::span<const Embedding> descriptions, const WeightVector& v) {
    return augmented_embedding(UnitRows(descriptions), v);
}

double augmented_score(const AugmentedEmbedding& image, const AugmentedEmbedding& text) {
    return dot(image.vector(), text.vector());
}

double mixed_score(double lambda, double whole_image_score, double patch_score) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw ConfigError("lambda must lie in [0, 1], got " + std::to_string(lambda));
    return lambda * whole_image_score + (1.0 - lambda) * patch_score;
}

}  // namespace wca
