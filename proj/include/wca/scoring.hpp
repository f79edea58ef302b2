// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

// Image-label score functions.
//
//   clip   cos(f(x), g(y))
//   llm    mean_j cos(f(x), g(y_j))
//   avg    mean over the N x M patch/description cosine matrix
//   max    largest entry of that matrix
//   wca    sum_ij w_i v_j cos(f(x_i), g(y_j)), with
//          w = softmax_i cos(f(x), f(x_i)) and v = softmax_j cos(g(y), g(y_j))
//
// The wca score factors as k.t where k = sum_i (w_i / |f(x_i)|) f(x_i) and
// t = sum_j (v_j / |g(y_j)|) g(y_j); both augmented vectors can be
// computed once and cached.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wca/vector_math.hpp"

namespace wca {

/// Row-major stack of unit-normalized copies of a set of embeddings.
class UnitRows {
public:
    /// DomainError on a zero-norm member, DimensionError on mixed dims or an
    /// empty set.
    explicit UnitRows(std::span<const Embedding> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> row(std::size_t i) const { return std::span<const double>(data_).subspan(i * dim_, dim_); }
    std::span<const double> data() const noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

class CrossAlignMatrix {
public:
    CrossAlignMatrix(std::size_t rows, std::size_t cols, std::vector<double> sims);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double at(std::size_t i, std::size_t j) const { return sims_[i * cols_ + j]; }
    std::span<const double> values() const noexcept { return sims_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> sims_;
};

/// Weighted sum of unit-scaled members; generally not unit-norm.
class AugmentedEmbedding {
public:
    explicit AugmentedEmbedding(Embedding v) : vector_(std::move(v)) {}
    const Embedding& vector() const noexcept { return vector_; }
    std::size_t dim() const noexcept { return vector_.dim(); }

private:
    Embedding vector_;
};

double clip_score(const Embedding& image, const Embedding& label);
double llm_score(const Embedding& image, std::span<const Embedding> descriptions);

CrossAlignMatrix cross_matrix(std::span<const Embedding> patches, std::span<const Embedding> descriptions);
CrossAlignMatrix cross_matrix(const UnitRows& patches, const UnitRows& descriptions);

WeightVector patch_weights(const Embedding& image, std::span<const Embedding> patches);
WeightVector desc_weights(const Embedding& label, std::span<const Embedding> descriptions);
/// softmax over cos(anchor, member_i) with members already unit-normalized.
WeightVector anchor_weights(const Embedding& anchor, const UnitRows& members);

double wca_score(const CrossAlignMatrix& m, const WeightVector& w, const WeightVector& v);
double avg_score(const CrossAlignMatrix& m);
double max_score(const CrossAlignMatrix& m);

/// sum_j v_j * sum_i w_i * m(i, j) split per column: entry j is
/// v_j * sum_i w_i m(i, j). Entries sum to wca_score.
std::vector<double> column_contributions(const CrossAlignMatrix& m, const WeightVector& w, const WeightVector& v);

AugmentedEmbedding augmented_image_embedding(std::span<const Embedding> patches, const WeightVector& w);
AugmentedEmbedding augmented_text_embedding(std::span<const Embedding> descriptions, const WeightVector& v);
AugmentedEmbedding augmented_embedding(const UnitRows& members, const WeightVector& weights);
double augmented_score(const AugmentedEmbedding& image, const AugmentedEmbedding& text);

/// lambda * whole + (1 - lambda) * patch; ConfigError unless lambda in [0, 1].
double mixed_score(double lambda, double whole_image_score, double patch_score);

}  // namespace wca
