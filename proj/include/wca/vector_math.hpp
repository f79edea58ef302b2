// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace wca {

/// A point in the shared image/text latent space. Always non-empty with
/// finite coordinates; stored in f64 regardless of on-disk precision.
class Embedding {
public:
    Embedding() = default;
    explicit Embedding(std::vector<double> values);
    Embedding(std::initializer_list<double> values) : Embedding(std::vector<double>(values)) {}

    std::size_t dim() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double norm() const;

    friend bool operator==(const Embedding&, const Embedding&) = default;

private:
    std::vector<double> values_;
};

/// Non-negative weights summing to one.
class WeightVector {
public:
    /// Validates the simplex invariant (sum within 1e-6 of 1, all >= 0).
    static WeightVector from_weights(std::vector<double> weights);
    static WeightVector uniform(std::size_t n);

    std::size_t size() const noexcept { return weights_.size(); }
    std::span<const double> weights() const noexcept { return weights_; }
    double operator[](std::size_t i) const { return weights_[i]; }

private:
    explicit WeightVector(std::vector<double> w) : weights_(std::move(w)) {}
    friend WeightVector softmax(std::span<const double> scores);
    std::vector<double> weights_;
};

/// u.v / (|u||v|), clamped to [-1, 1].
/// Throws DimensionError on size mismatch, DomainError on a zero vector.
double cosine(std::span<const double> u, std::span<const double> v);
inline double cosine(const Embedding& u, const Embedding& v) { return cosine(u.values(), v.values()); }

Embedding normalize(const Embedding& v);

/// Temperature-free softmax with max subtraction.
WeightVector softmax(std::span<const double> scores);

double dot(const Embedding& u, const Embedding& v);

}  // namespace wca
