// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "wca/vector_math.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wca/error.hpp"
#include "wca/kernels.hpp"

namespace wca {

Embedding::Embedding(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw DomainError("embedding must have dim >= 1");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]))
            throw DomainError("embedding component " + std::to_string(i) + " is not finite");
    }
}

double Embedding::norm() const { return std::sqrt(kernels::sum_squares(values_)); }

WeightVector WeightVector::from_weights(std::vector<double> weights) {
    if (weights.empty()) throw DomainError("weight vector must be non-empty");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weights must be finite and >= 0");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw DomainError("weights sum to " + std::to_string(sum) + ", expected 1");
    return WeightVector(std::move(weights));
}

WeightVector WeightVector::uniform(std::size_t n) {
    if (n == 0) throw DomainError("weight vector must be non-empty");
    return WeightVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw DimensionError("cosine: dimension mismatch " + std::to_string(u.size()) + " vs " +
                             std::to_string(v.size()));
    const auto& k = kernels::active();
    const double uu = k.sum_squares(u.data(), u.size());
    const double vv = k.sum_squares(v.data(), v.size());
    if (uu == 0.0 || vv == 0.0) throw DomainError("cosine of a zero-norm vector");
    const double c = k.dot(u.data(), v.data(), u.size()) / (std::sqrt(uu) * std::sqrt(vv));
    return std::clamp(c, -1.0, 1.0);
}

Embedding normalize(const Embedding& v) {
    const double n = v.norm();
    if (v.empty() || n == 0.0) throw DomainError("cannot normalize a zero-norm vector");
    std::vector<double> out(v.values().begin(), v.values().end());
    for (double& x : out) x /= n;
    return Embedding(std::move(out));
}

WeightVector softmax(std::span<const double> scores) {
    if (scores.empty()) throw DomainError("softmax of an empty sequence");
    double hi = scores[0];
    for (double s : scores) {
        if (!std::isfinite(s)) throw DomainError("softmax input is not finite");
        hi = std::max(hi, s);
    }
    std::vector<double> w(scores.size());
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        w[i] = std::exp(scores[i] - hi);
        total += w[i];
    }
    for (double& x : w) x /= total;
    return WeightVector(std::move(w));
}

double dot(const Embedding& u, const Embedding& v) {
    if (u.dim() != v.dim())
        throw DimensionError("dot: dimension mismatch " + std::to_string(u.dim()) + " vs " +
                             std::to_string(v.dim()));
    return kernels::dot(u.values(), v.values());
}

}  // namespace wca
