// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

// Dense f64 inner-loop kernels with runtime-selected SIMD variants.
//
// Every variant must agree with the scalar reference up to floating-point
// reassociation; tests/unit/test_kernels.cpp checks this on random inputs.
// Callers validate shapes; kernels assume equal lengths.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace wca::kernels {

struct KernelTable {
    std::string_view name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum_squares)(const double* a, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // out[r] = dot(query, rows + r * dim) for r in [0, n_rows)
    void (*dot_rows)(const double* query, const double* rows, std::size_t n_rows, std::size_t dim,
                     double* out);
};

const KernelTable& scalar_table();

// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_table();
const KernelTable* neon_table();

/// Best table for this CPU. The WCA_KERNELS environment variable
/// ("scalar", "avx2", "neon") forces a variant when available.
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline double sum_squares(std::span<const double> a) {
    return active().sum_squares(a.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace wca::kernels
