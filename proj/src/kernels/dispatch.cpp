// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "wca/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace wca::kernels {

namespace detail {
#if defined(WCA_HAVE_AVX2)
const KernelTable& avx2_table_unchecked();
#endif
#if defined(WCA_HAVE_NEON)
const KernelTable& neon_table_unchecked();
#endif
}  // namespace detail

const KernelTable* avx2_table() {
#if defined(WCA_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &detail::avx2_table_unchecked() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable* neon_table() {
#if defined(WCA_HAVE_NEON)
    // Advanced SIMD is mandatory on AArch64.
    return &detail::neon_table_unchecked();
#else
    return nullptr;
#endif
}

namespace {

const KernelTable& select() {
    const char* forced = std::getenv("WCA_KERNELS");
    const std::string_view want = forced ? forced : "";
    if (want == "scalar") return scalar_table();
    if (want == "avx2" && avx2_table()) return *avx2_table();
    if (want == "neon" && neon_table()) return *neon_table();
    if (const KernelTable* t = avx2_table()) return *t;
    if (const KernelTable* t = neon_table()) return *t;
    return scalar_table();
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

}  // namespace wca::kernels
