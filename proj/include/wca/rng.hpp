// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

// Portable seeded random stream.
//
// The algorithm is fixed so that other implementations (for example an
// offline embedding exporter) can regenerate identical crop sequences:
//
//   next():       state += 0x9E3779B97F4A7C15
//                 z = state
//                 z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//                 z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//                 return z ^ (z >> 31)                      (SplitMix64)
//   uniform01():  (next() >> 11) * 2^-53                    in [0, 1)
//   below(k):     r = next() until r >= (2^64 - k) mod k; return r mod k
//   stream(seed, id): Rng(seed ^ fnv1a64(utf8 bytes of id))
//
// All arithmetic is modulo 2^64.

#pragma once

#include <cstdint>
#include <string_view>

namespace wca {

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    /// Independent stream for one named item (image id, trial index, ...).
    static Rng stream(std::uint64_t seed, std::string_view id) noexcept {
        return Rng(seed ^ fnv1a64(id));
    }

    std::uint64_t next_u64() noexcept;
    double uniform01() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }
    /// Uniform integer in [0, bound); bound must be >= 1.
    std::uint64_t below(std::uint64_t bound) noexcept;
    /// Approximately standard normal (Irwin-Hall of 12 uniforms, minus 6).
    /// Uses only exact arithmetic so values are identical on every platform.
    double approx_normal() noexcept;

private:
    std::uint64_t state_;
};

}  // namespace wca
