// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic check that, under a linear image encoder, an image made of a
// perfectly aligned part x1 plus a linearly independent, imperfectly aligned
// part x2 never aligns perfectly as a whole: cos(f(x1 + x2), g_y) < 1.
//
// Instances carry explicit margins (cos2_max, norm floor) so the strict
// inequality can be asserted with a finite gap in f64.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "wca/encoder.hpp"
#include "wca/rng.hpp"

namespace wca {

inline constexpr double kTheoremGap = 1e-9;

struct TheoremInstance {
    LinearEncoder encoder;
    std::vector<double> target;  // g_y, unit norm
    std::vector<double> x1;
    std::vector<double> x2;
    double cos2_max = 0.9;
    double min_component_norm = 0.1;
};

/// Names of the invariants checked by validate_instance.
enum class InstanceCheck { PerfectAlignment, CosineBound, Independence, NormFloor };

/// First violated invariant, or nullopt when the instance is valid.
std::optional<InstanceCheck> check_instance(const TheoremInstance& inst);
const char* to_string(InstanceCheck c);

struct ConstructionOptions {
    std::size_t d_in = 8;
    std::size_t d_out = 8;
    double cos2_max = 0.9;
    double min_component_norm = 0.1;
    std::size_t max_resamples = 1000;
    std::optional<LinearEncoder> forced_encoder;
    std::optional<std::vector<double>> forced_target;
};

/// Samples a full-rank encoder (condition number <= 1e3) and unit target,
/// solves f(x1) = c * g_y for random c in [0.5, 2] and draws x2 until every
/// invariant holds. When d_out > d_in the target is projected onto the
/// encoder's range. ConstructionError after max_resamples failed draws.
TheoremInstance construct_instance(Rng& rng, const ConstructionOptions& opts);

/// cos(f(x1 + x2), g_y). PreconditionError if the instance is invalid.
double verify_theorem(const TheoremInstance& inst);

/// Same cosine without validation; for probing instances outside the margins.
double whole_cosine(const TheoremInstance& inst, double x2_scale = 1.0);

/// max |f(x1) + f(x2) - f(x1 + x2)| over components.
double linearity_error(const TheoremInstance& inst);

struct ProbeSummary {
    std::size_t trials = 0;
    std::size_t d_in = 0;
    std::size_t d_out = 0;
    double cos2_max = 0.0;
    std::optional<double> max_cos;
    std::optional<std::uint64_t> worst_seed;  // Rng seed that rebuilds the worst instance
    std::size_t violations = 0;               // cos >= 1 - kTheoremGap
    double max_linearity_error = 0.0;
    std::size_t linearity_failures = 0;       // error > 1e-9
};

/// Trial i uses Rng(trial_seed(seed, i)).
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial);
ProbeSummary counterexample_probe(std::uint64_t seed, std::size_t trials, const ConstructionOptions& opts);

nlohmann::ordered_json probe_json(const ProbeSummary& s);

}  // namespace wca
