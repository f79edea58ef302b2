// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "wca/theorem_lab.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "wca/error.hpp"

namespace wca {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

constexpr double kAlignTolerance = 1e-9;
constexpr double kIndependenceRatio = 1e-6;
constexpr double kConditionRatio = 1e-3;
constexpr double kResidualTolerance = 1e-8;

Eigen::Map<const Mat> as_matrix(const LinearEncoder& enc) {
    return {enc.matrix().data(), static_cast<Eigen::Index>(enc.d_out()), static_cast<Eigen::Index>(enc.d_in())};
}

Eigen::Map<const Vec> as_vec(const std::vector<double>& v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

// Unclamped cosine; 0 when either side vanishes so callers can reject it.
double raw_cosine(const Vec& a, const Vec& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

bool well_conditioned(const Mat& m, double ratio) {
    const Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return false;
    return s(s.size() - 1) >= ratio * s(0);
}

void check_shapes(const TheoremInstance& inst) {
    const auto& enc = inst.encoder;
    if (inst.target.size() != enc.d_out())
        throw DimensionError("target has dim " + std::to_string(inst.target.size()) + ", encoder outputs " +
                             std::to_string(enc.d_out()));
    if (inst.x1.size() != enc.d_in() || inst.x2.size() != enc.d_in())
        throw DimensionError("x1/x2 must have the encoder input dim " + std::to_string(enc.d_in()));
}

Vec random_vec(Rng& rng, std::size_t n) {
    Vec v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.approx_normal();
    return v;
}

}  // namespace

const char* to_string(InstanceCheck c) {
    switch (c) {
        case InstanceCheck::PerfectAlignment: return "perfect alignment of f(x1)";
        case InstanceCheck::CosineBound: return "cosine bound on f(x2)";
        case InstanceCheck::Independence: return "linear independence of x1, x2";
        case InstanceCheck::NormFloor: return "component norm floor";
    }
    return "?";
}

std::optional<InstanceCheck> check_instance(const TheoremInstance& inst) {
    check_shapes(inst);
    const auto a = as_matrix(inst.encoder);
    const auto g = as_vec(inst.target);
    const auto x1 = as_vec(inst.x1);
    const auto x2 = as_vec(inst.x2);

    const Vec f1 = a * x1;
    if (f1.norm() == 0.0 || raw_cosine(f1, g) < 1.0 - kAlignTolerance) return InstanceCheck::PerfectAlignment;

    const Vec f2 = a * x2;
    if (!(inst.cos2_max < 1.0) || f2.norm() == 0.0 || raw_cosine(f2, g) > inst.cos2_max)
        return InstanceCheck::CosineBound;

    Mat pair(2, x1.size());
    pair.row(0) = x1.transpose();
    pair.row(1) = x2.transpose();
    if (!well_conditioned(pair, kIndependenceRatio)) return InstanceCheck::Independence;

    if (x1.norm() < inst.min_component_norm || x2.norm() < inst.min_component_norm) return InstanceCheck::NormFloor;
    return std::nullopt;
}

TheoremInstance construct_instance(Rng& rng, const ConstructionOptions& opts) {
    std::size_t d_in = opts.d_in;
    std::size_t d_out = opts.d_out;
    if (opts.forced_encoder) {
        d_in = opts.forced_encoder->d_in();
        d_out = opts.forced_encoder->d_out();
    }
    if (d_in < 2 || d_out < 2) throw ConfigError("theorem instances need d_in >= 2 and d_out >= 2");
    if (!(opts.cos2_max >= -1.0 && opts.cos2_max <= 0.99))
        throw ConfigError("cos2_max must lie in [-1, 0.99], got " + std::to_string(opts.cos2_max));
    if (!(opts.min_component_norm > 0.0)) throw ConfigError("min_component_norm must be positive");
    if (opts.forced_target && opts.forced_target->size() != d_out)
        throw DimensionError("forced target has dim " + std::to_string(opts.forced_target->size()) +
                             ", expected " + std::to_string(d_out));

    // Failure tallies: the four instance checks plus "encoder rank".
    std::array<std::size_t, 5> failures{};
    const char* const names[5] = {to_string(InstanceCheck::PerfectAlignment), to_string(InstanceCheck::CosineBound),
                                  to_string(InstanceCheck::Independence), to_string(InstanceCheck::NormFloor),
                                  "encoder conditioning"};

    std::optional<TheoremInstance> base;  // encoder, target and x1 fixed; x2 pending
    for (std::size_t attempt = 0; attempt < opts.max_resamples; ++attempt) {
        if (!base) {
            Mat a;
            if (opts.forced_encoder) {
                a = as_matrix(*opts.forced_encoder);
            } else {
                a.resize(static_cast<Eigen::Index>(d_out), static_cast<Eigen::Index>(d_in));
                for (Eigen::Index r = 0; r < a.rows(); ++r)
                    for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = rng.approx_normal();
            }
            if (!well_conditioned(a, kConditionRatio)) {
                ++failures[4];
                continue;
            }
            Vec g = opts.forced_target ? as_vec(*opts.forced_target) : random_vec(rng, d_out);
            if (g.norm() == 0.0) {
                ++failures[0];
                continue;
            }
            g.normalize();
            const auto solver = a.completeOrthogonalDecomposition();
            if (!opts.forced_target && d_out > d_in) {
                // A tall encoder reaches only a d_in-dimensional subspace.
                g = a * solver.solve(g);
                if (g.norm() == 0.0) {
                    ++failures[0];
                    continue;
                }
                g.normalize();
            }
            const double c = rng.uniform(0.5, 2.0);
            const Vec x1 = solver.solve(c * g);
            if ((a * x1 - c * g).norm() > kResidualTolerance * c) {
                ++failures[0];
                continue;
            }
            std::vector<double> row_major(a.data(), a.data() + a.size());
            base = TheoremInstance{LinearEncoder(d_out, d_in, std::move(row_major)), to_std(g), to_std(x1), {},
                                   opts.cos2_max, opts.min_component_norm};
        }

        TheoremInstance inst = *base;
        inst.x2 = to_std(random_vec(rng, d_in));
        const auto failed = check_instance(inst);
        if (!failed) return inst;
        ++failures[static_cast<std::size_t>(*failed)];
        // A misaligned x1 or short x1 will not improve with new x2 draws.
        if (*failed == InstanceCheck::PerfectAlignment ||
            (*failed == InstanceCheck::NormFloor && as_vec(inst.x1).norm() < inst.min_component_norm))
            base.reset();
    }

    const auto worst = std::max_element(failures.begin(), failures.end()) - failures.begin();
    throw ConstructionError("no valid instance after " + std::to_string(opts.max_resamples) +
                            " resamples; most frequent failure: " + names[worst] + " (" +
                            std::to_string(failures[static_cast<std::size_t>(worst)]) + " times)");
}

double whole_cosine(const TheoremInstance& inst, double x2_scale) {
    check_shapes(inst);
    const Vec x = as_vec(inst.x1) + x2_scale * as_vec(inst.x2);
    return raw_cosine(as_matrix(inst.encoder) * x, as_vec(inst.target));
}

double verify_theorem(const TheoremInstance& inst) {
    if (const auto failed = check_instance(inst))
        throw PreconditionError(std::string("invalid theorem instance: ") + to_string(*failed));
    return whole_cosine(inst);
}

double linearity_error(const TheoremInstance& inst) {
    check_shapes(inst);
    std::vector<double> sum(inst.x1.size());
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = inst.x1[i] + inst.x2[i];
    const auto f1 = inst.encoder.apply(inst.x1);
    const auto f2 = inst.encoder.apply(inst.x2);
    const auto f12 = inst.encoder.apply(sum);
    double err = 0.0;
    for (std::size_t r = 0; r < f12.size(); ++r) err = std::max(err, std::abs(f1[r] + f2[r] - f12[r]));
    return err;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
    return Rng::stream(seed, "theorem-trial:" + std::to_string(trial)).next_u64();
}

ProbeSummary counterexample_probe(std::uint64_t seed, std::size_t trials, const ConstructionOptions& opts) {
    ProbeSummary s;
    s.trials = trials;
    s.d_in = opts.forced_encoder ? opts.forced_encoder->d_in() : opts.d_in;
    s.d_out = opts.forced_encoder ? opts.forced_encoder->d_out() : opts.d_out;
    s.cos2_max = opts.cos2_max;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t ts = trial_seed(seed, t);
        Rng rng(ts);
        const TheoremInstance inst = construct_instance(rng, opts);
        const double c = verify_theorem(inst);
        if (!s.max_cos || c > *s.max_cos) {
            s.max_cos = c;
            s.worst_seed = ts;
        }
        if (c >= 1.0 - kTheoremGap) ++s.violations;
        const double lin = linearity_error(inst);
        s.max_linearity_error = std::max(s.max_linearity_error, lin);
        if (lin > 1e-9) ++s.linearity_failures;
    }
    return s;
}

nlohmann::ordered_json probe_json(const ProbeSummary& s) {
    nlohmann::ordered_json j;
    j["trials"] = s.trials;
    j["d_in"] = s.d_in;
    j["d_out"] = s.d_out;
    j["cos2_max"] = s.cos2_max;
    j["max_cos"] = s.max_cos ? nlohmann::ordered_json(*s.max_cos) : nlohmann::ordered_json(nullptr);
    j["worst_seed"] = s.worst_seed ? nlohmann::ordered_json(*s.worst_seed) : nlohmann::ordered_json(nullptr);
    j["violations"] = s.violations;
    j["max_linearity_error"] = s.max_linearity_error;
    j["linearity_failures"] = s.linearity_failures;
    return j;
}

}  // namespace wca
