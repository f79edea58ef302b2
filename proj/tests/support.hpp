// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

// Helpers shared by the unit and acceptance suites.

#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "wca/rng.hpp"
#include "wca/vector_math.hpp"

namespace wca::test {

/// Random direction scaled to a norm drawn uniformly from [lo, hi].
inline Embedding random_embedding(Rng& rng, std::size_t dim, double lo = 0.1, double hi = 10.0) {
    std::vector<double> v(dim);
    double sq = 0.0;
    do {
        sq = 0.0;
        for (auto& x : v) {
            x = rng.approx_normal();
            sq += x * x;
        }
    } while (sq == 0.0);
    const double scale = rng.uniform(lo, hi) / std::sqrt(sq);
    for (auto& x : v) x *= scale;
    return Embedding(std::move(v));
}

inline std::vector<Embedding> random_embeddings(Rng& rng, std::size_t n, std::size_t dim, double lo = 0.1,
                                                double hi = 10.0) {
    std::vector<Embedding> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(random_embedding(rng, dim, lo, hi));
    return out;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("wca-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << text;
}

}  // namespace wca::test
