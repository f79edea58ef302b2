// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "wca/encoder.hpp"

#include <cctype>
#include <cmath>

#include "wca/error.hpp"
#include "wca/kernels.hpp"
#include "wca/rng.hpp"

namespace wca {

std::string patch_id(std::string_view image_id, std::size_t i) {
    return std::string(image_id) + "::" + std::to_string(i);
}

std::string label_prompt_id(std::string_view label) { return "cls::" + std::string(label); }

std::string description_id(std::string_view label, std::size_t j) {
    return std::string(label) + "::" + std::to_string(j);
}

std::string template_prompt_id(std::string_view label, std::size_t k) {
    return "tpl::" + std::string(label) + "::" + std::to_string(k);
}

PrecomputedBackend::PrecomputedBackend(std::shared_ptr<const PrecomputedStore> store) : store_(std::move(store)) {
    if (!store_) throw PreconditionError("precomputed backend needs a store");
}

LinearEncoder::LinearEncoder(std::size_t d_out, std::size_t d_in, std::vector<double> row_major)
    : d_out_(d_out), d_in_(d_in), a_(std::move(row_major)) {
    if (d_out == 0 || d_in == 0) throw DimensionError("linear encoder dimensions must be >= 1");
    if (a_.size() != d_out * d_in)
        throw DimensionError("linear encoder matrix has " + std::to_string(a_.size()) + " entries, expected " +
                             std::to_string(d_out * d_in));
}

LinearEncoder LinearEncoder::identity(std::size_t d) {
    std::vector<double> a(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) a[i * d + i] = 1.0;
    return LinearEncoder(d, d, std::move(a));
}

std::vector<double> LinearEncoder::apply(std::span<const double> x) const {
    if (x.size() != d_in_)
        throw DimensionError("linear encoder expects input dim " + std::to_string(d_in_) + ", got " +
                             std::to_string(x.size()));
    std::vector<double> out(d_out_);
    kernels::active().dot_rows(x.data(), a_.data(), d_out_, d_in_, out.data());
    return out;
}

Embedding linear_encode(const LinearEncoder& enc, const Embedding& x) { return Embedding(enc.apply(x.values())); }

namespace {

LinearEncoder random_projection(std::size_t d_out, std::size_t d_in, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, "projection-encoder/image");
    std::vector<double> a(d_out * d_in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_in));
    for (double& v : a) v = rng.approx_normal() * scale;
    return LinearEncoder(d_out, d_in, std::move(a));
}

}  // namespace

ProjectionEncoder::ProjectionEncoder(std::size_t dim, std::uint64_t seed, std::size_t side)
    : dim_(dim), seed_(seed), side_(side), projection_(random_projection(dim, side * side * 3, seed)) {}

ImageBuffer ProjectionEncoder::preprocess(const ImageBuffer& img) const {
    if (img.width() == side_ && img.height() == side_) return img;
    return resize_bilinear(img, side_, side_);
}

Embedding ProjectionEncoder::encode_image(const ImageQuery& query) const {
    if (!query.pixels) throw PreconditionError("projection encoder needs pixels for image '" + query.id + "'");
    const ImageBuffer& px = *query.pixels;
    if (px.width() != side_ || px.height() != side_)
        throw DimensionError("projection encoder expects preprocessed " + std::to_string(side_) + "x" +
                             std::to_string(side_) + " input for '" + query.id + "'");
    std::vector<double> x(px.pixels().size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(px.pixels()[i]) / 255.0 - 0.5;
    auto y = projection_.apply(x);
    // A flat mid-grey input projects to zero; nudge so cosine stays defined.
    y[0] += 1e-6;
    return Embedding(std::move(y));
}

Embedding ProjectionEncoder::encode_text(const TextQuery& query) const {
    std::vector<double> out(dim_, 0.0);
    std::string token;
    std::size_t n_tokens = 0;
    auto flush = [&] {
        if (token.empty()) return;
        Rng rng = Rng::stream(seed_, "projection-encoder/token/" + token);
        for (double& v : out) v += rng.approx_normal();
        token.clear();
        ++n_tokens;
    };
    for (char ch : query.text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80)
            token.push_back(static_cast<char>(std::tolower(c)));
        else
            flush();
    }
    flush();
    if (n_tokens == 0) throw DomainError("text '" + query.text + "' (id '" + query.id + "') has no tokens");
    return Embedding(std::move(out));
}

}  // namespace wca
