// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

// Sources of image and text embeddings.
//
// A backend either resolves caller-defined ids against a precomputed store
// or encodes pixels/text directly. Id conventions used by the classifier:
//   "<image id>"         whole image
//   "<image id>::<i>"    patch i of the seeded crop sequence
//   "cls::<label>"       templated label prompt
//   "<label>::<j>"       description j of a class
//   "tpl::<label>::<k>"  k-th ensemble template prompt (CLIP-E baseline)

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wca/embedding_store.hpp"
#include "wca/image.hpp"
#include "wca/vector_math.hpp"

namespace wca {

std::string patch_id(std::string_view image_id, std::size_t i);
std::string label_prompt_id(std::string_view label);
std::string description_id(std::string_view label, std::size_t j);
std::string template_prompt_id(std::string_view label, std::size_t k);

struct ImageQuery {
    std::string id;
    const ImageBuffer* pixels = nullptr;  // required when the backend wants pixels
};

struct TextQuery {
    std::string id;
    std::string text;
};

class EncoderBackend {
public:
    virtual ~EncoderBackend() = default;

    virtual std::size_t dim() const = 0;
    /// True when encode_image needs decoded pixels rather than an id.
    virtual bool wants_pixels() const = 0;
    /// Whether encode_* may be called concurrently from several threads.
    virtual bool concurrent_calls_allowed() const = 0;

    /// Model-specific preprocessing applied to each (cropped) image before
    /// encoding; identity by default.
    virtual ImageBuffer preprocess(const ImageBuffer& img) const { return img; }
    virtual Embedding encode_image(const ImageQuery& query) const = 0;
    virtual Embedding encode_text(const TextQuery& query) const = 0;
};

/// Looks every query up by id.
class PrecomputedBackend final : public EncoderBackend {
public:
    explicit PrecomputedBackend(std::shared_ptr<const PrecomputedStore> store);

    std::size_t dim() const override { return store_->dim(); }
    bool wants_pixels() const override { return false; }
    bool concurrent_calls_allowed() const override { return true; }
    Embedding encode_image(const ImageQuery& query) const override { return store_->lookup(query.id); }
    Embedding encode_text(const TextQuery& query) const override { return store_->lookup(query.id); }

    const PrecomputedStore& store() const noexcept { return *store_; }

private:
    std::shared_ptr<const PrecomputedStore> store_;
};

/// f(x) = A x for a dense d_out x d_in matrix (row-major).
class LinearEncoder {
public:
    LinearEncoder(std::size_t d_out, std::size_t d_in, std::vector<double> row_major);
    static LinearEncoder identity(std::size_t d);

    std::size_t d_out() const noexcept { return d_out_; }
    std::size_t d_in() const noexcept { return d_in_; }
    std::span<const double> matrix() const noexcept { return a_; }
    double at(std::size_t r, std::size_t c) const { return a_[r * d_in_ + c]; }

    /// DimensionError when x.size() != d_in.
    std::vector<double> apply(std::span<const double> x) const;

private:
    std::size_t d_out_;
    std::size_t d_in_;
    std::vector<double> a_;
};

Embedding linear_encode(const LinearEncoder& enc, const Embedding& x);

/// Deterministic stand-in for a real vision-language model: images are
/// resized to side x side and projected by a seeded random matrix; texts are
/// bags of hashed lowercase tokens. Useful for wiring, timing and end-to-end
/// tests of the pixel path; it carries no semantics.
class ProjectionEncoder final : public EncoderBackend {
public:
    ProjectionEncoder(std::size_t dim, std::uint64_t seed, std::size_t side = 16);

    std::size_t dim() const override { return dim_; }
    bool wants_pixels() const override { return true; }
    bool concurrent_calls_allowed() const override { return true; }
    ImageBuffer preprocess(const ImageBuffer& img) const override;
    Embedding encode_image(const ImageQuery& query) const override;
    Embedding encode_text(const TextQuery& query) const override;

private:
    std::size_t dim_;
    std::uint64_t seed_;
    std::size_t side_;
    LinearEncoder projection_;
};

}  // namespace wca
