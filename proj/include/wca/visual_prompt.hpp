// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

// Localized visual prompting: random square crops whose side is a uniform
// fraction of the short image edge, plus alternative prompt styles that
// mark a region while keeping the full frame.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wca/image.hpp"
#include "wca/rng.hpp"

namespace wca {

enum class PromptStyle { Crop, RedCircle, Blur, Greyscale };

PromptStyle parse_prompt_style(std::string_view name);  // ConfigError on unknown
std::string_view to_string(PromptStyle style);

struct PromptConfig {
    double alpha = 0.5;
    double beta = 0.9;
    std::size_t num_crops = 60;
    std::uint64_t seed = 0;
    PromptStyle style = PromptStyle::Crop;

    /// ConfigError unless 0 < alpha <= beta <= 1 and num_crops >= 1.
    void validate() const;
};

struct CropSpec {
    double gamma = 1.0;
    std::size_t size = 0;  // side length n
    std::size_t left = 0;
    std::size_t top = 0;

    friend bool operator==(const CropSpec&, const CropSpec&) = default;
};

/// round-half-up(gamma * short_edge), clamped to [1, short_edge].
std::size_t crop_side(double gamma, std::size_t short_edge);

/// Draw order per crop: gamma = alpha + (beta - alpha) * uniform01(),
/// left = below(W - n + 1), top = below(H - n + 1).
std::vector<CropSpec> sample_crop_specs(const PromptConfig& cfg, std::size_t width, std::size_t height,
                                        Rng& rng);

/// Per-image stream: Rng::stream(cfg.seed, image_id).
std::vector<CropSpec> sample_crop_specs(const PromptConfig& cfg, std::size_t width, std::size_t height,
                                        std::string_view image_id);

ImageBuffer apply_crop(const ImageBuffer& img, const CropSpec& spec);

/// Red circle outline around the region, or blur/greyscale outside it.
/// Output keeps the input dimensions. PromptStyle::Crop is rejected.
ImageBuffer apply_alt_prompt(const ImageBuffer& img, PromptStyle style, const CropSpec& region);

/// Patch image for one spec under the configured style.
ImageBuffer apply_prompt(const ImageBuffer& img, PromptStyle style, const CropSpec& spec);

}  // namespace wca
