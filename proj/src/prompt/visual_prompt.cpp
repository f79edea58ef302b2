// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "wca/visual_prompt.hpp"

#include <algorithm>
#include <cmath>

#include "wca/error.hpp"

namespace wca {

PromptStyle parse_prompt_style(std::string_view name) {
    if (name == "crop") return PromptStyle::Crop;
    if (name == "red-circle") return PromptStyle::RedCircle;
    if (name == "blur") return PromptStyle::Blur;
    if (name == "greyscale") return PromptStyle::Greyscale;
    throw ConfigError("unknown prompt style '" + std::string(name) +
                      "' (expected crop, red-circle, blur or greyscale)");
}

std::string_view to_string(PromptStyle style) {
    switch (style) {
        case PromptStyle::Crop: return "crop";
        case PromptStyle::RedCircle: return "red-circle";
        case PromptStyle::Blur: return "blur";
        case PromptStyle::Greyscale: return "greyscale";
    }
    return "crop";
}

void PromptConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= beta && beta <= 1.0))
        throw ConfigError("crop bounds must satisfy 0 < alpha <= beta <= 1 (got alpha=" +
                          std::to_string(alpha) + ", beta=" + std::to_string(beta) + ")");
    if (num_crops == 0) throw ConfigError("number of crops must be >= 1");
}

std::size_t crop_side(double gamma, std::size_t short_edge) {
    const double raw = std::floor(gamma * static_cast<double>(short_edge) + 0.5);
    if (raw < 1.0) return 1;
    return std::min(static_cast<std::size_t>(raw), short_edge);
}

std::vector<CropSpec> sample_crop_specs(const PromptConfig& cfg, std::size_t width, std::size_t height,
                                        Rng& rng) {
    if (width == 0 || height == 0) throw DomainError("cannot sample crops for an empty image");
    cfg.validate();
    const std::size_t short_edge = std::min(width, height);
    std::vector<CropSpec> specs;
    specs.reserve(cfg.num_crops);
    for (std::size_t i = 0; i < cfg.num_crops; ++i) {
        CropSpec s;
        s.gamma = cfg.alpha + (cfg.beta - cfg.alpha) * rng.uniform01();
        s.size = crop_side(s.gamma, short_edge);
        s.left = static_cast<std::size_t>(rng.below(width - s.size + 1));
        s.top = static_cast<std::size_t>(rng.below(height - s.size + 1));
        specs.push_back(s);
    }
    return specs;
}

std::vector<CropSpec> sample_crop_specs(const PromptConfig& cfg, std::size_t width, std::size_t height,
                                        std::string_view image_id) {
    Rng rng = Rng::stream(cfg.seed, image_id);
    return sample_crop_specs(cfg, width, height, rng);
}

namespace {

void check_region(const ImageBuffer& img, const CropSpec& spec) {
    if (spec.size == 0 || spec.left + spec.size > img.width() || spec.top + spec.size > img.height())
        throw BoundsError("crop " + std::to_string(spec.size) + "x" + std::to_string(spec.size) + " at (" +
                          std::to_string(spec.left) + "," + std::to_string(spec.top) + ") exceeds " +
                          std::to_string(img.width()) + "x" + std::to_string(img.height()) + " image");
}

bool inside(const CropSpec& r, std::size_t row, std::size_t col) {
    return row >= r.top && row < r.top + r.size && col >= r.left && col < r.left + r.size;
}

std::vector<double> gaussian_kernel(double sigma) {
    const auto radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double total = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double x = static_cast<double>(i) - static_cast<double>(radius);
        k[i] = std::exp(-x * x / (2 * sigma * sigma));
        total += k[i];
    }
    for (double& v : k) v /= total;
    return k;
}

// Separable blur with clamp-to-edge borders, f64 intermediate.
ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma) {
    const auto kernel = gaussian_kernel(sigma);
    const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    const auto w = static_cast<std::ptrdiff_t>(img.width());
    const auto h = static_cast<std::ptrdiff_t>(img.height());
    std::vector<double> tmp(img.pixels().size());
    for (std::ptrdiff_t r = 0; r < h; ++r)
        for (std::ptrdiff_t c = 0; c < w; ++c)
            for (int ch = 0; ch < 3; ++ch) {
                double acc = 0.0;
                for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                    const auto cc = std::clamp(c + k, std::ptrdiff_t{0}, w - 1);
                    acc += kernel[k + radius] * img.at(r, cc)[ch];
                }
                tmp[(r * w + c) * 3 + ch] = acc;
            }
    ImageBuffer out(img.width(), img.height());
    for (std::ptrdiff_t r = 0; r < h; ++r)
        for (std::ptrdiff_t c = 0; c < w; ++c) {
            Rgb px{};
            for (int ch = 0; ch < 3; ++ch) {
                double acc = 0.0;
                for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                    const auto rr = std::clamp(r + k, std::ptrdiff_t{0}, h - 1);
                    acc += kernel[k + radius] * tmp[(rr * w + c) * 3 + ch];
                }
                px[ch] = static_cast<std::uint8_t>(std::clamp(std::floor(acc + 0.5), 0.0, 255.0));
            }
            out.set(r, c, px);
        }
    return out;
}

}  // namespace

ImageBuffer apply_crop(const ImageBuffer& img, const CropSpec& spec) {
    check_region(img, spec);
    ImageBuffer out(spec.size, spec.size);
    for (std::size_t r = 0; r < spec.size; ++r) {
        const auto src = img.pixels().subspan(((spec.top + r) * img.width() + spec.left) * 3, spec.size * 3);
        std::copy(src.begin(), src.end(), out.pixels().begin() + static_cast<std::ptrdiff_t>(r * spec.size * 3));
    }
    return out;
}

ImageBuffer apply_alt_prompt(const ImageBuffer& img, PromptStyle style, const CropSpec& region) {
    check_region(img, region);
    const std::size_t short_edge = std::min(img.width(), img.height());
    switch (style) {
        case PromptStyle::RedCircle: {
            ImageBuffer out = img;
            const double cx = static_cast<double>(region.left) + static_cast<double>(region.size) / 2.0;
            const double cy = static_cast<double>(region.top) + static_cast<double>(region.size) / 2.0;
            const double radius = static_cast<double>(region.size) / 2.0;
            const double stroke = std::max(2.0, std::floor(0.01 * static_cast<double>(short_edge) + 0.5));
            for (std::size_t r = 0; r < img.height(); ++r)
                for (std::size_t c = 0; c < img.width(); ++c) {
                    const double d = std::hypot(static_cast<double>(c) - cx, static_cast<double>(r) - cy);
                    if (std::abs(d - radius) <= stroke / 2.0) out.set(r, c, {255, 0, 0});
                }
            return out;
        }
        case PromptStyle::Blur: {
            ImageBuffer out = gaussian_blur(img, 0.05 * static_cast<double>(short_edge));
            for (std::size_t r = region.top; r < region.top + region.size; ++r)
                for (std::size_t c = region.left; c < region.left + region.size; ++c) out.set(r, c, img.at(r, c));
            return out;
        }
        case PromptStyle::Greyscale: {
            ImageBuffer out = img;
            for (std::size_t r = 0; r < img.height(); ++r)
                for (std::size_t c = 0; c < img.width(); ++c) {
                    if (inside(region, r, c)) continue;
                    const Rgb p = img.at(r, c);
                    const auto luma =
                        static_cast<std::uint8_t>((299u * p[0] + 587u * p[1] + 114u * p[2] + 500u) / 1000u);
                    out.set(r, c, {luma, luma, luma});
                }
            return out;
        }
        case PromptStyle::Crop: break;
    }
    throw ConfigError("apply_alt_prompt: style '" + std::string(to_string(style)) +
                      "' is not an alternative prompt");
}

ImageBuffer apply_prompt(const ImageBuffer& img, PromptStyle style, const CropSpec& spec) {
    return style == PromptStyle::Crop ? apply_crop(img, spec) : apply_alt_prompt(img, style, spec);
}

}  // namespace wca
