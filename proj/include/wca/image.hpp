// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace wca {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit RGB raster, row-major, 3 interleaved channels.
class ImageBuffer {
public:
    ImageBuffer(std::size_t width, std::size_t height);
    ImageBuffer(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::span<std::uint8_t> pixels() noexcept { return pixels_; }

    Rgb at(std::size_t row, std::size_t col) const {
        const std::size_t o = (row * width_ + col) * 3;
        return {pixels_[o], pixels_[o + 1], pixels_[o + 2]};
    }
    void set(std::size_t row, std::size_t col, Rgb c) {
        const std::size_t o = (row * width_ + col) * 3;
        pixels_[o] = c[0];
        pixels_[o + 1] = c[1];
        pixels_[o + 2] = c[2];
    }

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<std::uint8_t> pixels_;
};

/// Decodes PNG or JPEG (detected from the file signature) into RGB.
/// Alpha is composited over white.
ImageBuffer load_image(const std::filesystem::path& path);
void write_png(const ImageBuffer& img, const std::filesystem::path& path);

/// Bilinear resample to out_w x out_h (pixel-center aligned).
ImageBuffer resize_bilinear(const ImageBuffer& img, std::size_t out_w, std::size_t out_h);

}  // namespace wca
