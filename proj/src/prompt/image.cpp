// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "wca/image.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "wca/error.hpp"

namespace wca {

ImageBuffer::ImageBuffer(std::size_t width, std::size_t height)
    : ImageBuffer(width, height, std::vector<std::uint8_t>(width * height * 3, 0)) {}

ImageBuffer::ImageBuffer(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width == 0 || height == 0) throw DomainError("image dimensions must be >= 1");
    if (pixels_.size() != width * height * 3)
        throw DimensionError("pixel buffer has " + std::to_string(pixels_.size()) + " bytes, expected " +
                             std::to_string(width * height * 3));
}

namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open image '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

ImageBuffer decode_png(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw IoError("PNG decode failed for '" + path.string() + "': " + image.message);
    image.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
        png_image_free(&image);
        throw IoError("PNG decode failed for '" + path.string() + "': " + image.message);
    }
    const std::size_t w = image.width, h = image.height;
    std::vector<std::uint8_t> rgb(w * h * 3);
    for (std::size_t p = 0; p < w * h; ++p) {
        const unsigned a = rgba[p * 4 + 3];
        for (int c = 0; c < 3; ++c) {
            const unsigned v = rgba[p * 4 + c];
            rgb[p * 3 + c] = static_cast<std::uint8_t>((v * a + 255u * (255u - a) + 127u) / 255u);
        }
    }
    return ImageBuffer(w, h, std::move(rgb));
}

struct JpegError {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_bail(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegError*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

ImageBuffer decode_jpeg(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
    jpeg_decompress_struct cinfo{};
    JpegError err{};
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_bail;
    // Allocated before setjmp so no destructor is skipped by longjmp.
    std::vector<std::uint8_t> rgb;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw IoError("JPEG decode failed for '" + path.string() + "': " + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    const std::size_t w = cinfo.output_width, h = cinfo.output_height;
    rgb.resize(w * h * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return ImageBuffer(w, h, std::move(rgb));
}

}  // namespace

ImageBuffer load_image(const std::filesystem::path& path) {
    const auto bytes = read_all(path);
    static constexpr std::uint8_t kPngSig[] = {0x89, 'P', 'N', 'G'};
    if (bytes.size() >= 4 && std::equal(std::begin(kPngSig), std::end(kPngSig), bytes.begin()))
        return decode_png(bytes, path);
    if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8) return decode_jpeg(bytes, path);
    throw IoError("unsupported image format for '" + path.string() + "' (expected PNG or JPEG)");
}

void write_png(const ImageBuffer& img, const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.c_str(), 0, img.pixels().data(), 0, nullptr))
        throw IoError("cannot write PNG '" + path.string() + "': " + image.message);
}

ImageBuffer resize_bilinear(const ImageBuffer& img, std::size_t out_w, std::size_t out_h) {
    ImageBuffer out(out_w, out_h);
    const double sx = static_cast<double>(img.width()) / static_cast<double>(out_w);
    const double sy = static_cast<double>(img.height()) / static_cast<double>(out_h);
    const auto max_x = static_cast<double>(img.width() - 1);
    const auto max_y = static_cast<double>(img.height() - 1);
    for (std::size_t r = 0; r < out_h; ++r) {
        const double fy = std::clamp((static_cast<double>(r) + 0.5) * sy - 0.5, 0.0, max_y);
        const auto y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
        const double ty = fy - static_cast<double>(y0);
        for (std::size_t c = 0; c < out_w; ++c) {
            const double fx = std::clamp((static_cast<double>(c) + 0.5) * sx - 0.5, 0.0, max_x);
            const auto x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
            const double tx = fx - static_cast<double>(x0);
            Rgb px{};
            for (int k = 0; k < 3; ++k) {
                const double top = img.at(y0, x0)[k] * (1 - tx) + img.at(y0, x1)[k] * tx;
                const double bot = img.at(y1, x0)[k] * (1 - tx) + img.at(y1, x1)[k] * tx;
                px[k] = static_cast<std::uint8_t>(std::lround(top * (1 - ty) + bot * ty));
            }
            out.set(r, c, px);
        }
    }
    return out;
}

}  // namespace wca
