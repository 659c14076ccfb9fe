#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "visionguide/error.hpp"
#include "visionguide/image.hpp"

namespace visionguide {

/// Decodes a PNG or JPEG file into 8-bit RGB.
inline RgbImage read_rgb(const std::string& path) {
    cv::Mat bgr;
    try {
        bgr = cv::imread(path, cv::IMREAD_COLOR);
    } catch (const cv::Exception& e) {
        throw ImageIoError("cannot decode " + path + ": " + e.what());
    }
    if (bgr.empty()) throw ImageIoError("cannot read image " + path);
    RgbImage out(bgr.cols, bgr.rows);
    for (int r = 0; r < bgr.rows; ++r) {
        const auto* src = bgr.ptr<cv::Vec3b>(r);
        auto dst = out.row(r);
        for (int c = 0; c < bgr.cols; ++c) dst[c] = {src[c][2], src[c][1], src[c][0]};
    }
    return out;
}

namespace detail {

inline void write_mat(const std::string& path, const cv::Mat& mat) {
    bool ok = false;
    try {
        ok = cv::imwrite(path, mat);
    } catch (const cv::Exception& e) {
        throw ImageIoError("cannot encode " + path + ": " + e.what());
    }
    if (!ok) throw ImageIoError("cannot write image " + path);
}

}  // namespace detail

/// Encoding follows the file extension (.png, .jpg, ...).
inline void write_rgb(const std::string& path, const RgbImage& img) {
    cv::Mat bgr(img.height(), img.width(), CV_8UC3);
    for (int r = 0; r < img.height(); ++r) {
        const auto src = img.row(r);
        auto* dst = bgr.ptr<cv::Vec3b>(r);
        for (int c = 0; c < img.width(); ++c) dst[c] = {src[c].b, src[c].g, src[c].r};
    }
    detail::write_mat(path, bgr);
}

/// Writes a real raster as 8-bit grayscale, rounding half-up and saturating.
inline void write_gray(const std::string& path, const Grid<double>& img) {
    cv::Mat gray(img.height(), img.width(), CV_8UC1);
    for (int r = 0; r < img.height(); ++r) {
        const auto src = img.row(r);
        auto* dst = gray.ptr<std::uint8_t>(r);
        for (int c = 0; c < img.width(); ++c) dst[c] = quantize_u8(src[c]);
    }
    detail::write_mat(path, gray);
}

// ---------------------------------------------------------------------------
// Raw float raster (.vgf):
//   bytes 0-3   magic "VGHM"
//   bytes 4-7   width,  uint32 little-endian
//   bytes 8-11  height, uint32 little-endian
//   then width*height IEEE-754 binary32 values, little-endian, row-major
// ---------------------------------------------------------------------------

inline constexpr std::array<char, 4> kRawMagic{'V', 'G', 'H', 'M'};

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

inline std::uint32_t get_u32(const unsigned char* b) {
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace detail

inline void write_raw(const std::string& path, const Grid<double>& h) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageIoError("cannot write " + path);
    out.write(kRawMagic.data(), 4);
    detail::put_u32(out, static_cast<std::uint32_t>(h.width()));
    detail::put_u32(out, static_cast<std::uint32_t>(h.height()));
    for (double v : h.pixels()) {
        detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    if (!out) throw ImageIoError("failed writing " + path);
}

inline Heatmap read_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageIoError("cannot open " + path);
    unsigned char header[12];
    if (!in.read(reinterpret_cast<char*>(header), 12) ||
        std::memcmp(header, kRawMagic.data(), 4) != 0) {
        throw ImageIoError(path + ": not a raw heatmap file");
    }
    const std::uint32_t w = detail::get_u32(header + 4);
    const std::uint32_t h = detail::get_u32(header + 8);
    if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16)) {
        throw ImageIoError(path + ": implausible dimensions");
    }
    std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h * 4);
    if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
        throw ImageIoError(path + ": truncated data");
    }
    Heatmap out(static_cast<int>(w), static_cast<int>(h));
    auto dst = out.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = std::bit_cast<float>(detail::get_u32(bytes.data() + 4 * i));
    }
    return out;
}

}  // namespace visionguide
