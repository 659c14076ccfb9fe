#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "visionguide/error.hpp"
#include "visionguide/image.hpp"
#include "visionguide/parallel.hpp"

namespace visionguide {

/// ITU-R BT.601 luma.
inline GrayImage to_grayscale(const RgbImage& img) {
    GrayImage out(img.width(), img.height());
    const auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = 0.299 * src[i].r + 0.587 * src[i].g + 0.114 * src[i].b;
    }
    return out;
}

struct BilateralParams {
    double spatial_sigma = 3.0;
    double range_sigma = 50.0;
    int neighborhood_radius = 5;

    void validate() const {
        if (!(spatial_sigma > 0.0) || !(range_sigma > 0.0) || neighborhood_radius < 1) {
            throw InvalidArgument("bilateral parameters must be strictly positive");
        }
    }
};

namespace detail {

// Copies `img` into a raster grown by `pad` on every side, replicating edge
// pixels. Reading the padded raster at offset (r + pad, c + pad) is the same
// as reading `img` with clamped coordinates.
inline std::vector<double> pad_replicate(const Grid<double>& img, int pad, int& padded_width) {
    const int w = img.width();
    const int h = img.height();
    padded_width = w + 2 * pad;
    std::vector<double> out(static_cast<std::size_t>(padded_width) * (h + 2 * pad));
    for (int r = 0; r < h + 2 * pad; ++r) {
        const auto src = img.row(std::clamp(r - pad, 0, h - 1));
        double* dst = out.data() + static_cast<std::size_t>(r) * padded_width;
        for (int c = 0; c < padded_width; ++c) dst[c] = src[std::clamp(c - pad, 0, w - 1)];
    }
    return out;
}

}  // namespace detail

/// Edge-preserving smoothing over a (2r+1)^2 neighbourhood with clamped borders.
/// Each output pixel is independent, so the result does not depend on `workers`.
inline GrayImage bilateral_filter(const GrayImage& img, const BilateralParams& p, int workers = 1) {
    p.validate();
    const int r = p.neighborhood_radius;
    const int side = 2 * r + 1;
    const double spatial_k = 1.0 / (2.0 * p.spatial_sigma * p.spatial_sigma);
    const double range_k = 1.0 / (2.0 * p.range_sigma * p.range_sigma);

    // exponent contributions of the spatial term, row-major over (dy, dx)
    std::vector<double> spatial(static_cast<std::size_t>(side) * side);
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            spatial[(dy + r) * side + (dx + r)] = (dy * dy + dx * dx) * spatial_k;

    int pw = 0;
    const std::vector<double> padded = detail::pad_replicate(img, r, pw);
    GrayImage out(img.width(), img.height());
    const int w = img.width();

    parallel_chunks(static_cast<std::size_t>(img.height()), workers, [&](std::size_t r0, std::size_t r1) {
        for (int y = static_cast<int>(r0); y < static_cast<int>(r1); ++y) {
            auto dst = out.row(y);
            for (int x = 0; x < w; ++x) {
                const double center = padded[static_cast<std::size_t>(y + r) * pw + (x + r)];
                double num = 0.0;
                double den = 0.0;
                for (int dy = 0; dy < side; ++dy) {
                    const double* src = padded.data() + static_cast<std::size_t>(y + dy) * pw + x;
                    const double* sp = spatial.data() + static_cast<std::size_t>(dy) * side;
                    for (int dx = 0; dx < side; ++dx) {
                        const double diff = src[dx] - center;
                        const double wgt = std::exp(-(sp[dx] + diff * diff * range_k));
                        num += wgt * src[dx];
                        den += wgt;
                    }
                }
                dst[x] = num / den;
            }
        }
    });
    return out;
}

/// Sampled, normalised 2-D Gaussian. size = 2 * ceil(2 * sigma) + 1.
struct GaussianKernel {
    double sigma = 0.0;
    int size = 0;
    std::vector<double> weights;  // size x size, row-major

    int radius() const { return size / 2; }
    double operator()(int i, int j) const { return weights[static_cast<std::size_t>(i) * size + j]; }
};

inline int gaussian_kernel_size(double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("gaussian sigma must be > 0");
    return 2 * static_cast<int>(std::ceil(2.0 * sigma)) + 1;
}

/// Normalised 1-D profile of length gaussian_kernel_size(sigma).
inline std::vector<double> gaussian_profile(double sigma) {
    const int size = gaussian_kernel_size(sigma);
    const int radius = size / 2;
    std::vector<double> w(size);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        w[k + radius] = std::exp(-(k * k) / (2.0 * sigma * sigma));
        sum += w[k + radius];
    }
    for (double& v : w) v /= sum;
    return w;
}

inline GaussianKernel make_gaussian_kernel(double sigma) {
    GaussianKernel k;
    k.sigma = sigma;
    k.size = gaussian_kernel_size(sigma);
    const int radius = k.size / 2;
    k.weights.resize(static_cast<std::size_t>(k.size) * k.size);
    double sum = 0.0;
    for (int y = -radius; y <= radius; ++y) {
        for (int x = -radius; x <= radius; ++x) {
            const double v = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
            k.weights[static_cast<std::size_t>(y + radius) * k.size + (x + radius)] = v;
            sum += v;
        }
    }
    for (double& v : k.weights) v /= sum;
    return k;
}

/// Gaussian smoothing; near the border the kernel is renormalised over its
/// in-bounds taps. The 2-D kernel factors into two 1-D passes, and so does
/// the in-bounds weight sum, so the separable form is used.
template <RealRaster Image>
Image gaussian_filter(const Image& img, double sigma, int workers = 1) {
    const std::vector<double> w = gaussian_profile(sigma);
    const int radius = static_cast<int>(w.size()) / 2;
    const int width = img.width();
    const int height = img.height();

    Image tmp(width, height);
    parallel_chunks(static_cast<std::size_t>(height), workers, [&](std::size_t r0, std::size_t r1) {
        for (int y = static_cast<int>(r0); y < static_cast<int>(r1); ++y) {
            const auto src = img.row(y);
            auto dst = tmp.row(y);
            for (int x = 0; x < width; ++x) {
                const int lo = std::max(-radius, -x);
                const int hi = std::min(radius, width - 1 - x);
                double num = 0.0;
                double den = 0.0;
                for (int k = lo; k <= hi; ++k) {
                    num += w[k + radius] * src[x + k];
                    den += w[k + radius];
                }
                dst[x] = num / den;
            }
        }
    });

    Image out(width, height);
    parallel_chunks(static_cast<std::size_t>(height), workers, [&](std::size_t r0, std::size_t r1) {
        std::vector<double> num(width);
        for (int y = static_cast<int>(r0); y < static_cast<int>(r1); ++y) {
            const int lo = std::max(-radius, -y);
            const int hi = std::min(radius, height - 1 - y);
            std::fill(num.begin(), num.end(), 0.0);
            double den = 0.0;
            for (int k = lo; k <= hi; ++k) {
                const double wk = w[k + radius];
                const auto src = tmp.row(y + k);
                for (int x = 0; x < width; ++x) num[x] += wk * src[x];
                den += wk;
            }
            auto dst = out.row(y);
            for (int x = 0; x < width; ++x) dst[x] = num[x] / den;
        }
    });
    return out;
}

/// Moves `rect` up/left so that it lies inside a height x width image.
inline Rect clamp_window(Rect rect, int image_height, int image_width) {
    if (rect.top < 0 || rect.left < 0) throw InvalidArgument("window origin must be non-negative");
    if (rect.height < 1 || rect.width < 1) throw InvalidArgument("window must be at least 1x1");
    if (rect.height > image_height || rect.width > image_width) {
        throw WindowLargerThanImage("window " + std::to_string(rect.height) + "x" +
                                    std::to_string(rect.width) + " exceeds image " +
                                    std::to_string(image_height) + "x" + std::to_string(image_width));
    }
    rect.top = std::min(rect.top, image_height - rect.height);
    rect.left = std::min(rect.left, image_width - rect.width);
    return rect;
}

inline GrayImage crop(const GrayImage& img, int top, int left, int height, int width) {
    const Rect r = clamp_window(Rect{top, left, height, width}, img.height(), img.width());
    GrayImage out(r.width, r.height);
    for (int y = 0; y < r.height; ++y) {
        const auto src = img.row(r.top + y);
        std::copy_n(src.begin() + r.left, r.width, out.row(y).begin());
    }
    return out;
}

/// Bilinear resampling with pixel-centre alignment and clamped edges.
inline GrayImage resize_bilinear(const GrayView& src, int out_width, int out_height) {
    GrayImage out(out_width, out_height);
    const double sy = static_cast<double>(src.height()) / out_height;
    const double sx = static_cast<double>(src.width()) / out_width;

    std::vector<int> x0(out_width), x1(out_width);
    std::vector<double> fx(out_width);
    for (int x = 0; x < out_width; ++x) {
        const double p = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width() - 1.0);
        x0[x] = static_cast<int>(p);
        x1[x] = std::min(x0[x] + 1, src.width() - 1);
        fx[x] = p - x0[x];
    }
    for (int y = 0; y < out_height; ++y) {
        const double p = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height() - 1.0);
        const int y0 = static_cast<int>(p);
        const int y1 = std::min(y0 + 1, src.height() - 1);
        const double fy = p - y0;
        auto dst = out.row(y);
        for (int x = 0; x < out_width; ++x) {
            const double top = src(y0, x0[x]) * (1.0 - fx[x]) + src(y0, x1[x]) * fx[x];
            const double bot = src(y1, x0[x]) * (1.0 - fx[x]) + src(y1, x1[x]) * fx[x];
            dst[x] = top * (1.0 - fy) + bot * fy;
        }
    }
    return out;
}

}  // namespace visionguide
