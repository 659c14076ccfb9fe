#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "visionguide/classification.hpp"
#include "visionguide/classifier.hpp"
#include "visionguide/error.hpp"
#include "visionguide/image.hpp"
#include "visionguide/imaging.hpp"
#include "visionguide/parallel.hpp"

namespace visionguide {

/// Sliding-window geometry plus the smoothing/suppression parameters used
/// downstream. Defaults are the reference configuration (800x800 window,
/// step 40, sigma 10, h 10).
struct SweepConfig {
    int win_h = 800;
    int win_w = 800;
    int istep = 40;  // row step
    int jstep = 40;  // column step
    double gaussian_sigma = 10.0;
    double hmt_threshold = 10.0;  // on the normalised [0, 255] scale
    BilateralParams bilateral;

    void validate() const {
        if (win_h < 1 || win_w < 1 || istep < 1 || jstep < 1 || !(gaussian_sigma > 0.0) ||
            !(hmt_threshold > 0.0)) {
            throw InvalidArgument("sweep parameters must all be > 0");
        }
        bilateral.validate();
    }
};

/// Window origins along one axis: 0, step, 2*step, ... while the window fits,
/// then one clamped origin at extent - window if the last step fell short.
inline std::vector<int> axis_positions(int extent, int window, int step) {
    if (window > extent) {
        throw WindowLargerThanImage("window of " + std::to_string(window) +
                                    " px exceeds image extent " + std::to_string(extent));
    }
    std::vector<int> out;
    for (int p = 0; p <= extent - window; p += step) out.push_back(p);
    if (out.back() != extent - window) out.push_back(extent - window);
    return out;
}

/// Number of unclamped origins along one axis.
inline int interior_axis_count(int extent, int window, int step) {
    return (extent - window) / step + 1;
}

enum class SweepOrder { RowMajor, ColumnMajor };

inline std::vector<Rect> window_positions(int image_h, int image_w, const SweepConfig& cfg,
                                          SweepOrder order = SweepOrder::RowMajor) {
    cfg.validate();
    const auto rows = axis_positions(image_h, cfg.win_h, cfg.istep);
    const auto cols = axis_positions(image_w, cfg.win_w, cfg.jstep);
    std::vector<Rect> out;
    out.reserve(rows.size() * cols.size());
    if (order == SweepOrder::RowMajor) {
        for (int r : rows)
            for (int c : cols) out.push_back({r, c, cfg.win_h, cfg.win_w});
    } else {
        for (int c : cols)
            for (int r : rows) out.push_back({r, c, cfg.win_h, cfg.win_w});
    }
    return out;
}

/// Adds each positive window's score over the cells it covers, in list order.
/// Rows are independent, so the result is identical for any worker count.
inline Heatmap accumulate_windows(int height, int width, const std::vector<Rect>& windows,
                                  const std::vector<Classification>& results, int workers = 1) {
    if (windows.size() != results.size()) {
        throw DimensionMismatch("window and classification lists differ in length");
    }
    std::vector<std::size_t> positive;
    for (std::size_t k = 0; k < windows.size(); ++k) {
        if (results[k].klass == 1) positive.push_back(k);
    }
    Heatmap heat(width, height, 0.0);
    parallel_chunks(static_cast<std::size_t>(height), workers, [&](std::size_t r0, std::size_t r1) {
        for (int y = static_cast<int>(r0); y < static_cast<int>(r1); ++y) {
            auto row = heat.row(y);
            for (std::size_t k : positive) {
                const Rect& w = windows[k];
                if (y < w.top || y >= w.bottom()) continue;
                const double s = results[k].score;
                for (int x = w.left; x < w.right(); ++x) row[x] += s;
            }
        }
    });
    return heat;
}

/// Classifies every window of an already smoothed image and accumulates the
/// positive scores.
inline Heatmap sweep_windows(const GrayImage& smoothed, const SweepConfig& cfg,
                             const WindowClassifier& classifier, int workers = 1,
                             SweepOrder order = SweepOrder::RowMajor) {
    const std::vector<Rect> windows = window_positions(smoothed.height(), smoothed.width(), cfg, order);
    std::vector<Classification> results(windows.size());
    parallel_for(windows.size(), workers, [&](std::size_t k) {
        const Classification c = classifier.classify(GrayView(smoothed, windows[k]), windows[k]);
        if (!(c.score >= 0.0 && c.score <= 1.0) || (c.klass != 0 && c.klass != 1)) {
            throw InternalError("classifier returned an out-of-range result");
        }
        results[k] = c;
    });
    return accumulate_windows(smoothed.height(), smoothed.width(), windows, results, workers);
}

/// Coarse localisation: bilateral smoothing, then every window position is
/// classified and positive scores are accumulated over the window's cells.
inline Heatmap calc_heatmap(const GrayImage& img, const SweepConfig& cfg,
                            const WindowClassifier& classifier, int workers = 1,
                            SweepOrder order = SweepOrder::RowMajor) {
    cfg.validate();
    if (cfg.win_h > img.height() || cfg.win_w > img.width()) {
        throw WindowLargerThanImage("sliding window does not fit the image");
    }
    const GrayImage smoothed = bilateral_filter(img, cfg.bilateral, workers);
    return sweep_windows(smoothed, cfg, classifier, workers, order);
}

/// Affine map of [min, max] onto [0, 255]; a constant heatmap maps to zero.
inline Heatmap normalize(const Heatmap& h) {
    const auto [lo_it, hi_it] = std::minmax_element(h.pixels().begin(), h.pixels().end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    Heatmap out(h.width(), h.height(), 0.0);
    if (!(hi > lo)) return out;
    const double range = hi - lo;
    auto dst = out.pixels();
    const auto src = h.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] - lo) / range * 255.0;
    return out;
}

/// 256-entry "jet" colour table: for t = i / 255,
///   r = clamp(1.5 - |4t - 3|), g = clamp(1.5 - |4t - 2|), b = clamp(1.5 - |4t - 1|),
/// each scaled by 255 and rounded half-up.
inline const std::array<Rgb, 256>& jet_colormap() {
    static const std::array<Rgb, 256> table = [] {
        std::array<Rgb, 256> t{};
        auto ch = [](double v) { return quantize_u8(255.0 * std::clamp(v, 0.0, 1.0)); };
        for (int i = 0; i < 256; ++i) {
            const double x = i / 255.0;
            t[i] = {ch(1.5 - std::abs(4.0 * x - 3.0)), ch(1.5 - std::abs(4.0 * x - 2.0)),
                    ch(1.5 - std::abs(4.0 * x - 1.0))};
        }
        return t;
    }();
    return table;
}

inline RgbImage colorize(const Heatmap& h) {
    const Heatmap n = normalize(h);
    const auto& cmap = jet_colormap();
    RgbImage out(h.width(), h.height());
    auto dst = out.pixels();
    const auto src = n.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = cmap[quantize_u8(src[i])];
    return out;
}

/// Blends the colour-mapped, normalised heatmap over the image:
/// out = (1 - alpha) * img + alpha * colormap(h).
inline RgbImage fuse(const RgbImage& img, const Heatmap& h, double alpha) {
    if (img.width() != h.width() || img.height() != h.height()) {
        throw DimensionMismatch("heatmap and image dimensions differ");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
    const RgbImage colors = colorize(h);
    RgbImage out(img.width(), img.height());
    const auto a = img.pixels();
    const auto c = colors.pixels();
    auto dst = out.pixels();
    const double keep = 1.0 - alpha;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dst[i] = {quantize_u8(keep * a[i].r + alpha * c[i].r),
                  quantize_u8(keep * a[i].g + alpha * c[i].g),
                  quantize_u8(keep * a[i].b + alpha * c[i].b)};
    }
    return out;
}

}  // namespace visionguide
