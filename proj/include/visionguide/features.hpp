#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "visionguide/error.hpp"
#include "visionguide/image.hpp"

namespace visionguide {

using FeatureVector = std::vector<double>;

/// Orientation histogram over a grid x grid cell partition.
///
/// Gradients are central differences with clamped neighbours. Unsigned
/// orientation in [0, pi) is hard-binned into n_bins, weighted by gradient
/// magnitude; each cell histogram is L2-normalised (empty cells stay zero).
/// Output length is grid * grid * n_bins, cells in row-major order.
inline FeatureVector extract_features(const GrayView& window, int n_bins, int grid) {
    if (n_bins < 2) throw InvalidArgument("n_bins must be >= 2");
    if (grid < 1) throw InvalidArgument("grid must be >= 1");
    const int h = window.height();
    const int w = window.width();
    if (h < grid || w < grid) {
        throw WindowTooSmall("window " + std::to_string(h) + "x" + std::to_string(w) +
                             " is smaller than the " + std::to_string(grid) + "x" +
                             std::to_string(grid) + " cell grid");
    }

    FeatureVector f(static_cast<std::size_t>(grid) * grid * n_bins, 0.0);
    const double bin_width = std::numbers::pi / n_bins;

    for (int y = 0; y < h; ++y) {
        const int cy = static_cast<int>(static_cast<long long>(y) * grid / h);
        const int up = std::max(y - 1, 0);
        const int down = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            const double gx = window(y, std::min(x + 1, w - 1)) - window(y, std::max(x - 1, 0));
            const double gy = window(down, x) - window(up, x);
            if (gx == 0.0 && gy == 0.0) continue;
            double theta = std::atan2(gy, gx);
            if (theta < 0.0) theta += std::numbers::pi;
            int bin = static_cast<int>(theta / bin_width);
            if (bin >= n_bins) bin = 0;  // theta == pi folds onto 0
            const int cx = static_cast<int>(static_cast<long long>(x) * grid / w);
            f[(static_cast<std::size_t>(cy) * grid + cx) * n_bins + bin] += std::hypot(gx, gy);
        }
    }

    for (std::size_t c = 0; c < f.size(); c += n_bins) {
        double norm = 0.0;
        for (int b = 0; b < n_bins; ++b) norm += f[c + b] * f[c + b];
        if (norm == 0.0) continue;
        norm = std::sqrt(norm);
        for (int b = 0; b < n_bins; ++b) f[c + b] /= norm;
    }
    return f;
}

inline FeatureVector extract_features(const Grid<double>& window, int n_bins, int grid) {
    return extract_features(GrayView(window), n_bins, grid);
}

}  // namespace visionguide
