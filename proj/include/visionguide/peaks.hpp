#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <deque>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "visionguide/error.hpp"
#include "visionguide/heatmap.hpp"
#include "visionguide/image.hpp"
#include "visionguide/imaging.hpp"

namespace visionguide {

struct Pixel {
    int row = 0;
    int col = 0;

    friend bool operator==(const Pixel&, const Pixel&) = default;
    friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

/// 8-connected plateau, pixels sorted row-major.
struct Region {
    int label = 0;
    std::vector<Pixel> pixels;
};

struct Centroid {
    double row = 0.0;
    double col = 0.0;

    friend bool operator==(const Centroid&, const Centroid&) = default;
};

struct PeakSet {
    std::vector<Centroid> centroids;
    std::vector<Region> regions;  // parallel to centroids

    std::size_t size() const { return centroids.size(); }
    bool empty() const { return centroids.empty(); }
};

namespace detail {

inline constexpr std::array<std::pair<int, int>, 8> kNeighbors8{
    {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};

}  // namespace detail

/// Grayscale reconstruction by dilation of `marker` under `mask` (8-connected),
/// using the hybrid raster-scan + FIFO algorithm. Requires marker <= mask.
template <RealRaster Image>
Image reconstruct_by_dilation(const Image& marker, const Image& mask) {
    if (!marker.same_shape(mask)) throw DimensionMismatch("marker and mask shapes differ");
    const int h = mask.height();
    const int w = mask.width();
    Image j = marker;
    auto inside = [&](int r, int c) { return r >= 0 && r < h && c >= 0 && c < w; };

    // forward scan over the causal half-neighbourhood
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double m = j(r, c);
            for (int k = 0; k < 4; ++k) {
                const auto [dr, dc] = detail::kNeighbors8[k];
                if (inside(r + dr, c + dc)) m = std::max(m, j(r + dr, c + dc));
            }
            j(r, c) = std::min(m, mask(r, c));
        }
    }

    // backward scan; seed the queue with pixels that can still propagate
    std::deque<Pixel> fifo;
    for (int r = h - 1; r >= 0; --r) {
        for (int c = w - 1; c >= 0; --c) {
            double m = j(r, c);
            for (int k = 4; k < 8; ++k) {
                const auto [dr, dc] = detail::kNeighbors8[k];
                if (inside(r + dr, c + dc)) m = std::max(m, j(r + dr, c + dc));
            }
            j(r, c) = std::min(m, mask(r, c));
            for (int k = 4; k < 8; ++k) {
                const auto [dr, dc] = detail::kNeighbors8[k];
                const int qr = r + dr;
                const int qc = c + dc;
                if (inside(qr, qc) && j(qr, qc) < j(r, c) && j(qr, qc) < mask(qr, qc)) {
                    fifo.push_back({r, c});
                    break;
                }
            }
        }
    }

    while (!fifo.empty()) {
        const Pixel p = fifo.front();
        fifo.pop_front();
        const double v = j(p.row, p.col);
        for (const auto& [dr, dc] : detail::kNeighbors8) {
            const int qr = p.row + dr;
            const int qc = p.col + dc;
            if (!inside(qr, qc)) continue;
            const double jq = j(qr, qc);
            const double iq = mask(qr, qc);
            if (jq < v && jq != iq) {
                j(qr, qc) = std::min(v, iq);
                fifo.push_back({qr, qc});
            }
        }
    }
    return j;
}

/// H-maxima transform: reconstruction by dilation of (h - threshold) under h.
/// Maxima rising less than `threshold` above their surroundings are flattened.
template <RealRaster Image>
Image h_maxima(const Image& h, double threshold) {
    if (!(threshold > 0.0)) throw InvalidArgument("H-maxima threshold must be > 0");
    Image marker = h;
    for (double& v : marker.pixels()) v -= threshold;
    return reconstruct_by_dilation(marker, h);
}

/// Maximal 8-connected constant plateaus with every outside neighbour strictly
/// lower. Labels follow row-major discovery order, starting at 1.
template <RealRaster Image>
std::vector<Region> regional_maxima(const Image& h) {
    const int rows = h.height();
    const int cols = h.width();
    std::vector<unsigned char> seen(h.size(), 0);
    auto idx = [cols](int r, int c) { return static_cast<std::size_t>(r) * cols + c; };

    std::vector<Region> out;
    std::vector<Pixel> stack;
    for (int r0 = 0; r0 < rows; ++r0) {
        for (int c0 = 0; c0 < cols; ++c0) {
            if (seen[idx(r0, c0)]) continue;
            const double v = h(r0, c0);
            Region region;
            bool is_max = true;
            stack.assign(1, {r0, c0});
            seen[idx(r0, c0)] = 1;
            while (!stack.empty()) {
                const Pixel p = stack.back();
                stack.pop_back();
                region.pixels.push_back(p);
                for (const auto& [dr, dc] : detail::kNeighbors8) {
                    const int qr = p.row + dr;
                    const int qc = p.col + dc;
                    if (qr < 0 || qr >= rows || qc < 0 || qc >= cols) continue;
                    const double q = h(qr, qc);
                    if (q > v) {
                        is_max = false;
                    } else if (q == v && !seen[idx(qr, qc)]) {
                        seen[idx(qr, qc)] = 1;
                        stack.push_back({qr, qc});
                    }
                }
            }
            if (!is_max) continue;
            std::sort(region.pixels.begin(), region.pixels.end());
            region.label = static_cast<int>(out.size()) + 1;
            out.push_back(std::move(region));
        }
    }
    return out;
}

inline std::vector<Centroid> centroids(const std::vector<Region>& regions) {
    std::vector<Centroid> out;
    out.reserve(regions.size());
    for (const auto& reg : regions) {
        if (reg.pixels.empty()) throw InvalidArgument("empty region");
        double sr = 0.0;
        double sc = 0.0;
        for (const auto& p : reg.pixels) {
            sr += p.row;
            sc += p.col;
        }
        const double n = static_cast<double>(reg.pixels.size());
        out.push_back({sr / n, sc / n});
    }
    return out;
}

/// Fine localisation on a normalised heatmap: Gaussian smoothing, H-maxima,
/// regional maxima, centroids. A plateau spanning the whole image is not a peak.
inline PeakSet find_peaks(const Heatmap& h, const SweepConfig& cfg, int workers = 1) {
    const Heatmap smooth = gaussian_filter(h, cfg.gaussian_sigma, workers);
    const Heatmap suppressed = h_maxima(smooth, cfg.hmt_threshold);
    std::vector<Region> regions = regional_maxima(suppressed);
    std::erase_if(regions, [&](const Region& r) { return r.pixels.size() == h.size(); });
    for (std::size_t i = 0; i < regions.size(); ++i) regions[i].label = static_cast<int>(i) + 1;
    PeakSet out;
    out.centroids = centroids(regions);
    out.regions = std::move(regions);
    return out;
}

/// [{"x": col, "y": row, "region_size": n}, ...]
inline nlohmann::json peaks_to_json(const PeakSet& peaks) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        arr.push_back({{"x", peaks.centroids[i].col},
                       {"y", peaks.centroids[i].row},
                       {"region_size", peaks.regions[i].pixels.size()}});
    }
    return arr;
}

/// Reads the x/y pairs back from a peaks file.
inline std::vector<Point2> parse_peaks_json(const std::string& text, const std::string& source) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedJson(source + ": " + e.what());
    }
    if (!doc.is_array()) throw MalformedJson(source + ": peaks file must be a JSON array");
    std::vector<Point2> out;
    for (const auto& p : doc) {
        if (!p.is_object() || !p.contains("x") || !p.contains("y") || !p["x"].is_number() ||
            !p["y"].is_number()) {
            throw MalformedJson(source + ": peak entries need numeric x and y");
        }
        out.push_back({p["x"].get<double>(), p["y"].get<double>()});
    }
    return out;
}

inline std::vector<Point2> peak_points(const PeakSet& peaks) {
    std::vector<Point2> out;
    for (const auto& c : peaks.centroids) out.push_back({c.col, c.row});
    return out;
}

}  // namespace visionguide
