#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "visionguide/annotation.hpp"
#include "visionguide/error.hpp"
#include "visionguide/image.hpp"
#include "visionguide/image_io.hpp"
#include "visionguide/parallel.hpp"
#include "visionguide/random.hpp"

namespace visionguide {

namespace fs = std::filesystem;

struct AnnotatedImage {
    fs::path image_path;
    int width = 0;
    int height = 0;
    std::vector<CircleAnnotation> annotations;
};

inline bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

/// Path of the annotation sidecar for an image: same stem, ".json".
inline fs::path sidecar_path(const fs::path& image) {
    fs::path p = image;
    p.replace_extension(".json");
    return p;
}

/// Pairs every <name>.{jpg,jpeg,png} under `root` with <name>.json and
/// validates the annotations against the decoded image size. Sorted by path.
inline std::vector<AnnotatedImage> load_dataset(const fs::path& root, int workers = 1) {
    if (!fs::is_directory(root)) throw InvalidArgument("dataset root is not a directory: " + root.string());
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) images.push_back(entry.path());
    }
    std::sort(images.begin(), images.end());

    std::vector<AnnotatedImage> out(images.size());
    parallel_for(images.size(), workers, [&](std::size_t i) {
        const fs::path json = sidecar_path(images[i]);
        if (!fs::exists(json)) {
            throw MissingAnnotation(images[i].string() + ": no annotation file " + json.string());
        }
        AnnotatedImage& item = out[i];
        item.image_path = images[i];
        item.annotations = read_annotations(json.string());
        const RgbImage img = read_rgb(images[i].string());
        item.width = img.width();
        item.height = img.height();
        for (const auto& a : item.annotations) {
            validate_annotation(a, item.width, item.height, json.string());
        }
    });
    return out;
}

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    long count = 0;
};

/// Radius histogram with bins [k*w, (k+1)*w) from 0 up to the largest radius.
inline std::vector<HistogramBin> size_histogram(const std::vector<CircleAnnotation>& annotations,
                                                double bin_width) {
    if (!(bin_width > 0.0)) throw InvalidArgument("bin width must be > 0");
    std::vector<HistogramBin> bins;
    for (const auto& a : annotations) {
        const auto k = static_cast<std::size_t>(std::floor(a.radius / bin_width));
        while (bins.size() <= k) {
            const double lo = static_cast<double>(bins.size()) * bin_width;
            bins.push_back({lo, lo + bin_width, 0});
        }
        ++bins[k].count;
    }
    return bins;
}

inline std::vector<HistogramBin> size_histogram(const std::vector<AnnotatedImage>& dataset,
                                                double bin_width) {
    std::vector<CircleAnnotation> all;
    for (const auto& item : dataset) all.insert(all.end(), item.annotations.begin(), item.annotations.end());
    return size_histogram(all, bin_width);
}

struct SyntheticScene {
    RgbImage image;
    std::vector<CircleAnnotation> annotations;
    std::uint64_t seed = 0;
};

inline constexpr int kPlacementAttempts = 10000;

namespace detail {

inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Multi-octave value noise in [0, 1).
class ValueNoise {
public:
    ValueNoise(int width, int height, Rng& rng) {
        for (int o = 0; o < kOctaves; ++o) {
            const int cell = kBaseCell >> o;
            Layer layer;
            layer.cell = cell;
            layer.nx = width / cell + 2;
            layer.ny = height / cell + 2;
            layer.values.resize(static_cast<std::size_t>(layer.nx) * layer.ny);
            for (double& v : layer.values) v = rng.uniform();
            layers_.push_back(std::move(layer));
        }
    }

    double operator()(int row, int col) const {
        double sum = 0.0;
        double amp = 0.5;
        double total = 0.0;
        for (const Layer& l : layers_) {
            const int gx = col / l.cell;
            const int gy = row / l.cell;
            const double tx = smoothstep(static_cast<double>(col % l.cell) / l.cell);
            const double ty = smoothstep(static_cast<double>(row % l.cell) / l.cell);
            const double a = l.at(gy, gx) * (1 - tx) + l.at(gy, gx + 1) * tx;
            const double b = l.at(gy + 1, gx) * (1 - tx) + l.at(gy + 1, gx + 1) * tx;
            sum += amp * (a * (1 - ty) + b * ty);
            total += amp;
            amp *= 0.5;
        }
        return sum / total;
    }

private:
    static constexpr int kOctaves = 4;
    static constexpr int kBaseCell = 128;

    struct Layer {
        int cell = 1;
        int nx = 0;
        int ny = 0;
        std::vector<double> values;
        double at(int y, int x) const { return values[static_cast<std::size_t>(y) * nx + x]; }
    };
    std::vector<Layer> layers_;
};

inline double required_separation(double r1, double r2) { return r1 + r2 + 2.0 * std::max(r1, r2); }

// Concentric rings crossed with spokes in a checker arrangement, plus a dark rim.
inline void draw_marker(RgbImage& img, const CircleAnnotation& a, Rng& rng) {
    const int rings = 4 + static_cast<int>(rng.below(4));
    const int spokes = 8 + 2 * static_cast<int>(rng.below(5));
    const Rgb dark{static_cast<std::uint8_t>(rng.below(50)), static_cast<std::uint8_t>(rng.below(50)),
                   static_cast<std::uint8_t>(rng.below(50))};
    const Rgb light{static_cast<std::uint8_t>(205 + rng.below(51)),
                    static_cast<std::uint8_t>(205 + rng.below(51)),
                    static_cast<std::uint8_t>(205 + rng.below(51))};
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double ring_width = a.radius / rings;
    const double rim = std::max(2.0, 0.05 * a.radius);

    const int r0 = std::max(0, static_cast<int>(std::floor(a.y - a.radius)));
    const int r1 = std::min(img.height() - 1, static_cast<int>(std::ceil(a.y + a.radius)));
    const int c0 = std::max(0, static_cast<int>(std::floor(a.x - a.radius)));
    const int c1 = std::min(img.width() - 1, static_cast<int>(std::ceil(a.x + a.radius)));
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            const double dx = c - a.x;
            const double dy = r - a.y;
            const double rho = std::hypot(dx, dy);
            if (rho > a.radius) continue;
            if (rho > a.radius - rim) {
                img(r, c) = dark;
                continue;
            }
            double phi = std::atan2(dy, dx) + phase;
            phi = std::fmod(phi + 4.0 * std::numbers::pi, 2.0 * std::numbers::pi);
            const int ring = static_cast<int>(rho / ring_width);
            const int spoke = static_cast<int>(phi / (2.0 * std::numbers::pi / spokes));
            img(r, c) = ((ring + spoke) % 2 == 0) ? dark : light;
        }
    }
}

}  // namespace detail

/// Textured background with n_markers ring/spoke disks fully inside the canvas.
/// Any two disks are at least r1 + r2 + 2 * max(r1, r2) apart (centre to
/// centre). Deterministic in `seed`.
inline SyntheticScene generate_scene(int canvas_w, int canvas_h, int n_markers, double min_radius,
                                     double max_radius, std::uint64_t seed) {
    if (canvas_w < 1 || canvas_h < 1) throw InvalidArgument("canvas must be at least 1x1");
    if (n_markers < 0) throw InvalidArgument("n_markers must be >= 0");
    if (n_markers > 0 && !(min_radius > 0.0 && max_radius >= min_radius)) {
        throw InvalidArgument("radius range must satisfy 0 < min <= max");
    }

    SyntheticScene scene{RgbImage(canvas_w, canvas_h), {}, seed};

    Rng bg_rng(seed, 0);
    const detail::ValueNoise noise(canvas_w, canvas_h, bg_rng);
    const double tint[3] = {bg_rng.uniform(0.6, 1.0), bg_rng.uniform(0.6, 1.0), bg_rng.uniform(0.6, 1.0)};
    for (int r = 0; r < canvas_h; ++r) {
        for (int c = 0; c < canvas_w; ++c) {
            const double v = 40.0 + 170.0 * noise(r, c);
            scene.image(r, c) = {quantize_u8(v * tint[0]), quantize_u8(v * tint[1]), quantize_u8(v * tint[2])};
        }
    }
    if (n_markers == 0) return scene;

    // Rejection sampling; a marker that keeps failing restarts the layout.
    Rng place_rng(seed, 1);
    constexpr int kRestartAfter = 250;
    std::vector<CircleAnnotation> placed;
    int attempts = 0;
    int failures = 0;
    while (static_cast<int>(placed.size()) < n_markers) {
        if (attempts++ >= kPlacementAttempts) {
            throw PlacementInfeasible("could not place " + std::to_string(n_markers) +
                                      " markers after " + std::to_string(kPlacementAttempts) +
                                      " attempts");
        }
        const double radius = place_rng.uniform(min_radius, max_radius);
        const double span_x = canvas_w - 1 - 2.0 * radius;
        const double span_y = canvas_h - 1 - 2.0 * radius;
        const double x = radius + place_rng.uniform() * std::max(span_x, 0.0);
        const double y = radius + place_rng.uniform() * std::max(span_y, 0.0);
        bool ok = span_x >= 0.0 && span_y >= 0.0;
        for (const auto& p : placed) {
            if (!ok) break;
            ok = std::hypot(p.x - x, p.y - y) >= detail::required_separation(p.radius, radius);
        }
        if (ok) {
            placed.push_back({x, y, radius});
            failures = 0;
        } else if (++failures >= kRestartAfter) {
            placed.clear();
            failures = 0;
        }
    }

    Rng motif_rng(seed, 2);
    for (const auto& a : placed) detail::draw_marker(scene.image, a, motif_rng);
    scene.annotations = std::move(placed);
    return scene;
}

/// Writes <dir>/<name>.png and <dir>/<name>.json (dataset layout).
inline void save_scene(const SyntheticScene& scene, const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    write_rgb((dir / (name + ".png")).string(), scene.image);
    write_annotations(scene.annotations, (dir / (name + ".json")).string(),
                      {{"width", scene.image.width()},
                       {"height", scene.image.height()},
                       {"seed", scene.seed}});
}

}  // namespace visionguide
