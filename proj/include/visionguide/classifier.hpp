#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "visionguide/annotation.hpp"
#include "visionguide/classification.hpp"
#include "visionguide/features.hpp"
#include "visionguide/forest.hpp"
#include "visionguide/image.hpp"
#include "visionguide/imaging.hpp"

namespace visionguide {

/// The window-classification contract used by the heatmap sweep.
///
/// `window` is the (already preprocessed) sub-image; `rect` is its placement in
/// image coordinates. Implementations must be immutable and thread-safe.
class WindowClassifier {
public:
    virtual ~WindowClassifier() = default;
    virtual Classification classify(const GrayView& window, const Rect& rect) const = 0;
};

/// Adapts any callable, mostly for tests and synthetic experiments.
class FunctionClassifier final : public WindowClassifier {
public:
    using Fn = std::function<Classification(const GrayView&, const Rect&)>;
    explicit FunctionClassifier(Fn fn) : fn_(std::move(fn)) {}
    Classification classify(const GrayView& window, const Rect& rect) const override {
        return fn_(window, rect);
    }

private:
    Fn fn_;
};

/// Resizes the window to the model's input size, extracts the orientation
/// histogram and evaluates the tree ensemble.
inline FeatureVector window_features(const GrayView& window, const FeatureConfig& cfg) {
    if (window.width() == cfg.resize && window.height() == cfg.resize) {
        return extract_features(window, cfg.n_bins, cfg.grid);
    }
    const GrayImage resized = resize_bilinear(window, cfg.resize, cfg.resize);
    return extract_features(resized, cfg.n_bins, cfg.grid);
}

class ForestClassifier final : public WindowClassifier {
public:
    explicit ForestClassifier(TreeEnsembleModel model) : model_(std::move(model)) {}

    Classification classify(const GrayView& window, const Rect&) const override {
        const FeatureVector f = window_features(window, model_.features);
        return visionguide::classify(model_, f);
    }

    const TreeEnsembleModel& model() const { return model_; }

private:
    TreeEnsembleModel model_;
};

struct OracleGroundTruth {
    std::vector<CircleAnnotation> annotations;
    double overlap_fraction = 0.25;
};

inline constexpr int kOracleSamples = 64;

/// Fraction of the circle's area inside the window, estimated by midpoint
/// sampling on a 64x64 grid over the circle's bounding box. Pixel (r, c)
/// occupies [c - 0.5, c + 0.5) x [r - 0.5, r + 0.5).
inline double circle_window_overlap(const CircleAnnotation& a, const Rect& rect) {
    const double x0 = rect.left - 0.5;
    const double x1 = rect.right() - 0.5;
    const double y0 = rect.top - 0.5;
    const double y1 = rect.bottom() - 0.5;
    if (a.x + a.radius <= x0 || a.x - a.radius >= x1 || a.y + a.radius <= y0 ||
        a.y - a.radius >= y1) {
        return 0.0;
    }
    const double cell = 2.0 * a.radius / kOracleSamples;
    const double r2 = a.radius * a.radius;
    int in_circle = 0;
    int in_both = 0;
    for (int i = 0; i < kOracleSamples; ++i) {
        const double sy = a.y - a.radius + (i + 0.5) * cell;
        const double dy = sy - a.y;
        const bool row_in = sy >= y0 && sy < y1;
        for (int j = 0; j < kOracleSamples; ++j) {
            const double sx = a.x - a.radius + (j + 0.5) * cell;
            const double dx = sx - a.x;
            if (dx * dx + dy * dy > r2) continue;
            ++in_circle;
            if (row_in && sx >= x0 && sx < x1) ++in_both;
        }
    }
    return in_circle == 0 ? 0.0 : static_cast<double>(in_both) / in_circle;
}

/// Positive (score 1) iff some annotation has at least overlap_fraction of its
/// area inside `rect`.
inline Classification oracle_classify(const OracleGroundTruth& oracle, const Rect& rect) {
    for (const auto& a : oracle.annotations) {
        if (circle_window_overlap(a, rect) >= oracle.overlap_fraction) return {1, 1.0};
    }
    return {0, 0.0};
}

class OracleClassifier final : public WindowClassifier {
public:
    explicit OracleClassifier(OracleGroundTruth truth) : truth_(std::move(truth)) {
        if (!(truth_.overlap_fraction > 0.0 && truth_.overlap_fraction <= 1.0)) {
            throw InvalidArgument("overlap_fraction must lie in (0, 1]");
        }
    }
    Classification classify(const GrayView&, const Rect& rect) const override {
        return oracle_classify(truth_, rect);
    }

private:
    OracleGroundTruth truth_;
};

}  // namespace visionguide
