#pragma once

#include "visionguide/classifier.hpp"
#include "visionguide/heatmap.hpp"
#include "visionguide/image.hpp"
#include "visionguide/peaks.hpp"

namespace visionguide {

struct LocaliseResult {
    Heatmap heatmap;     // raw accumulated scores
    Heatmap normalized;  // [0, 255]
    PeakSet peaks;
};

/// Coarse then fine localisation on an already grayscaled image.
inline LocaliseResult localise(const GrayImage& gray, const SweepConfig& cfg,
                               const WindowClassifier& classifier, int workers = 1) {
    LocaliseResult out;
    out.heatmap = calc_heatmap(gray, cfg, classifier, workers);
    out.normalized = normalize(out.heatmap);
    out.peaks = find_peaks(out.normalized, cfg, workers);
    return out;
}

}  // namespace visionguide
