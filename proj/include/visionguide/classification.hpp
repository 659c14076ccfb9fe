#pragma once

namespace visionguide {

/// Window-level decision. klass is 1 for "contains an Artcode"; score in [0, 1].
struct Classification {
    int klass = 0;
    double score = 0.0;

    friend bool operator==(const Classification&, const Classification&) = default;
};

/// Scores at or above one half are positive.
inline Classification from_score(double score) { return {score >= 0.5 ? 1 : 0, score}; }

}  // namespace visionguide
