#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "visionguide/annotation.hpp"
#include "visionguide/error.hpp"
#include "visionguide/image.hpp"

namespace visionguide {

struct MatchAssignment {
    Point2 prediction;
    std::optional<std::size_t> annotation;  // empty when there are no annotations
    double normalized_distance = std::numeric_limits<double>::infinity();
};

/// How several predictions matched to one annotation are counted.
enum class DuplicatePolicy {
    CountAll,   // every matched prediction is a true positive
    FirstOnly,  // only the closest one is; the rest are false positives
};

struct MatchReport {
    double threshold = 0.0;
    long tp = 0;
    long fp = 0;
    long fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double f2 = 0.0;
};

struct MetricCurve {
    std::vector<double> thresholds;
    std::vector<MatchReport> reports;
};

inline double normalized_distance(const Point2& p, const CircleAnnotation& a) {
    return std::hypot(p.x - a.x, p.y - a.y) / a.radius;
}

/// Each prediction goes to the annotation with the smallest normalised
/// distance (ties to the lower index), independently of any threshold.
inline std::vector<MatchAssignment> assign(const std::vector<Point2>& predictions,
                                           const std::vector<CircleAnnotation>& annotations) {
    std::vector<MatchAssignment> out;
    out.reserve(predictions.size());
    for (const auto& p : predictions) {
        MatchAssignment m{p, std::nullopt, std::numeric_limits<double>::infinity()};
        for (std::size_t i = 0; i < annotations.size(); ++i) {
            const double d = normalized_distance(p, annotations[i]);
            if (d < m.normalized_distance) {
                m.normalized_distance = d;
                m.annotation = i;
            }
        }
        out.push_back(m);
    }
    return out;
}

inline double f_beta(double precision, double recall, double beta) {
    const double b2 = beta * beta;
    const double den = b2 * precision + recall;
    return den > 0.0 ? (1.0 + b2) * precision * recall / den : 0.0;
}

/// Fills in precision, recall and F-scores from raw counts; 0/0 is taken as 0.
inline MatchReport make_report(double threshold, long tp, long fp, long fn) {
    MatchReport r{threshold, tp, fp, fn};
    r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    r.f1 = f_beta(r.precision, r.recall, 1.0);
    r.f2 = f_beta(r.precision, r.recall, 2.0);
    return r;
}

inline MatchReport report(const std::vector<MatchAssignment>& assignments,
                          const std::vector<CircleAnnotation>& annotations, double threshold,
                          DuplicatePolicy policy = DuplicatePolicy::CountAll) {
    if (!(threshold > 0.0)) throw InvalidArgument("distance threshold must be > 0");
    std::vector<long> hits(annotations.size(), 0);
    std::vector<std::optional<std::size_t>> best(annotations.size());
    long tp = 0;
    long fp = 0;
    for (std::size_t k = 0; k < assignments.size(); ++k) {
        const auto& m = assignments[k];
        if (!m.annotation || m.normalized_distance > threshold) {
            ++fp;
            continue;
        }
        const std::size_t a = *m.annotation;
        ++hits[a];
        if (!best[a] || m.normalized_distance < assignments[*best[a]].normalized_distance) best[a] = k;
    }
    long covered = 0;
    for (std::size_t a = 0; a < annotations.size(); ++a) {
        if (hits[a] == 0) continue;
        ++covered;
        if (policy == DuplicatePolicy::CountAll) {
            tp += hits[a];
        } else {
            tp += 1;
            fp += hits[a] - 1;
        }
    }
    const long fn = static_cast<long>(annotations.size()) - covered;
    return make_report(threshold, tp, fp, fn);
}

inline void validate_thresholds(const std::vector<double>& thresholds) {
    if (thresholds.empty()) throw ConfigError("threshold grid is empty");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0)) throw ConfigError("thresholds must be > 0");
        if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
            throw ConfigError("thresholds must be strictly ascending");
        }
    }
}

inline MetricCurve curve(const std::vector<Point2>& predictions,
                         const std::vector<CircleAnnotation>& annotations,
                         const std::vector<double>& thresholds,
                         DuplicatePolicy policy = DuplicatePolicy::CountAll) {
    validate_thresholds(thresholds);
    const auto assignments = assign(predictions, annotations);
    MetricCurve c;
    c.thresholds = thresholds;
    for (double t : thresholds) c.reports.push_back(report(assignments, annotations, t, policy));
    return c;
}

/// Micro average: counts summed over images per threshold, then metrics.
inline MetricCurve aggregate(const std::vector<MetricCurve>& curves,
                             const std::vector<double>& thresholds) {
    MetricCurve out;
    out.thresholds = thresholds;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        long tp = 0, fp = 0, fn = 0;
        for (const auto& c : curves) {
            if (c.reports.size() != thresholds.size()) {
                throw DimensionMismatch("curves use different threshold grids");
            }
            tp += c.reports[i].tp;
            fp += c.reports[i].fp;
            fn += c.reports[i].fn;
        }
        out.reports.push_back(make_report(thresholds[i], tp, fp, fn));
    }
    return out;
}

/// 0.1, 0.2, ..., 2.0
inline std::vector<double> default_thresholds() {
    std::vector<double> t;
    for (int k = 1; k <= 20; ++k) t.push_back(k / 10.0);
    return t;
}

inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline void write_metrics_csv(const MetricCurve& c, std::ostream& out) {
    out << "threshold,tp,fp,fn,precision,recall,f1,f2\n";
    for (const auto& r : c.reports) {
        out << format_number(r.threshold) << ',' << r.tp << ',' << r.fp << ',' << r.fn << ','
            << format_number(r.precision) << ',' << format_number(r.recall) << ','
            << format_number(r.f1) << ',' << format_number(r.f2) << '\n';
    }
}

inline void write_metrics_csv(const MetricCurve& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path);
    write_metrics_csv(c, out);
}

}  // namespace visionguide
