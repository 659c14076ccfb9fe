#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "visionguide/classification.hpp"
#include "visionguide/error.hpp"
#include "visionguide/features.hpp"
#include "visionguide/random.hpp"

namespace visionguide {

/// How windows are turned into feature vectors: resize to resize x resize
/// (bilinear), then an n_bins orientation histogram on a grid x grid partition.
struct FeatureConfig {
    int n_bins = 9;
    int grid = 4;
    int resize = 64;

    int length() const { return grid * grid * n_bins; }

    void validate() const {
        if (n_bins < 2 || grid < 1 || resize < grid) {
            throw InvalidArgument("invalid feature configuration");
        }
    }

    friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double vote = 0.0;  // class-1 fraction at a leaf

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTree {
public:
    std::vector<TreeNode> nodes;  // root at index 0

    double predict(std::span<const double> f) const {
        int i = 0;
        while (!nodes[i].is_leaf()) {
            const TreeNode& n = nodes[i];
            i = f[n.feature] <= n.threshold ? n.left : n.right;
        }
        return nodes[i].vote;
    }

    int depth() const { return nodes.empty() ? 0 : depth_from(0); }

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    int depth_from(int i) const {
        const TreeNode& n = nodes[i];
        if (n.is_leaf()) return 0;
        return 1 + std::max(depth_from(n.left), depth_from(n.right));
    }
};

struct TreeEnsembleModel {
    FeatureConfig features;
    int feature_length = 0;
    int max_depth = 0;
    std::uint64_t seed = 0;
    std::vector<DecisionTree> trees;

    int n_trees() const { return static_cast<int>(trees.size()); }

    friend bool operator==(const TreeEnsembleModel&, const TreeEnsembleModel&) = default;
};

struct LabeledSample {
    FeatureVector features;
    int label = 0;
};

inline Classification classify(const TreeEnsembleModel& model, std::span<const double> f) {
    if (static_cast<int>(f.size()) != model.feature_length) {
        throw FeatureLengthMismatch("feature vector has length " + std::to_string(f.size()) +
                                    ", model expects " + std::to_string(model.feature_length));
    }
    if (model.trees.empty()) throw InvalidArgument("model has no trees");
    double sum = 0.0;
    for (const auto& t : model.trees) sum += t.predict(f);
    return from_score(sum / static_cast<double>(model.trees.size()));
}

namespace detail {

class TreeBuilder {
public:
    TreeBuilder(std::span<const LabeledSample> samples, int max_depth, Rng& rng)
        : samples_(samples), max_depth_(max_depth), rng_(rng),
          length_(static_cast<int>(samples.front().features.size())),
          mtry_(std::max(1, static_cast<int>(std::sqrt(static_cast<double>(length_))))) {}

    DecisionTree build(std::vector<int> indices) {
        tree_.nodes.clear();
        grow(std::move(indices), 0);
        return std::move(tree_);
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double impurity = 0.0;
    };

    static double gini(int pos, int total) {
        if (total == 0) return 0.0;
        const double p = static_cast<double>(pos) / total;
        return 2.0 * p * (1.0 - p);
    }

    int grow(std::vector<int> idx, int depth) {
        const int node = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        int pos = 0;
        for (int i : idx) pos += samples_[i].label;
        const int n = static_cast<int>(idx.size());

        Split best;
        if (depth < max_depth_ && pos != 0 && pos != n) best = find_split(idx, pos);
        if (best.feature < 0) {
            tree_.nodes[node].vote = static_cast<double>(pos) / n;
            return node;
        }

        std::vector<int> left, right;
        for (int i : idx) {
            (samples_[i].features[best.feature] <= best.threshold ? left : right).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        TreeNode& self = tree_.nodes[node];
        self.feature = best.feature;
        self.threshold = best.threshold;
        self.left = l;
        self.right = r;
        return node;
    }

    Split find_split(const std::vector<int>& idx, int total_pos) {
        // Random feature subset via partial Fisher-Yates; if none of them can
        // separate the node, fall back to the remaining features in order.
        std::vector<int> order(length_);
        std::iota(order.begin(), order.end(), 0);
        for (int k = 0; k < mtry_; ++k) {
            const int j = k + static_cast<int>(rng_.below(static_cast<std::uint64_t>(length_ - k)));
            std::swap(order[k], order[j]);
        }

        Split best;
        best.impurity = std::numeric_limits<double>::infinity();
        std::vector<std::pair<double, int>> column(idx.size());
        const int n = static_cast<int>(idx.size());
        for (int k = 0; k < length_; ++k) {
            if (k == mtry_ && best.feature >= 0) break;
            const int feat = order[k];
            for (int i = 0; i < n; ++i) {
                column[i] = {samples_[idx[i]].features[feat], samples_[idx[i]].label};
            }
            std::sort(column.begin(), column.end());
            int left_pos = 0;
            for (int i = 0; i + 1 < n; ++i) {
                left_pos += column[i].second;
                if (column[i].first == column[i + 1].first) continue;
                const int nl = i + 1;
                const int nr = n - nl;
                const double imp =
                    (nl * gini(left_pos, nl) + nr * gini(total_pos - left_pos, nr)) / n;
                if (imp < best.impurity) {
                    const double a = column[i].first;
                    const double b = column[i + 1].first;
                    double t = a + (b - a) / 2.0;
                    if (!(t < b)) t = a;
                    best = {feat, t, imp};
                }
            }
        }
        return best;
    }

    std::span<const LabeledSample> samples_;
    int max_depth_;
    Rng& rng_;
    int length_;
    int mtry_;
    DecisionTree tree_;
};

}  // namespace detail

/// Bagged Gini trees. Tree t draws its bootstrap sample and feature subsets from
/// an Rng seeded by (seed, t), so the model is a pure function of the inputs.
inline TreeEnsembleModel train(std::span<const LabeledSample> samples, int n_trees, int max_depth,
                               std::uint64_t seed, const FeatureConfig& features = {}) {
    if (n_trees < 1 || max_depth < 1) throw InvalidArgument("n_trees and max_depth must be >= 1");
    if (samples.size() < 2) throw DegenerateTrainingSet("training needs at least two samples");
    const std::size_t length = samples.front().features.size();
    if (length == 0) throw InvalidArgument("empty feature vectors");
    int positives = 0;
    for (const auto& s : samples) {
        if (s.features.size() != length) {
            throw FeatureLengthMismatch("training samples have inconsistent feature lengths");
        }
        if (s.label != 0 && s.label != 1) throw InvalidArgument("labels must be 0 or 1");
        positives += s.label;
    }
    if (positives == 0 || positives == static_cast<int>(samples.size())) {
        throw DegenerateTrainingSet("training set contains a single class");
    }

    TreeEnsembleModel model;
    model.features = features;
    model.feature_length = static_cast<int>(length);
    model.max_depth = max_depth;
    model.seed = seed;
    model.trees.reserve(n_trees);
    const std::size_t n = samples.size();
    for (int t = 0; t < n_trees; ++t) {
        Rng rng(seed, static_cast<std::uint64_t>(t));
        std::vector<int> boot(n);
        for (auto& b : boot) b = static_cast<int>(rng.below(n));
        detail::TreeBuilder builder(samples, max_depth, rng);
        model.trees.push_back(builder.build(std::move(boot)));
    }
    return model;
}

// ---------------------------------------------------------------------------
// Model file format (text, one token group per line):
//
//   visionguide-forest 1
//   features <n_bins> <grid> <resize>
//   shape <feature_length> <n_trees> <max_depth> <seed>
//   tree <node_count>
//   <feature> <threshold> <left> <right> <vote>     (node_count lines)
//   ...
//   end
//
// Reals use the shortest round-trip decimal form, so save/load is exact.
// ---------------------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_real(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ModelFormatError("bad real '" + s + "'");
    }
    return v;
}

}  // namespace detail

inline void save_model(const TreeEnsembleModel& model, std::ostream& out) {
    out << "visionguide-forest " << kModelFormatVersion << '\n';
    out << "features " << model.features.n_bins << ' ' << model.features.grid << ' '
        << model.features.resize << '\n';
    out << "shape " << model.feature_length << ' ' << model.n_trees() << ' ' << model.max_depth
        << ' ' << model.seed << '\n';
    for (const auto& tree : model.trees) {
        out << "tree " << tree.nodes.size() << '\n';
        for (const auto& n : tree.nodes) {
            out << n.feature << ' ' << detail::format_real(n.threshold) << ' ' << n.left << ' '
                << n.right << ' ' << detail::format_real(n.vote) << '\n';
        }
    }
    out << "end\n";
}

inline void save_model(const TreeEnsembleModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelFormatError("cannot write model file " + path);
    save_model(model, out);
    if (!out) throw ModelFormatError("failed writing model file " + path);
}

/// Parses and validates a model. When `expected` is given, a model whose
/// embedded feature configuration differs is rejected.
inline TreeEnsembleModel load_model(std::istream& in, const FeatureConfig* expected = nullptr) {
    auto expect = [&](const std::string& word) {
        std::string tok;
        if (!(in >> tok) || tok != word) throw ModelFormatError("expected '" + word + "'");
    };
    auto read_real = [&] {
        std::string tok;
        if (!(in >> tok)) throw ModelFormatError("truncated model");
        return detail::parse_real(tok);
    };

    expect("visionguide-forest");
    int version = 0;
    if (!(in >> version) || version != kModelFormatVersion) {
        throw ModelFormatError("unsupported model format version");
    }
    TreeEnsembleModel m;
    int n_trees = 0;
    expect("features");
    in >> m.features.n_bins >> m.features.grid >> m.features.resize;
    expect("shape");
    in >> m.feature_length >> n_trees >> m.max_depth >> m.seed;
    if (!in) throw ModelFormatError("malformed model header");
    m.features.validate();
    if (m.feature_length != m.features.length() || n_trees < 1 || m.max_depth < 1) {
        throw ModelFormatError("inconsistent model header");
    }
    if (expected && !(*expected == m.features)) {
        throw ModelFormatError("model feature configuration does not match the requested one");
    }

    for (int t = 0; t < n_trees; ++t) {
        expect("tree");
        std::size_t count = 0;
        if (!(in >> count) || count == 0) throw ModelFormatError("bad tree size");
        DecisionTree tree;
        tree.nodes.resize(count);
        for (auto& n : tree.nodes) {
            in >> n.feature;
            n.threshold = read_real();
            in >> n.left >> n.right;
            n.vote = read_real();
            if (!in) throw ModelFormatError("truncated tree");
        }
        const int size = static_cast<int>(count);
        for (int i = 0; i < size; ++i) {
            const auto& n = tree.nodes[i];
            if (n.is_leaf()) {
                if (!(n.vote >= 0.0 && n.vote <= 1.0)) throw ModelFormatError("leaf vote out of range");
                continue;
            }
            // children always follow their parent, which also rules out cycles
            if (n.feature >= m.feature_length || n.left <= i || n.right <= i || n.left >= size ||
                n.right >= size) {
                throw ModelFormatError("invalid tree node " + std::to_string(i));
            }
        }
        if (tree.depth() > m.max_depth) throw ModelFormatError("tree deeper than max_depth");
        m.trees.push_back(std::move(tree));
    }
    expect("end");
    return m;
}

inline TreeEnsembleModel load_model(const std::string& path, const FeatureConfig* expected = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelFormatError("cannot open model file " + path);
    try {
        return load_model(in, expected);
    } catch (const ModelFormatError& e) {
        throw ModelFormatError(path + ": " + e.what());
    }
}

}  // namespace visionguide
