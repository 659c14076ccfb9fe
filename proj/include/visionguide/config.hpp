#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "visionguide/error.hpp"
#include "visionguide/eval.hpp"
#include "visionguide/forest.hpp"
#include "visionguide/heatmap.hpp"

namespace visionguide {

/// Candidate values swept by `sweep`; defaults are the full Table-I style grid.
struct SweepGrid {
    std::vector<double> sigmas{5, 10, 15, 20};
    std::vector<double> hmts{5, 10, 15, 20};
    std::vector<int> wins{200, 400, 600, 800};
    std::vector<int> steps{20, 40, 60, 80};
};

struct TrainParams {
    int n_trees = 50;
    int max_depth = 12;
};

struct SynthParams {
    int count = 5;
    int width = 2000;
    int height = 2000;
    int min_markers = 2;
    int max_markers = 4;
    double min_radius = 100.0;
    double max_radius = 400.0;
    bool training_samples = false;  // also emit artcode/ and non_artcode/ window crops
};

/// Everything a command needs. Sources are layered: defaults, then the JSON
/// config file, then command-line flags.
struct RunConfig {
    SweepConfig sweep;
    std::string classifier = "oracle";  // "oracle" or a model file path
    double overlap_fraction = 0.25;
    FeatureConfig features;
    bool features_explicit = false;  // set when the user pinned the feature config
    std::vector<double> thresholds = default_thresholds();
    std::string out = "out";
    int workers = 1;
    std::uint64_t seed = 0;
    double alpha = 0.5;
    DuplicatePolicy duplicates = DuplicatePolicy::CountAll;
    bool raw_heatmap = false;
    SweepGrid grid;
    TrainParams train;
    SynthParams synth;

    bool uses_oracle() const { return classifier == "oracle"; }

    void validate() const {
        sweep.validate();
        validate_thresholds(thresholds);
        if (workers < 1) throw ConfigError("workers must be >= 1");
        if (!(overlap_fraction > 0.0 && overlap_fraction <= 1.0)) {
            throw ConfigError("overlap_fraction must lie in (0, 1]");
        }
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
        features.validate();
        if (train.n_trees < 1 || train.max_depth < 1) throw ConfigError("train parameters must be >= 1");
        if (grid.sigmas.empty() || grid.hmts.empty() || grid.wins.empty() || grid.steps.empty()) {
            throw ConfigError("sweep grid lists must be non-empty");
        }
    }
};

namespace detail {

template <typename T>
T get_as(const nlohmann::json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known,
                           const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ConfigError("unknown config key '" + where + it.key() + "'");
    }
}

inline DuplicatePolicy parse_duplicates(const std::string& s) {
    if (s == "all") return DuplicatePolicy::CountAll;
    if (s == "first") return DuplicatePolicy::FirstOnly;
    throw ConfigError("duplicates must be 'all' or 'first', got '" + s + "'");
}

}  // namespace detail

/// Applies a parsed config document on top of `cfg`. Unknown keys are errors.
inline void apply_config_json(RunConfig& cfg, const nlohmann::json& doc) {
    using detail::get_as;
    if (!doc.is_object()) throw ConfigError("config file must contain a JSON object");
    detail::reject_unknown(doc,
                           {"win", "win_h", "win_w", "step", "istep", "jstep", "sigma", "hmt",
                            "bilateral", "classifier", "overlap_fraction", "features", "thresholds",
                            "out", "workers", "seed", "alpha", "duplicates", "raw_heatmap", "sweep",
                            "train", "synth"},
                           "");
    auto has = [&](const char* k) { return doc.contains(k); };
    if (has("win")) cfg.sweep.win_h = cfg.sweep.win_w = get_as<int>(doc["win"], "win");
    if (has("win_h")) cfg.sweep.win_h = get_as<int>(doc["win_h"], "win_h");
    if (has("win_w")) cfg.sweep.win_w = get_as<int>(doc["win_w"], "win_w");
    if (has("step")) cfg.sweep.istep = cfg.sweep.jstep = get_as<int>(doc["step"], "step");
    if (has("istep")) cfg.sweep.istep = get_as<int>(doc["istep"], "istep");
    if (has("jstep")) cfg.sweep.jstep = get_as<int>(doc["jstep"], "jstep");
    if (has("sigma")) cfg.sweep.gaussian_sigma = get_as<double>(doc["sigma"], "sigma");
    if (has("hmt")) cfg.sweep.hmt_threshold = get_as<double>(doc["hmt"], "hmt");
    if (has("bilateral")) {
        const auto& b = doc["bilateral"];
        detail::reject_unknown(b, {"spatial_sigma", "range_sigma", "radius"}, "bilateral.");
        if (b.contains("spatial_sigma")) cfg.sweep.bilateral.spatial_sigma = get_as<double>(b["spatial_sigma"], "bilateral.spatial_sigma");
        if (b.contains("range_sigma")) cfg.sweep.bilateral.range_sigma = get_as<double>(b["range_sigma"], "bilateral.range_sigma");
        if (b.contains("radius")) cfg.sweep.bilateral.neighborhood_radius = get_as<int>(b["radius"], "bilateral.radius");
    }
    if (has("classifier")) cfg.classifier = get_as<std::string>(doc["classifier"], "classifier");
    if (has("overlap_fraction")) cfg.overlap_fraction = get_as<double>(doc["overlap_fraction"], "overlap_fraction");
    if (has("features")) {
        const auto& f = doc["features"];
        detail::reject_unknown(f, {"n_bins", "grid", "resize"}, "features.");
        if (f.contains("n_bins")) cfg.features.n_bins = get_as<int>(f["n_bins"], "features.n_bins");
        if (f.contains("grid")) cfg.features.grid = get_as<int>(f["grid"], "features.grid");
        if (f.contains("resize")) cfg.features.resize = get_as<int>(f["resize"], "features.resize");
        cfg.features_explicit = true;
    }
    if (has("thresholds")) cfg.thresholds = get_as<std::vector<double>>(doc["thresholds"], "thresholds");
    if (has("out")) cfg.out = get_as<std::string>(doc["out"], "out");
    if (has("workers")) cfg.workers = get_as<int>(doc["workers"], "workers");
    if (has("seed")) cfg.seed = get_as<std::uint64_t>(doc["seed"], "seed");
    if (has("alpha")) cfg.alpha = get_as<double>(doc["alpha"], "alpha");
    if (has("duplicates")) cfg.duplicates = detail::parse_duplicates(get_as<std::string>(doc["duplicates"], "duplicates"));
    if (has("raw_heatmap")) cfg.raw_heatmap = get_as<bool>(doc["raw_heatmap"], "raw_heatmap");
    if (has("sweep")) {
        const auto& s = doc["sweep"];
        detail::reject_unknown(s, {"sigma", "hmt", "win", "step"}, "sweep.");
        if (s.contains("sigma")) cfg.grid.sigmas = get_as<std::vector<double>>(s["sigma"], "sweep.sigma");
        if (s.contains("hmt")) cfg.grid.hmts = get_as<std::vector<double>>(s["hmt"], "sweep.hmt");
        if (s.contains("win")) cfg.grid.wins = get_as<std::vector<int>>(s["win"], "sweep.win");
        if (s.contains("step")) cfg.grid.steps = get_as<std::vector<int>>(s["step"], "sweep.step");
    }
    if (has("train")) {
        const auto& t = doc["train"];
        detail::reject_unknown(t, {"trees", "max_depth"}, "train.");
        if (t.contains("trees")) cfg.train.n_trees = get_as<int>(t["trees"], "train.trees");
        if (t.contains("max_depth")) cfg.train.max_depth = get_as<int>(t["max_depth"], "train.max_depth");
    }
    if (has("synth")) {
        const auto& s = doc["synth"];
        detail::reject_unknown(s, {"count", "width", "height", "min_markers", "max_markers",
                                   "min_radius", "max_radius", "training_samples"},
                               "synth.");
        if (s.contains("count")) cfg.synth.count = get_as<int>(s["count"], "synth.count");
        if (s.contains("width")) cfg.synth.width = get_as<int>(s["width"], "synth.width");
        if (s.contains("height")) cfg.synth.height = get_as<int>(s["height"], "synth.height");
        if (s.contains("min_markers")) cfg.synth.min_markers = get_as<int>(s["min_markers"], "synth.min_markers");
        if (s.contains("max_markers")) cfg.synth.max_markers = get_as<int>(s["max_markers"], "synth.max_markers");
        if (s.contains("min_radius")) cfg.synth.min_radius = get_as<double>(s["min_radius"], "synth.min_radius");
        if (s.contains("max_radius")) cfg.synth.max_radius = get_as<double>(s["max_radius"], "synth.max_radius");
        if (s.contains("training_samples")) cfg.synth.training_samples = get_as<bool>(s["training_samples"], "synth.training_samples");
    }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    apply_config_json(cfg, doc);
}

/// Parses "0.5,1,2" into a list of reals.
inline std::vector<double> parse_real_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("not a number: '" + item + "'");
        }
    }
    return out;
}

}  // namespace visionguide
