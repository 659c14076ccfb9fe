#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "visionguide/annotation.hpp"
#include "visionguide/classifier.hpp"
#include "visionguide/config.hpp"
#include "visionguide/dataset.hpp"
#include "visionguide/error.hpp"
#include "visionguide/eval.hpp"
#include "visionguide/forest.hpp"
#include "visionguide/heatmap.hpp"
#include "visionguide/image_io.hpp"
#include "visionguide/imaging.hpp"
#include "visionguide/parallel.hpp"
#include "visionguide/peaks.hpp"
#include "visionguide/pipeline.hpp"
#include "visionguide/random.hpp"

namespace visionguide {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitInternal = 2 };

/// Resolves the configured classifier for a given image. A trained model is
/// shared across images; the oracle reads each image's annotation sidecar.
class ClassifierSource {
public:
    explicit ClassifierSource(const RunConfig& cfg) : overlap_(cfg.overlap_fraction) {
        if (!cfg.uses_oracle()) {
            const FeatureConfig* expected = cfg.features_explicit ? &cfg.features : nullptr;
            forest_ = std::make_shared<ForestClassifier>(load_model(cfg.classifier, expected));
        }
    }

    std::shared_ptr<const WindowClassifier> for_image(const fs::path& image) const {
        if (forest_) return forest_;
        const fs::path json = sidecar_path(image);
        if (!fs::exists(json)) {
            throw MissingAnnotation(image.string() + ": oracle classifier needs " + json.string());
        }
        return for_annotations(read_annotations(json.string()));
    }

    std::shared_ptr<const WindowClassifier> for_annotations(std::vector<CircleAnnotation> anns) const {
        if (forest_) return forest_;
        return std::make_shared<OracleClassifier>(OracleGroundTruth{std::move(anns), overlap_});
    }

private:
    double overlap_;
    std::shared_ptr<ForestClassifier> forest_;
};

namespace detail {

// Splits the worker budget between concurrently processed images and the
// parallelism inside each one.
struct WorkerSplit {
    int outer = 1;
    int inner = 1;
};

inline WorkerSplit split_workers(int workers, std::size_t items) {
    WorkerSplit s;
    s.outer = static_cast<int>(std::max<std::size_t>(1, std::min<std::size_t>(workers, items)));
    s.inner = std::max(1, workers / s.outer);
    return s;
}

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << text;
}

inline std::string peaks_text(const PeakSet& peaks) { return peaks_to_json(peaks).dump(2) + "\n"; }

struct ItemOutcome {
    bool ok = false;
    bool internal = false;
    std::string message;
};

template <typename Fn>
ItemOutcome guarded(Fn&& fn) {
    try {
        fn();
        return {true, false, {}};
    } catch (const Error& e) {
        return {false, false, e.what()};
    } catch (const InternalError& e) {
        return {false, true, e.what()};
    } catch (const std::bad_alloc&) {
        return {false, true, "out of memory"};
    } catch (const cv::Exception& e) {
        return {false, false, e.what()};
    }
}

inline int report_outcomes(const std::vector<ItemOutcome>& outcomes, std::ostream& err) {
    int code = kExitOk;
    for (const auto& o : outcomes) {
        if (o.ok) continue;
        err << "error: " << o.message << '\n';
        code = std::max(code, o.internal ? int{kExitInternal} : int{kExitInput});
    }
    return code;
}

}  // namespace detail

/// Writes <stem>.heatmap.png, <stem>.fused.png and <stem>.peaks.json per image
/// (plus <stem>.heatmap.vgf with raw_heatmap). Failing images are reported and
/// skipped; the others are still processed.
inline int cmd_localise(const RunConfig& cfg, const std::vector<std::string>& images,
                        std::ostream& out, std::ostream& err) {
    std::optional<ClassifierSource> source;
    const auto setup = detail::guarded([&] {
        cfg.validate();
        if (images.empty()) throw ConfigError("no input images given");
        source.emplace(cfg);
        fs::create_directories(cfg.out);
    });
    if (!setup.ok) return detail::report_outcomes({setup}, err);

    const auto split = detail::split_workers(cfg.workers, images.size());
    std::vector<detail::ItemOutcome> outcomes(images.size());
    std::vector<std::size_t> peak_counts(images.size(), 0);
    parallel_for(images.size(), split.outer, [&](std::size_t i) {
        outcomes[i] = detail::guarded([&] {
            const fs::path path(images[i]);
            if (!fs::exists(path)) throw ImageIoError("no such file: " + path.string());
            const RgbImage rgb = read_rgb(path.string());
            const auto classifier = source->for_image(path);
            const LocaliseResult res = localise(to_grayscale(rgb), cfg.sweep, *classifier, split.inner);
            const fs::path base = fs::path(cfg.out) / path.stem();
            write_gray(base.string() + ".heatmap.png", res.normalized);
            write_rgb(base.string() + ".fused.png", fuse(rgb, res.heatmap, cfg.alpha));
            detail::write_text(base.string() + ".peaks.json", detail::peaks_text(res.peaks));
            if (cfg.raw_heatmap) write_raw(base.string() + ".heatmap.vgf", res.heatmap);
            peak_counts[i] = res.peaks.size();
        });
    });
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (outcomes[i].ok) out << images[i] << ": " << peak_counts[i] << " peaks\n";
    }
    return detail::report_outcomes(outcomes, err);
}

struct EvaluationSummary {
    MetricCurve aggregate;
    std::vector<MetricCurve> per_image;
};

/// Localises every dataset image and scores the peaks against its annotations.
/// Writes <stem>.metrics.csv per image and aggregate.csv (micro average).
inline int cmd_evaluate(const RunConfig& cfg, const std::string& root, std::ostream& out,
                        std::ostream& err, EvaluationSummary* summary = nullptr) {
    std::vector<AnnotatedImage> dataset;
    std::optional<ClassifierSource> source;
    const auto setup = detail::guarded([&] {
        cfg.validate();
        source.emplace(cfg);
        dataset = load_dataset(root, cfg.workers);
        fs::create_directories(cfg.out);
    });
    if (!setup.ok) return detail::report_outcomes({setup}, err);

    const auto split = detail::split_workers(cfg.workers, dataset.size());
    std::vector<detail::ItemOutcome> outcomes(dataset.size());
    std::vector<MetricCurve> curves(dataset.size());
    std::vector<MetricCurve> headline(dataset.size());
    parallel_for(dataset.size(), split.outer, [&](std::size_t i) {
        outcomes[i] = detail::guarded([&] {
            const AnnotatedImage& item = dataset[i];
            const RgbImage rgb = read_rgb(item.image_path.string());
            const auto classifier = source->for_annotations(item.annotations);
            const LocaliseResult res = localise(to_grayscale(rgb), cfg.sweep, *classifier, split.inner);
            const auto preds = peak_points(res.peaks);
            curves[i] = curve(preds, item.annotations, cfg.thresholds, cfg.duplicates);
            headline[i] = curve(preds, item.annotations, {1.0, 2.0}, cfg.duplicates);
            const fs::path base = fs::path(cfg.out) / item.image_path.stem();
            detail::write_text(base.string() + ".peaks.json", detail::peaks_text(res.peaks));
            write_metrics_csv(curves[i], base.string() + ".metrics.csv");
        });
    });
    const int code = detail::report_outcomes(outcomes, err);
    if (code != kExitOk) return code;

    const MetricCurve agg = aggregate(curves, cfg.thresholds);
    const auto written = detail::guarded(
        [&] { write_metrics_csv(agg, (fs::path(cfg.out) / "aggregate.csv").string()); });
    if (!written.ok) return detail::report_outcomes({written}, err);

    // headline numbers at normalised distance 1 and 2, whatever the grid is
    const MetricCurve head = aggregate(headline, {1.0, 2.0});
    out << "images: " << dataset.size() << '\n';
    for (const auto& r : head.reports) {
        out << "threshold " << format_number(r.threshold) << ": F1 " << format_number(r.f1)
            << "  F2 " << format_number(r.f2) << "  (tp " << r.tp << ", fp " << r.fp << ", fn "
            << r.fn << ")\n";
    }
    if (summary) {
        summary->aggregate = agg;
        summary->per_image = std::move(curves);
    }
    return kExitOk;
}

inline std::string sweep_file_name(int win, int step, double sigma, double hmt) {
    return "sweep_win" + std::to_string(win) + "_step" + std::to_string(step) + "_sigma" +
           format_number(sigma) + "_h" + format_number(hmt) + ".csv";
}

/// Runs every (win, step, sigma, h) combination of the grid over a dataset.
/// One aggregate CSV per combination plus index.csv summarising them.
inline int cmd_sweep(const RunConfig& cfg, const std::string& root, std::ostream& out,
                     std::ostream& err) {
    std::vector<AnnotatedImage> dataset;
    std::optional<ClassifierSource> source;
    const auto setup = detail::guarded([&] {
        cfg.validate();
        for (double s : cfg.grid.sigmas)
            if (!(s > 0)) throw ConfigError("sweep sigma values must be > 0");
        for (double h : cfg.grid.hmts)
            if (!(h > 0)) throw ConfigError("sweep hmt values must be > 0");
        for (int v : cfg.grid.wins)
            if (v < 1) throw ConfigError("sweep window sizes must be >= 1");
        for (int v : cfg.grid.steps)
            if (v < 1) throw ConfigError("sweep steps must be >= 1");
        source.emplace(cfg);
        dataset = load_dataset(root, cfg.workers);
        fs::create_directories(cfg.out);
    });
    if (!setup.ok) return detail::report_outcomes({setup}, err);

    const auto& g = cfg.grid;
    const std::size_t n_win = g.wins.size() * g.steps.size();
    const std::size_t n_peak = g.sigmas.size() * g.hmts.size();
    const std::size_t n_combo = n_win * n_peak;
    // curves[combo][image]
    std::vector<std::vector<MetricCurve>> curves(n_combo, std::vector<MetricCurve>(dataset.size()));

    const auto split = detail::split_workers(cfg.workers, dataset.size());
    std::vector<detail::ItemOutcome> outcomes(dataset.size());
    parallel_for(dataset.size(), split.outer, [&](std::size_t i) {
        outcomes[i] = detail::guarded([&] {
            const AnnotatedImage& item = dataset[i];
            const RgbImage rgb = read_rgb(item.image_path.string());
            const auto classifier = source->for_annotations(item.annotations);
            const GrayImage smoothed = bilateral_filter(to_grayscale(rgb), cfg.sweep.bilateral, split.inner);
            for (std::size_t wi = 0; wi < g.wins.size(); ++wi) {
                for (std::size_t si = 0; si < g.steps.size(); ++si) {
                    SweepConfig sc = cfg.sweep;
                    sc.win_h = sc.win_w = g.wins[wi];
                    sc.istep = sc.jstep = g.steps[si];
                    const Heatmap norm = normalize(sweep_windows(smoothed, sc, *classifier, split.inner));
                    for (std::size_t gi = 0; gi < g.sigmas.size(); ++gi) {
                        for (std::size_t hi = 0; hi < g.hmts.size(); ++hi) {
                            sc.gaussian_sigma = g.sigmas[gi];
                            sc.hmt_threshold = g.hmts[hi];
                            const PeakSet peaks = find_peaks(norm, sc, split.inner);
                            const std::size_t combo =
                                ((wi * g.steps.size() + si) * g.sigmas.size() + gi) * g.hmts.size() + hi;
                            curves[combo][i] = curve(peak_points(peaks), item.annotations,
                                                     cfg.thresholds, cfg.duplicates);
                        }
                    }
                }
            }
        });
    });
    const int code = detail::report_outcomes(outcomes, err);
    if (code != kExitOk) return code;

    const auto written = detail::guarded([&] {
        std::ostringstream index;
        index << "win,step,sigma,hmt,file,f1_at_1,f2_at_1,f1_at_2,f2_at_2\n";
        for (std::size_t wi = 0; wi < g.wins.size(); ++wi)
            for (std::size_t si = 0; si < g.steps.size(); ++si)
                for (std::size_t gi = 0; gi < g.sigmas.size(); ++gi)
                    for (std::size_t hi = 0; hi < g.hmts.size(); ++hi) {
                        const std::size_t combo =
                            ((wi * g.steps.size() + si) * g.sigmas.size() + gi) * g.hmts.size() + hi;
                        const MetricCurve agg = aggregate(curves[combo], cfg.thresholds);
                        const std::string name =
                            sweep_file_name(g.wins[wi], g.steps[si], g.sigmas[gi], g.hmts[hi]);
                        write_metrics_csv(agg, (fs::path(cfg.out) / name).string());
                        auto at = [&](double t) -> const MatchReport* {
                            for (const auto& r : agg.reports)
                                if (r.threshold == t) return &r;
                            return nullptr;
                        };
                        auto fmt = [&](const MatchReport* r, bool f2) {
                            return r ? format_number(f2 ? r->f2 : r->f1) : std::string();
                        };
                        index << g.wins[wi] << ',' << g.steps[si] << ',' << format_number(g.sigmas[gi])
                              << ',' << format_number(g.hmts[hi]) << ',' << name << ','
                              << fmt(at(1.0), false) << ',' << fmt(at(1.0), true) << ','
                              << fmt(at(2.0), false) << ',' << fmt(at(2.0), true) << '\n';
                    }
        detail::write_text(fs::path(cfg.out) / "index.csv", index.str());
    });
    if (!written.ok) return detail::report_outcomes({written}, err);
    out << "combinations: " << n_combo << ", images: " << dataset.size() << '\n';
    return kExitOk;
}

inline std::vector<fs::path> list_images(const fs::path& dir) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && is_image_file(e.path())) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Trains a forest from <samples>/artcode/* (label 1) and <samples>/non_artcode/*
/// (label 0) and writes the model file. Prints the training accuracy.
inline int cmd_train(const RunConfig& cfg, const std::string& samples_dir, const std::string& model_path,
                     std::ostream& out, std::ostream& err) {
    std::vector<fs::path> files;
    std::vector<int> labels;
    const auto setup = detail::guarded([&] {
        cfg.validate();
        if (!fs::is_directory(samples_dir)) {
            throw InvalidArgument("samples directory does not exist: " + samples_dir);
        }
        for (int label : {1, 0}) {
            for (const auto& p : list_images(fs::path(samples_dir) / (label ? "artcode" : "non_artcode"))) {
                files.push_back(p);
                labels.push_back(label);
            }
        }
    });
    if (!setup.ok) return detail::report_outcomes({setup}, err);

    std::vector<LabeledSample> samples(files.size());
    std::vector<detail::ItemOutcome> outcomes(files.size());
    parallel_for(files.size(), cfg.workers, [&](std::size_t i) {
        outcomes[i] = detail::guarded([&] {
            const GrayImage gray = to_grayscale(read_rgb(files[i].string()));
            samples[i] = {window_features(GrayView(gray), cfg.features), labels[i]};
        });
    });
    if (int code = detail::report_outcomes(outcomes, err); code != kExitOk) return code;

    TreeEnsembleModel model;
    const auto trained = detail::guarded([&] {
        model = train(samples, cfg.train.n_trees, cfg.train.max_depth, cfg.seed, cfg.features);
        const fs::path parent = fs::path(model_path).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
        save_model(model, model_path);
    });
    if (!trained.ok) return detail::report_outcomes({trained}, err);

    std::size_t correct = 0;
    for (const auto& s : samples) correct += classify(model, s.features).klass == s.label;
    out << "samples: " << samples.size() << " (" << std::count(labels.begin(), labels.end(), 1)
        << " artcode)\n";
    out << "training accuracy: " << format_number(static_cast<double>(correct) / samples.size()) << '\n';
    return kExitOk;
}

/// Number of markers for scene `index` of a synth run.
inline int scene_marker_count(const SynthParams& p, std::uint64_t seed) {
    Rng rng(seed, 3);
    const int span = std::max(0, p.max_markers - p.min_markers);
    return p.min_markers + static_cast<int>(rng.below(static_cast<std::uint64_t>(span) + 1));
}

/// Writes `count` synthetic scenes (scene_000.png/json, ...) seeded seed, seed+1, ...
/// With training_samples, also writes labelled window crops under train/.
inline int cmd_synth(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto& p = cfg.synth;
    const auto setup = detail::guarded([&] {
        cfg.validate();
        if (p.count < 1) throw ConfigError("synth count must be >= 1");
        if (p.min_markers < 0 || p.max_markers < p.min_markers) {
            throw ConfigError("synth marker range must satisfy 0 <= min <= max");
        }
        fs::create_directories(cfg.out);
    });
    if (!setup.ok) return detail::report_outcomes({setup}, err);

    std::vector<detail::ItemOutcome> outcomes(p.count);
    parallel_for(static_cast<std::size_t>(p.count), cfg.workers, [&](std::size_t i) {
        outcomes[i] = detail::guarded([&] {
            const std::uint64_t seed = cfg.seed + i;
            char name[32];
            std::snprintf(name, sizeof name, "scene_%03zu", i);
            const SyntheticScene scene = generate_scene(p.width, p.height, scene_marker_count(p, seed),
                                                        p.min_radius, p.max_radius, seed);
            save_scene(scene, cfg.out, name);
            if (!p.training_samples) return;

            const GrayImage smoothed = bilateral_filter(to_grayscale(scene.image), cfg.sweep.bilateral);
            const OracleGroundTruth truth{scene.annotations, cfg.overlap_fraction};
            const auto windows = window_positions(smoothed.height(), smoothed.width(), cfg.sweep);
            Rng rng(seed, 4);
            const fs::path train_dir = fs::path(cfg.out) / "train";
            fs::create_directories(train_dir / "artcode");
            fs::create_directories(train_dir / "non_artcode");
            constexpr int kCropsPerScene = 40;
            for (int k = 0; k < kCropsPerScene; ++k) {
                const Rect& r = windows[rng.below(windows.size())];
                const int label = oracle_classify(truth, r).klass;
                const GrayImage crop = resize_bilinear(GrayView(smoothed, r), cfg.features.resize,
                                                       cfg.features.resize);
                const fs::path file = train_dir / (label ? "artcode" : "non_artcode") /
                                      (std::string(name) + "_" + std::to_string(k) + ".png");
                write_gray(file.string(), crop);
            }
        });
    });
    if (int code = detail::report_outcomes(outcomes, err); code != kExitOk) return code;
    out << "wrote " << p.count << " scenes to " << cfg.out << '\n';
    return kExitOk;
}

}  // namespace visionguide
