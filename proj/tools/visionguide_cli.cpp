// visionguide: command-line front end for coarse-to-fine Artcode localisation.
//
//   visionguide localise  [flags] IMAGE...
//   visionguide evaluate  [flags] DATASET_DIR
//   visionguide sweep     [flags] DATASET_DIR
//   visionguide train     [flags] SAMPLES_DIR MODEL_OUT
//   visionguide synth     [flags]
//
// Settings come from defaults, then --config FILE (JSON), then flags.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "visionguide/commands.hpp"

namespace vg = visionguide;

namespace {

struct Flags {
    std::string config;
    std::optional<int> win;
    std::optional<int> step;
    std::optional<double> sigma;
    std::optional<double> hmt;
    std::optional<std::string> classifier;
    std::optional<std::string> thresholds;
    std::optional<std::string> out;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
    std::optional<double> overlap;
    std::optional<double> alpha;
    std::optional<std::string> duplicates;
    bool raw = false;
    // sweep grid
    std::optional<std::string> sweep_sigma, sweep_hmt, sweep_win, sweep_step;
    // train
    std::optional<int> trees, max_depth;
    // synth
    std::optional<int> count, width, height, min_markers, max_markers;
    std::optional<double> min_radius, max_radius;
    bool training_samples = false;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--win", f.win, "square sliding window size (px)");
    cmd->add_option("--step", f.step, "window step along rows and columns (px)");
    cmd->add_option("--sigma", f.sigma, "Gaussian sigma for heatmap smoothing");
    cmd->add_option("--hmt", f.hmt, "H-maxima threshold on the 0-255 scale");
    cmd->add_option("--classifier", f.classifier, "'oracle' or a model file");
    cmd->add_option("--thresholds", f.thresholds, "comma-separated normalised distances");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--workers", f.workers, "worker threads");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--overlap", f.overlap, "oracle overlap fraction");
    cmd->add_option("--alpha", f.alpha, "heatmap overlay opacity");
    cmd->add_option("--duplicates", f.duplicates, "'all' or 'first' duplicate-match counting");
}

std::vector<int> to_ints(const std::vector<double>& v) {
    std::vector<int> out;
    for (double d : v) out.push_back(static_cast<int>(d));
    return out;
}

vg::RunConfig resolve(const Flags& f) {
    vg::RunConfig cfg;
    if (!f.config.empty()) vg::load_config_file(cfg, f.config);
    if (f.win) cfg.sweep.win_h = cfg.sweep.win_w = *f.win;
    if (f.step) cfg.sweep.istep = cfg.sweep.jstep = *f.step;
    if (f.sigma) cfg.sweep.gaussian_sigma = *f.sigma;
    if (f.hmt) cfg.sweep.hmt_threshold = *f.hmt;
    if (f.classifier) cfg.classifier = *f.classifier;
    if (f.thresholds) cfg.thresholds = vg::parse_real_list(*f.thresholds);
    if (f.out) cfg.out = *f.out;
    if (f.workers) cfg.workers = *f.workers;
    if (f.seed) cfg.seed = *f.seed;
    if (f.overlap) cfg.overlap_fraction = *f.overlap;
    if (f.alpha) cfg.alpha = *f.alpha;
    if (f.duplicates) cfg.duplicates = vg::detail::parse_duplicates(*f.duplicates);
    if (f.raw) cfg.raw_heatmap = true;
    if (f.sweep_sigma) cfg.grid.sigmas = vg::parse_real_list(*f.sweep_sigma);
    if (f.sweep_hmt) cfg.grid.hmts = vg::parse_real_list(*f.sweep_hmt);
    if (f.sweep_win) cfg.grid.wins = to_ints(vg::parse_real_list(*f.sweep_win));
    if (f.sweep_step) cfg.grid.steps = to_ints(vg::parse_real_list(*f.sweep_step));
    if (f.trees) cfg.train.n_trees = *f.trees;
    if (f.max_depth) cfg.train.max_depth = *f.max_depth;
    if (f.count) cfg.synth.count = *f.count;
    if (f.width) cfg.synth.width = *f.width;
    if (f.height) cfg.synth.height = *f.height;
    if (f.min_markers) cfg.synth.min_markers = *f.min_markers;
    if (f.max_markers) cfg.synth.max_markers = *f.max_markers;
    if (f.min_radius) cfg.synth.min_radius = *f.min_radius;
    if (f.max_radius) cfg.synth.max_radius = *f.max_radius;
    if (f.training_samples) cfg.synth.training_samples = true;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coarse-to-fine Artcode localisation"};
    app.require_subcommand(1);
    Flags f;

    std::vector<std::string> images;
    auto* localise = app.add_subcommand("localise", "heatmap, overlay and peaks for each image");
    add_common(localise, f);
    localise->add_flag("--raw", f.raw, "also write the raw float heatmap (.vgf)");
    localise->add_option("images", images, "input images")->required();

    std::string dataset;
    auto* evaluate = app.add_subcommand("evaluate", "localise and score a dataset");
    add_common(evaluate, f);
    evaluate->add_option("dataset", dataset, "dataset directory")->required();

    auto* sweep = app.add_subcommand("sweep", "evaluate a grid of parameter combinations");
    add_common(sweep, f);
    sweep->add_option("dataset", dataset, "dataset directory")->required();
    sweep->add_option("--sweep-sigma", f.sweep_sigma, "sigma values, comma-separated");
    sweep->add_option("--sweep-hmt", f.sweep_hmt, "H-maxima thresholds, comma-separated");
    sweep->add_option("--sweep-win", f.sweep_win, "window sizes, comma-separated");
    sweep->add_option("--sweep-step", f.sweep_step, "window steps, comma-separated");

    std::string samples, model_out;
    auto* train = app.add_subcommand("train", "train a window classifier");
    add_common(train, f);
    train->add_option("samples", samples, "directory with artcode/ and non_artcode/")->required();
    train->add_option("model", model_out, "model file to write")->required();
    train->add_option("--trees", f.trees, "number of trees");
    train->add_option("--max-depth", f.max_depth, "maximum tree depth");

    auto* synth = app.add_subcommand("synth", "generate synthetic annotated scenes");
    add_common(synth, f);
    synth->add_option("--count", f.count, "number of scenes");
    synth->add_option("--width", f.width, "canvas width");
    synth->add_option("--height", f.height, "canvas height");
    synth->add_option("--min-markers", f.min_markers, "minimum markers per scene");
    synth->add_option("--max-markers", f.max_markers, "maximum markers per scene");
    synth->add_option("--min-radius", f.min_radius, "minimum marker radius");
    synth->add_option("--max-radius", f.max_radius, "maximum marker radius");
    synth->add_flag("--training-samples", f.training_samples, "also write labelled window crops");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : vg::kExitInput;
    }

    vg::RunConfig cfg;
    try {
        cfg = resolve(f);
    } catch (const vg::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return vg::kExitInput;
    }

    try {
        if (*localise) return vg::cmd_localise(cfg, images, std::cout, std::cerr);
        if (*evaluate) return vg::cmd_evaluate(cfg, dataset, std::cout, std::cerr);
        if (*sweep) return vg::cmd_sweep(cfg, dataset, std::cout, std::cerr);
        if (*train) return vg::cmd_train(cfg, samples, model_out, std::cout, std::cerr);
        if (*synth) return vg::cmd_synth(cfg, std::cout, std::cerr);
    } catch (const vg::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return vg::kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return vg::kExitInternal;
    }
    return vg::kExitInternal;
}
