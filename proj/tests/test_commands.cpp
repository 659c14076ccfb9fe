#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <sstream>

#include "temp_dir.hpp"
#include "visionguide/commands.hpp"

using namespace visionguide;
using testutil::read_file;
using testutil::TempDir;

namespace {

// Small geometry so a full localise runs in well under a second.
RunConfig small_config(const fs::path& out) {
    RunConfig c;
    c.sweep.win_h = c.sweep.win_w = 160;
    c.sweep.istep = c.sweep.jstep = 20;
    c.sweep.gaussian_sigma = 5;
    c.sweep.bilateral.neighborhood_radius = 2;
    c.out = out.string();
    c.thresholds = {0.5, 1.0, 2.0};
    return c;
}

// One marker in the middle of a 480x480 scene.
void write_centred_scene(const fs::path& dir, const std::string& name, std::uint64_t seed) {
    SyntheticScene s = generate_scene(480, 480, 0, 0, 0, seed);
    const CircleAnnotation a{239.5 + static_cast<double>(seed % 5), 239.5, 45.0 + static_cast<double>(seed)};
    Rng rng(seed);
    detail::draw_marker(s.image, a, rng);
    s.annotations = {a};
    save_scene(s, dir, name);
}

void write_sample(const fs::path& p, bool striped, int variant) {
    RgbImage img(32, 32);
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) {
            const auto v = striped ? static_cast<std::uint8_t>(((c + variant) / 3) % 2 ? 230 : 20)
                                   : static_cast<std::uint8_t>(100 + variant);
            img(r, c) = {v, v, v};
        }
    fs::create_directories(p.parent_path());
    write_rgb(p.string(), img);
}

void write_toy_samples(const fs::path& dir, bool with_negatives) {
    for (int i = 0; i < 6; ++i) {
        write_sample(dir / "artcode" / ("p" + std::to_string(i) + ".png"), true, i);
        if (with_negatives) write_sample(dir / "non_artcode" / ("n" + std::to_string(i) + ".png"), false, i);
    }
}

#ifdef VISIONGUIDE_CLI_PATH
int run_cli(const std::string& args) {
    const std::string cmd = std::string(VISIONGUIDE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

}  // namespace

TEST(Localise, WritesThreeOutputsPerImage) {
    TempDir dir;
    write_centred_scene(dir / "in", "scene", 1);
    RunConfig c = small_config(dir / "out");
    std::ostringstream out, err;
    ASSERT_EQ(cmd_localise(c, {(dir / "in" / "scene.png").string()}, out, err), kExitOk) << err.str();
    for (const char* suffix : {".heatmap.png", ".fused.png", ".peaks.json"}) {
        EXPECT_TRUE(fs::exists(dir / "out" / (std::string("scene") + suffix))) << suffix;
    }
    EXPECT_FALSE(fs::exists(dir / "out" / "scene.heatmap.vgf"));

    const auto peaks = parse_peaks_json(read_file(dir / "out" / "scene.peaks.json"), "peaks");
    const auto anns = read_annotations((dir / "in" / "scene.json").string());
    ASSERT_FALSE(peaks.empty());
    for (const auto& p : peaks) EXPECT_LE(normalized_distance(p, anns[0]), 1.0);
}

TEST(Localise, MissingInputIsReportedAndOthersStillRun) {
    TempDir dir;
    write_centred_scene(dir / "in", "good", 2);
    RunConfig c = small_config(dir / "out");
    c.raw_heatmap = true;
    std::ostringstream out, err;
    const std::string missing = (dir / "in" / "nope.png").string();
    EXPECT_EQ(cmd_localise(c, {missing, (dir / "in" / "good.png").string()}, out, err), kExitInput);
    EXPECT_NE(err.str().find("nope.png"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "out" / "good.peaks.json"));
    EXPECT_TRUE(fs::exists(dir / "out" / "good.heatmap.vgf"));
}

TEST(Localise, DeterministicAcrossWorkerCounts) {
    TempDir dir;
    write_centred_scene(dir / "in", "a", 3);
    write_centred_scene(dir / "in", "b", 4);
    const std::vector<std::string> imgs{(dir / "in" / "a.png").string(), (dir / "in" / "b.png").string()};
    RunConfig one = small_config(dir / "w1");
    RunConfig many = small_config(dir / "w4");
    one.raw_heatmap = many.raw_heatmap = true;
    many.workers = 4;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_localise(one, imgs, out, err), kExitOk);
    ASSERT_EQ(cmd_localise(many, imgs, out, err), kExitOk);
    for (const char* f : {"a.peaks.json", "b.peaks.json", "a.heatmap.vgf", "b.heatmap.vgf", "a.fused.png"}) {
        EXPECT_EQ(read_file(dir / "w1" / f), read_file(dir / "w4" / f)) << f;
    }
}

TEST(Evaluate, CentredScenesAreRecovered) {
    TempDir dir;
    for (int i = 0; i < 5; ++i) write_centred_scene(dir / "data", "s" + std::to_string(i), 10 + i);
    RunConfig c = small_config(dir / "out");
    std::ostringstream out, err;
    EvaluationSummary summary;
    ASSERT_EQ(cmd_evaluate(c, (dir / "data").string(), out, err, &summary), kExitOk) << err.str();
    ASSERT_EQ(summary.per_image.size(), 5u);
    EXPECT_GE(summary.aggregate.reports[1].recall, 0.95);
    EXPECT_TRUE(fs::exists(dir / "out" / "aggregate.csv"));
    EXPECT_TRUE(fs::exists(dir / "out" / "s0.metrics.csv"));
    EXPECT_NE(out.str().find("threshold 1: F1"), std::string::npos);
    EXPECT_NE(out.str().find("threshold 2: F1"), std::string::npos);
}

TEST(Evaluate, ConfigAndDatasetErrors) {
    TempDir dir;
    RunConfig c = small_config(dir / "out");
    c.thresholds = {};
    std::ostringstream out, err;
    EXPECT_EQ(cmd_evaluate(c, dir.path().string(), out, err), kExitInput);
    EXPECT_FALSE(fs::exists(dir / "out"));
    c = small_config(dir / "out");
    EXPECT_EQ(cmd_evaluate(c, (dir / "missing").string(), out, err), kExitInput);
    write_rgb((dir / "lonely.png").string(), RgbImage(4, 4));
    EXPECT_EQ(cmd_evaluate(c, dir.path().string(), out, err), kExitInput);
}

TEST(Sweep, OneCsvPerCombination) {
    TempDir dir;
    write_centred_scene(dir / "data", "s", 7);
    RunConfig c = small_config(dir / "out");
    c.grid.sigmas = {3, 5};
    c.grid.hmts = {5, 10};
    c.grid.wins = {160};
    c.grid.steps = {20, 40};
    std::ostringstream out, err;
    ASSERT_EQ(cmd_sweep(c, (dir / "data").string(), out, err), kExitOk) << err.str();
    int csvs = 0;
    for (const auto& e : fs::directory_iterator(dir / "out")) csvs += e.path().filename().string().rfind("sweep_", 0) == 0;
    EXPECT_EQ(csvs, 8);
    EXPECT_TRUE(fs::exists(dir / "out" / sweep_file_name(160, 40, 5, 10)));
    EXPECT_EQ(sweep_file_name(800, 40, 10, 10), "sweep_win800_step40_sigma10_h10.csv");
    const std::string index = read_file(dir / "out" / "index.csv");
    EXPECT_EQ(std::count(index.begin(), index.end(), '\n'), 9);
}

TEST(Sweep, MatchesEvaluateForTheSameCombination) {
    TempDir dir;
    write_centred_scene(dir / "data", "s", 8);
    RunConfig c = small_config(dir / "sweep");
    c.grid.sigmas = {5};
    c.grid.hmts = {10};
    c.grid.wins = {160};
    c.grid.steps = {20};
    std::ostringstream out, err;
    ASSERT_EQ(cmd_sweep(c, (dir / "data").string(), out, err), kExitOk);
    c.out = (dir / "eval").string();
    ASSERT_EQ(cmd_evaluate(c, (dir / "data").string(), out, err), kExitOk);
    EXPECT_EQ(read_file(dir / "sweep" / sweep_file_name(160, 20, 5, 10)), read_file(dir / "eval" / "aggregate.csv"));
}

TEST(Train, SeparableSetReachesFullAccuracy) {
    TempDir dir;
    write_toy_samples(dir / "samples", true);
    RunConfig c;
    c.train.n_trees = 5;
    c.train.max_depth = 4;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_train(c, (dir / "samples").string(), (dir / "m1.txt").string(), out, err), kExitOk) << err.str();
    EXPECT_NE(out.str().find("training accuracy: 1\n"), std::string::npos) << out.str();
    ASSERT_EQ(cmd_train(c, (dir / "samples").string(), (dir / "m2.txt").string(), out, err), kExitOk);
    EXPECT_EQ(read_file(dir / "m1.txt"), read_file(dir / "m2.txt"));

    const TreeEnsembleModel m = load_model((dir / "m1.txt").string());
    const ForestClassifier clf(m);
    RgbImage probe(32, 32);
    for (int r = 0; r < 32; ++r)
        for (int col = 0; col < 32; ++col) {
            const std::uint8_t v = (col / 3) % 2 ? 230 : 20;
            probe(r, col) = {v, v, v};
        }
    const GrayImage g = to_grayscale(probe);
    EXPECT_EQ(clf.classify(GrayView(g), Rect{0, 0, 32, 32}).klass, 1);
}

TEST(Train, SingleClassFails) {
    TempDir dir;
    write_toy_samples(dir / "samples", false);
    RunConfig c;
    std::ostringstream out, err;
    EXPECT_EQ(cmd_train(c, (dir / "samples").string(), (dir / "m.txt").string(), out, err), kExitInput);
    EXPECT_NE(err.str().find("single class"), std::string::npos);
}

TEST(Synth, WritesScenesAndTrainingCrops) {
    TempDir dir;
    RunConfig c = small_config(dir / "synth");
    c.synth.count = 2;
    c.synth.width = 480;
    c.synth.height = 400;
    c.synth.min_radius = 20;
    c.synth.max_radius = 40;
    c.synth.min_markers = 1;
    c.synth.max_markers = 2;
    c.synth.training_samples = true;
    c.features.resize = 32;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_synth(c, out, err), kExitOk) << err.str();
    const auto ds = load_dataset(dir / "synth");
    ASSERT_EQ(ds.size(), 2u);
    EXPECT_EQ(ds[0].width, 480);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        EXPECT_EQ(static_cast<int>(ds[i].annotations.size()), scene_marker_count(c.synth, i));
    }
    const std::size_t crops = list_images(dir / "synth" / "train" / "artcode").size() +
                              list_images(dir / "synth" / "train" / "non_artcode").size();
    EXPECT_EQ(crops, 80u);
}

#ifdef VISIONGUIDE_CLI_PATH
TEST(Cli, ExitCodes) {
    TempDir dir;
    const std::string out = " --out " + (dir / "out").string();
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli("localise " + (dir / "missing.png").string() + out), 1);
    EXPECT_EQ(run_cli("evaluate " + dir.path().string() + " --thresholds ''" + out), 1);
    EXPECT_EQ(run_cli("localise x.png --win 0" + out), 1);
    EXPECT_EQ(run_cli("bogus"), 1);
    write_toy_samples(dir / "one", false);
    EXPECT_EQ(run_cli("train " + (dir / "one").string() + " " + (dir / "m.txt").string()), 1);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
    TempDir dir;
    write_centred_scene(dir / "in", "s", 5);
    testutil::write_file(dir / "cfg.json", R"({"win": 160, "step": 20, "sigma": 5, "hmt": 400})");
    // hmt 400 in the file would be rejected by nothing but yields no peaks; the flag wins.
    const std::string base = "localise " + (dir / "in" / "s.png").string() + " --config " +
                             (dir / "cfg.json").string() + " --out " + (dir / "out").string();
    ASSERT_EQ(run_cli(base + " --hmt 10"), 0);
    EXPECT_FALSE(parse_peaks_json(read_file(dir / "out" / "s.peaks.json"), "p").empty());
    testutil::write_file(dir / "bad.json", R"({"wn": 1})");
    EXPECT_EQ(run_cli("localise x.png --config " + (dir / "bad.json").string()), 1);
}
#endif
