#include <gtest/gtest.h>

#include "temp_dir.hpp"
#include "visionguide/config.hpp"

using namespace visionguide;
using testutil::TempDir;

TEST(Config, DefaultsAreReferenceConfiguration) {
    const RunConfig c;
    EXPECT_EQ(c.sweep.win_h, 800);
    EXPECT_EQ(c.sweep.win_w, 800);
    EXPECT_EQ(c.sweep.istep, 40);
    EXPECT_EQ(c.sweep.jstep, 40);
    EXPECT_EQ(c.sweep.gaussian_sigma, 10.0);
    EXPECT_EQ(c.sweep.hmt_threshold, 10.0);
    EXPECT_EQ(c.sweep.bilateral.spatial_sigma, 3.0);
    EXPECT_EQ(c.sweep.bilateral.range_sigma, 50.0);
    EXPECT_EQ(c.sweep.bilateral.neighborhood_radius, 5);
    EXPECT_EQ(c.overlap_fraction, 0.25);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, JsonOverridesFields) {
    RunConfig c;
    apply_config_json(c, nlohmann::json::parse(R"({
        "win": 400, "jstep": 20, "sigma": 5, "hmt": 15,
        "bilateral": {"range_sigma": 30},
        "thresholds": [0.5, 1.0], "workers": 3, "duplicates": "first",
        "features": {"n_bins": 6}, "sweep": {"win": [200]}, "train": {"trees": 7}
    })"));
    EXPECT_EQ(c.sweep.win_h, 400);
    EXPECT_EQ(c.sweep.win_w, 400);
    EXPECT_EQ(c.sweep.istep, 40);
    EXPECT_EQ(c.sweep.jstep, 20);
    EXPECT_EQ(c.sweep.gaussian_sigma, 5.0);
    EXPECT_EQ(c.sweep.hmt_threshold, 15.0);
    EXPECT_EQ(c.sweep.bilateral.range_sigma, 30.0);
    EXPECT_EQ(c.thresholds, (std::vector<double>{0.5, 1.0}));
    EXPECT_EQ(c.workers, 3);
    EXPECT_EQ(c.duplicates, DuplicatePolicy::FirstOnly);
    EXPECT_EQ(c.features.n_bins, 6);
    EXPECT_TRUE(c.features_explicit);
    EXPECT_EQ(c.grid.wins, (std::vector<int>{200}));
    EXPECT_EQ(c.train.n_trees, 7);
}

TEST(Config, RejectsUnknownKeysAndWrongTypes) {
    RunConfig c;
    EXPECT_THROW(apply_config_json(c, nlohmann::json::parse(R"({"windw": 3})")), ConfigError);
    EXPECT_THROW(apply_config_json(c, nlohmann::json::parse(R"({"bilateral": {"r": 3}})")), ConfigError);
    EXPECT_THROW(apply_config_json(c, nlohmann::json::parse(R"({"win": "big"})")), ConfigError);
    EXPECT_THROW(apply_config_json(c, nlohmann::json::parse(R"({"duplicates": "some"})")), ConfigError);
    EXPECT_THROW(apply_config_json(c, nlohmann::json::parse("[1]")), ConfigError);
}

TEST(Config, ValidateCatchesBadValues) {
    RunConfig c;
    c.thresholds = {};
    EXPECT_THROW(c.validate(), ConfigError);
    c = RunConfig{};
    c.thresholds = {1.0, 1.0};
    EXPECT_THROW(c.validate(), ConfigError);
    c = RunConfig{};
    c.workers = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = RunConfig{};
    c.sweep.istep = 0;
    EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Config, LoadFile) {
    TempDir dir;
    testutil::write_file(dir / "c.json", R"({"step": 20})");
    RunConfig c;
    load_config_file(c, (dir / "c.json").string());
    EXPECT_EQ(c.sweep.istep, 20);
    testutil::write_file(dir / "bad.json", "{");
    EXPECT_THROW(load_config_file(c, (dir / "bad.json").string()), ConfigError);
    EXPECT_THROW(load_config_file(c, (dir / "none.json").string()), ConfigError);
}

TEST(Config, RealLists) {
    EXPECT_EQ(parse_real_list("0.5,1,2"), (std::vector<double>{0.5, 1, 2}));
    EXPECT_TRUE(parse_real_list("").empty());
    EXPECT_THROW(parse_real_list("1,x"), ConfigError);
    EXPECT_THROW(parse_real_list("1.5abc"), ConfigError);
}
