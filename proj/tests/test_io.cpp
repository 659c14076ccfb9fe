#include <gtest/gtest.h>

#include "temp_dir.hpp"
#include "visionguide/image_io.hpp"
#include "visionguide/random.hpp"

using namespace visionguide;
using testutil::TempDir;

TEST(ImageIo, PngRoundTripKeepsChannelOrder) {
    TempDir dir;
    RgbImage img(5, 3);
    img(0, 0) = {255, 0, 0};
    img(2, 4) = {0, 10, 200};
    write_rgb((dir / "x.png").string(), img);
    EXPECT_EQ(read_rgb((dir / "x.png").string()), img);
    EXPECT_THROW(read_rgb((dir / "none.png").string()), ImageIoError);
}

TEST(ImageIo, GrayIsQuantised) {
    TempDir dir;
    Grid<double> g(3, 1, std::vector<double>{-4.0, 127.5, 300.0});
    write_gray((dir / "g.png").string(), g);
    const RgbImage back = read_rgb((dir / "g.png").string());
    EXPECT_EQ(back(0, 0), (Rgb{0, 0, 0}));
    EXPECT_EQ(back(0, 1), (Rgb{128, 128, 128}));
    EXPECT_EQ(back(0, 2), (Rgb{255, 255, 255}));
}

TEST(RawHeatmap, RoundTripAtSinglePrecision) {
    TempDir dir;
    Rng rng(1);
    Heatmap h(7, 4);
    for (double& v : h.pixels()) v = rng.uniform(0, 1000);
    write_raw((dir / "h.vgf").string(), h);
    const Heatmap back = read_raw((dir / "h.vgf").string());
    ASSERT_TRUE(back.same_shape(h));
    for (std::size_t i = 0; i < h.size(); ++i) EXPECT_EQ(back.pixels()[i], static_cast<float>(h.pixels()[i]));
    EXPECT_EQ(std::filesystem::file_size(dir / "h.vgf"), 12u + 7 * 4 * 4);
}

TEST(RawHeatmap, RejectsBadFiles) {
    TempDir dir;
    testutil::write_file(dir / "bad.vgf", "XXXX0000");
    EXPECT_THROW(read_raw((dir / "bad.vgf").string()), ImageIoError);
    Heatmap h(4, 4, 1.0);
    write_raw((dir / "t.vgf").string(), h);
    std::filesystem::resize_file(dir / "t.vgf", 20);
    EXPECT_THROW(read_raw((dir / "t.vgf").string()), ImageIoError);
}

TEST(Grid, RejectsEmptyShapes) {
    EXPECT_THROW(Grid<double>(0, 3), InvalidArgument);
    EXPECT_THROW(Grid<double>(2, 2, std::vector<double>{1.0}), DimensionMismatch);
}
