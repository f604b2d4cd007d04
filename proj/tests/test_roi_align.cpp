#include <cmath>
#include <vector>

#include "doctest.h"

#include "sia/feature_map.hpp"
#include "sia/rng.hpp"

using namespace sia;

namespace {

// Map whose value at cell (y, x) is a + b*(x + 0.5) + c*(y + 0.5), i.e. an
// affine function of the continuous coordinates of cell centers. Bilinear
// interpolation reproduces affine functions exactly away from the border.
FeatureMap affine_map(std::size_t channels, std::size_t h, std::size_t w, double scale,
                      double a, double b, double c) {
    FeatureMap map;
    map.channels = channels;
    map.height = h;
    map.width = w;
    map.spatial_scale = scale;
    map.data.resize(channels * h * w);
    for (std::size_t ch = 0; ch < channels; ++ch)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                map.at(ch, y, x) = a + b * (x + 0.5) + c * (y + 0.5);
    return map;
}

} // namespace

TEST_CASE("config and map validation") {
    RoiConfig cfg;
    CHECK(cfg.pool_size == 7);
    CHECK(cfg.samples_per_bin == 2);
    CHECK_NOTHROW(cfg.validate());
    cfg.pool_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);

    FeatureMap map = affine_map(1, 2, 2, 1.0, 1.0, 0.0, 0.0);
    CHECK_NOTHROW(map.validate());
    map.data.pop_back();
    CHECK_THROWS_AS(map.validate(), ValidationError);
    map = affine_map(1, 2, 2, -1.0, 1.0, 0.0, 0.0);
    CHECK_THROWS_AS(map.validate(), ValidationError);
}

TEST_CASE("constant map aligns to the constant") {
    const FeatureMap map = affine_map(2, 6, 6, 1.0, 3.25, 0.0, 0.0);
    const AlignedRoi roi = roi_align(map, BoundingBox{1.0, 1.0, 3.0, 2.5}, RoiConfig{});
    CHECK(roi.channels == 2);
    CHECK(roi.pool_size == 7);
    for (double v : roi.data) CHECK(v == doctest::Approx(3.25).epsilon(1e-15));
}

TEST_CASE("interior boxes reproduce affine maps exactly") {
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const double a = rng.uniform(-2.0, 2.0);
        const double b = rng.uniform(-1.0, 1.0);
        const double c = rng.uniform(-1.0, 1.0);
        const double scale = trial % 2 == 0 ? 1.0 : 0.5;
        const FeatureMap map = affine_map(1, 12, 12, scale, a, b, c);

        // Keep every sample at least one cell away from the border so no
        // zero-padding bleeds in (in feature units the map spans 12x12).
        const double span = 12.0 / scale;
        const double x1 = rng.uniform(1.5 / scale, span / 3.0);
        const double y1 = rng.uniform(1.5 / scale, span / 3.0);
        const double x2 = rng.uniform(span / 2.0, span - 1.5 / scale);
        const double y2 = rng.uniform(span / 2.0, span - 1.5 / scale);
        const BoundingBox box{x1, y1, x2 - x1, y2 - y1};

        RoiConfig cfg;
        const AlignedRoi roi = roi_align(map, box, cfg);
        const double bin_w = box.w * scale / cfg.pool_size;
        const double bin_h = box.h * scale / cfg.pool_size;
        for (std::size_t py = 0; py < cfg.pool_size; ++py) {
            for (std::size_t px = 0; px < cfg.pool_size; ++px) {
                const double cx = box.x * scale + (px + 0.5) * bin_w;
                const double cy = box.y * scale + (py + 0.5) * bin_h;
                const double expected = a + b * cx + c * cy;
                CHECK(std::fabs(roi.at(0, py, px) - expected) < 1e-6);
            }
        }
    }
}

TEST_CASE("samples beyond the border read zero") {
    // 1x1 map holding 8; a box hanging half off the left edge samples the
    // outside with zeros.
    FeatureMap map;
    map.channels = 1;
    map.height = 1;
    map.width = 1;
    map.data = {8.0};

    RoiConfig cfg;
    cfg.pool_size = 1;
    cfg.samples_per_bin = 1;

    // Box [-1, 1] x [0, 1]: the single sample sits at x = 0, y = 0.5, where
    // bilinear weight toward the lone cell center (0.5, 0.5) is 1/2.
    const AlignedRoi roi = roi_align(map, BoundingBox{-1.0, 0.0, 2.0, 1.0}, cfg);
    CHECK(roi.data.size() == 1);
    CHECK(roi.data[0] == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("a box entirely outside the map is rejected") {
    const FeatureMap map = affine_map(1, 4, 4, 1.0, 1.0, 0.0, 0.0);
    CHECK_THROWS_AS(roi_align(map, BoundingBox{10.0, 10.0, 2.0, 2.0}, RoiConfig{}),
                    ValidationError);
    // Same box in image units lands inside once the scale shrinks it.
    const FeatureMap half = affine_map(1, 4, 4, 0.25, 1.0, 0.0, 0.0);
    CHECK_NOTHROW(roi_align(half, BoundingBox{10.0, 10.0, 2.0, 2.0}, RoiConfig{}));
}

TEST_CASE("pooling averages the aligned grid per channel") {
    AlignedRoi roi;
    roi.channels = 2;
    roi.pool_size = 2;
    roi.data = {1.0, 2.0, 3.0, 4.0, 10.0, 20.0, 30.0, 40.0};
    const std::vector<double> pooled = pool_region_feature(roi);
    CHECK(pooled.size() == 2);
    CHECK(pooled[0] == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(pooled[1] == doctest::Approx(25.0).epsilon(1e-15));
}

TEST_CASE("extraction composes alignment and pooling") {
    const FeatureMap map = affine_map(3, 8, 8, 1.0, 0.5, 0.25, -0.125);
    const BoundingBox box{2.0, 2.0, 4.0, 3.0};
    const RoiConfig cfg;
    const std::vector<double> direct = extract_region_feature(map, box, cfg);
    const std::vector<double> staged = pool_region_feature(roi_align(map, box, cfg));
    CHECK(direct == staged);
    CHECK(direct.size() == 3);
}
