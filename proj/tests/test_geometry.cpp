#include <cmath>
#include <limits>

#include "doctest.h"

#include "sia/geometry.hpp"

using namespace sia;

TEST_CASE("box validation accepts positive extents and rejects the rest") {
    CHECK_NOTHROW(BoundingBox{0.0, 0.0, 1.0, 2.0}.validate());
    CHECK_NOTHROW(BoundingBox{-5.0, -1.0, 0.25, 0.1}.validate());
    CHECK_THROWS_AS((BoundingBox{0.0, 0.0, 0.0, 1.0}.validate()), ValidationError);
    CHECK_THROWS_AS((BoundingBox{0.0, 0.0, 1.0, -1.0}.validate()), ValidationError);
    CHECK_THROWS_AS((BoundingBox{std::nan(""), 0.0, 1.0, 1.0}.validate()), ValidationError);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS((BoundingBox{0.0, 0.0, inf, 1.0}.validate()), ValidationError);
}

TEST_CASE("corner construction and derived quantities") {
    const BoundingBox b = box_from_corners(1.0, 2.0, 4.0, 8.0);
    CHECK(b.x == 1.0);
    CHECK(b.y == 2.0);
    CHECK(b.w == 3.0);
    CHECK(b.h == 6.0);
    CHECK(b.x2() == 4.0);
    CHECK(b.y2() == 8.0);
    CHECK(b.area() == 18.0);
    CHECK(aspect_ratio(b) == 2.0);
    CHECK_THROWS_AS(box_from_corners(4.0, 0.0, 1.0, 1.0), ValidationError);
}

TEST_CASE("proposal score must be a confidence") {
    RegionProposal p{{0.0, 0.0, 1.0, 1.0}, 0.5};
    CHECK_NOTHROW(p.validate());
    p.score_l = 1.5;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.score_l = -0.1;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("iou on hand cases") {
    const BoundingBox a{0.0, 0.0, 2.0, 2.0};
    CHECK(iou(a, a) == 1.0);

    // Shifted by half: intersection 1x2 = 2, union 8 - 2 = 6.
    CHECK(iou(a, BoundingBox{1.0, 0.0, 2.0, 2.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    // Nested quarter.
    CHECK(iou(BoundingBox{0.0, 0.0, 4.0, 4.0}, BoundingBox{1.0, 1.0, 2.0, 2.0}) ==
          doctest::Approx(0.25).epsilon(1e-15));

    // Disjoint, edge contact, corner contact all score zero.
    CHECK(iou(a, BoundingBox{5.0, 5.0, 1.0, 1.0}) == 0.0);
    CHECK(iou(a, BoundingBox{2.0, 0.0, 2.0, 2.0}) == 0.0);
    CHECK(iou(a, BoundingBox{2.0, 2.0, 1.0, 1.0}) == 0.0);

    CHECK(iou(a, BoundingBox{1.0, 0.0, 2.0, 2.0}) == iou(BoundingBox{1.0, 0.0, 2.0, 2.0}, a));
}
