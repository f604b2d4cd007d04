#pragma once

#include "sia/error.hpp"

namespace sia {

/// Axis-aligned box in image units; (x, y) is the top-left corner.
/// Width and height must be strictly positive.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double x2() const { return x + w; }
    double y2() const { return y + h; }
    double area() const { return w * h; }

    void validate() const;
};

/// Box plus the localization confidence attached to it upstream.
struct RegionProposal {
    BoundingBox box;
    double score_l = 1.0;

    void validate() const;
};

/// Builds a box from corner format (x1, y1, x2, y2); for I/O boundaries only.
BoundingBox box_from_corners(double x1, double y1, double x2, double y2);

/// Height divided by width.
double aspect_ratio(const BoundingBox& box);

/// Intersection-over-union in [0, 1]. Boxes touching only along an edge or
/// corner intersect with zero area and score 0.
double iou(const BoundingBox& a, const BoundingBox& b);

} // namespace sia
