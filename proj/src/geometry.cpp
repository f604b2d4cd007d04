#include "sia/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace sia {

void BoundingBox::validate() const {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) || !std::isfinite(h))
        throw ValidationError("bounding box has a non-finite coordinate");
    if (w <= 0.0 || h <= 0.0)
        throw ValidationError("bounding box width and height must be positive");
}

void RegionProposal::validate() const {
    box.validate();
    if (!std::isfinite(score_l) || score_l < 0.0 || score_l > 1.0)
        throw ValidationError("proposal score_l must lie in [0, 1]");
}

BoundingBox box_from_corners(double x1, double y1, double x2, double y2) {
    BoundingBox b{x1, y1, x2 - x1, y2 - y1};
    b.validate();
    return b;
}

double aspect_ratio(const BoundingBox& box) {
    box.validate();
    return box.h / box.w;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    a.validate();
    b.validate();
    const double ix = std::max(0.0, std::min(a.x2(), b.x2()) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y2(), b.y2()) - std::max(a.y, b.y));
    const double inter = ix * iy;
    if (inter <= 0.0) return 0.0;
    const double uni = a.area() + b.area() - inter;
    return inter / uni;
}

} // namespace sia
