#include "sia/feature_map.hpp"

#include <cmath>

#include "sia/matrix.hpp"

namespace sia {

void FeatureMap::validate() const {
    if (channels == 0 || height == 0 || width == 0)
        throw ValidationError("feature map dimensions must be positive");
    if (!std::isfinite(spatial_scale) || spatial_scale <= 0.0)
        throw ValidationError("feature map spatial_scale must be positive");
    if (data.size() != channels * height * width)
        throw ValidationError("feature map payload size does not match its dimensions");
    if (!all_finite(data)) throw ValidationError("feature map contains non-finite values");
}

void RoiConfig::validate() const {
    if (pool_size == 0) throw ValidationError("pool_size must be positive");
    if (samples_per_bin == 0) throw ValidationError("samples_per_bin must be positive");
}

namespace {

// Bilinear read at continuous (u, v); cell centers sit at half-integer
// coordinates, anything past the border contributes zero.
double bilinear(const FeatureMap& map, std::size_t c, double u, double v) {
    const double fu = u - 0.5;
    const double fv = v - 0.5;
    const double fx = std::floor(fu);
    const double fy = std::floor(fv);
    const long x0 = static_cast<long>(fx);
    const long y0 = static_cast<long>(fy);
    const double ax = fu - fx;
    const double ay = fv - fy;
    const long w = static_cast<long>(map.width);
    const long h = static_cast<long>(map.height);

    double acc = 0.0;
    for (int dy = 0; dy <= 1; ++dy) {
        const long yy = y0 + dy;
        if (yy < 0 || yy >= h) continue;
        const double wy = dy ? ay : 1.0 - ay;
        for (int dx = 0; dx <= 1; ++dx) {
            const long xx = x0 + dx;
            if (xx < 0 || xx >= w) continue;
            const double wx = dx ? ax : 1.0 - ax;
            acc += wy * wx *
                   map.at(c, static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
        }
    }
    return acc;
}

} // namespace

AlignedRoi roi_align(const FeatureMap& map, const BoundingBox& box, const RoiConfig& cfg) {
    map.validate();
    box.validate();
    cfg.validate();

    const double s = map.spatial_scale;
    const double x1 = box.x * s;
    const double y1 = box.y * s;
    const double x2 = box.x2() * s;
    const double y2 = box.y2() * s;
    if (x2 <= 0.0 || y2 <= 0.0 || x1 >= static_cast<double>(map.width) ||
        y1 >= static_cast<double>(map.height))
        throw ValidationError("scaled box lies entirely outside the feature map");

    const std::size_t p = cfg.pool_size;
    const std::size_t ns = cfg.samples_per_bin;
    const double bin_w = (x2 - x1) / static_cast<double>(p);
    const double bin_h = (y2 - y1) / static_cast<double>(p);
    const double inv_count = 1.0 / static_cast<double>(ns * ns);

    AlignedRoi out;
    out.channels = map.channels;
    out.pool_size = p;
    out.data.assign(map.channels * p * p, 0.0);

    for (std::size_t c = 0; c < map.channels; ++c) {
        for (std::size_t py = 0; py < p; ++py) {
            for (std::size_t px = 0; px < p; ++px) {
                double acc = 0.0;
                for (std::size_t sy = 0; sy < ns; ++sy) {
                    const double v = y1 + (static_cast<double>(py) +
                                           (static_cast<double>(sy) + 0.5) /
                                               static_cast<double>(ns)) *
                                              bin_h;
                    for (std::size_t sx = 0; sx < ns; ++sx) {
                        const double u = x1 + (static_cast<double>(px) +
                                               (static_cast<double>(sx) + 0.5) /
                                                   static_cast<double>(ns)) *
                                                  bin_w;
                        acc += bilinear(map, c, u, v);
                    }
                }
                out.at(c, py, px) = acc * inv_count;
            }
        }
    }
    return out;
}

std::vector<double> pool_region_feature(const AlignedRoi& aligned) {
    if (aligned.channels == 0 || aligned.pool_size == 0 ||
        aligned.data.size() != aligned.channels * aligned.pool_size * aligned.pool_size)
        throw ValidationError("aligned grid is empty or inconsistently sized");
    const double inv = 1.0 / static_cast<double>(aligned.pool_size * aligned.pool_size);
    std::vector<double> out(aligned.channels, 0.0);
    for (std::size_t c = 0; c < aligned.channels; ++c) {
        double acc = 0.0;
        for (std::size_t py = 0; py < aligned.pool_size; ++py)
            for (std::size_t px = 0; px < aligned.pool_size; ++px)
                acc += aligned.at(c, py, px);
        out[c] = acc * inv;
    }
    return out;
}

std::vector<double> extract_region_feature(const FeatureMap& map, const BoundingBox& box,
                                           const RoiConfig& cfg) {
    return pool_region_feature(roi_align(map, box, cfg));
}

} // namespace sia
