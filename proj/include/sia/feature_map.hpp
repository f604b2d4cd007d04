#pragma once

#include <cstddef>
#include <vector>

#include "sia/geometry.hpp"

namespace sia {

/// Spatial feature tensor, C x H x W, row-major within each channel.
/// spatial_scale converts image units into feature-map units.
struct FeatureMap {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    double spatial_scale = 1.0;
    std::vector<double> data;

    double at(std::size_t c, std::size_t y, std::size_t x) const {
        return data[(c * height + y) * width + x];
    }
    double& at(std::size_t c, std::size_t y, std::size_t x) {
        return data[(c * height + y) * width + x];
    }

    void validate() const;
};

/// Output grid resolution and per-axis sampling density for region alignment.
struct RoiConfig {
    std::size_t pool_size = 7;
    std::size_t samples_per_bin = 2;

    void validate() const;
};

/// Aligned C x P x P grid, row-major within each channel.
struct AlignedRoi {
    std::size_t channels = 0;
    std::size_t pool_size = 0;
    std::vector<double> data;

    double at(std::size_t c, std::size_t py, std::size_t px) const {
        return data[(c * pool_size + py) * pool_size + px];
    }
    double& at(std::size_t c, std::size_t py, std::size_t px) {
        return data[(c * pool_size + py) * pool_size + px];
    }
};

/// Continuous-coordinate region alignment. The box is scaled into feature
/// units, divided into pool_size^2 bins, and every bin averages
/// samples_per_bin^2 bilinear samples. Grid cell (i, j) has its center at
/// continuous coordinate (j + 0.5, i + 0.5); samples outside the map read 0.
/// Throws when the scaled box does not overlap the map at all.
AlignedRoi roi_align(const FeatureMap& map, const BoundingBox& box, const RoiConfig& cfg);

/// Channel-wise mean over the aligned grid: a length-C descriptor.
std::vector<double> pool_region_feature(const AlignedRoi& aligned);

/// roi_align followed by pooling.
std::vector<double> extract_region_feature(const FeatureMap& map, const BoundingBox& box,
                                           const RoiConfig& cfg);

} // namespace sia
