#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fb/optics.hpp"
#include "fb/vec3.hpp"

namespace fb::density {

// Axis-aligned voxel grid. The default bounds cover the caustic region of a
// mirror of radius R: [-0.3R,0.3R] x [-0.3R,0.3R] x [0.4R,1.05R].
struct GridSpec {
    Vec3 min;
    Vec3 max;
    int nx = 64;
    int ny = 64;
    int nz = 64;

    int resolution(int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
    double cell_size(int axis) const {
        return (max[axis] - min[axis]) / static_cast<double>(resolution(axis));
    }
    std::size_t cell_count() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
               static_cast<std::size_t>(nz);
    }
    std::size_t flat_index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * ny + j) * nx + i;
    }
    Vec3 cell_center(int i, int j, int k) const {
        return {min.x + (i + 0.5) * cell_size(0), min.y + (j + 0.5) * cell_size(1),
                min.z + (k + 0.5) * cell_size(2)};
    }
};

GridSpec default_grid(double radius_of_curvature);

// Throws InvalidArgument on empty extents or non-positive resolutions.
void validate_grid(const GridSpec& spec);

struct DensityGrid {
    GridSpec spec;
    std::vector<std::int64_t> counts; // flat, x fastest
    std::int64_t total_rays = 0;
};

struct NormalizationRecord {
    Vec3 p_min;
    Vec3 p_max;
};

// Thresholded cell centers; `normalization` is filled once FFMG normalizes
// the cloud.
struct FocalPointCloud {
    std::vector<Vec3> points;
    double threshold_fraction = 0.0;
    std::int64_t source_total = 0;
    std::optional<NormalizationRecord> normalization;
};

// Cells whose interior the ray's in-box segment passes through, in traversal
// order, each at most once (Amanatides-Woo walk). A ray lying exactly in a
// cell-face plane is charged to the lower-index cell along that axis. The ray
// is half-infinite: only t >= 0 is traversed.
std::vector<std::size_t> cells_along_ray(const GridSpec& spec, const Ray& ray);

// Counts, per cell, the reflected rays whose walk visits it. Order
// independent (integer increments commute).
DensityGrid accumulate(const GridSpec& spec, const std::vector<optics::TraceRecord>& records);

// Centers of cells with count strictly greater than fraction * total_rays.
// Throws EmptyCloud when nothing qualifies.
FocalPointCloud extract_point_cloud(const DensityGrid& grid, double threshold_fraction);

// One cloud per fraction (strictly descending fractions); layers are nested.
// A fraction above the densest cell yields an empty-layer marker instead of
// an error.
std::vector<FocalPointCloud> density_layers(const DensityGrid& grid,
                                            const std::vector<double>& fractions);

} // namespace fb::density
