#include "fb/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fb/error.hpp"

namespace fb::density {

GridSpec default_grid(double radius_of_curvature) {
    const double R = radius_of_curvature;
    GridSpec spec;
    spec.min = {-0.3 * R, -0.3 * R, 0.4 * R};
    spec.max = {0.3 * R, 0.3 * R, 1.05 * R};
    spec.nx = spec.ny = spec.nz = 64;
    return spec;
}

void validate_grid(const GridSpec& spec) {
    for (int a = 0; a < 3; ++a) {
        if (!(spec.min[a] < spec.max[a]))
            raise(ErrorCode::InvalidArgument, "grid bounds must satisfy min < max per axis");
        if (spec.resolution(a) <= 0)
            raise(ErrorCode::InvalidArgument, "grid resolution must be positive");
    }
}

std::vector<std::size_t> cells_along_ray(const GridSpec& spec, const Ray& ray) {
    std::vector<std::size_t> cells;

    // Clip [0, inf) to the box.
    double t0 = 0.0;
    double t1 = std::numeric_limits<double>::max();
    for (int a = 0; a < 3; ++a) {
        const double o = ray.origin[a];
        const double d = ray.direction[a];
        if (d != 0.0) {
            double ta = (spec.min[a] - o) / d;
            double tb = (spec.max[a] - o) / d;
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
        } else if (o < spec.min[a] || o > spec.max[a]) {
            return cells;
        }
    }
    if (t0 > t1) return cells;

    int idx[3];
    int step[3];
    double t_max[3];
    double t_delta[3];
    const Vec3 entry = ray.origin + t0 * ray.direction;

    for (int a = 0; a < 3; ++a) {
        const double h = spec.cell_size(a);
        const int n = spec.resolution(a);
        const double d = ray.direction[a];
        const double u = (entry[a] - spec.min[a]) / h;
        int i = static_cast<int>(std::floor(u));

        if (d > 0.0) {
            step[a] = 1;
            if (i < 0) i = 0;
            if (i > n - 1) i = n - 1;
            t_max[a] = (spec.min[a] + (i + 1) * h - ray.origin[a]) / d;
            t_delta[a] = h / d;
        } else if (d < 0.0) {
            step[a] = -1;
            // Entering exactly on a boundary while moving down means the
            // lower cell's interior comes next.
            if (u == std::floor(u) && i > 0) i -= 1;
            if (i < 0) i = 0;
            if (i > n - 1) i = n - 1;
            t_max[a] = (spec.min[a] + i * h - ray.origin[a]) / d;
            t_delta[a] = -h / d;
        } else {
            step[a] = 0;
            // Tie rule: a ray lying exactly in a cell-face plane counts
            // toward the lower-index cell along the degenerate axis.
            if (u == std::floor(u) && i > 0) i -= 1;
            if (i < 0) i = 0;
            if (i > n - 1) i = n - 1;
            t_max[a] = std::numeric_limits<double>::max();
            t_delta[a] = 0.0;
        }
        idx[a] = i;
    }

    while (true) {
        cells.push_back(spec.flat_index(idx[0], idx[1], idx[2]));

        int axis = 0;
        if (t_max[1] < t_max[0]) axis = 1;
        if (t_max[2] < t_max[axis]) axis = 2;
        if (t_max[axis] > t1) break;

        idx[axis] += step[axis];
        if (idx[axis] < 0 || idx[axis] >= spec.resolution(axis)) break;
        t_max[axis] += t_delta[axis];
    }
    return cells;
}

DensityGrid accumulate(const GridSpec& spec, const std::vector<optics::TraceRecord>& records) {
    validate_grid(spec);
    DensityGrid grid;
    grid.spec = spec;
    grid.counts.assign(spec.cell_count(), 0);
    grid.total_rays = static_cast<std::int64_t>(records.size());
    for (const auto& rec : records) {
        for (std::size_t cell : cells_along_ray(spec, rec.reflected)) grid.counts[cell] += 1;
    }
    return grid;
}

FocalPointCloud extract_point_cloud(const DensityGrid& grid, double threshold_fraction) {
    if (!(threshold_fraction > 0.0) || !(threshold_fraction < 1.0))
        raise(ErrorCode::InvalidArgument, "threshold_fraction must lie in (0,1)");

    FocalPointCloud cloud;
    cloud.threshold_fraction = threshold_fraction;
    cloud.source_total = grid.total_rays;

    const double cutoff = threshold_fraction * static_cast<double>(grid.total_rays);
    const GridSpec& spec = grid.spec;
    for (int k = 0; k < spec.nz; ++k)
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i)
                if (static_cast<double>(grid.counts[spec.flat_index(i, j, k)]) > cutoff)
                    cloud.points.push_back(spec.cell_center(i, j, k));

    if (cloud.points.empty())
        raise(ErrorCode::EmptyCloud, "no grid cell exceeds the threshold fraction");
    return cloud;
}

std::vector<FocalPointCloud> density_layers(const DensityGrid& grid,
                                            const std::vector<double>& fractions) {
    for (std::size_t i = 0; i + 1 < fractions.size(); ++i)
        if (!(fractions[i] > fractions[i + 1]))
            raise(ErrorCode::InvalidArgument, "layer fractions must be strictly descending");

    std::vector<FocalPointCloud> layers;
    layers.reserve(fractions.size());
    for (double f : fractions) {
        try {
            layers.push_back(extract_point_cloud(grid, f));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyCloud) throw;
            FocalPointCloud empty;
            empty.threshold_fraction = f;
            empty.source_total = grid.total_rays;
            layers.push_back(std::move(empty));
        }
    }
    return layers;
}

} // namespace fb::density
