#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fb/mesh.hpp"
#include "fb/vec3.hpp"

namespace fb::validate {

enum class Containment {
    Outside,
    Inside,
    OnSurface, // within 1e-10 of the surface; enclosure counts it as enclosed
};

inline constexpr double kOnSurfaceDistance = 1e-10;

// Parity test with a randomized ray direction, retried on grazing or
// near-edge hits. Deterministic for a given seed.
Containment classify_point(const TriangleMesh& mesh, const Vec3& q, std::uint64_t seed = 0);

// classify_point reduced to a bool; OnSurface counts as contained.
bool contains_point(const TriangleMesh& mesh, const Vec3& q, std::uint64_t seed = 0);

struct EnclosureResult {
    std::int64_t n_points = 0;
    std::int64_t n_inside = 0;
    std::int64_t n_within_tolerance = 0;
    std::int64_t n_outside = 0;
    double worst_outside_distance = 0.0;

    bool passed() const { return n_outside == 0; }
};

// Classifies every point as inside, within `tolerance` of the surface
// (unsigned distance), or outside.
EnclosureResult enclosure_test(const TriangleMesh& mesh, const std::vector<Vec3>& points,
                               double tolerance, std::uint64_t seed = 0);

// Geometrically intersecting non-adjacent face pairs (BVH-accelerated).
// Pairs sharing a vertex index or an exactly identical vertex position touch
// by construction and are excluded, as are degenerate-area faces.
std::vector<std::pair<int, int>> self_intersections(const TriangleMesh& mesh);

// O(M^2) reference enumeration with the same exclusion rules; the oracle the
// BVH path is checked against.
std::vector<std::pair<int, int>> self_intersections_bruteforce(const TriangleMesh& mesh);

// Per-vertex angle deficit 2*pi - sum of incident face angles (discrete
// Gaussian curvature); sums to 4*pi over a closed genus-0 mesh.
std::vector<double> angle_deficit_curvature(const TriangleMesh& mesh);

struct CurvatureSummary {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

struct ValidationReport {
    std::int64_t n_points = 0;
    std::int64_t n_inside = 0;
    std::int64_t n_within_tolerance = 0;
    double worst_outside_distance = 0.0;
    std::int64_t n_self_intersection_pairs = 0;
    int euler_characteristic = 0;
    CurvatureSummary curvature_summary;

    bool passed() const {
        return n_inside + n_within_tolerance == n_points && n_self_intersection_pairs == 0;
    }
};

// Full final-surface validation: enclosure, self-intersection, curvature.
ValidationReport validate_surface(const TriangleMesh& mesh, const std::vector<Vec3>& points,
                                  double tolerance, std::uint64_t seed = 0);

} // namespace fb::validate
