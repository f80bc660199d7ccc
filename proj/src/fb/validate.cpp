#include "fb/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fb/bvh.hpp"
#include "fb/error.hpp"
#include "fb/tri_tri.hpp"

namespace fb::validate {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

Vec3 random_unit(std::uint64_t& state) {
    while (true) {
        double x = 2.0 * (static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53) - 1.0;
        double y = 2.0 * (static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53) - 1.0;
        double z = 2.0 * (static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53) - 1.0;
        double n2 = x * x + y * y + z * z;
        if (n2 > 1e-6 && n2 < 1.0) {
            double inv = 1.0 / std::sqrt(n2);
            return {x * inv, y * inv, z * inv};
        }
    }
}

Containment classify_with_bvh(const MeshBvh& bvh, const Vec3& q, std::uint64_t seed) {
    if (bvh.surface_distance(q) <= kOnSurfaceDistance) return Containment::OnSurface;

    std::uint64_t state = seed ^ 0x51a2b3c4d5e6f708ull;
    std::vector<MeshBvh::RayHit> hits;
    constexpr int kMaxAttempts = 64;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Ray probe{q, random_unit(state)};
        hits.clear();
        bvh.ray_hits(probe, 0.0, hits);
        bool degenerate = false;
        int crossings = 0;
        for (const auto& hit : hits) {
            if (hit.parallel || hit.bary_min < 1e-10) {
                degenerate = true;
                break;
            }
            crossings += 1;
        }
        if (degenerate) continue;
        return (crossings % 2 == 1) ? Containment::Inside : Containment::Outside;
    }
    raise(ErrorCode::Internal, "parity test failed to find a clean ray direction");
}

void curvature_angles(const TriangleMesh& mesh, int f, double out[3]) {
    const auto& tri = mesh.faces[f];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    constexpr double kTiny = 1e-15;
    const double lab = distance(a, b);
    const double lbc = distance(b, c);
    const double lca = distance(c, a);
    const int collapsed = (lab < kTiny) + (lbc < kTiny) + (lca < kTiny);

    if (collapsed >= 2) {
        // Fully collapsed; split the turning angle evenly so the face still
        // contributes exactly pi.
        out[0] = out[1] = out[2] = M_PI / 3.0;
        return;
    }
    if (collapsed == 1) {
        // Needle with two coincident corners: 0 at the far corner, pi/2 at
        // each coincident one (keeps the angle sum at pi).
        if (lab < kTiny) {
            out[0] = out[1] = M_PI / 2.0;
            out[2] = 0.0;
        } else if (lbc < kTiny) {
            out[1] = out[2] = M_PI / 2.0;
            out[0] = 0.0;
        } else {
            out[2] = out[0] = M_PI / 2.0;
            out[1] = 0.0;
        }
        return;
    }

    auto corner = [](const Vec3& at, const Vec3& p, const Vec3& q) {
        Vec3 u = p - at;
        Vec3 v = q - at;
        return std::atan2(norm(cross(u, v)), dot(u, v));
    };
    out[0] = corner(a, b, c);
    out[1] = corner(b, c, a);
    out[2] = corner(c, a, b);
}

bool faces_share_position(const TriangleMesh& mesh, int f, int g) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (mesh.faces[f][i] == mesh.faces[g][j]) return true;
            if (mesh.vertices[mesh.faces[f][i]] == mesh.vertices[mesh.faces[g][j]]) return true;
        }
    return false;
}

bool face_degenerate(const TriangleMesh& mesh, int f) {
    const auto& tri = mesh.faces[f];
    Vec3 n = cross(mesh.vertices[tri[1]] - mesh.vertices[tri[0]],
                   mesh.vertices[tri[2]] - mesh.vertices[tri[0]]);
    return 0.5 * norm(n) < kDegenerateFaceArea;
}

bool pair_intersects(const TriangleMesh& mesh, int f, int g) {
    if (faces_share_position(mesh, f, g)) return false;
    if (face_degenerate(mesh, f) || face_degenerate(mesh, g)) return false;
    const auto& tf = mesh.faces[f];
    const auto& tg = mesh.faces[g];
    return tri_tri_intersect(mesh.vertices[tf[0]], mesh.vertices[tf[1]], mesh.vertices[tf[2]],
                             mesh.vertices[tg[0]], mesh.vertices[tg[1]], mesh.vertices[tg[2]]);
}

} // namespace

Containment classify_point(const TriangleMesh& mesh, const Vec3& q, std::uint64_t seed) {
    MeshBvh bvh(mesh);
    return classify_with_bvh(bvh, q, seed);
}

bool contains_point(const TriangleMesh& mesh, const Vec3& q, std::uint64_t seed) {
    return classify_point(mesh, q, seed) != Containment::Outside;
}

EnclosureResult enclosure_test(const TriangleMesh& mesh, const std::vector<Vec3>& points,
                               double tolerance, std::uint64_t seed) {
    MeshBvh bvh(mesh);
    EnclosureResult result;
    result.n_points = static_cast<std::int64_t>(points.size());
    for (const Vec3& p : points) {
        const double dist = bvh.surface_distance(p);
        if (dist <= kOnSurfaceDistance) {
            result.n_within_tolerance += 1;
            continue;
        }
        if (classify_with_bvh(bvh, p, seed) == Containment::Inside) {
            result.n_inside += 1;
        } else if (dist <= tolerance) {
            result.n_within_tolerance += 1;
        } else {
            result.n_outside += 1;
            result.worst_outside_distance = std::max(result.worst_outside_distance, dist);
        }
    }
    return result;
}

std::vector<std::pair<int, int>> self_intersections(const TriangleMesh& mesh) {
    MeshBvh bvh(mesh);
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> candidates;

    constexpr double inf = std::numeric_limits<double>::max();
    for (int f = 0; f < static_cast<int>(mesh.face_count()); ++f) {
        Aabb box{{inf, inf, inf}, {-inf, -inf, -inf}};
        for (int c = 0; c < 3; ++c) box.expand(mesh.vertices[mesh.faces[f][c]]);

        candidates.clear();
        bvh.collect_overlaps(box, candidates);
        for (int g : candidates) {
            if (g <= f) continue;
            if (pair_intersects(mesh, f, g)) pairs.emplace_back(f, g);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

std::vector<std::pair<int, int>> self_intersections_bruteforce(const TriangleMesh& mesh) {
    std::vector<std::pair<int, int>> pairs;
    const int nf = static_cast<int>(mesh.face_count());
    for (int f = 0; f < nf; ++f)
        for (int g = f + 1; g < nf; ++g)
            if (pair_intersects(mesh, f, g)) pairs.emplace_back(f, g);
    return pairs;
}

std::vector<double> angle_deficit_curvature(const TriangleMesh& mesh) {
    std::vector<double> deficit(mesh.vertex_count(), 2.0 * M_PI);
    double angles[3];
    for (int f = 0; f < static_cast<int>(mesh.face_count()); ++f) {
        curvature_angles(mesh, f, angles);
        for (int c = 0; c < 3; ++c) deficit[mesh.faces[f][c]] -= angles[c];
    }
    return deficit;
}

ValidationReport validate_surface(const TriangleMesh& mesh, const std::vector<Vec3>& points,
                                  double tolerance, std::uint64_t seed) {
    ValidationReport report;

    EnclosureResult enclosure = enclosure_test(mesh, points, tolerance, seed);
    report.n_points = enclosure.n_points;
    report.n_inside = enclosure.n_inside;
    report.n_within_tolerance = enclosure.n_within_tolerance;
    report.worst_outside_distance = enclosure.worst_outside_distance;

    report.n_self_intersection_pairs =
        static_cast<std::int64_t>(self_intersections(mesh).size());
    report.euler_characteristic = euler_characteristic(mesh);

    const std::vector<double> deficits = angle_deficit_curvature(mesh);
    if (!deficits.empty()) {
        double lo = deficits[0], hi = deficits[0], sum = 0.0;
        for (double d : deficits) {
            lo = std::min(lo, d);
            hi = std::max(hi, d);
            sum += d;
        }
        report.curvature_summary = {lo, hi, sum / static_cast<double>(deficits.size())};
    }
    return report;
}

} // namespace fb::validate
