// Shared mesh builders, deterministic point-set generators, and independent
// oracles used across the test suites.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fb/mesh.hpp"
#include "fb/vec3.hpp"

namespace testsupport {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline double uniform01(std::uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

inline double uniform(std::uint64_t& state, double lo, double hi) {
    return lo + (hi - lo) * uniform01(state);
}

// Regular tetrahedron with edge length `edge`, outward orientation.
inline fb::TriangleMesh tetrahedron(double edge = 1.0) {
    const double s = edge;
    std::vector<fb::Vec3> v = {
        {0.0, 0.0, 0.0},
        {s, 0.0, 0.0},
        {0.5 * s, std::sqrt(3.0) / 2.0 * s, 0.0},
        {0.5 * s, std::sqrt(3.0) / 6.0 * s, std::sqrt(6.0) / 3.0 * s},
    };
    std::vector<std::array<int, 3>> f = {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {2, 0, 3}};
    return fb::build_mesh(std::move(v), std::move(f));
}

inline std::vector<std::array<int, 3>> cube_faces() {
    return {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
            {2, 3, 7}, {2, 7, 6}, {0, 4, 7}, {0, 7, 3}, {1, 2, 6}, {1, 6, 5}};
}

inline std::vector<fb::Vec3> cube_vertices(double side = 1.0) {
    const double s = side;
    return {{0, 0, 0}, {s, 0, 0}, {s, s, 0}, {0, s, 0},
            {0, 0, s}, {s, 0, s}, {s, s, s}, {0, s, s}};
}

// Unit cube triangulated into 12 faces, outward orientation.
inline fb::TriangleMesh cube(double side = 1.0) {
    return fb::build_mesh(cube_vertices(side), cube_faces());
}

inline fb::TriangleMesh icosahedron(double scale = 1.0) {
    const double p = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<fb::Vec3> v = {{-1, p, 0}, {1, p, 0},   {-1, -p, 0}, {1, -p, 0},
                               {0, -1, p}, {0, 1, p},   {0, -1, -p}, {0, 1, -p},
                               {p, 0, -1}, {p, 0, 1},   {-p, 0, -1}, {-p, 0, 1}};
    for (auto& x : v) x *= scale;
    std::vector<std::array<int, 3>> f = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    return fb::build_mesh(std::move(v), std::move(f));
}

// Deterministic, roughly uniform points on the unit sphere.
inline std::vector<fb::Vec3> fibonacci_sphere(int n, double radius = 1.0) {
    constexpr double golden_angle = 2.39996322972865332;
    std::vector<fb::Vec3> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) {
        double z = 1.0 - 2.0 * (i + 0.5) / n;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = golden_angle * i;
        pts.push_back({radius * r * std::cos(phi), radius * r * std::sin(phi), radius * z});
    }
    return pts;
}

// Sphere dented near the +z pole: a concave surface cloud.
inline std::vector<fb::Vec3> dented_sphere_cloud(int n) {
    std::vector<fb::Vec3> pts = fibonacci_sphere(n);
    for (auto& p : pts) {
        double polar = std::acos(p.z); // 0 at the dimple center
        double r = 1.0 - 0.45 * std::exp(-(polar * polar) / (0.5 * 0.5));
        p *= r;
    }
    return pts;
}

// Parity-based point-in-mesh oracle, independent of the validate module:
// scans all faces along a fixed set of probe directions and rejects any
// direction with a borderline hit.
inline bool brute_force_inside(const fb::TriangleMesh& mesh, const fb::Vec3& q) {
    static const std::vector<fb::Vec3> probes = [] {
        std::vector<fb::Vec3> dirs;
        std::uint64_t state = 0x5eedb0d1ull;
        for (int i = 0; i < 32; ++i) {
            double x = uniform(state, -1.0, 1.0);
            double y = uniform(state, -1.0, 1.0);
            double z = uniform(state, -1.0, 1.0);
            double len = std::sqrt(x * x + y * y + z * z);
            if (len < 0.2) continue;
            dirs.push_back({x / len, y / len, z / len});
        }
        return dirs;
    }();

    for (const fb::Vec3& dir : probes) {
        int crossings = 0;
        bool clean = true;
        for (const auto& tri : mesh.faces) {
            const fb::Vec3& v0 = mesh.vertices[tri[0]];
            const fb::Vec3 e1 = mesh.vertices[tri[1]] - v0;
            const fb::Vec3 e2 = mesh.vertices[tri[2]] - v0;
            const fb::Vec3 pv = cross(dir, e2);
            const double det = dot(e1, pv);
            if (std::abs(det) < 1e-12) {
                clean = false;
                break;
            }
            const double inv = 1.0 / det;
            const fb::Vec3 tv = q - v0;
            const double u = dot(tv, pv) * inv;
            const fb::Vec3 qv = cross(tv, e1);
            const double v = dot(dir, qv) * inv;
            const double t = dot(e2, qv) * inv;
            if (u < -1e-9 || u > 1.0 + 1e-9 || v < -1e-9 || u + v > 1.0 + 1e-9 || t <= 1e-12)
                continue;
            if (u < 1e-9 || v < 1e-9 || u + v > 1.0 - 1e-9) {
                clean = false; // grazing an edge: ambiguous, try another probe
                break;
            }
            crossings += 1;
        }
        if (clean) return crossings % 2 == 1;
    }
    return false; // no clean probe found; callers avoid adversarial inputs
}

} // namespace testsupport
