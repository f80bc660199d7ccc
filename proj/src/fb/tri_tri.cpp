#include "fb/tri_tri.hpp"

#include <algorithm>
#include <cmath>

namespace fb::validate {

namespace {

double scale_eps(const Vec3* pts, int count) {
    double m = 0.0;
    for (int i = 0; i < count; ++i)
        m = std::max({m, std::abs(pts[i].x), std::abs(pts[i].y), std::abs(pts[i].z)});
    return std::max(m, 1.0e-30) * 1e-13;
}

// Interval of the intersection line covered by a triangle: vv0 is the vertex
// alone on its side of the other plane, d* the signed distances.
void isect_interval(double vv0, double vv1, double vv2, double d0, double d1, double d2,
                    double& t0, double& t1) {
    t0 = vv0 + (vv1 - vv0) * d0 / (d0 - d1);
    t1 = vv0 + (vv2 - vv0) * d0 / (d0 - d2);
}

bool compute_intervals(double p0, double p1, double p2, double d0, double d1, double d2,
                       double& t0, double& t1, bool& coplanar) {
    coplanar = false;
    const double d0d1 = d0 * d1;
    const double d0d2 = d0 * d2;
    if (d0d1 > 0.0) {
        isect_interval(p2, p0, p1, d2, d0, d1, t0, t1);
    } else if (d0d2 > 0.0) {
        isect_interval(p1, p0, p2, d1, d0, d2, t0, t1);
    } else if (d1 * d2 > 0.0 || d0 != 0.0) {
        isect_interval(p0, p1, p2, d0, d1, d2, t0, t1);
    } else if (d1 != 0.0) {
        isect_interval(p1, p0, p2, d1, d0, d2, t0, t1);
    } else if (d2 != 0.0) {
        isect_interval(p2, p0, p1, d2, d0, d1, t0, t1);
    } else {
        coplanar = true;
        return false;
    }
    if (t0 > t1) std::swap(t0, t1);
    return true;
}

struct Vec2 {
    double x, y;
};

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

bool segments_intersect_2d(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double o1 = orient2d(a, b, c);
    const double o2 = orient2d(a, b, d);
    const double o3 = orient2d(c, d, a);
    const double o4 = orient2d(c, d, b);
    if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 &&
        o4 != 0)
        return true;
    auto on_segment = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return orient2d(p, q, r) == 0.0 && r.x >= std::min(p.x, q.x) && r.x <= std::max(p.x, q.x) &&
               r.y >= std::min(p.y, q.y) && r.y <= std::max(p.y, q.y);
    };
    return on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) ||
           on_segment(c, d, b);
}

bool point_in_triangle_2d(const Vec2& p, const Vec2& t0, const Vec2& t1, const Vec2& t2) {
    double o0 = orient2d(t0, t1, p);
    double o1 = orient2d(t1, t2, p);
    double o2 = orient2d(t2, t0, p);
    bool has_neg = (o0 < 0) || (o1 < 0) || (o2 < 0);
    bool has_pos = (o0 > 0) || (o1 > 0) || (o2 > 0);
    return !(has_neg && has_pos);
}

bool coplanar_tri_tri(const Vec3& n, const Vec3& a0, const Vec3& a1, const Vec3& a2,
                      const Vec3& b0, const Vec3& b1, const Vec3& b2) {
    // Project onto the plane's dominant axis.
    int drop = 0;
    double ax = std::abs(n.x), ay = std::abs(n.y), az = std::abs(n.z);
    if (ay > ax && ay >= az) drop = 1;
    else if (az > ax && az > ay) drop = 2;
    auto proj = [&](const Vec3& v) -> Vec2 {
        if (drop == 0) return {v.y, v.z};
        if (drop == 1) return {v.x, v.z};
        return {v.x, v.y};
    };
    Vec2 A[3] = {proj(a0), proj(a1), proj(a2)};
    Vec2 B[3] = {proj(b0), proj(b1), proj(b2)};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (segments_intersect_2d(A[i], A[(i + 1) % 3], B[j], B[(j + 1) % 3])) return true;
    if (point_in_triangle_2d(A[0], B[0], B[1], B[2])) return true;
    if (point_in_triangle_2d(B[0], A[0], A[1], A[2])) return true;
    return false;
}

} // namespace

bool tri_tri_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2, const Vec3& b0,
                       const Vec3& b1, const Vec3& b2) {
    const Vec3 pts[6] = {a0, a1, a2, b0, b1, b2};
    const double eps = scale_eps(pts, 6);

    const Vec3 n1 = cross(a1 - a0, a2 - a0);
    double db0 = dot(n1, b0 - a0);
    double db1 = dot(n1, b1 - a0);
    double db2 = dot(n1, b2 - a0);
    const double plane_eps1 = eps * norm(n1);
    if (std::abs(db0) < plane_eps1) db0 = 0.0;
    if (std::abs(db1) < plane_eps1) db1 = 0.0;
    if (std::abs(db2) < plane_eps1) db2 = 0.0;
    if ((db0 > 0 && db1 > 0 && db2 > 0) || (db0 < 0 && db1 < 0 && db2 < 0)) return false;

    const Vec3 n2 = cross(b1 - b0, b2 - b0);
    double da0 = dot(n2, a0 - b0);
    double da1 = dot(n2, a1 - b0);
    double da2 = dot(n2, a2 - b0);
    const double plane_eps2 = eps * norm(n2);
    if (std::abs(da0) < plane_eps2) da0 = 0.0;
    if (std::abs(da1) < plane_eps2) da1 = 0.0;
    if (std::abs(da2) < plane_eps2) da2 = 0.0;
    if ((da0 > 0 && da1 > 0 && da2 > 0) || (da0 < 0 && da1 < 0 && da2 < 0)) return false;

    // Projection axis: largest component of the intersection line direction.
    const Vec3 dline = cross(n1, n2);
    int axis = 0;
    double best = std::abs(dline.x);
    if (std::abs(dline.y) > best) {
        axis = 1;
        best = std::abs(dline.y);
    }
    if (std::abs(dline.z) > best) axis = 2;

    const double pa0 = a0[axis], pa1 = a1[axis], pa2 = a2[axis];
    const double pb0 = b0[axis], pb1 = b1[axis], pb2 = b2[axis];

    double alo, ahi, blo, bhi;
    bool coplanar = false;
    if (!compute_intervals(pa0, pa1, pa2, da0, da1, da2, alo, ahi, coplanar)) {
        if (coplanar) return coplanar_tri_tri(n1, a0, a1, a2, b0, b1, b2);
        return false;
    }
    if (!compute_intervals(pb0, pb1, pb2, db0, db1, db2, blo, bhi, coplanar)) {
        if (coplanar) return coplanar_tri_tri(n1, a0, a1, a2, b0, b1, b2);
        return false;
    }
    return std::max(alo, blo) <= std::min(ahi, bhi);
}

bool segment_triangle_intersect(const Vec3& p, const Vec3& q, const Vec3& t0, const Vec3& t1,
                                const Vec3& t2) {
    const Vec3 dir = q - p;
    const Vec3 e1 = t1 - t0;
    const Vec3 e2 = t2 - t0;
    const Vec3 pv = cross(dir, e2);
    const double det = dot(e1, pv);
    const Vec3 pts[5] = {p, q, t0, t1, t2};
    const double eps = scale_eps(pts, 5);

    if (std::abs(det) < eps) {
        // Parallel; intersects only if coplanar, then test in 2D.
        const Vec3 n = cross(e1, e2);
        if (std::abs(dot(n, p - t0)) > eps * norm(n)) return false;
        return coplanar_tri_tri(n, p, q, p, t0, t1, t2); // degenerate "triangle" (p,q,p)
    }
    const double inv = 1.0 / det;
    const Vec3 tv = p - t0;
    const double u = dot(tv, pv) * inv;
    if (u < 0.0 || u > 1.0) return false;
    const Vec3 qv = cross(tv, e1);
    const double v = dot(dir, qv) * inv;
    if (v < 0.0 || u + v > 1.0) return false;
    const double t = dot(e2, qv) * inv;
    return t >= 0.0 && t <= 1.0;
}

} // namespace fb::validate
