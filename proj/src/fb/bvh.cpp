#include "fb/bvh.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace fb::validate {

double point_triangle_distance2(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;

    const double d1 = dot(ab, ap);
    const double d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return norm2(ap);

    const Vec3 bp = p - b;
    const double d3 = dot(ab, bp);
    const double d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return norm2(bp);

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        double v = d1 / (d1 - d3);
        return norm2(ap - v * ab);
    }

    const Vec3 cp = p - c;
    const double d5 = dot(ab, cp);
    const double d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return norm2(cp);

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        double w = d2 / (d2 - d6);
        return norm2(ap - w * ac);
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return norm2(bp - w * (c - b));
    }

    const double denom = va + vb + vc;
    if (denom <= 0.0) {
        // Degenerate triangle: fall back to the closest edge.
        double best = std::numeric_limits<double>::max();
        for (auto [u, v] : {std::pair{a, b}, std::pair{b, c}, std::pair{c, a}}) {
            Vec3 uv = v - u;
            double len2 = norm2(uv);
            double t = len2 > 0.0 ? std::clamp(dot(p - u, uv) / len2, 0.0, 1.0) : 0.0;
            best = std::min(best, norm2(p - (u + t * uv)));
        }
        return best;
    }
    const double v = vb / denom;
    const double w = vc / denom;
    return norm2(p - (a + v * ab + w * ac));
}

MeshBvh::MeshBvh(const TriangleMesh& mesh) : mesh_(&mesh) {
    const int nf = static_cast<int>(mesh.face_count());
    order_.resize(nf);
    std::iota(order_.begin(), order_.end(), 0);
    centers_.resize(nf);
    for (int f = 0; f < nf; ++f) {
        const auto& tri = mesh.faces[f];
        centers_[f] =
            (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
    }
    nodes_.reserve(2 * nf / 4 + 8);
    root_ = nf > 0 ? build(0, nf) : -1;
}

int MeshBvh::build(int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});

    constexpr double inf = std::numeric_limits<double>::max();
    Aabb box{{inf, inf, inf}, {-inf, -inf, -inf}};
    for (int i = begin; i < end; ++i) {
        const auto& tri = mesh_->faces[order_[i]];
        for (int c = 0; c < 3; ++c) box.expand(mesh_->vertices[tri[c]]);
    }

    Node node;
    node.box = box;
    node.begin = begin;
    node.end = end;

    constexpr int kLeafSize = 4;
    if (end - begin > kLeafSize) {
        int axis = 0;
        double wx = box.hi.x - box.lo.x, wy = box.hi.y - box.lo.y, wz = box.hi.z - box.lo.z;
        if (wy > wx && wy >= wz) axis = 1;
        else if (wz > wx && wz > wy) axis = 2;
        const int mid = (begin + end) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int a, int b) { return centers_[a][axis] < centers_[b][axis]; });
        node.left = build(begin, mid);
        node.right = build(mid, end);
    }

    nodes_[id] = node;
    return id;
}

double MeshBvh::surface_distance(const Vec3& q) const {
    if (root_ < 0) return std::numeric_limits<double>::max();
    double best = std::numeric_limits<double>::max();
    std::vector<int> stack{root_};
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        const Node& node = nodes_[id];
        if (node.box.distance2(q) >= best) continue;
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const auto& tri = mesh_->faces[order_[i]];
                best = std::min(best, point_triangle_distance2(q, mesh_->vertices[tri[0]],
                                                               mesh_->vertices[tri[1]],
                                                               mesh_->vertices[tri[2]]));
            }
        } else {
            // Visit the nearer child first for tighter pruning.
            double dl = nodes_[node.left].box.distance2(q);
            double dr = nodes_[node.right].box.distance2(q);
            if (dl < dr) {
                stack.push_back(node.right);
                stack.push_back(node.left);
            } else {
                stack.push_back(node.left);
                stack.push_back(node.right);
            }
        }
    }
    return std::sqrt(best);
}

void MeshBvh::collect_overlaps(const Aabb& box, std::vector<int>& out) const {
    if (root_ < 0) return;
    std::vector<int> stack{root_};
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        const Node& node = nodes_[id];
        if (!node.box.overlaps(box)) continue;
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) out.push_back(order_[i]);
        } else {
            stack.push_back(node.left);
            stack.push_back(node.right);
        }
    }
}

void MeshBvh::ray_hits(const Ray& ray, double t_min, std::vector<RayHit>& out) const {
    if (root_ < 0) return;
    std::vector<int> stack{root_};
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        const Node& node = nodes_[id];

        // Slab test against the node box.
        double t0 = t_min, t1 = std::numeric_limits<double>::max();
        bool miss = false;
        for (int a = 0; a < 3 && !miss; ++a) {
            const double o = ray.origin[a];
            const double d = ray.direction[a];
            if (d != 0.0) {
                double ta = (node.box.lo[a] - o) / d;
                double tb = (node.box.hi[a] - o) / d;
                if (ta > tb) std::swap(ta, tb);
                t0 = std::max(t0, ta);
                t1 = std::min(t1, tb);
                if (t0 > t1) miss = true;
            } else if (o < node.box.lo[a] || o > node.box.hi[a]) {
                miss = true;
            }
        }
        if (miss) continue;

        if (node.left >= 0) {
            stack.push_back(node.left);
            stack.push_back(node.right);
            continue;
        }

        for (int i = node.begin; i < node.end; ++i) {
            const int f = order_[i];
            const auto& tri = mesh_->faces[f];
            const Vec3& v0 = mesh_->vertices[tri[0]];
            const Vec3 e1 = mesh_->vertices[tri[1]] - v0;
            const Vec3 e2 = mesh_->vertices[tri[2]] - v0;
            // Zero-area faces (collapsed by many-to-one snapping) are
            // measure-zero for the crossing count; skip them entirely so they
            // cannot starve the retry loop.
            if (0.5 * norm(cross(e1, e2)) < kDegenerateFaceArea) continue;
            const Vec3 pv = cross(ray.direction, e2);
            const double det = dot(e1, pv);
            if (std::abs(det) < 1e-14) {
                // Grazing-parallel plane: flag so the caller retries with a
                // fresh direction if the box was in the way.
                Aabb fb{{std::min({v0.x, v0.x + e1.x, v0.x + e2.x}),
                         std::min({v0.y, v0.y + e1.y, v0.y + e2.y}),
                         std::min({v0.z, v0.z + e1.z, v0.z + e2.z})},
                        {std::max({v0.x, v0.x + e1.x, v0.x + e2.x}),
                         std::max({v0.y, v0.y + e1.y, v0.y + e2.y}),
                         std::max({v0.z, v0.z + e1.z, v0.z + e2.z})}};
                double s0 = t_min, s1 = std::numeric_limits<double>::max();
                bool fmiss = false;
                for (int a = 0; a < 3 && !fmiss; ++a) {
                    const double o = ray.origin[a];
                    const double d = ray.direction[a];
                    if (d != 0.0) {
                        double ta = (fb.lo[a] - o) / d;
                        double tb = (fb.hi[a] - o) / d;
                        if (ta > tb) std::swap(ta, tb);
                        s0 = std::max(s0, ta);
                        s1 = std::min(s1, tb);
                        if (s0 > s1) fmiss = true;
                    } else if (o < fb.lo[a] || o > fb.hi[a]) {
                        fmiss = true;
                    }
                }
                if (!fmiss) out.push_back({f, 0.0, 0.0, true});
                continue;
            }
            const double inv = 1.0 / det;
            const Vec3 tv = ray.origin - v0;
            const double u = dot(tv, pv) * inv;
            if (u < 0.0 || u > 1.0) continue;
            const Vec3 qv = cross(tv, e1);
            const double v = dot(ray.direction, qv) * inv;
            if (v < 0.0 || u + v > 1.0) continue;
            const double t = dot(e2, qv) * inv;
            if (t <= t_min) continue;
            out.push_back({f, t, std::min({u, v, 1.0 - u - v}), false});
        }
    }
}

} // namespace fb::validate
