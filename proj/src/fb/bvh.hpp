#pragma once

#include <cstddef>
#include <vector>

#include "fb/mesh.hpp"
#include "fb/vec3.hpp"

namespace fb::validate {

struct Aabb {
    Vec3 lo;
    Vec3 hi;

    void expand(const Vec3& p) {
        for (int a = 0; a < 3; ++a) {
            if (p[a] < lo[a]) lo.set(a, p[a]);
            if (p[a] > hi[a]) hi.set(a, p[a]);
        }
    }
    bool overlaps(const Aabb& o) const {
        return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y &&
               lo.z <= o.hi.z && o.lo.z <= hi.z;
    }
    double distance2(const Vec3& p) const {
        double d2 = 0.0;
        for (int a = 0; a < 3; ++a) {
            double d = 0.0;
            if (p[a] < lo[a]) d = lo[a] - p[a];
            else if (p[a] > hi[a]) d = p[a] - hi[a];
            d2 += d * d;
        }
        return d2;
    }
};

// Exact distance from a point to a triangle (Eberly's region decomposition).
double point_triangle_distance2(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Static median-split AABB tree over the faces of a mesh. Supports the three
// queries validation needs: candidate face pairs, closest surface distance,
// and all ray hits for the parity test.
class MeshBvh {
public:
    explicit MeshBvh(const TriangleMesh& mesh);

    const TriangleMesh& mesh() const { return *mesh_; }

    // Unsigned distance from q to the surface.
    double surface_distance(const Vec3& q) const;

    // Faces whose bounding box overlaps `box`.
    void collect_overlaps(const Aabb& box, std::vector<int>& out) const;

    struct RayHit {
        int face;
        double t;
        double bary_min; // min(u, v, 1-u-v): 0 on an edge
        bool parallel;   // |det| below the robustness threshold
    };

    // Every face the ray meets at t > t_min (no early out); hits with
    // parallel planes are flagged rather than resolved.
    void ray_hits(const Ray& ray, double t_min, std::vector<RayHit>& out) const;

private:
    struct Node {
        Aabb box;
        int left = -1;
        int right = -1;
        int begin = 0;
        int end = 0;
    };

    int build(int begin, int end);

    const TriangleMesh* mesh_;
    std::vector<int> order_;
    std::vector<Vec3> centers_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace fb::validate
