#include "fb/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "fb/error.hpp"

namespace fb::ffmg {

namespace {

struct HullFace {
    int v[3];
    int nbr[3]; // nbr[i] shares edge (v[i], v[(i+1)%3])
    Vec3 normal; // unit
    double offset = 0.0; // plane: dot(normal, x) = offset
    bool alive = true;
    std::vector<int> outside;
};

double plane_dist(const HullFace& f, const Vec3& p) { return dot(f.normal, p) - f.offset; }

struct Builder {
    const std::vector<Vec3>& pts;
    double eps;
    std::vector<HullFace> faces;

    explicit Builder(const std::vector<Vec3>& points, double epsilon)
        : pts(points), eps(epsilon) {}

    int add_face(int a, int b, int c) {
        HullFace f;
        f.v[0] = a;
        f.v[1] = b;
        f.v[2] = c;
        f.nbr[0] = f.nbr[1] = f.nbr[2] = -1;
        Vec3 n = cross(pts[b] - pts[a], pts[c] - pts[a]);
        double len = norm(n);
        if (len <= 0.0) raise(ErrorCode::DegenerateInput, "degenerate hull face");
        f.normal = n / len;
        f.offset = dot(f.normal, pts[a]);
        faces.push_back(std::move(f));
        return static_cast<int>(faces.size()) - 1;
    }

    int edge_slot(int face, int a, int b) const {
        for (int i = 0; i < 3; ++i)
            if (faces[face].v[i] == a && faces[face].v[(i + 1) % 3] == b) return i;
        raise(ErrorCode::Internal, "hull adjacency bookkeeping failed");
    }

    void link(int fa, int a, int b, int fb) {
        faces[fa].nbr[edge_slot(fa, a, b)] = fb;
        faces[fb].nbr[edge_slot(fb, b, a)] = fa;
    }
};

} // namespace

TriangleMesh convex_hull(const std::vector<Vec3>& points) {
    const int n = static_cast<int>(points.size());
    if (n < 4) raise(ErrorCode::DegenerateInput, "convex hull needs at least 4 points");

    Vec3 lo = points[0], hi = points[0];
    for (const Vec3& p : points) {
        if (!is_finite(p)) raise(ErrorCode::InvalidArgument, "non-finite point");
        for (int a = 0; a < 3; ++a) {
            if (p[a] < lo[a]) lo.set(a, p[a]);
            if (p[a] > hi[a]) hi.set(a, p[a]);
        }
    }
    const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
    const double eps = std::max(extent, 1.0e-300) * 1e-10;

    // Initial simplex: farthest axis-extreme pair, then farthest from the
    // line, then farthest from the plane.
    int e0 = 0, e1 = 0;
    {
        int mins[3] = {0, 0, 0}, maxs[3] = {0, 0, 0};
        for (int i = 1; i < n; ++i)
            for (int a = 0; a < 3; ++a) {
                if (points[i][a] < points[mins[a]][a]) mins[a] = i;
                if (points[i][a] > points[maxs[a]][a]) maxs[a] = i;
            }
        double best = -1.0;
        for (int a = 0; a < 3; ++a) {
            double d = distance(points[mins[a]], points[maxs[a]]);
            if (d > best) {
                best = d;
                e0 = mins[a];
                e1 = maxs[a];
            }
        }
        if (best <= eps) raise(ErrorCode::DegenerateInput, "all points coincident");
    }

    int e2 = -1;
    {
        const Vec3 dir = normalized(points[e1] - points[e0]);
        double best = eps;
        for (int i = 0; i < n; ++i) {
            Vec3 off = points[i] - points[e0];
            double d = norm(off - dot(off, dir) * dir);
            if (d > best) {
                best = d;
                e2 = i;
            }
        }
        if (e2 < 0) raise(ErrorCode::DegenerateInput, "points are collinear");
    }

    int e3 = -1;
    bool above = false;
    {
        const Vec3 n012 = normalized(cross(points[e1] - points[e0], points[e2] - points[e0]));
        double best = eps;
        for (int i = 0; i < n; ++i) {
            double d = dot(n012, points[i] - points[e0]);
            if (std::abs(d) > best) {
                best = std::abs(d);
                e3 = i;
                above = d > 0.0;
            }
        }
        if (e3 < 0) raise(ErrorCode::DegenerateInput, "points are coplanar");
    }
    if (above) std::swap(e1, e2); // keep e3 below the base so all faces wind outward

    Builder builder(points, eps);
    int f0 = builder.add_face(e0, e1, e2);
    int f1 = builder.add_face(e0, e3, e1);
    int f2 = builder.add_face(e1, e3, e2);
    int f3 = builder.add_face(e2, e3, e0);
    builder.link(f0, e0, e1, f1);
    builder.link(f0, e1, e2, f2);
    builder.link(f0, e2, e0, f3);
    builder.link(f1, e3, e1, f2);
    builder.link(f2, e3, e2, f3);
    builder.link(f3, e3, e0, f1);

    // Conflict lists.
    std::vector<int> pending;
    for (int i = 0; i < n; ++i) {
        if (i == e0 || i == e1 || i == e2 || i == e3) continue;
        for (int f = 0; f < 4; ++f) {
            if (plane_dist(builder.faces[f], points[i]) > eps) {
                builder.faces[f].outside.push_back(i);
                break;
            }
        }
    }
    for (int f = 0; f < 4; ++f)
        if (!builder.faces[f].outside.empty()) pending.push_back(f);

    std::vector<int> visible;
    std::vector<char> visited;
    while (!pending.empty()) {
        int seed = pending.back();
        pending.pop_back();
        HullFace& seed_face = builder.faces[seed];
        if (!seed_face.alive || seed_face.outside.empty()) continue;

        int apex = seed_face.outside[0];
        double far = plane_dist(seed_face, points[apex]);
        for (int cand : seed_face.outside) {
            double d = plane_dist(seed_face, points[cand]);
            if (d > far) {
                far = d;
                apex = cand;
            }
        }

        // Visible region (BFS over live neighbors) and its horizon.
        visible.clear();
        visited.assign(builder.faces.size(), 0);
        struct HorizonEdge {
            int a, b;   // directed edge of the visible face
            int keep;   // invisible neighbor across it
        };
        std::vector<HorizonEdge> horizon;
        std::vector<int> stack{seed};
        visited[seed] = 1;
        while (!stack.empty()) {
            int f = stack.back();
            stack.pop_back();
            visible.push_back(f);
            for (int i = 0; i < 3; ++i) {
                int g = builder.faces[f].nbr[i];
                if (visited[g]) continue;
                if (plane_dist(builder.faces[g], points[apex]) > eps) {
                    visited[g] = 1;
                    stack.push_back(g);
                } else {
                    horizon.push_back({builder.faces[f].v[i], builder.faces[f].v[(i + 1) % 3], g});
                }
            }
        }

        // The horizon is a single loop around the visible patch; each loop
        // vertex has exactly one outgoing edge.
        std::unordered_map<int, int> face_from_start;
        std::unordered_map<int, int> face_from_end;
        std::vector<int> fresh;
        fresh.reserve(horizon.size());
        for (const HorizonEdge& e : horizon) {
            int nf = builder.add_face(e.a, e.b, apex);
            builder.link(nf, e.a, e.b, e.keep);
            if (!face_from_start.emplace(e.a, nf).second ||
                !face_from_end.emplace(e.b, nf).second)
                raise(ErrorCode::Internal, "non-simple hull horizon");
            fresh.push_back(nf);
        }
        for (const HorizonEdge& e : horizon) {
            int nf = face_from_start[e.a];
            builder.link(nf, e.b, apex, face_from_start.at(e.b));
            builder.link(nf, apex, e.a, face_from_end.at(e.a));
        }

        // Retire the visible patch and rehome its conflicts.
        for (int f : visible) {
            for (int cand : builder.faces[f].outside) {
                if (cand == apex) continue;
                for (int nf : fresh) {
                    if (plane_dist(builder.faces[nf], points[cand]) > eps) {
                        builder.faces[nf].outside.push_back(cand);
                        break;
                    }
                }
            }
            builder.faces[f].alive = false;
            builder.faces[f].outside.clear();
        }
        for (int nf : fresh)
            if (!builder.faces[nf].outside.empty()) pending.push_back(nf);
    }

    // Compact to a mesh over the referenced points only.
    std::vector<int> remap(points.size(), -1);
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> tris;
    for (const HullFace& f : builder.faces) {
        if (!f.alive) continue;
        std::array<int, 3> tri;
        for (int c = 0; c < 3; ++c) {
            int idx = f.v[c];
            if (remap[idx] < 0) {
                remap[idx] = static_cast<int>(vertices.size());
                vertices.push_back(points[idx]);
            }
            tri[c] = remap[idx];
        }
        tris.push_back(tri);
    }

    try {
        return build_mesh(std::move(vertices), std::move(tris));
    } catch (const Error& e) {
        raise(ErrorCode::DegenerateInput,
              std::string("hull construction produced an invalid surface: ") + e.what());
    }
}

} // namespace fb::ffmg
