#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "fb/vec3.hpp"

namespace fb {

// Indexed triangle surface. Faces are CCW as seen from outside, normals point
// outward and the enclosed volume is positive. `build_mesh` validates that the
// surface is a single closed, consistently oriented genus-0 2-manifold and
// fills in the adjacency tables; topology is immutable afterwards, only
// vertex positions may be rewritten (the FFMG solver does exactly that).
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;

    // Adjacency, filled by build_mesh. Edges are unique undirected pairs
    // (a < b) in lexicographic order; edge_faces holds the two incident faces.
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 2>> edge_faces;
    std::vector<std::vector<int>> vertex_neighbors;
    std::vector<std::vector<int>> vertex_faces;

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t face_count() const { return faces.size(); }
    std::size_t edge_count() const { return edges.size(); }
};

struct FaceGeometry {
    Vec3 normal; // unit, outward per winding
    double area = 0.0;
};

// Area below this is treated as degenerate (normalized units).
inline constexpr double kDegenerateFaceArea = 1e-12;

// Validates the closed-2-manifold invariants and builds adjacency.
// Throws NonManifold, InconsistentOrientation or DegenerateFace.
TriangleMesh build_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces);

// Re-checks the invariants of an already-built mesh (used by tests and the
// per-iteration topology audit); throws like build_mesh on violation.
void verify_mesh(const TriangleMesh& mesh);

// Outward unit normal and area of face f. Throws DegenerateFace when the
// area falls below kDegenerateFaceArea; force loops treat such faces as zero.
FaceGeometry face_geometry(const TriangleMesh& mesh, int f);

// Divergence-theorem volume: sum of v0 . (v1 x v2) / 6. Positive for
// outward orientation.
double signed_volume(const TriangleMesh& mesh);

// V - E + F on the built mesh.
int euler_characteristic(const TriangleMesh& mesh);

// V - E + F on a raw container (E counted from unique undirected index
// pairs). Works on any face soup, e.g. two disjoint shells in one buffer.
int euler_characteristic(std::size_t vertex_count, const std::vector<std::array<int, 3>>& faces);

// Arithmetic mean over unique edges. Throws EmptyMesh when there are none.
double avg_edge_length(const TriangleMesh& mesh);

// Per-vertex average length of the incident edges (the refinement density
// measure); same order as mesh.vertices.
std::vector<double> vertex_avg_edge_length(const TriangleMesh& mesh);

} // namespace fb
