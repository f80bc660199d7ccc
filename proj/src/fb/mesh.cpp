#include "fb/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "fb/error.hpp"

namespace fb {

namespace {

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

} // namespace

TriangleMesh build_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces) {
    TriangleMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.faces = std::move(faces);

    const int nv = static_cast<int>(mesh.vertices.size());
    const int nf = static_cast<int>(mesh.faces.size());
    if (nf == 0) raise(ErrorCode::EmptyMesh, "mesh has no faces");

    for (const Vec3& v : mesh.vertices) {
        if (!is_finite(v)) raise(ErrorCode::InvalidArgument, "non-finite vertex position");
    }

    for (int f = 0; f < nf; ++f) {
        const auto& tri = mesh.faces[f];
        for (int c = 0; c < 3; ++c) {
            if (tri[c] < 0 || tri[c] >= nv)
                raise(ErrorCode::InvalidArgument,
                      "face " + std::to_string(f) + " references vertex " + std::to_string(tri[c]) +
                          " out of range");
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            raise(ErrorCode::DegenerateFace,
                  "face " + std::to_string(f) + " repeats a vertex index");
    }

    // Duplicate faces (same vertex set) collapse the manifold structure.
    {
        std::vector<std::array<int, 3>> sorted(mesh.faces.size());
        for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
            sorted[f] = mesh.faces[f];
            std::sort(sorted[f].begin(), sorted[f].end());
        }
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            raise(ErrorCode::NonManifold, "duplicate face");
    }

    // Undirected edge -> (face count, per-direction counts).
    struct EdgeInfo {
        int count = 0;
        int forward = 0; // direction (min -> max)
        std::array<int, 2> faces{-1, -1};
    };
    std::map<std::uint64_t, EdgeInfo> edge_map;

    for (int f = 0; f < nf; ++f) {
        const auto& tri = mesh.faces[f];
        for (int c = 0; c < 3; ++c) {
            int a = tri[c];
            int b = tri[(c + 1) % 3];
            EdgeInfo& info = edge_map[edge_key(a, b)];
            if (info.count < 2) info.faces[info.count] = f;
            info.count += 1;
            if (a < b) info.forward += 1;
        }
    }

    for (const auto& [key, info] : edge_map) {
        int a = static_cast<int>(key >> 32);
        int b = static_cast<int>(key & 0xffffffffu);
        if (info.count != 2)
            raise(ErrorCode::NonManifold,
                  "edge (" + std::to_string(a) + "," + std::to_string(b) + ") shared by " +
                      std::to_string(info.count) + " faces");
        if (info.forward != 1)
            raise(ErrorCode::InconsistentOrientation,
                  "edge (" + std::to_string(a) + "," + std::to_string(b) +
                      ") traversed twice in the same direction");
    }

    mesh.edges.reserve(edge_map.size());
    mesh.edge_faces.reserve(edge_map.size());
    mesh.vertex_neighbors.assign(nv, {});
    mesh.vertex_faces.assign(nv, {});

    for (const auto& [key, info] : edge_map) {
        int a = static_cast<int>(key >> 32);
        int b = static_cast<int>(key & 0xffffffffu);
        mesh.edges.push_back({a, b});
        mesh.edge_faces.push_back(info.faces);
        mesh.vertex_neighbors[a].push_back(b);
        mesh.vertex_neighbors[b].push_back(a);
    }
    for (auto& nbrs : mesh.vertex_neighbors) std::sort(nbrs.begin(), nbrs.end());

    for (int f = 0; f < nf; ++f)
        for (int c = 0; c < 3; ++c) mesh.vertex_faces[mesh.faces[f][c]].push_back(f);

    for (int v = 0; v < nv; ++v) {
        if (mesh.vertex_faces[v].empty())
            raise(ErrorCode::NonManifold, "vertex " + std::to_string(v) + " is unreferenced");
    }

    const int chi = euler_characteristic(mesh);
    if (chi != 2)
        raise(ErrorCode::NonManifold,
              "surface is not a single closed genus-0 shell (V-E+F = " + std::to_string(chi) + ")");

    return mesh;
}

void verify_mesh(const TriangleMesh& mesh) {
    build_mesh(mesh.vertices, mesh.faces);
}

FaceGeometry face_geometry(const TriangleMesh& mesh, int f) {
    if (f < 0 || f >= static_cast<int>(mesh.faces.size()))
        raise(ErrorCode::InvalidArgument, "face index out of range");
    const auto& tri = mesh.faces[f];
    const Vec3& v0 = mesh.vertices[tri[0]];
    const Vec3& v1 = mesh.vertices[tri[1]];
    const Vec3& v2 = mesh.vertices[tri[2]];
    Vec3 n = cross(v1 - v0, v2 - v0);
    double len = norm(n);
    double area = 0.5 * len;
    if (area < kDegenerateFaceArea)
        raise(ErrorCode::DegenerateFace, "face " + std::to_string(f) + " has near-zero area");
    return {n / len, area};
}

double signed_volume(const TriangleMesh& mesh) {
    double vol = 0.0;
    for (const auto& tri : mesh.faces) {
        const Vec3& v0 = mesh.vertices[tri[0]];
        const Vec3& v1 = mesh.vertices[tri[1]];
        const Vec3& v2 = mesh.vertices[tri[2]];
        vol += dot(v0, cross(v1, v2));
    }
    return vol / 6.0;
}

int euler_characteristic(const TriangleMesh& mesh) {
    return static_cast<int>(mesh.vertex_count()) - static_cast<int>(mesh.edge_count()) +
           static_cast<int>(mesh.face_count());
}

int euler_characteristic(std::size_t vertex_count, const std::vector<std::array<int, 3>>& faces) {
    std::vector<std::uint64_t> keys;
    keys.reserve(faces.size() * 3);
    for (const auto& tri : faces)
        for (int c = 0; c < 3; ++c) keys.push_back(edge_key(tri[c], tri[(c + 1) % 3]));
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return static_cast<int>(vertex_count) - static_cast<int>(keys.size()) +
           static_cast<int>(faces.size());
}

double avg_edge_length(const TriangleMesh& mesh) {
    if (mesh.edges.empty()) raise(ErrorCode::EmptyMesh, "mesh has no edges");
    double sum = 0.0;
    for (const auto& e : mesh.edges) sum += distance(mesh.vertices[e[0]], mesh.vertices[e[1]]);
    return sum / static_cast<double>(mesh.edges.size());
}

std::vector<double> vertex_avg_edge_length(const TriangleMesh& mesh) {
    std::vector<double> avg(mesh.vertex_count(), 0.0);
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        const auto& nbrs = mesh.vertex_neighbors[v];
        if (nbrs.empty()) continue;
        double sum = 0.0;
        for (int j : nbrs) sum += distance(mesh.vertices[v], mesh.vertices[j]);
        avg[v] = sum / static_cast<double>(nbrs.size());
    }
    return avg;
}

} // namespace fb
