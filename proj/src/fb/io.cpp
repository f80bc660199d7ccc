#include "fb/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "fb/error.hpp"

namespace fb::io {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_for_write(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) raise(ErrorCode::Io, "cannot open '" + path + "' for writing");
    return f;
}

void finish_write(std::FILE* f, const std::string& path) {
    if (std::ferror(f) || std::fflush(f) != 0)
        raise(ErrorCode::Io, "write failed for '" + path + "'");
}

void put_g17(std::FILE* f, double v, char suffix) {
    std::fprintf(f, "%.17g%c", v, suffix);
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
    raise(ErrorCode::Parse, path + ":" + std::to_string(line) + ": " + what);
}

} // namespace

void write_mesh_obj(const TriangleMesh& mesh, const std::string& path) {
    if (mesh.faces.empty() || mesh.vertices.empty())
        raise(ErrorCode::EmptyMesh, "refusing to write an empty mesh");
    FilePtr f = open_for_write(path);
    for (const Vec3& v : mesh.vertices) {
        std::fprintf(f.get(), "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
    }
    for (const auto& tri : mesh.faces) {
        std::fprintf(f.get(), "f %d %d %d\n", tri[0] + 1, tri[1] + 1, tri[2] + 1);
    }
    finish_write(f.get(), path);
}

TriangleMesh read_mesh_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::Io, "cannot open '" + path + "' for reading");

    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 v;
            if (!(ss >> v.x >> v.y >> v.z)) parse_fail(path, lineno, "malformed vertex line");
            vertices.push_back(v);
        } else if (tag == "f") {
            std::array<int, 3> tri;
            std::string tok;
            for (int c = 0; c < 3; ++c) {
                if (!(ss >> tok)) parse_fail(path, lineno, "face needs 3 indices");
                // Accept v, v/vt, v//vn forms; only the vertex index matters.
                tri[c] = std::atoi(tok.c_str());
                if (tri[c] == 0) parse_fail(path, lineno, "bad face index '" + tok + "'");
                if (tri[c] < 0) tri[c] = static_cast<int>(vertices.size()) + tri[c] + 1;
                tri[c] -= 1;
            }
            std::string extra;
            if (ss >> extra) parse_fail(path, lineno, "only triangles are supported");
            faces.push_back(tri);
        }
        // Other directives (vn, vt, o, g, s, usemtl, mtllib) are ignored.
    }
    if (vertices.empty() && faces.empty()) raise(ErrorCode::EmptyFile, path + " has no geometry");
    return build_mesh(std::move(vertices), std::move(faces));
}

void write_mesh_ply(const TriangleMesh& mesh, const std::string& path) {
    if (mesh.faces.empty() || mesh.vertices.empty())
        raise(ErrorCode::EmptyMesh, "refusing to write an empty mesh");
    FilePtr f = open_for_write(path);
    std::fprintf(f.get(),
                 "ply\nformat ascii 1.0\nelement vertex %zu\n"
                 "property double x\nproperty double y\nproperty double z\n"
                 "element face %zu\nproperty list uchar int vertex_indices\nend_header\n",
                 mesh.vertices.size(), mesh.faces.size());
    for (const Vec3& v : mesh.vertices)
        std::fprintf(f.get(), "%.17g %.17g %.17g\n", v.x, v.y, v.z);
    for (const auto& tri : mesh.faces)
        std::fprintf(f.get(), "3 %d %d %d\n", tri[0], tri[1], tri[2]);
    finish_write(f.get(), path);
}

std::vector<Vec3> read_points_xyz(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::Io, "cannot open '" + path + "' for reading");

    std::vector<Vec3> points;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        Vec3 p;
        if (!(ss >> p.x)) continue; // blank or comment-only line
        if (!(ss >> p.y >> p.z)) parse_fail(path, lineno, "expected 3 coordinates");
        double extra;
        if (ss >> extra) parse_fail(path, lineno, "expected exactly 3 coordinates");
        points.push_back(p);
    }
    if (points.empty()) raise(ErrorCode::EmptyFile, path + " contains no points");
    return points;
}

void write_points_xyz(const std::vector<Vec3>& points, const std::string& path) {
    FilePtr f = open_for_write(path);
    for (const Vec3& p : points) std::fprintf(f.get(), "%.17g %.17g %.17g\n", p.x, p.y, p.z);
    finish_write(f.get(), path);
}

void write_trace_csv(const std::vector<optics::TraceRecord>& records, const std::string& path) {
    FilePtr f = open_for_write(path);
    std::fputs("ix,ox,oy,oz,dx,dy,dz,hx,hy,hz,rx,ry,rz,y\n", f.get());
    for (const auto& r : records) {
        std::fprintf(f.get(), "%zu,", r.incident_index);
        put_g17(f.get(), r.incident.origin.x, ',');
        put_g17(f.get(), r.incident.origin.y, ',');
        put_g17(f.get(), r.incident.origin.z, ',');
        put_g17(f.get(), r.incident.direction.x, ',');
        put_g17(f.get(), r.incident.direction.y, ',');
        put_g17(f.get(), r.incident.direction.z, ',');
        put_g17(f.get(), r.hit_point.x, ',');
        put_g17(f.get(), r.hit_point.y, ',');
        put_g17(f.get(), r.hit_point.z, ',');
        put_g17(f.get(), r.reflected.direction.x, ',');
        put_g17(f.get(), r.reflected.direction.y, ',');
        put_g17(f.get(), r.reflected.direction.z, ',');
        put_g17(f.get(), r.lateral_height, '\n');
    }
    finish_write(f.get(), path);
}

std::vector<optics::TraceRecord> read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::Io, "cannot open '" + path + "' for reading");

    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) raise(ErrorCode::EmptyFile, path + " is empty");
    ++lineno;
    if (line != "ix,ox,oy,oz,dx,dy,dz,hx,hy,hz,rx,ry,rz,y")
        parse_fail(path, lineno, "unexpected trace CSV header");

    std::vector<optics::TraceRecord> records;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        double vals[13];
        std::size_t ix = 0;
        char* cursor = line.data();
        char* end = nullptr;
        ix = std::strtoull(cursor, &end, 10);
        if (end == cursor || *end != ',') parse_fail(path, lineno, "bad record index");
        cursor = end + 1;
        for (int c = 0; c < 13; ++c) {
            vals[c] = std::strtod(cursor, &end);
            if (end == cursor) parse_fail(path, lineno, "expected 14 comma-separated fields");
            cursor = end;
            if (c < 12) {
                if (*cursor != ',') parse_fail(path, lineno, "expected 14 comma-separated fields");
                ++cursor;
            }
        }
        optics::TraceRecord r;
        r.incident_index = ix;
        r.incident.origin = {vals[0], vals[1], vals[2]};
        r.incident.direction = {vals[3], vals[4], vals[5]};
        r.hit_point = {vals[6], vals[7], vals[8]};
        r.reflected = {r.hit_point, {vals[9], vals[10], vals[11]}};
        r.lateral_height = vals[12];
        records.push_back(r);
    }
    return records;
}

void write_grid_csv(const density::DensityGrid& grid, const std::string& path) {
    FilePtr f = open_for_write(path);
    std::fputs("i,j,k,count\n", f.get());
    const density::GridSpec& spec = grid.spec;
    for (int k = 0; k < spec.nz; ++k)
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i) {
                std::int64_t count = grid.counts[spec.flat_index(i, j, k)];
                if (count != 0)
                    std::fprintf(f.get(), "%d,%d,%d,%lld\n", i, j, k,
                                 static_cast<long long>(count));
            }
    finish_write(f.get(), path);
}

void write_grid_json(const density::DensityGrid& grid, const std::string& path) {
    nlohmann::json j;
    j["grid"] = {
        {"min", {grid.spec.min.x, grid.spec.min.y, grid.spec.min.z}},
        {"max", {grid.spec.max.x, grid.spec.max.y, grid.spec.max.z}},
        {"resolution", {grid.spec.nx, grid.spec.ny, grid.spec.nz}},
    };
    j["total_rays"] = grid.total_rays;

    FilePtr f = open_for_write(path);
    const std::string text = j.dump(2) + "\n";
    std::fwrite(text.data(), 1, text.size(), f.get());
    finish_write(f.get(), path);
}

void write_metrics_csv(const ffmg::MetricsLog& log, const std::string& path) {
    FilePtr f = open_for_write(path);
    std::fputs("iter,max_disp,avg_edge,volume,n_snapped,pressure,"
               "tp_px,tp_py,tp_pz,tp_ex,tp_ey,tp_ez,tp_x,tp_y,tp_z\n",
               f.get());
    for (const auto& row : log) {
        std::fprintf(f.get(), "%d,", row.iteration);
        put_g17(f.get(), row.max_displacement, ',');
        put_g17(f.get(), row.avg_edge_length, ',');
        put_g17(f.get(), row.volume, ',');
        std::fprintf(f.get(), "%d,", row.n_snapped);
        put_g17(f.get(), row.pressure, ',');
        put_g17(f.get(), row.test_point_pressure_force.x, ',');
        put_g17(f.get(), row.test_point_pressure_force.y, ',');
        put_g17(f.get(), row.test_point_pressure_force.z, ',');
        put_g17(f.get(), row.test_point_elastic_force.x, ',');
        put_g17(f.get(), row.test_point_elastic_force.y, ',');
        put_g17(f.get(), row.test_point_elastic_force.z, ',');
        put_g17(f.get(), row.test_point_position.x, ',');
        put_g17(f.get(), row.test_point_position.y, ',');
        put_g17(f.get(), row.test_point_position.z, '\n');
    }
    finish_write(f.get(), path);
}

void write_report_json(const validate::ValidationReport& report, const std::string& path) {
    nlohmann::json j;
    j["n_points"] = report.n_points;
    j["n_inside"] = report.n_inside;
    j["n_within_tolerance"] = report.n_within_tolerance;
    j["worst_outside_distance"] = report.worst_outside_distance;
    j["n_self_intersection_pairs"] = report.n_self_intersection_pairs;
    j["euler_characteristic"] = report.euler_characteristic;
    j["curvature_summary"] = {
        {"min", report.curvature_summary.min},
        {"max", report.curvature_summary.max},
        {"mean", report.curvature_summary.mean},
    };
    j["passed"] = report.passed();

    FilePtr f = open_for_write(path);
    const std::string text = j.dump(2) + "\n";
    std::fwrite(text.data(), 1, text.size(), f.get());
    finish_write(f.get(), path);
}

void write_analytic_csv(const optics::SphericalMirror& mirror, const std::vector<double>& heights,
                        const std::string& path) {
    optics::validate_mirror(mirror);
    const double R = mirror.radius_of_curvature;
    const double f0 = mirror.focal_length();

    FilePtr f = open_for_write(path);
    std::fputs("y,z_numeric,z_analytic,aberration_analytic,f_eff\n", f.get());
    for (double y : heights) {
        Ray ray{{y, 0.0, 2.0 * R}, {0.0, 0.0, -1.0}};
        auto rec = optics::reflect_ray(mirror, ray);
        if (!rec || rec->lateral_height <= 0.0) continue; // misses and the on-axis ray

        double z_numeric = optics::axis_crossing_numeric(*rec);
        put_g17(f.get(), y, ',');
        put_g17(f.get(), z_numeric, ',');
        put_g17(f.get(), optics::caustic_z_analytic(y, f0), ',');
        put_g17(f.get(), optics::longitudinal_aberration_analytic(y, R), ',');
        put_g17(f.get(), optics::effective_focal_analytic(y, R), '\n');
    }
    finish_write(f.get(), path);
}

} // namespace fb::io
