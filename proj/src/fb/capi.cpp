#include "focalbody/focalbody.h"

#include <cstring>
#include <exception>
#include <memory>
#include <string>
#include <vector>

#include "fb/density.hpp"
#include "fb/error.hpp"
#include "fb/ffmg.hpp"
#include "fb/io.hpp"
#include "fb/mesh.hpp"
#include "fb/optics.hpp"
#include "fb/validate.hpp"

struct fb_trace {
    std::vector<fb::optics::TraceRecord> records;
};
struct fb_grid {
    fb::density::DensityGrid grid;
};
struct fb_cloud {
    std::vector<fb::Vec3> points;
};
struct fb_mesh {
    fb::TriangleMesh mesh;
};
struct fb_metrics {
    fb::ffmg::MetricsLog log;
};
struct fb_report {
    fb::validate::ValidationReport report;
};

namespace {

thread_local std::string g_last_error;

fb_status status_from_code(fb::ErrorCode code) {
    switch (code) {
        case fb::ErrorCode::InvalidArgument: return FB_ERR_INVALID_ARGUMENT;
        case fb::ErrorCode::NonManifold: return FB_ERR_NON_MANIFOLD;
        case fb::ErrorCode::InconsistentOrientation: return FB_ERR_INCONSISTENT_ORIENTATION;
        case fb::ErrorCode::DegenerateFace: return FB_ERR_DEGENERATE_FACE;
        case fb::ErrorCode::DegenerateInput: return FB_ERR_DEGENERATE_INPUT;
        case fb::ErrorCode::DegenerateExtent: return FB_ERR_DEGENERATE_EXTENT;
        case fb::ErrorCode::EmptyMesh: return FB_ERR_EMPTY_MESH;
        case fb::ErrorCode::EmptyCloud: return FB_ERR_EMPTY_CLOUD;
        case fb::ErrorCode::EmptyFile: return FB_ERR_EMPTY_FILE;
        case fb::ErrorCode::Parse: return FB_ERR_PARSE;
        case fb::ErrorCode::Io: return FB_ERR_IO;
        case fb::ErrorCode::NonFiniteForce: return FB_ERR_NON_FINITE_FORCE;
        case fb::ErrorCode::OnAxisRay: return FB_ERR_ON_AXIS_RAY;
        case fb::ErrorCode::RayParallelToPlane: return FB_ERR_RAY_PARALLEL_TO_PLANE;
        case fb::ErrorCode::InvalidBracket: return FB_ERR_INVALID_BRACKET;
        case fb::ErrorCode::Internal: return FB_ERR_INTERNAL;
    }
    return FB_ERR_INTERNAL;
}

template <typename Fn>
fb_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return FB_OK;
    } catch (const fb::Error& e) {
        g_last_error = e.what();
        return status_from_code(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return FB_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return FB_ERR_INTERNAL;
    }
}

fb_status fail_invalid(const char* message) {
    g_last_error = message;
    return FB_ERR_INVALID_ARGUMENT;
}

fb::optics::SphericalMirror to_mirror(const fb_mirror& m) {
    return {m.radius_of_curvature, m.aperture_diameter};
}

fb::optics::SourceSpec to_source(const fb_source& s) {
    fb::optics::SourceSpec spec;
    spec.n_rays = s.n_rays;
    spec.tilt_x = s.tilt_x;
    spec.tilt_y = s.tilt_y;
    spec.sampling = s.sampling == FB_SAMPLING_SQUARE_GRID ? fb::optics::Sampling::SquareGrid
                                                          : fb::optics::Sampling::SunflowerDisk;
    spec.seed = s.seed;
    return spec;
}

fb::density::GridSpec to_grid_spec(const fb_grid_spec& g) {
    fb::density::GridSpec spec;
    spec.min = {g.min[0], g.min[1], g.min[2]};
    spec.max = {g.max[0], g.max[1], g.max[2]};
    spec.nx = g.resolution[0];
    spec.ny = g.resolution[1];
    spec.nz = g.resolution[2];
    return spec;
}

fb::ffmg::FfmgConfig to_ffmg_config(const fb_ffmg_config& c) {
    fb::ffmg::FfmgConfig config;
    config.subdivision_level = c.subdivision_level;
    config.PR_in = c.PR_in;
    config.PR_out = c.PR_out;
    config.pressure_scaling_factor = c.pressure_scaling_factor;
    switch (c.pressure_mode) {
        case FB_PRESSURE_NORM: config.pressure_mode = fb::ffmg::PressureMode::Norm; break;
        case FB_PRESSURE_LOCAL_COM: config.pressure_mode = fb::ffmg::PressureMode::LocalCoM; break;
        default: config.pressure_mode = fb::ffmg::PressureMode::GlobalCoM; break;
    }
    config.pressure_increment = c.pressure_increment;
    config.snapping_tolerance = c.snapping_tolerance;
    config.max_NNsnapping_iterations = c.max_NNsnapping_iterations;
    config.deformation_tolerance = c.deformation_tolerance;
    config.mTol = c.mTol;
    config.deformation_max_iterations = c.deformation_max_iterations;
    config.dt = c.dt;
    config.smoothingIterations = c.smoothingIterations;
    config.smoothingTol = c.smoothingTol;
    config.damping_factor = c.damping_factor;
    config.apply_snapping = c.apply_snapping != 0;
    config.stiffness = c.stiffness;
    config.strain_factor = c.strain_factor;
    config.max_strain = c.max_strain;
    config.distance_factor_strength = c.distance_factor_strength;
    config.refinement_gamma = c.refinement_gamma;
    config.L_min = c.L_min;
    config.local_com_k = c.local_com_k;
    config.integration = c.integration == FB_INTEGRATION_INERTIAL
                             ? fb::ffmg::Integration::Inertial
                             : fb::ffmg::Integration::Overdamped;
    config.test_point_index = c.test_point_index;
    return config;
}

} // namespace

extern "C" {

const char* fb_version(void) { return "focalbody 0.1.0"; }

const char* fb_status_name(fb_status status) {
    switch (status) {
        case FB_OK: return "FB_OK";
        case FB_ERR_INVALID_ARGUMENT: return "FB_ERR_INVALID_ARGUMENT";
        case FB_ERR_NON_MANIFOLD: return "FB_ERR_NON_MANIFOLD";
        case FB_ERR_INCONSISTENT_ORIENTATION: return "FB_ERR_INCONSISTENT_ORIENTATION";
        case FB_ERR_DEGENERATE_FACE: return "FB_ERR_DEGENERATE_FACE";
        case FB_ERR_DEGENERATE_INPUT: return "FB_ERR_DEGENERATE_INPUT";
        case FB_ERR_DEGENERATE_EXTENT: return "FB_ERR_DEGENERATE_EXTENT";
        case FB_ERR_EMPTY_MESH: return "FB_ERR_EMPTY_MESH";
        case FB_ERR_EMPTY_CLOUD: return "FB_ERR_EMPTY_CLOUD";
        case FB_ERR_EMPTY_FILE: return "FB_ERR_EMPTY_FILE";
        case FB_ERR_PARSE: return "FB_ERR_PARSE";
        case FB_ERR_IO: return "FB_ERR_IO";
        case FB_ERR_NON_FINITE_FORCE: return "FB_ERR_NON_FINITE_FORCE";
        case FB_ERR_ON_AXIS_RAY: return "FB_ERR_ON_AXIS_RAY";
        case FB_ERR_RAY_PARALLEL_TO_PLANE: return "FB_ERR_RAY_PARALLEL_TO_PLANE";
        case FB_ERR_INVALID_BRACKET: return "FB_ERR_INVALID_BRACKET";
        case FB_ERR_INTERNAL: return "FB_ERR_INTERNAL";
    }
    return "FB_ERR_UNKNOWN";
}

const char* fb_last_error(void) { return g_last_error.c_str(); }

void fb_grid_spec_default(const fb_mirror* mirror, fb_grid_spec* out) {
    if (!out) return;
    double R = mirror ? mirror->radius_of_curvature : 1.0;
    fb::density::GridSpec spec = fb::density::default_grid(R);
    out->min[0] = spec.min.x;
    out->min[1] = spec.min.y;
    out->min[2] = spec.min.z;
    out->max[0] = spec.max.x;
    out->max[1] = spec.max.y;
    out->max[2] = spec.max.z;
    out->resolution[0] = spec.nx;
    out->resolution[1] = spec.ny;
    out->resolution[2] = spec.nz;
}

void fb_ffmg_config_defaults(fb_ffmg_config* out) {
    if (!out) return;
    fb::ffmg::FfmgConfig d;
    out->subdivision_level = d.subdivision_level;
    out->PR_in = d.PR_in;
    out->PR_out = d.PR_out;
    out->pressure_scaling_factor = d.pressure_scaling_factor;
    out->pressure_mode = FB_PRESSURE_GLOBAL_COM;
    out->pressure_increment = d.pressure_increment;
    out->snapping_tolerance = d.snapping_tolerance;
    out->max_NNsnapping_iterations = d.max_NNsnapping_iterations;
    out->deformation_tolerance = d.deformation_tolerance;
    out->mTol = d.mTol;
    out->deformation_max_iterations = d.deformation_max_iterations;
    out->dt = d.dt;
    out->smoothingIterations = d.smoothingIterations;
    out->smoothingTol = d.smoothingTol;
    out->damping_factor = d.damping_factor;
    out->apply_snapping = d.apply_snapping ? 1 : 0;
    out->stiffness = d.stiffness;
    out->strain_factor = d.strain_factor;
    out->max_strain = d.max_strain;
    out->distance_factor_strength = d.distance_factor_strength;
    out->refinement_gamma = d.refinement_gamma;
    out->L_min = d.L_min;
    out->local_com_k = d.local_com_k;
    out->integration = FB_INTEGRATION_OVERDAMPED;
    out->test_point_index = d.test_point_index;
}

void fb_trace_free(fb_trace* trace) { delete trace; }
void fb_grid_free(fb_grid* grid) { delete grid; }
void fb_cloud_free(fb_cloud* cloud) { delete cloud; }
void fb_mesh_free(fb_mesh* mesh) { delete mesh; }
void fb_metrics_free(fb_metrics* metrics) { delete metrics; }
void fb_report_free(fb_report* report) { delete report; }

fb_status fb_trace_run(const fb_mirror* mirror, const fb_source* source, fb_trace** out) {
    if (!mirror || !source || !out) return fail_invalid("fb_trace_run: null argument");
    return guarded([&] {
        auto trace = std::make_unique<fb_trace>();
        trace->records = fb::optics::trace_bundle(to_mirror(*mirror), to_source(*source));
        *out = trace.release();
    });
}

fb_status fb_trace_count(const fb_trace* trace, size_t* out) {
    if (!trace || !out) return fail_invalid("fb_trace_count: null argument");
    *out = trace->records.size();
    return FB_OK;
}

fb_status fb_trace_write_csv(const fb_trace* trace, const char* path) {
    if (!trace || !path) return fail_invalid("fb_trace_write_csv: null argument");
    return guarded([&] { fb::io::write_trace_csv(trace->records, path); });
}

fb_status fb_trace_read_csv(const char* path, fb_trace** out) {
    if (!path || !out) return fail_invalid("fb_trace_read_csv: null argument");
    return guarded([&] {
        auto trace = std::make_unique<fb_trace>();
        trace->records = fb::io::read_trace_csv(path);
        *out = trace.release();
    });
}

fb_status fb_analytic_write_csv(const fb_mirror* mirror, const double* heights, size_t n_heights,
                                const char* path) {
    if (!mirror || (!heights && n_heights > 0) || !path)
        return fail_invalid("fb_analytic_write_csv: null argument");
    return guarded([&] {
        std::vector<double> hs(heights, heights + n_heights);
        fb::io::write_analytic_csv(to_mirror(*mirror), hs, path);
    });
}

fb_status fb_grid_accumulate(const fb_grid_spec* spec, const fb_trace* trace, fb_grid** out) {
    if (!spec || !trace || !out) return fail_invalid("fb_grid_accumulate: null argument");
    return guarded([&] {
        auto grid = std::make_unique<fb_grid>();
        grid->grid = fb::density::accumulate(to_grid_spec(*spec), trace->records);
        *out = grid.release();
    });
}

fb_status fb_grid_total_rays(const fb_grid* grid, long long* out) {
    if (!grid || !out) return fail_invalid("fb_grid_total_rays: null argument");
    *out = grid->grid.total_rays;
    return FB_OK;
}

fb_status fb_grid_write_csv(const fb_grid* grid, const char* path) {
    if (!grid || !path) return fail_invalid("fb_grid_write_csv: null argument");
    return guarded([&] { fb::io::write_grid_csv(grid->grid, path); });
}

fb_status fb_grid_write_json(const fb_grid* grid, const char* path) {
    if (!grid || !path) return fail_invalid("fb_grid_write_json: null argument");
    return guarded([&] { fb::io::write_grid_json(grid->grid, path); });
}

fb_status fb_cloud_extract(const fb_grid* grid, double threshold_fraction, fb_cloud** out) {
    if (!grid || !out) return fail_invalid("fb_cloud_extract: null argument");
    return guarded([&] {
        auto cloud = std::make_unique<fb_cloud>();
        cloud->points = fb::density::extract_point_cloud(grid->grid, threshold_fraction).points;
        *out = cloud.release();
    });
}

fb_status fb_cloud_read_xyz(const char* path, fb_cloud** out) {
    if (!path || !out) return fail_invalid("fb_cloud_read_xyz: null argument");
    return guarded([&] {
        auto cloud = std::make_unique<fb_cloud>();
        cloud->points = fb::io::read_points_xyz(path);
        *out = cloud.release();
    });
}

fb_status fb_cloud_write_xyz(const fb_cloud* cloud, const char* path) {
    if (!cloud || !path) return fail_invalid("fb_cloud_write_xyz: null argument");
    return guarded([&] { fb::io::write_points_xyz(cloud->points, path); });
}

fb_status fb_cloud_size(const fb_cloud* cloud, size_t* out) {
    if (!cloud || !out) return fail_invalid("fb_cloud_size: null argument");
    *out = cloud->points.size();
    return FB_OK;
}

fb_status fb_cloud_points(const fb_cloud* cloud, double* xyz, size_t capacity, size_t* out_size) {
    if (!cloud || !out_size) return fail_invalid("fb_cloud_points: null argument");
    *out_size = cloud->points.size();
    if (!xyz) return FB_OK;
    size_t n = capacity < cloud->points.size() ? capacity : cloud->points.size();
    for (size_t i = 0; i < n; ++i) {
        xyz[3 * i + 0] = cloud->points[i].x;
        xyz[3 * i + 1] = cloud->points[i].y;
        xyz[3 * i + 2] = cloud->points[i].z;
    }
    return FB_OK;
}

fb_status fb_cloud_from_points(const double* xyz, size_t n_points, fb_cloud** out) {
    if (!xyz || !out) return fail_invalid("fb_cloud_from_points: null argument");
    return guarded([&] {
        auto cloud = std::make_unique<fb_cloud>();
        cloud->points.reserve(n_points);
        for (size_t i = 0; i < n_points; ++i)
            cloud->points.push_back(
                {xyz[3 * i + 0], xyz[3 * i + 1], xyz[3 * i + 2]});
        *out = cloud.release();
    });
}

fb_status fb_cloud_normalize(const fb_cloud* cloud, fb_cloud** out, double* out_p_min,
                             double* out_p_max) {
    if (!cloud || !out) return fail_invalid("fb_cloud_normalize: null argument");
    return guarded([&] {
        auto [points, record] = fb::ffmg::normalize_points(cloud->points);
        auto normalized = std::make_unique<fb_cloud>();
        normalized->points = std::move(points);
        if (out_p_min) {
            out_p_min[0] = record.p_min.x;
            out_p_min[1] = record.p_min.y;
            out_p_min[2] = record.p_min.z;
        }
        if (out_p_max) {
            out_p_max[0] = record.p_max.x;
            out_p_max[1] = record.p_max.y;
            out_p_max[2] = record.p_max.z;
        }
        *out = normalized.release();
    });
}

fb_status fb_ffmg_run(const fb_cloud* cloud, const fb_ffmg_config* config, fb_mesh** out_mesh,
                      fb_metrics** out_metrics, fb_run_info* out_info) {
    if (!cloud || !config || !out_mesh) return fail_invalid("fb_ffmg_run: null argument");
    return guarded([&] {
        fb::ffmg::RunResult result = fb::ffmg::run_deformation(cloud->points, to_ffmg_config(*config));
        auto mesh = std::make_unique<fb_mesh>();
        mesh->mesh = std::move(result.mesh);
        if (out_metrics) {
            auto metrics = std::make_unique<fb_metrics>();
            metrics->log = std::move(result.log);
            *out_metrics = metrics.release();
        }
        if (out_info) {
            out_info->iterations = result.iterations;
            out_info->converged = result.converged ? 1 : 0;
            int snapped = 0;
            if (!result.log.empty()) snapped = result.log.back().n_snapped;
            out_info->n_snapped = snapped;
            out_info->mesh_vertices = static_cast<int>(mesh->mesh.vertex_count());
            out_info->mesh_faces = static_cast<int>(mesh->mesh.face_count());
            out_info->p_min[0] = result.normalization.p_min.x;
            out_info->p_min[1] = result.normalization.p_min.y;
            out_info->p_min[2] = result.normalization.p_min.z;
            out_info->p_max[0] = result.normalization.p_max.x;
            out_info->p_max[1] = result.normalization.p_max.y;
            out_info->p_max[2] = result.normalization.p_max.z;
        }
        *out_mesh = mesh.release();
    });
}

fb_status fb_metrics_rows(const fb_metrics* metrics, size_t* out) {
    if (!metrics || !out) return fail_invalid("fb_metrics_rows: null argument");
    *out = metrics->log.size();
    return FB_OK;
}

fb_status fb_metrics_write_csv(const fb_metrics* metrics, const char* path) {
    if (!metrics || !path) return fail_invalid("fb_metrics_write_csv: null argument");
    return guarded([&] { fb::io::write_metrics_csv(metrics->log, path); });
}

fb_status fb_mesh_read_obj(const char* path, fb_mesh** out) {
    if (!path || !out) return fail_invalid("fb_mesh_read_obj: null argument");
    return guarded([&] {
        auto mesh = std::make_unique<fb_mesh>();
        mesh->mesh = fb::io::read_mesh_obj(path);
        *out = mesh.release();
    });
}

fb_status fb_mesh_write_obj(const fb_mesh* mesh, const char* path) {
    if (!mesh || !path) return fail_invalid("fb_mesh_write_obj: null argument");
    return guarded([&] { fb::io::write_mesh_obj(mesh->mesh, path); });
}

fb_status fb_mesh_write_ply(const fb_mesh* mesh, const char* path) {
    if (!mesh || !path) return fail_invalid("fb_mesh_write_ply: null argument");
    return guarded([&] { fb::io::write_mesh_ply(mesh->mesh, path); });
}

fb_status fb_mesh_counts(const fb_mesh* mesh, size_t* out_vertices, size_t* out_faces) {
    if (!mesh || !out_vertices || !out_faces) return fail_invalid("fb_mesh_counts: null argument");
    *out_vertices = mesh->mesh.vertex_count();
    *out_faces = mesh->mesh.face_count();
    return FB_OK;
}

fb_status fb_mesh_volume(const fb_mesh* mesh, double* out) {
    if (!mesh || !out) return fail_invalid("fb_mesh_volume: null argument");
    return guarded([&] { *out = fb::signed_volume(mesh->mesh); });
}

fb_status fb_validate_run(const fb_mesh* mesh, const fb_cloud* cloud, double tolerance,
                          uint64_t seed, fb_report** out) {
    if (!mesh || !cloud || !out) return fail_invalid("fb_validate_run: null argument");
    return guarded([&] {
        auto report = std::make_unique<fb_report>();
        report->report = fb::validate::validate_surface(mesh->mesh, cloud->points, tolerance, seed);
        *out = report.release();
    });
}

fb_status fb_report_write_json(const fb_report* report, const char* path) {
    if (!report || !path) return fail_invalid("fb_report_write_json: null argument");
    return guarded([&] { fb::io::write_report_json(report->report, path); });
}

fb_status fb_report_passed(const fb_report* report, int* out) {
    if (!report || !out) return fail_invalid("fb_report_passed: null argument");
    *out = report->report.passed() ? 1 : 0;
    return FB_OK;
}

fb_status fb_report_counts(const fb_report* report, long long* out_inside,
                           long long* out_within_tolerance, long long* out_outside,
                           long long* out_self_intersections) {
    if (!report) return fail_invalid("fb_report_counts: null argument");
    const auto& r = report->report;
    if (out_inside) *out_inside = r.n_inside;
    if (out_within_tolerance) *out_within_tolerance = r.n_within_tolerance;
    if (out_outside) *out_outside = r.n_points - r.n_inside - r.n_within_tolerance;
    if (out_self_intersections) *out_self_intersections = r.n_self_intersection_pairs;
    return FB_OK;
}

fb_status fb_report_worst_outside(const fb_report* report, double* out) {
    if (!report || !out) return fail_invalid("fb_report_worst_outside: null argument");
    *out = report->report.worst_outside_distance;
    return FB_OK;
}

} // extern "C"
