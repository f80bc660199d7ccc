/* focalbody — spherical-mirror ray tracing, ray-density focal-body
 * extraction, and flexible-foil surface reconstruction.
 *
 * C interface of the shared library. Objects are opaque handles created and
 * destroyed by the library; every entry point returns an fb_status, writes
 * results through out-parameters, and leaves a diagnostic message readable
 * via fb_last_error() on failure. Handles are immutable once created and may
 * be shared across threads; error messages are thread-local.
 */
#ifndef FOCALBODY_H
#define FOCALBODY_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fb_status {
    FB_OK = 0,
    FB_ERR_INVALID_ARGUMENT = 1,
    FB_ERR_NON_MANIFOLD = 2,
    FB_ERR_INCONSISTENT_ORIENTATION = 3,
    FB_ERR_DEGENERATE_FACE = 4,
    FB_ERR_DEGENERATE_INPUT = 5,
    FB_ERR_DEGENERATE_EXTENT = 6,
    FB_ERR_EMPTY_MESH = 7,
    FB_ERR_EMPTY_CLOUD = 8,
    FB_ERR_EMPTY_FILE = 9,
    FB_ERR_PARSE = 10,
    FB_ERR_IO = 11,
    FB_ERR_NON_FINITE_FORCE = 12,
    FB_ERR_ON_AXIS_RAY = 13,
    FB_ERR_RAY_PARALLEL_TO_PLANE = 14,
    FB_ERR_INVALID_BRACKET = 15,
    FB_ERR_INTERNAL = 16
} fb_status;

const char* fb_version(void);
const char* fb_status_name(fb_status status);
/* Message from the most recent failing call on this thread ("" if none). */
const char* fb_last_error(void);

/* ------------------------------------------------------------------ */
/* Configuration structs (plain data, caller-owned)                    */
/* ------------------------------------------------------------------ */

/* Concave spherical cap: vertex at the origin, optical axis +z, center of
 * curvature at (0,0,R). Requires R > 0 and 0 < D <= 2R. */
typedef struct fb_mirror {
    double radius_of_curvature;
    double aperture_diameter;
} fb_mirror;

typedef enum fb_sampling {
    FB_SAMPLING_SUNFLOWER_DISK = 0,
    FB_SAMPLING_SQUARE_GRID = 1
} fb_sampling;

typedef struct fb_source {
    long long n_rays;
    double tilt_x; /* radians; rotation about x applied first */
    double tilt_y; /* radians; rotation about y applied second */
    fb_sampling sampling;
    uint64_t seed;
} fb_source;

typedef struct fb_grid_spec {
    double min[3];
    double max[3];
    int resolution[3];
} fb_grid_spec;

/* Caustic-region default: [-0.3R,0.3R]^2 x [0.4R,1.05R] at 64^3. */
void fb_grid_spec_default(const fb_mirror* mirror, fb_grid_spec* out);

typedef enum fb_pressure_mode {
    FB_PRESSURE_GLOBAL_COM = 0,
    FB_PRESSURE_NORM = 1,
    FB_PRESSURE_LOCAL_COM = 2
} fb_pressure_mode;

typedef enum fb_integration {
    FB_INTEGRATION_OVERDAMPED = 0,
    FB_INTEGRATION_INERTIAL = 1
} fb_integration;

typedef struct fb_ffmg_config {
    int subdivision_level;
    double PR_in;
    double PR_out;
    double pressure_scaling_factor;
    fb_pressure_mode pressure_mode;
    double pressure_increment;
    double snapping_tolerance;
    int max_NNsnapping_iterations;
    double deformation_tolerance;
    double mTol; /* < 0: use 0.8 * snapping_tolerance */
    int deformation_max_iterations;
    double dt;
    int smoothingIterations;
    double smoothingTol;
    double damping_factor;
    int apply_snapping;
    double stiffness;
    double strain_factor;
    double max_strain;
    double distance_factor_strength;
    double refinement_gamma;
    double L_min; /* <= 0: median nearest-neighbor spacing of the cloud */
    int local_com_k;
    fb_integration integration;
    int test_point_index;
} fb_ffmg_config;

/* Reference-run defaults. */
void fb_ffmg_config_defaults(fb_ffmg_config* out);

/* ------------------------------------------------------------------ */
/* Opaque handles                                                      */
/* ------------------------------------------------------------------ */

typedef struct fb_trace fb_trace;     /* reflected-ray records */
typedef struct fb_grid fb_grid;       /* ray-passage density grid */
typedef struct fb_cloud fb_cloud;     /* focal-body point cloud */
typedef struct fb_mesh fb_mesh;       /* closed triangle surface */
typedef struct fb_metrics fb_metrics; /* per-iteration deformation log */
typedef struct fb_report fb_report;   /* surface validation report */

void fb_trace_free(fb_trace* trace);
void fb_grid_free(fb_grid* grid);
void fb_cloud_free(fb_cloud* cloud);
void fb_mesh_free(fb_mesh* mesh);
void fb_metrics_free(fb_metrics* metrics);
void fb_report_free(fb_report* report);

/* ------------------------------------------------------------------ */
/* Ray tracing                                                         */
/* ------------------------------------------------------------------ */

fb_status fb_trace_run(const fb_mirror* mirror, const fb_source* source, fb_trace** out);
fb_status fb_trace_count(const fb_trace* trace, size_t* out);
fb_status fb_trace_write_csv(const fb_trace* trace, const char* path);
fb_status fb_trace_read_csv(const char* path, fb_trace** out);

/* y, z_numeric, z_analytic, aberration_analytic, f_eff rows for the given
 * ray heights (on-axis heights are skipped). */
fb_status fb_analytic_write_csv(const fb_mirror* mirror, const double* heights, size_t n_heights,
                                const char* path);

/* ------------------------------------------------------------------ */
/* Density grid and focal-body extraction                              */
/* ------------------------------------------------------------------ */

fb_status fb_grid_accumulate(const fb_grid_spec* spec, const fb_trace* trace, fb_grid** out);
fb_status fb_grid_total_rays(const fb_grid* grid, long long* out);
fb_status fb_grid_write_csv(const fb_grid* grid, const char* path);
fb_status fb_grid_write_json(const fb_grid* grid, const char* path);

/* Cells with count strictly above threshold_fraction * total rays.
 * FB_ERR_EMPTY_CLOUD when none qualifies. */
fb_status fb_cloud_extract(const fb_grid* grid, double threshold_fraction, fb_cloud** out);
fb_status fb_cloud_read_xyz(const char* path, fb_cloud** out);
fb_status fb_cloud_write_xyz(const fb_cloud* cloud, const char* path);
fb_status fb_cloud_size(const fb_cloud* cloud, size_t* out);
/* Copies up to capacity points as x,y,z triples; writes the cloud size. */
fb_status fb_cloud_points(const fb_cloud* cloud, double* xyz, size_t capacity, size_t* out_size);
fb_status fb_cloud_from_points(const double* xyz, size_t n_points, fb_cloud** out);

/* Per-axis linear map of the cloud onto [-1,1] (min -> -1, max -> +1); the
 * same transform fb_ffmg_run applies before reconstruction, so a normalized
 * cloud is directly comparable with the returned mesh. out_p_min/out_p_max
 * (each double[3], optional) receive the original bounds. */
fb_status fb_cloud_normalize(const fb_cloud* cloud, fb_cloud** out, double* out_p_min,
                             double* out_p_max);

/* ------------------------------------------------------------------ */
/* Surface reconstruction                                              */
/* ------------------------------------------------------------------ */

typedef struct fb_run_info {
    int iterations;
    int converged; /* running out of iterations is not an error */
    int n_snapped;
    int mesh_vertices;
    int mesh_faces;
    double p_min[3]; /* normalization record: cloud bounds mapped to [-1,1] */
    double p_max[3];
} fb_run_info;

/* Normalize, hull, refine, contract. The mesh is in normalized coordinates;
 * info carries the inverse transform. */
fb_status fb_ffmg_run(const fb_cloud* cloud, const fb_ffmg_config* config, fb_mesh** out_mesh,
                      fb_metrics** out_metrics, fb_run_info* out_info);

fb_status fb_metrics_rows(const fb_metrics* metrics, size_t* out);
fb_status fb_metrics_write_csv(const fb_metrics* metrics, const char* path);

fb_status fb_mesh_read_obj(const char* path, fb_mesh** out);
fb_status fb_mesh_write_obj(const fb_mesh* mesh, const char* path);
fb_status fb_mesh_write_ply(const fb_mesh* mesh, const char* path);
fb_status fb_mesh_counts(const fb_mesh* mesh, size_t* out_vertices, size_t* out_faces);
fb_status fb_mesh_volume(const fb_mesh* mesh, double* out);

/* ------------------------------------------------------------------ */
/* Validation                                                          */
/* ------------------------------------------------------------------ */

fb_status fb_validate_run(const fb_mesh* mesh, const fb_cloud* cloud, double tolerance,
                          uint64_t seed, fb_report** out);
fb_status fb_report_write_json(const fb_report* report, const char* path);
/* 1 when enclosure passed and no self-intersections were found. */
fb_status fb_report_passed(const fb_report* report, int* out);
fb_status fb_report_counts(const fb_report* report, long long* out_inside,
                           long long* out_within_tolerance, long long* out_outside,
                           long long* out_self_intersections);
fb_status fb_report_worst_outside(const fb_report* report, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FOCALBODY_H */
