#pragma once

#include <functional>
#include <vector>

#include "fb/density.hpp"
#include "fb/kdtree.hpp"
#include "fb/mesh.hpp"
#include "fb/vec3.hpp"

namespace fb::ffmg {

enum class PressureMode {
    GlobalCoM, // along the line through the fixed-point centroid
    Norm,      // along the face normal
    LocalCoM,  // along the line through the centroid of the k nearest fixed points
};

enum class Integration {
    Overdamped, // first-order force balance (default)
    Inertial,   // explicit Euler with unit vertex mass, velocity damped
};

// Solver parameters. Field names follow the configuration schema so the JSON
// keys map one-to-one. Defaults are the reference run.
struct FfmgConfig {
    int subdivision_level = 3;
    double PR_in = 0.5;
    double PR_out = 1.0;
    double pressure_scaling_factor = 10.0;
    PressureMode pressure_mode = PressureMode::GlobalCoM;
    double pressure_increment = 0.03;
    double snapping_tolerance = 0.02;
    int max_NNsnapping_iterations = 5;
    double deformation_tolerance = 1e-5;
    double mTol = -1.0; // < 0: use 0.8 * snapping_tolerance
    int deformation_max_iterations = 200;
    double dt = 0.03;
    int smoothingIterations = 1;
    double smoothingTol = 0.02;
    double damping_factor = 1.0;
    bool apply_snapping = true;
    double stiffness = 0.01;
    double strain_factor = 10.0;
    double max_strain = 0.7;
    double distance_factor_strength = 1.0;
    double refinement_gamma = 1.5;
    double L_min = 0.0; // <= 0: median nearest-neighbor spacing of the cloud
    int local_com_k = 16;
    Integration integration = Integration::Overdamped;
    int test_point_index = 0;

    double target_pressure() const { return (PR_in - PR_out) * pressure_scaling_factor; }
    double max_step() const { return mTol > 0.0 ? mTol : 0.8 * snapping_tolerance; }
};

void validate_config(const FfmgConfig& config);

// Mutable solver state. Topology is fixed after refinement; only vertex
// positions move. Snapped vertices coincide with their target cloud point and
// never move again.
struct DeformationState {
    TriangleMesh mesh;
    std::vector<double> rest_length; // per edge, frozen at refinement time
    std::vector<Vec3> fixed_points;  // the normalized cloud
    KdTree3 fixed_tree;
    Vec3 fixed_centroid;
    std::vector<int> snap_target; // -1 while unsnapped
    std::vector<Vec3> velocity;   // inertial mode only
    int n_snapped = 0;
    int iteration = 0;
    double current_pressure = 0.0;
    double last_max_displacement = 0.0;
    long long coincident_skips = 0; // diagnostics: elastic pairs at < 1e-12
};

DeformationState make_state(TriangleMesh mesh, std::vector<Vec3> fixed_points, double stiffness);

struct MetricsRow {
    int iteration = 0;
    double max_displacement = 0.0;
    double avg_edge_length = 0.0;
    double volume = 0.0;
    int n_snapped = 0;
    double pressure = 0.0;
    Vec3 test_point_pressure_force;
    Vec3 test_point_elastic_force;
    Vec3 test_point_position;
};

using MetricsLog = std::vector<MetricsRow>;

struct RunResult {
    TriangleMesh mesh; // normalized coordinates
    MetricsLog log;
    density::NormalizationRecord normalization;
    int iterations = 0;
    bool converged = false;
    long long coincident_skips = 0;
};

// Per-axis linear map onto [-1,1]; min maps to -1 and max to +1.
// Throws DegenerateExtent when an axis has zero range.
std::pair<std::vector<Vec3>, density::NormalizationRecord>
normalize_points(const std::vector<Vec3>& points);

// Conforming midpoint refinement: faces incident to any vertex whose average
// incident edge length exceeds gamma * L_min get the full 1->4 split,
// neighbors split partially to stay watertight. Runs at most max_passes
// passes or until every vertex satisfies the criterion.
TriangleMesh refine_adaptive(const TriangleMesh& mesh, double gamma, double L_min, int max_passes);

// Spring forces with strain-stiffened coefficients; equal and opposite per
// edge, so they sum to zero over the mesh. Snapped vertices report their
// force but are never moved.
std::vector<Vec3> elastic_forces(DeformationState& state, const FfmgConfig& config);

// Per-face load p * A_f / 3 delivered to each corner along the mode's
// direction; negative p contracts. Degenerate faces contribute nothing.
std::vector<Vec3> pressure_forces(const DeformationState& state, PressureMode mode, double p,
                                  int local_k = 16);

// One overdamped (or inertial) update from the given forces. Displacements
// are clamped to the per-iteration cap; pressure is attenuated near captured
// geometry by the fixed-point proximity weight. Throws NonFiniteForce.
void apply_step(DeformationState& state, const std::vector<Vec3>& elastic,
                const std::vector<Vec3>& pressure, const FfmgConfig& config);

// Moves current_pressure toward (PR_in - PR_out) * pressure_scaling_factor in
// relative steps of pressure_increment, saturating at the target.
double ramp_pressure(DeformationState& state, const FfmgConfig& config);

// Pins every unsnapped vertex whose nearest cloud point lies within the
// snapping tolerance onto that point (many-to-one, permanent).
void snap_vertices(DeformationState& state, const FfmgConfig& config);

// Uniform-umbrella Laplacian smoothing of unsnapped vertices; each move is
// capped by smoothingTol and attenuated by the proximity weight.
void laplacian_smooth(DeformationState& state, const FfmgConfig& config);

// True when the last iteration's maximum vertex displacement fell below eps.
bool check_convergence(const DeformationState& state, double eps);

// Diagnostic stability bound 2 / omega_max with omega_max estimated as
// sqrt(2 k_max deg_max) under a unit-mass proxy; +inf when elasticity is off.
// The overdamped solver does not depend on it.
double cfl_limit(const DeformationState& state, const FfmgConfig& config);

using IterationObserver = std::function<void(const DeformationState&)>;

// Full pipeline: normalize, hull, refine, then iterate
// {ramp, forces, step, snap, smooth, log} until convergence or the iteration
// cap. Running out of iterations is not an error; the result is flagged.
RunResult run_deformation(const density::FocalPointCloud& cloud, const FfmgConfig& config,
                          const IterationObserver& observer = {});

// Same entry point for a bare point list.
RunResult run_deformation(const std::vector<Vec3>& points, const FfmgConfig& config,
                          const IterationObserver& observer = {});

// Median nearest-neighbor spacing; the default refinement target L_min.
double median_nn_spacing(const std::vector<Vec3>& points);

} // namespace fb::ffmg
