#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fb/vec3.hpp"

namespace fb::optics {

// Concave spherical cap. Pose convention is fixed for the whole toolkit:
// vertex at the origin, optical axis +z, center of curvature at (0,0,R),
// reflecting (concave) side facing +z. All distances in units of length; the
// paraxial focal length is R/2.
struct SphericalMirror {
    double radius_of_curvature = 1.0;
    double aperture_diameter = 1.0;

    double focal_length() const { return 0.5 * radius_of_curvature; }
};

// Throws InvalidArgument unless R > 0 and 0 < D <= 2R. The message names the
// offending field so the CLI can surface it.
void validate_mirror(const SphericalMirror& mirror);

enum class Sampling {
    SunflowerDisk, // Fibonacci spiral; uniform areal density, seed sets the phase
    SquareGrid,    // row-major lattice over the aperture's bounding square
};

struct SourceSpec {
    long long n_rays = 0;
    double tilt_x = 0.0; // radians, rotation about x applied first
    double tilt_y = 0.0; // radians, rotation about y applied second
    Sampling sampling = Sampling::SunflowerDisk;
    std::uint64_t seed = 0;
};

struct TraceRecord {
    std::size_t incident_index = 0; // index into the generated bundle
    Ray incident;
    Vec3 hit_point;
    Ray reflected;          // origin is the hit point
    double lateral_height = 0.0; // distance of the hit point from the axis
};

// Collimated bundle at z = 2R heading down the axis (tilt rotates the common
// direction). Deterministic for a given spec.
std::vector<Ray> generate_bundle(const SphericalMirror& mirror, const SourceSpec& src);

// Mirror-law reflection off the concave cap: smaller-z sphere root, aperture
// clipped. Returns nullopt on a miss.
std::optional<TraceRecord> reflect_ray(const SphericalMirror& mirror, const Ray& ray);

// generate_bundle |> reflect_ray, misses dropped, bundle order preserved.
std::vector<TraceRecord> trace_bundle(const SphericalMirror& mirror, const SourceSpec& src);

// z of the reflected ray's closest approach to the optical axis (the exact
// crossing for meridional rays). Throws OnAxisRay for on-axis incidence where
// the crossing is undefined.
double axis_crossing_numeric(const TraceRecord& rec);

// Closed-form relations for the same geometry; numeric tracing and these
// formulas serve as each other's oracle.
double caustic_z_analytic(double y, double f);                 // f - y^4 / (16 f^3)
double longitudinal_aberration_analytic(double y, double R);   // y^2 / (2R)
double effective_focal_analytic(double y, double R);           // (R/2) (1 - y^2 / (2R^2))

// D^3 / (f0 R) with unit constant; only the scaling exponents are meaningful.
double blur_scale(double D, double f0, double R);

// RMS of lateral distances from the bundle centroid where the reflected rays
// pierce the plane z = z_plane. Throws RayParallelToPlane.
double spot_rms(const std::vector<TraceRecord>& records, double z_plane);

// Golden-section minimum of spot_rms on [z_lo, z_hi] to tolerance tol.
// A single-ray bundle returns the bracket midpoint (its RMS is 0 everywhere).
double best_focus_plane(const std::vector<TraceRecord>& records, double z_lo, double z_hi,
                        double tol);

} // namespace fb::optics
