#include "fb/optics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fb/error.hpp"

namespace fb::optics {

namespace {

constexpr double kGoldenAngle = 2.39996322972865332; // pi (3 - sqrt 5)

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

Vec3 tilted_direction(double tilt_x, double tilt_y) {
    // d = Ry(tilt_y) * Rx(tilt_x) * (0,0,-1)
    double cx = std::cos(tilt_x), sx = std::sin(tilt_x);
    double cy = std::cos(tilt_y), sy = std::sin(tilt_y);
    Vec3 d{0.0, sx, -cx}; // after Rx
    return {cy * d.x - sy * d.z, d.y, sy * d.x + cy * d.z};
}

} // namespace

void validate_mirror(const SphericalMirror& mirror) {
    if (!(mirror.radius_of_curvature > 0.0) || !std::isfinite(mirror.radius_of_curvature))
        raise(ErrorCode::InvalidArgument, "radius_of_curvature must be positive");
    if (!(mirror.aperture_diameter > 0.0) ||
        mirror.aperture_diameter > 2.0 * mirror.radius_of_curvature)
        raise(ErrorCode::InvalidArgument,
              "aperture_diameter must satisfy 0 < aperture_diameter <= 2 * radius_of_curvature");
}

std::vector<Ray> generate_bundle(const SphericalMirror& mirror, const SourceSpec& src) {
    validate_mirror(mirror);
    if (src.n_rays < 0) raise(ErrorCode::InvalidArgument, "n_rays must be non-negative");

    const double R = mirror.radius_of_curvature;
    const double half = 0.5 * mirror.aperture_diameter;
    const Vec3 dir = tilted_direction(src.tilt_x, src.tilt_y);
    const long long n = src.n_rays;

    std::vector<Ray> rays;
    rays.reserve(static_cast<std::size_t>(n));

    if (src.sampling == Sampling::SunflowerDisk) {
        std::uint64_t state = src.seed;
        const double phase = uniform01(state) * 2.0 * M_PI;
        for (long long i = 0; i < n; ++i) {
            double r = half * std::sqrt(static_cast<double>(i) / static_cast<double>(n));
            double phi = phase + static_cast<double>(i) * kGoldenAngle;
            rays.push_back({{r * std::cos(phi), r * std::sin(phi), 2.0 * R}, dir});
        }
    } else {
        // Row-major lattice of cell centers over [-D/2, D/2]^2; corners fall
        // outside the aperture disk and are clipped at trace time. The seed
        // plays no role in this mode.
        long long m = static_cast<long long>(std::ceil(std::sqrt(static_cast<double>(n))));
        long long emitted = 0;
        for (long long j = 0; j < m && emitted < n; ++j) {
            for (long long i = 0; i < m && emitted < n; ++i, ++emitted) {
                double x = -half + (static_cast<double>(i) + 0.5) * mirror.aperture_diameter /
                                       static_cast<double>(m);
                double y = -half + (static_cast<double>(j) + 0.5) * mirror.aperture_diameter /
                                       static_cast<double>(m);
                rays.push_back({{x, y, 2.0 * R}, dir});
            }
        }
    }
    return rays;
}

std::optional<TraceRecord> reflect_ray(const SphericalMirror& mirror, const Ray& ray) {
    const double R = mirror.radius_of_curvature;
    const Vec3 center{0.0, 0.0, R};

    // |o - c + t d|^2 = R^2 with unit d.
    const Vec3 oc = ray.origin - center;
    const double b = dot(oc, ray.direction);
    const double c = norm2(oc) - R * R;
    const double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;

    const double sq = std::sqrt(disc);
    const double t1 = -b - sq;
    const double t2 = -b + sq;

    // Forward hits only; of those, the smaller-z point selects the concave cap.
    const double t_eps = 1e-12 * R;
    double best_t = 0.0;
    double best_z = 0.0;
    bool found = false;
    for (double t : {t1, t2}) {
        if (t <= t_eps) continue;
        double z = ray.origin.z + t * ray.direction.z;
        if (!found || z < best_z) {
            best_t = t;
            best_z = z;
            found = true;
        }
    }
    if (!found) return std::nullopt;

    const Vec3 hit = ray.origin + best_t * ray.direction;
    const double lateral = std::hypot(hit.x, hit.y);
    if (lateral > 0.5 * mirror.aperture_diameter) return std::nullopt;

    const Vec3 n = (center - hit) / R; // inward-facing unit normal
    const Vec3 r = ray.direction - 2.0 * dot(ray.direction, n) * n;

    TraceRecord rec;
    rec.incident = ray;
    rec.hit_point = hit;
    rec.reflected = {hit, r};
    rec.lateral_height = lateral;
    return rec;
}

std::vector<TraceRecord> trace_bundle(const SphericalMirror& mirror, const SourceSpec& src) {
    std::vector<Ray> bundle = generate_bundle(mirror, src);
    std::vector<TraceRecord> records;
    records.reserve(bundle.size());
    for (std::size_t i = 0; i < bundle.size(); ++i) {
        if (auto rec = reflect_ray(mirror, bundle[i])) {
            rec->incident_index = i;
            records.push_back(*rec);
        }
    }
    return records;
}

double axis_crossing_numeric(const TraceRecord& rec) {
    const Vec3& a = rec.reflected.origin;
    const Vec3& v = rec.reflected.direction;
    const double vxy2 = v.x * v.x + v.y * v.y;
    if (rec.lateral_height <= 0.0 || vxy2 == 0.0)
        raise(ErrorCode::OnAxisRay, "axis crossing undefined for on-axis ray");
    const double t = -(a.x * v.x + a.y * v.y) / vxy2;
    return a.z + t * v.z;
}

double caustic_z_analytic(double y, double f) {
    if (!(f > 0.0)) raise(ErrorCode::InvalidArgument, "focal length must be positive");
    const double y2 = y * y;
    return f - (y2 * y2) / (16.0 * f * f * f);
}

double longitudinal_aberration_analytic(double y, double R) {
    if (!(R > 0.0)) raise(ErrorCode::InvalidArgument, "radius must be positive");
    return y * y / (2.0 * R);
}

double effective_focal_analytic(double y, double R) {
    if (!(R > 0.0)) raise(ErrorCode::InvalidArgument, "radius must be positive");
    return 0.5 * R * (1.0 - y * y / (2.0 * R * R));
}

double blur_scale(double D, double f0, double R) {
    if (D < 0.0 || !(f0 > 0.0) || !(R > 0.0))
        raise(ErrorCode::InvalidArgument, "blur_scale arguments must be positive");
    return D * D * D / (f0 * R);
}

double spot_rms(const std::vector<TraceRecord>& records, double z_plane) {
    if (records.empty()) raise(ErrorCode::InvalidArgument, "spot_rms needs at least one record");

    std::vector<double> px(records.size()), py(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const Vec3& o = records[i].reflected.origin;
        const Vec3& d = records[i].reflected.direction;
        if (d.z == 0.0)
            raise(ErrorCode::RayParallelToPlane, "reflected ray parallel to the focus plane");
        const double t = (z_plane - o.z) / d.z;
        px[i] = o.x + t * d.x;
        py[i] = o.y + t * d.y;
    }
    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        cx += px[i];
        cy += py[i];
    }
    cx /= static_cast<double>(records.size());
    cy /= static_cast<double>(records.size());
    double sum2 = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        double dx = px[i] - cx, dy = py[i] - cy;
        sum2 += dx * dx + dy * dy;
    }
    return std::sqrt(sum2 / static_cast<double>(records.size()));
}

double best_focus_plane(const std::vector<TraceRecord>& records, double z_lo, double z_hi,
                        double tol) {
    if (!(z_lo < z_hi)) raise(ErrorCode::InvalidBracket, "best_focus_plane needs z_lo < z_hi");
    if (!(tol > 0.0)) raise(ErrorCode::InvalidArgument, "tolerance must be positive");
    if (records.size() <= 1) return 0.5 * (z_lo + z_hi);

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = z_lo, b = z_hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = spot_rms(records, x1);
    double f2 = spot_rms(records, x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = spot_rms(records, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = spot_rms(records, x2);
        }
    }
    return 0.5 * (a + b);
}

} // namespace fb::optics
