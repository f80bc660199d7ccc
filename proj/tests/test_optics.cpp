#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fb/error.hpp"
#include "fb/optics.hpp"
#include "support.hpp"

using namespace fb;
using namespace fb::optics;
using namespace testsupport;

namespace {

// Independent trig oracle for the axis crossing of a meridional collimated
// ray at height y: the reflected ray leaves the hit point at angle 2*theta
// and meets the axis at z = R - R / (2 cos theta), theta = asin(y/R).
double trig_crossing(double y, double R) {
    const double theta = std::asin(y / R);
    return R - R / (2.0 * std::cos(theta));
}

TraceRecord trace_height(const SphericalMirror& mirror, double y) {
    Ray ray{{y, 0.0, 2.0 * mirror.radius_of_curvature}, {0.0, 0.0, -1.0}};
    auto rec = reflect_ray(mirror, ray);
    REQUIRE(rec.has_value());
    return *rec;
}

} // namespace

TEST_CASE("generate_bundle: collimation, center ray, determinism") {
    SphericalMirror mirror{1.0, 1.0};

    SUBCASE("all rays share the common direction") {
        SourceSpec src;
        src.n_rays = 5;
        auto rays = generate_bundle(mirror, src);
        CHECK(rays.size() == 5);
        for (const Ray& r : rays) {
            CHECK(r.direction.x == 0.0);
            CHECK(r.direction.y == 0.0);
            CHECK(r.direction.z == -1.0);
            CHECK(r.origin.z == 2.0);
        }
    }

    SUBCASE("a single sunflower ray sits at the disk center") {
        SourceSpec src;
        src.n_rays = 1;
        auto rays = generate_bundle(mirror, src);
        REQUIRE(rays.size() == 1);
        CHECK(rays[0].origin.x == 0.0);
        CHECK(rays[0].origin.y == 0.0);
    }

    SUBCASE("identical seeds give identical bundles, different seeds differ") {
        SourceSpec src;
        src.n_rays = 1000;
        src.seed = 7;
        auto a = generate_bundle(mirror, src);
        auto b = generate_bundle(mirror, src);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].origin == b[i].origin);
            CHECK(a[i].direction == b[i].direction);
        }
        src.seed = 8;
        auto c = generate_bundle(mirror, src);
        bool any_differs = false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!(a[i].origin == c[i].origin)) any_differs = true;
        CHECK(any_differs);
    }

    SUBCASE("tilt rotates the common direction") {
        SourceSpec src;
        src.n_rays = 3;
        src.tilt_x = 0.05;
        auto rays = generate_bundle(mirror, src);
        for (const Ray& r : rays) {
            CHECK(norm(r.direction) == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(r.direction.y == doctest::Approx(std::sin(0.05)));
        }
    }
}

TEST_CASE("reflect_ray: retroreflection, aperture clipping, oracle crossing") {
    SphericalMirror mirror{1.0, 1.0};

    SUBCASE("on-axis ray reflects straight back through the vertex") {
        auto rec = reflect_ray(mirror, {{0, 0, 2}, {0, 0, -1}});
        REQUIRE(rec.has_value());
        CHECK(rec->hit_point.x == doctest::Approx(0.0));
        CHECK(rec->hit_point.z == doctest::Approx(0.0));
        CHECK(rec->reflected.direction.z == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(rec->lateral_height == doctest::Approx(0.0));
    }

    SUBCASE("rays outside the aperture miss") {
        SphericalMirror small{1.0, 0.5};
        CHECK(!reflect_ray(small, {{0.25 + 1e-9, 0, 2}, {0, 0, -1}}).has_value());
        CHECK(reflect_ray(small, {{0.25 - 1e-9, 0, 2}, {0, 0, -1}}).has_value());
    }

    SUBCASE("ray missing the sphere entirely misses") {
        SphericalMirror hemi{1.0, 2.0};
        CHECK(!reflect_ray(hemi, {{1.5, 0, 2}, {0, 0, -1}}).has_value());
    }

    SUBCASE("crossing at y=0.1 matches the trig oracle") {
        TraceRecord rec = trace_height(mirror, 0.1);
        const double z = axis_crossing_numeric(rec);
        CHECK(z == doctest::Approx(trig_crossing(0.1, 1.0)).epsilon(1e-12));
        CHECK(z == doctest::Approx(0.497481).epsilon(1e-5));
    }
}

TEST_CASE("trace_bundle preserves order and drops misses") {
    SphericalMirror mirror{1.0, 0.8};

    SUBCASE("fully contained bundle keeps every ray") {
        SourceSpec src;
        src.n_rays = 100;
        auto records = trace_bundle(mirror, src);
        CHECK(records.size() == 100);
        for (std::size_t i = 0; i < records.size(); ++i) CHECK(records[i].incident_index == i);
    }

    SUBCASE("grid corners fall outside the aperture; count matches containment") {
        SourceSpec src;
        src.n_rays = 100;
        src.sampling = Sampling::SquareGrid;
        auto bundle = generate_bundle(mirror, src);
        std::size_t contained = 0;
        for (const Ray& r : bundle)
            if (std::hypot(r.origin.x, r.origin.y) <= 0.4) contained += 1;
        auto records = trace_bundle(mirror, src);
        CHECK(records.size() == contained);
        CHECK(records.size() < bundle.size()); // the corners clip
    }

    SUBCASE("empty bundle gives an empty record list") {
        SourceSpec src;
        src.n_rays = 0;
        CHECK(trace_bundle(mirror, src).empty());
    }
}

TEST_CASE("axis_crossing_numeric: paraxial limit and on-axis error") {
    SphericalMirror mirror{1.0, 1.0};

    SUBCASE("crossing approaches f = R/2 as y -> 0") {
        TraceRecord rec = trace_height(mirror, 1e-6);
        CHECK(std::abs(axis_crossing_numeric(rec) - 0.5) < 1e-9);
    }

    SUBCASE("y = 0.2 matches the oracle") {
        TraceRecord rec = trace_height(mirror, 0.2);
        CHECK(axis_crossing_numeric(rec) ==
              doctest::Approx(trig_crossing(0.2, 1.0)).epsilon(1e-12));
    }

    SUBCASE("on-axis ray raises OnAxisRay") {
        TraceRecord rec = trace_height(mirror, 0.0);
        CHECK_THROWS_AS((void)axis_crossing_numeric(rec), Error);
        try {
            (void)axis_crossing_numeric(rec);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::OnAxisRay);
        }
    }
}

TEST_CASE("closed-form relations") {
    SUBCASE("caustic cusp") {
        CHECK(caustic_z_analytic(0.0, 0.5) == 0.5);
        CHECK(caustic_z_analytic(0.2, 0.5) == doctest::Approx(0.4992).epsilon(1e-14));
        CHECK(caustic_z_analytic(0.1, 0.5) == doctest::Approx(0.49995).epsilon(1e-14));
    }
    SUBCASE("longitudinal aberration") {
        CHECK(longitudinal_aberration_analytic(0.0, 1.0) == 0.0);
        CHECK(longitudinal_aberration_analytic(0.1, 1.0) == doctest::Approx(0.005).epsilon(1e-14));
        const double ratio = longitudinal_aberration_analytic(0.2, 1.0) /
                             longitudinal_aberration_analytic(0.1, 1.0);
        CHECK(ratio == doctest::Approx(4.0).epsilon(1e-14)); // quadratic homogeneity
    }
    SUBCASE("effective focal length") {
        CHECK(effective_focal_analytic(0.0, 1.0) == 0.5);
        CHECK(effective_focal_analytic(0.1, 1.0) == doctest::Approx(0.4975).epsilon(1e-14));
        CHECK(effective_focal_analytic(0.2, 1.0) == doctest::Approx(0.49).epsilon(1e-14));
    }
    SUBCASE("blur scale") {
        CHECK(blur_scale(0.5, 0.5, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(blur_scale(1.0, 0.5, 1.0) ==
              doctest::Approx(8.0 * blur_scale(0.5, 0.5, 1.0)).epsilon(1e-14));
        CHECK(blur_scale(0.0, 0.5, 1.0) == 0.0);
    }
}

TEST_CASE("spot_rms") {
    SUBCASE("rays meeting at a point have zero RMS") {
        // Two rays constructed to pass through (0,0,1).
        std::vector<TraceRecord> recs(2);
        recs[0].reflected = {{0.5, 0, 0}, normalized(Vec3{-0.5, 0, 1})};
        recs[1].reflected = {{-0.5, 0, 0}, normalized(Vec3{0.5, 0, 1})};
        recs[0].lateral_height = recs[1].lateral_height = 0.5;
        CHECK(spot_rms(recs, 1.0) == doctest::Approx(0.0).epsilon(1e-14));
    }

    SUBCASE("two symmetric crossings at (+-a, 0) give RMS a") {
        const double a = 0.37;
        std::vector<TraceRecord> recs(2);
        recs[0].reflected = {{a, 0, 0}, {0, 0, 1}};
        recs[1].reflected = {{-a, 0, 0}, {0, 0, 1}};
        CHECK(spot_rms(recs, 2.0) == doctest::Approx(a).epsilon(1e-14));
    }

    SUBCASE("paraxial bundle is tightly focused at z = f") {
        SphericalMirror narrow{1.0, 0.02};
        SourceSpec src;
        src.n_rays = 500;
        auto records = trace_bundle(narrow, src);
        REQUIRE(records.size() == 500);
        CHECK(spot_rms(records, 0.5) < 1e-4);
    }

    SUBCASE("a ray parallel to the plane raises") {
        std::vector<TraceRecord> recs(1);
        recs[0].reflected = {{0.1, 0, 0}, {1, 0, 0}};
        CHECK_THROWS_AS((void)spot_rms(recs, 0.5), Error);
    }
}

TEST_CASE("best_focus_plane") {
    SphericalMirror mirror{1.0, 1.0};

    SUBCASE("paraxial bundle focuses at f within 1e-3") {
        SphericalMirror narrow{1.0, 0.02};
        SourceSpec src;
        src.n_rays = 400;
        auto records = trace_bundle(narrow, src);
        const double z = best_focus_plane(records, 0.4, 0.6, 1e-4);
        CHECK(std::abs(z - 0.5) < 1e-3);
    }

    SUBCASE("full aperture optimum sits strictly between the marginal crossing and f") {
        SourceSpec src;
        src.n_rays = 4000;
        auto records = trace_bundle(mirror, src);
        const double z_marginal = trig_crossing(0.5, 1.0);
        const double z = best_focus_plane(records, z_marginal - 0.05, 0.55, 1e-4);
        CHECK(z > z_marginal + 1e-4);
        CHECK(z < 0.5 - 1e-4);
    }

    SUBCASE("single-ray bundle returns the bracket midpoint") {
        std::vector<TraceRecord> recs(1);
        recs[0].reflected = {{0.1, 0, 0}, normalized(Vec3{-0.1, 0, 1})};
        CHECK(best_focus_plane(recs, 0.4, 0.6, 1e-6) == doctest::Approx(0.5));
    }

    SUBCASE("inverted bracket raises") {
        std::vector<TraceRecord> recs(2);
        recs[0].reflected = {{0.1, 0, 0}, {0, 0, 1}};
        recs[1].reflected = {{-0.1, 0, 0}, {0, 0, 1}};
        CHECK_THROWS_AS((void)best_focus_plane(recs, 0.6, 0.4, 1e-6), Error);
    }
}

TEST_CASE("reflection law holds for traced bundles, tilted included") {
    SphericalMirror mirror{1.0, 1.0};
    for (double tilt : {0.0, 0.03}) {
        SourceSpec src;
        src.n_rays = 500;
        src.tilt_x = tilt;
        src.seed = 3;
        for (const TraceRecord& rec : trace_bundle(mirror, src)) {
            CHECK(std::abs(norm(rec.reflected.direction) - 1.0) < 1e-12);
            // hit point on the sphere
            CHECK(std::abs(norm(rec.hit_point - Vec3{0, 0, 1}) - 1.0) < 1e-10);
            Vec3 n = normalized(Vec3{0, 0, 1} - rec.hit_point);
            double cos_in = -dot(rec.incident.direction, n);
            double cos_out = dot(rec.reflected.direction, n);
            CHECK(std::abs(cos_in - cos_out) < 1e-10);
        }
    }
}

TEST_CASE("numeric crossings agree with the trig oracle to 1e-9 up to 0.45R") {
    SphericalMirror mirror{1.0, 1.0};
    for (int i = 1; i <= 100; ++i) {
        const double y = 0.45 * i / 100.0;
        TraceRecord rec = trace_height(mirror, y);
        CHECK(std::abs(axis_crossing_numeric(rec) - trig_crossing(y, 1.0)) < 1e-9);
    }
}

TEST_CASE("crossings decrease monotonically with height") {
    SphericalMirror mirror{1.0, 1.0};
    double prev = axis_crossing_numeric(trace_height(mirror, 0.005));
    for (int i = 1; i <= 50; ++i) {
        const double y = 0.005 + 0.485 * i / 50.0;
        const double z = axis_crossing_numeric(trace_height(mirror, y));
        CHECK(z < prev);
        prev = z;
    }
}

TEST_CASE("crossing deficit scales quadratically near the axis") {
    SphericalMirror mirror{1.0, 1.0};
    const double d1 = 0.5 - axis_crossing_numeric(trace_height(mirror, 0.01));
    const double d2 = 0.5 - axis_crossing_numeric(trace_height(mirror, 0.02));
    CHECK(d2 / d1 == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("numeric crossing matches the effective-focal formula for y <= 0.1R") {
    SphericalMirror mirror{1.0, 1.0};
    for (int i = 1; i <= 20; ++i) {
        const double y = 0.1 * i / 20.0;
        const double z = axis_crossing_numeric(trace_height(mirror, y));
        CHECK(std::abs(z - effective_focal_analytic(y, 1.0)) <= 1e-4);
    }
}

TEST_CASE("mirror validation names the offending field") {
    SphericalMirror bad{1.0, 2.5};
    try {
        validate_mirror(bad);
        FAIL_CHECK("expected InvalidArgument");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
        CHECK(std::string(e.what()).find("aperture_diameter") != std::string::npos);
    }
}
