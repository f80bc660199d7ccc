#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "fb/error.hpp"
#include "fb/ffmg.hpp"
#include "fb/hull.hpp"
#include "fb/validate.hpp"
#include "support.hpp"

using namespace fb;
using namespace fb::ffmg;
using namespace testsupport;

namespace {

// Brute-force hull oracle: every point must lie on the inner side of every
// face plane (within eps).
void check_hull_contains_all(const TriangleMesh& hull, const std::vector<Vec3>& points,
                             double eps = 1e-9) {
    for (std::size_t f = 0; f < hull.face_count(); ++f) {
        const auto& tri = hull.faces[f];
        Vec3 n = cross(hull.vertices[tri[1]] - hull.vertices[tri[0]],
                       hull.vertices[tri[2]] - hull.vertices[tri[0]]);
        n = normalized(n);
        double offset = dot(n, hull.vertices[tri[0]]);
        for (const Vec3& p : points) CHECK(dot(n, p) - offset <= eps);
    }
}

DeformationState state_from_mesh(const TriangleMesh& mesh, std::vector<Vec3> fixed = {}) {
    return make_state(mesh, std::move(fixed), 0.0);
}

FfmgConfig base_config() {
    FfmgConfig config;
    config.distance_factor_strength = 0.0; // unit proximity weight in op tests
    return config;
}

// Hexagonal bipyramid with a flat top: the top vertex sits exactly at the
// centroid of its ring neighbors.
TriangleMesh flat_top_bipyramid(const Vec3& top) {
    std::vector<Vec3> v;
    for (int k = 0; k < 6; ++k) {
        double a = M_PI / 3.0 * k;
        v.push_back({std::cos(a), std::sin(a), 0.0});
    }
    v.push_back(top);             // 6
    v.push_back({0.0, 0.0, -1.5}); // 7
    std::vector<std::array<int, 3>> f;
    for (int k = 0; k < 6; ++k) {
        f.push_back({6, k, (k + 1) % 6});
        f.push_back({7, (k + 1) % 6, k});
    }
    return build_mesh(std::move(v), std::move(f));
}

} // namespace

TEST_CASE("normalize_points maps each axis onto [-1,1]") {
    SUBCASE("range [0,10]: midpoint to 0, max to +1") {
        std::vector<Vec3> pts = {{0, 0, 0}, {10, 10, 10}, {5, 5, 5}, {10, 0, 10}};
        auto [mapped, record] = normalize_points(pts);
        CHECK(mapped[2].x == doctest::Approx(0.0));
        CHECK(mapped[2].y == doctest::Approx(0.0));
        CHECK(mapped[1].x == 1.0);
        CHECK(mapped[1].z == 1.0);
        CHECK(mapped[0].x == -1.0);
        CHECK(record.p_min == Vec3{0, 0, 0});
        CHECK(record.p_max == Vec3{10, 10, 10});
    }

    SUBCASE("range [-2,2]: p=1 maps to 0.5") {
        std::vector<Vec3> pts = {{-2, -2, -2}, {2, 2, 2}, {1, 1, 1}, {2, -2, 2}};
        auto [mapped, record] = normalize_points(pts);
        CHECK(mapped[2].x == doctest::Approx(0.5));
        (void)record;
    }

    SUBCASE("zero extent on an axis raises DegenerateExtent") {
        std::vector<Vec3> pts = {{0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}};
        try {
            (void)normalize_points(pts);
            FAIL_CHECK("expected DegenerateExtent");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DegenerateExtent);
        }
    }
}

TEST_CASE("convex_hull") {
    SUBCASE("cube corners plus interior points give 8 vertices, 12 faces") {
        std::vector<Vec3> pts = cube_vertices();
        std::uint64_t state = 11;
        for (int i = 0; i < 10; ++i)
            pts.push_back({uniform(state, 0.1, 0.9), uniform(state, 0.1, 0.9),
                           uniform(state, 0.1, 0.9)});
        TriangleMesh hull = convex_hull(pts);
        CHECK(hull.vertex_count() == 8);
        CHECK(hull.face_count() == 12);
        CHECK(euler_characteristic(hull) == 2);
        CHECK(signed_volume(hull) == doctest::Approx(1.0).epsilon(1e-12));
        check_hull_contains_all(hull, pts);
    }

    SUBCASE("four tetra points give the tetra itself") {
        TriangleMesh t = tetrahedron();
        TriangleMesh hull = convex_hull(t.vertices);
        CHECK(hull.vertex_count() == 4);
        CHECK(hull.face_count() == 4);
        CHECK(signed_volume(hull) == doctest::Approx(signed_volume(t)).epsilon(1e-12));
    }

    SUBCASE("all sphere samples are extreme points") {
        std::vector<Vec3> pts = fibonacci_sphere(100);
        TriangleMesh hull = convex_hull(pts);
        CHECK(hull.vertex_count() == 100);
        CHECK(euler_characteristic(hull) == 2);
        CHECK(signed_volume(hull) > 0.0);
        check_hull_contains_all(hull, pts);
    }

    SUBCASE("random interior clouds stay enclosed") {
        std::uint64_t state = 23;
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<Vec3> pts;
            int n = 30 + static_cast<int>(splitmix64(state) % 200);
            for (int i = 0; i < n; ++i)
                pts.push_back({uniform(state, -1, 1), uniform(state, -1, 2),
                               uniform(state, -2, 1)});
            TriangleMesh hull = convex_hull(pts);
            CHECK(euler_characteristic(hull) == 2);
            CHECK(signed_volume(hull) > 0.0);
            check_hull_contains_all(hull, pts);
        }
    }

    SUBCASE("coplanar input raises DegenerateInput") {
        std::vector<Vec3> flat;
        std::uint64_t state = 3;
        for (int i = 0; i < 20; ++i) flat.push_back({uniform(state, 0, 1), uniform(state, 0, 1), 0.25});
        try {
            (void)convex_hull(flat);
            FAIL_CHECK("expected DegenerateInput");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DegenerateInput);
        }
    }

    SUBCASE("collinear input raises DegenerateInput") {
        std::vector<Vec3> line;
        for (int i = 0; i < 10; ++i) line.push_back({0.1 * i, 0.2 * i, 0.3 * i});
        CHECK_THROWS_AS((void)convex_hull(line), Error);
    }
}

TEST_CASE("refine_adaptive") {
    TriangleMesh tetra = tetrahedron();

    SUBCASE("no-op when every vertex already satisfies the criterion") {
        TriangleMesh out = refine_adaptive(tetra, 1.5, 10.0, 3);
        CHECK(out.face_count() == tetra.face_count());
    }

    SUBCASE("uniform subdivision grows faces by 4^s") {
        for (int s = 1; s <= 3; ++s) {
            TriangleMesh out = refine_adaptive(tetra, 1.5, 1e-9, s);
            CHECK(out.face_count() == tetra.face_count() * (1u << (2 * s)));
            CHECK(euler_characteristic(out) == 2);
        }
    }

    SUBCASE("partial splits keep the surface closed and oriented") {
        // Push one icosahedron vertex far out so only its star refines; the
        // split faces' neighbors get conforming partial splits.
        TriangleMesh ico = icosahedron();
        double l_min = avg_edge_length(ico);
        std::vector<Vec3> v = ico.vertices;
        v[0] *= 5.0;
        TriangleMesh stretched = build_mesh(v, ico.faces);
        TriangleMesh out = refine_adaptive(stretched, 2.0, l_min, 1);
        CHECK(out.face_count() > stretched.face_count());
        CHECK(out.face_count() < stretched.face_count() * 4);
        CHECK(euler_characteristic(out) == 2);
        verify_mesh(out);
    }

    SUBCASE("midpoints land on the parent edges") {
        TriangleMesh out = refine_adaptive(tetra, 1.5, 1e-9, 1);
        CHECK(out.vertex_count() == tetra.vertex_count() + tetra.edge_count());
    }
}

TEST_CASE("elastic_forces") {
    FfmgConfig config = base_config();
    config.stiffness = 1.0;
    config.strain_factor = 0.0;

    SUBCASE("all edges at rest length give zero force") {
        DeformationState state = state_from_mesh(tetrahedron());
        auto f = elastic_forces(state, config);
        for (const Vec3& v : f) CHECK(norm(v) == doctest::Approx(0.0).epsilon(1e-15));
    }

    SUBCASE("a single stretched spring pulls its endpoints together with unit force") {
        DeformationState state = state_from_mesh(tetrahedron());
        // Halve the rest length of edge 0: strain (1 - 0.5)/0.5 = 1, k = 1.
        state.rest_length[0] = 0.5;
        int i = state.mesh.edges[0][0];
        int j = state.mesh.edges[0][1];
        auto f = elastic_forces(state, config);
        Vec3 toward_j = normalized(state.mesh.vertices[j] - state.mesh.vertices[i]);
        CHECK(norm(f[i]) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dot(normalized(f[i]), toward_j) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(norm(f[i] + f[j]) == doctest::Approx(0.0).epsilon(1e-14)); // Newton's third law
        for (std::size_t v = 0; v < f.size(); ++v)
            if (static_cast<int>(v) != i && static_cast<int>(v) != j)
                CHECK(norm(f[v]) == doctest::Approx(0.0));
    }

    SUBCASE("internal forces cancel over the whole mesh") {
        TriangleMesh mesh = icosahedron();
        DeformationState state = state_from_mesh(mesh);
        std::uint64_t seed = 31;
        for (auto& r : state.rest_length) r *= uniform(seed, 0.5, 1.5);
        config.strain_factor = 10.0; // strain stiffening must not break antisymmetry
        auto f = elastic_forces(state, config);
        Vec3 total{};
        for (const Vec3& v : f) total += v;
        CHECK(norm(total) < 1e-9);
    }

    SUBCASE("coincident vertices are skipped and counted") {
        DeformationState state = state_from_mesh(tetrahedron());
        state.mesh.vertices[1] = state.mesh.vertices[0];
        auto f = elastic_forces(state, config);
        CHECK(state.coincident_skips == 1);
        for (const Vec3& v : f) CHECK(is_finite(v));
    }
}

TEST_CASE("pressure_forces") {
    // Single-face soup: pressure_forces walks faces only, so the per-face
    // rule can be probed in isolation.
    TriangleMesh single;
    single.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    single.faces = {{0, 1, 2}};

    SUBCASE("Norm mode reproduces p * n_f * A_f / 3 per vertex") {
        DeformationState state = state_from_mesh(single);
        auto f = pressure_forces(state, PressureMode::Norm, 3.0);
        for (int c = 0; c < 3; ++c) {
            CHECK(f[c].x == doctest::Approx(0.0));
            CHECK(f[c].y == doctest::Approx(0.0));
            CHECK(f[c].z == doctest::Approx(0.5).epsilon(1e-15)); // 3 * 0.5 / 3
        }
    }

    SUBCASE("reversed winding flips the sign") {
        TriangleMesh rev;
        rev.vertices = single.vertices;
        rev.faces = {{0, 2, 1}};
        DeformationState state = state_from_mesh(rev);
        auto f = pressure_forces(state, PressureMode::Norm, 3.0);
        CHECK(f[0].z == doctest::Approx(-0.5).epsilon(1e-15));
    }

    SUBCASE("per-face contribution magnitude is exactly |p| A_f / 3 in Norm mode") {
        DeformationState state = state_from_mesh(single);
        auto f = pressure_forces(state, PressureMode::Norm, -7.0);
        CHECK(norm(f[0]) == doctest::Approx(7.0 * 0.5 / 3.0).epsilon(1e-15));
    }

    SUBCASE("zero pressure gives zero forces") {
        DeformationState state = state_from_mesh(icosahedron());
        auto f = pressure_forces(state, PressureMode::GlobalCoM, 0.0);
        for (const Vec3& x : f) CHECK(norm(x) == 0.0);
    }

    SUBCASE("degenerate faces contribute nothing") {
        TriangleMesh collinear;
        collinear.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
        collinear.faces = {{0, 1, 2}};
        DeformationState state = state_from_mesh(collinear);
        auto f = pressure_forces(state, PressureMode::Norm, 3.0);
        for (const Vec3& x : f) CHECK(norm(x) == 0.0);
    }

    SUBCASE("negative pressure in globalCoM mode points inward on a sphere mesh") {
        TriangleMesh mesh = icosahedron();
        DeformationState state = state_from_mesh(mesh, tetrahedron(0.2).vertices);
        auto f = pressure_forces(state, PressureMode::GlobalCoM, -1.0);
        for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
            // Inward: against the vertex's radial direction from the centroid.
            CHECK(dot(f[i], mesh.vertices[i] - state.fixed_centroid) < 0.0);
        }
    }

    SUBCASE("localCoM mode stays finite and contracts a sphere around its cloud") {
        TriangleMesh mesh = icosahedron();
        DeformationState state = state_from_mesh(mesh, fibonacci_sphere(64, 0.3));
        auto f = pressure_forces(state, PressureMode::LocalCoM, -1.0, 16);
        double inward = 0.0;
        for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
            CHECK(is_finite(f[i]));
            inward += dot(f[i], mesh.vertices[i]);
        }
        CHECK(inward < 0.0);
    }

    SUBCASE("closed-surface pressure sums to zero in Norm mode") {
        DeformationState state = state_from_mesh(icosahedron());
        auto f = pressure_forces(state, PressureMode::Norm, 2.5);
        Vec3 total{};
        for (const Vec3& x : f) total += x;
        CHECK(norm(total) < 1e-12);
    }
}

TEST_CASE("apply_step") {
    FfmgConfig config = base_config();

    SUBCASE("zero net force leaves positions unchanged") {
        DeformationState state = state_from_mesh(tetrahedron());
        auto before = state.mesh.vertices;
        std::vector<Vec3> zero(state.mesh.vertex_count());
        apply_step(state, zero, zero, config);
        CHECK(state.mesh.vertices == before);
        CHECK(state.last_max_displacement == 0.0);
    }

    SUBCASE("large forces are clamped to exactly mTol along the force direction") {
        DeformationState state = state_from_mesh(tetrahedron());
        Vec3 before = state.mesh.vertices[0];
        std::vector<Vec3> force(state.mesh.vertex_count());
        force[0] = {100.0, 0.0, 0.0}; // dt*F/c = 3 >> mTol
        std::vector<Vec3> zero(state.mesh.vertex_count());
        apply_step(state, force, zero, config);
        Vec3 delta = state.mesh.vertices[0] - before;
        CHECK(norm(delta) == doctest::Approx(config.max_step()).epsilon(1e-15));
        CHECK(delta.y == 0.0);
        CHECK(state.last_max_displacement == doctest::Approx(config.max_step()));
    }

    SUBCASE("doubling the damping halves an unclamped displacement") {
        std::vector<Vec3> force; // tiny force, no clamp
        auto run = [&](double damping) {
            DeformationState state = state_from_mesh(tetrahedron());
            force.assign(state.mesh.vertex_count(), Vec3{});
            force[0] = {1e-3, 0, 0};
            std::vector<Vec3> zero(state.mesh.vertex_count());
            FfmgConfig c = base_config();
            c.damping_factor = damping;
            Vec3 before = state.mesh.vertices[0];
            apply_step(state, force, zero, c);
            return norm(state.mesh.vertices[0] - before);
        };
        CHECK(run(2.0) == doctest::Approx(0.5 * run(1.0)).epsilon(1e-12));
    }

    SUBCASE("snapped vertices do not move") {
        DeformationState state = state_from_mesh(tetrahedron(), {{0, 0, 0}});
        state.snap_target[0] = 0;
        Vec3 before = state.mesh.vertices[0];
        std::vector<Vec3> force(state.mesh.vertex_count(), Vec3{1, 1, 1});
        std::vector<Vec3> zero(state.mesh.vertex_count());
        apply_step(state, force, zero, config);
        CHECK(state.mesh.vertices[0] == before);
    }

    SUBCASE("non-finite forces abort") {
        DeformationState state = state_from_mesh(tetrahedron());
        std::vector<Vec3> force(state.mesh.vertex_count());
        force[1] = {std::numeric_limits<double>::quiet_NaN(), 0, 0};
        std::vector<Vec3> zero(state.mesh.vertex_count());
        try {
            apply_step(state, force, zero, config);
            FAIL_CHECK("expected NonFiniteForce");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonFiniteForce);
        }
    }
}

TEST_CASE("ramp_pressure") {
    FfmgConfig config = base_config(); // PR_in 0.5, PR_out 1.0, scaling 10

    SUBCASE("the reference target is (0.5 - 1.0) * 10 = -5") {
        CHECK(config.target_pressure() == -5.0);
    }

    SUBCASE("first step from zero moves 3% of the target magnitude") {
        DeformationState state = state_from_mesh(tetrahedron());
        double p = ramp_pressure(state, config);
        CHECK(p == doctest::Approx(-0.15).epsilon(1e-15));
    }

    SUBCASE("the ramp saturates exactly at the target") {
        DeformationState state = state_from_mesh(tetrahedron());
        for (int i = 0; i < 100; ++i) ramp_pressure(state, config);
        CHECK(state.current_pressure == -5.0);
        ramp_pressure(state, config);
        CHECK(state.current_pressure == -5.0);
    }

    SUBCASE("positive targets ramp upward") {
        FfmgConfig inflate = base_config();
        inflate.PR_in = 1.0;
        inflate.PR_out = 0.5;
        DeformationState state = state_from_mesh(tetrahedron());
        CHECK(ramp_pressure(state, inflate) == doctest::Approx(0.15));
    }
}

TEST_CASE("snap_vertices") {
    FfmgConfig config = base_config(); // snapping_tolerance 0.02

    SUBCASE("a vertex within tolerance lands exactly on the cloud point") {
        TriangleMesh mesh = tetrahedron();
        Vec3 target = mesh.vertices[0] + Vec3{0.01, 0, 0};
        DeformationState state = state_from_mesh(mesh, {target, {5, 5, 5}});
        snap_vertices(state, config);
        CHECK(state.snap_target[0] == 0);
        CHECK(state.mesh.vertices[0] == target);
        CHECK(state.n_snapped == 1);
    }

    SUBCASE("a vertex at 0.03 with tolerance 0.02 is untouched") {
        TriangleMesh mesh = tetrahedron();
        Vec3 target = mesh.vertices[0] + Vec3{0.03, 0, 0};
        DeformationState state = state_from_mesh(mesh, {target, {5, 5, 5}});
        Vec3 before = state.mesh.vertices[0];
        snap_vertices(state, config);
        CHECK(state.snap_target[0] == -1);
        CHECK(state.mesh.vertices[0] == before);
    }

    SUBCASE("two vertices may share one cloud point (many-to-one)") {
        std::vector<Vec3> v = {{0, 0, 0}, {0.015, 0, 0}, {0.5, 1, 0}, {0.5, 0.4, 1}};
        TriangleMesh mesh = build_mesh(v, {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {2, 0, 3}});
        DeformationState state = state_from_mesh(mesh, {{0.007, 0, 0}, {9, 9, 9}});
        snap_vertices(state, config);
        CHECK(state.snap_target[0] == 0);
        CHECK(state.snap_target[1] == 0);
        CHECK(state.mesh.vertices[0] == state.mesh.vertices[1]);
        CHECK(state.n_snapped == 2);
    }

    SUBCASE("snapping is permanent") {
        TriangleMesh mesh = tetrahedron();
        DeformationState state = state_from_mesh(mesh, {mesh.vertices[0]});
        snap_vertices(state, config);
        REQUIRE(state.snap_target[0] == 0);
        state.fixed_points.clear(); // even with the cloud gone
        snap_vertices(state, config);
        CHECK(state.snap_target[0] == 0);
    }
}

TEST_CASE("laplacian_smooth") {
    FfmgConfig config = base_config(); // smoothingIterations 1, smoothingTol 0.02

    SUBCASE("a vertex at the centroid of its neighbors stays put") {
        TriangleMesh mesh = flat_top_bipyramid({0, 0, 0});
        DeformationState state = state_from_mesh(mesh);
        Vec3 before = state.mesh.vertices[6];
        laplacian_smooth(state, config);
        CHECK(norm(state.mesh.vertices[6] - before) < 1e-15);
    }

    SUBCASE("zero smoothing iterations is the identity") {
        FfmgConfig none = base_config();
        none.smoothingIterations = 0;
        DeformationState state = state_from_mesh(flat_top_bipyramid({0.3, 0, 0.1}));
        auto before = state.mesh.vertices;
        laplacian_smooth(state, none);
        CHECK(state.mesh.vertices == before);
    }

    SUBCASE("an off-center vertex moves toward the ring centroid, capped by smoothingTol") {
        TriangleMesh mesh = flat_top_bipyramid({0.3, 0, 0});
        DeformationState state = state_from_mesh(mesh);
        laplacian_smooth(state, config);
        // delta = (ring centroid - position) = (-0.3,0,0), clamped to 0.02.
        Vec3 moved = state.mesh.vertices[6];
        CHECK(moved.x == doctest::Approx(0.3 - config.smoothingTol).epsilon(1e-12));
        CHECK(moved.y == doctest::Approx(0.0));
    }

    SUBCASE("snapped vertices are left alone") {
        TriangleMesh mesh = flat_top_bipyramid({0.3, 0, 0});
        DeformationState state = state_from_mesh(mesh, {{0.3, 0, 0}});
        state.snap_target[6] = 0;
        Vec3 before = state.mesh.vertices[6];
        laplacian_smooth(state, config);
        CHECK(state.mesh.vertices[6] == before);
    }
}

TEST_CASE("check_convergence compares the last step to the tolerance") {
    DeformationState state = state_from_mesh(tetrahedron());
    state.last_max_displacement = 0.0;
    CHECK(check_convergence(state, 1e-5));
    state.last_max_displacement = 1e-6;
    CHECK(check_convergence(state, 1e-5));
    state.last_max_displacement = 2e-5;
    CHECK(!check_convergence(state, 1e-5));
}

TEST_CASE("cfl_limit under the unit-mass proxy") {
    TriangleMesh mesh = flat_top_bipyramid({0, 0, 1.0}); // apex degree 6
    DeformationState state = state_from_mesh(mesh);
    FfmgConfig config = base_config();
    config.strain_factor = 0.0;

    config.stiffness = 1.0;
    CHECK(cfl_limit(state, config) == doctest::Approx(2.0 / std::sqrt(12.0)).epsilon(1e-12));

    SUBCASE("zero stiffness means no bound") {
        config.stiffness = 0.0;
        CHECK(std::isinf(cfl_limit(state, config)));
    }

    SUBCASE("doubling the stiffness divides the bound by sqrt(2)") {
        double base = cfl_limit(state, config);
        config.stiffness = 2.0;
        CHECK(cfl_limit(state, config) == doctest::Approx(base / std::sqrt(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("zero pressure with rested springs: one step is the identity") {
    FfmgConfig config = base_config();
    config.PR_in = config.PR_out = 1.0; // target pressure 0
    config.stiffness = 0.01;
    DeformationState state = state_from_mesh(tetrahedron(), {{10, 10, 10}, {11, 10, 10}});
    ramp_pressure(state, config);
    auto fe = elastic_forces(state, config);
    auto fp = pressure_forces(state, config.pressure_mode, state.current_pressure);
    auto before = state.mesh.vertices;
    apply_step(state, fe, fp, config);
    CHECK(state.mesh.vertices == before);
    CHECK(state.last_max_displacement == 0.0);
}

TEST_CASE("run_deformation on a sphere-surface cloud") {
    std::vector<Vec3> cloud = fibonacci_sphere(500);
    FfmgConfig config; // reference defaults

    RunResult result = run_deformation(cloud, config);

    CHECK(result.iterations <= config.deformation_max_iterations);
    CHECK(euler_characteristic(result.mesh) == 2);
    verify_mesh(result.mesh);

    SUBCASE("the surface stays at or below the hull volume") {
        auto [normalized_pts, rec] = normalize_points(cloud);
        (void)rec;
        TriangleMesh hull = convex_hull(normalized_pts);
        CHECK(signed_volume(result.mesh) <= signed_volume(hull) + 1e-9);
    }

    SUBCASE("every cloud point ends up enclosed or within tolerance") {
        auto [normalized_pts, rec] = normalize_points(cloud);
        (void)rec;
        auto enclosure = fb::validate::enclosure_test(result.mesh, normalized_pts,
                                                      config.snapping_tolerance, 1);
        CHECK(enclosure.n_outside == 0);
    }

    SUBCASE("metrics log invariants") {
        REQUIRE(!result.log.empty());
        int prev_snapped = 0;
        for (const MetricsRow& row : result.log) {
            CHECK(row.max_displacement <= config.max_step() + 1e-15);
            CHECK(row.n_snapped >= prev_snapped);
            prev_snapped = row.n_snapped;
        }
    }
}

TEST_CASE("run_deformation on four tetra points converges onto the tetra") {
    std::vector<Vec3> cloud = tetrahedron().vertices;
    FfmgConfig config;
    RunResult result = run_deformation(cloud, config);

    CHECK(result.converged);
    auto [normalized_pts, rec] = normalize_points(cloud);
    (void)rec;
    KdTree3 tree(normalized_pts);
    for (const Vec3& v : result.mesh.vertices) {
        auto [idx, dist] = tree.nearest(v);
        (void)idx;
        CHECK(dist <= config.snapping_tolerance);
    }
}

TEST_CASE("run_deformation is deterministic: bit-identical metrics") {
    std::vector<Vec3> cloud = dented_sphere_cloud(300);
    FfmgConfig config;
    config.deformation_max_iterations = 40;

    RunResult a = run_deformation(cloud, config);
    RunResult b = run_deformation(cloud, config);

    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].max_displacement == b.log[i].max_displacement);
        CHECK(a.log[i].volume == b.log[i].volume);
        CHECK(a.log[i].avg_edge_length == b.log[i].avg_edge_length);
        CHECK(a.log[i].n_snapped == b.log[i].n_snapped);
        CHECK(a.log[i].pressure == b.log[i].pressure);
        CHECK(a.log[i].test_point_position == b.log[i].test_point_position);
        CHECK(a.log[i].test_point_pressure_force == b.log[i].test_point_pressure_force);
        CHECK(a.log[i].test_point_elastic_force == b.log[i].test_point_elastic_force);
    }
    REQUIRE(a.mesh.vertex_count() == b.mesh.vertex_count());
    for (std::size_t v = 0; v < a.mesh.vertex_count(); ++v)
        CHECK(a.mesh.vertices[v] == b.mesh.vertices[v]);
}

TEST_CASE("topology is preserved at every iteration") {
    std::vector<Vec3> cloud = dented_sphere_cloud(200);
    FfmgConfig config;
    config.deformation_max_iterations = 30;

    int audited = 0;
    RunResult result = run_deformation(cloud, config, [&](const DeformationState& state) {
        verify_mesh(state.mesh); // throws on any manifold violation
        audited += 1;
    });
    CHECK(audited == result.iterations);
}

TEST_CASE("pure pressure contraction: volume never increases") {
    std::vector<Vec3> cloud = fibonacci_sphere(400);
    FfmgConfig config;
    config.stiffness = 0.0;
    config.subdivision_level = 2;
    config.L_min = 0.05; // force a real refinement so unsnapped vertices exist
    config.deformation_max_iterations = 80;

    RunResult result = run_deformation(cloud, config);
    REQUIRE(result.log.size() >= 2);
    for (std::size_t i = 1; i < result.log.size(); ++i)
        CHECK(result.log[i].volume <= result.log[i - 1].volume + 1e-12);
}

TEST_CASE("inertial integration stays stable and manifold") {
    std::vector<Vec3> cloud = fibonacci_sphere(200);
    FfmgConfig config;
    config.integration = Integration::Inertial;
    config.deformation_max_iterations = 50;

    RunResult result = run_deformation(cloud, config);
    verify_mesh(result.mesh);
    for (const MetricsRow& row : result.log)
        CHECK(row.max_displacement <= config.max_step() + 1e-15);
}

TEST_CASE("config validation rejects broken parameter sets") {
    std::vector<Vec3> cloud = fibonacci_sphere(16);
    FfmgConfig config;
    config.dt = 0.0;
    CHECK_THROWS_AS((void)run_deformation(cloud, config), Error);

    config = FfmgConfig{};
    config.deformation_tolerance = 0.0;
    CHECK_THROWS_AS((void)run_deformation(cloud, config), Error);

    config = FfmgConfig{};
    config.refinement_gamma = 1.0;
    CHECK_THROWS_AS((void)run_deformation(cloud, config), Error);
}

TEST_CASE("median_nn_spacing tracks the sampling density") {
    std::vector<Vec3> pts = fibonacci_sphere(500);
    double spacing = median_nn_spacing(pts);
    // Expected spacing about sqrt(4*pi/500) with some spiral anisotropy.
    CHECK(spacing > 0.08);
    CHECK(spacing < 0.25);
}
