#include "fb/ffmg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "fb/error.hpp"
#include "fb/hull.hpp"

namespace fb::ffmg {

namespace {

constexpr double kCoincidentDistance = 1e-12;

// Attenuation of pressure and smoothing near captured geometry:
// w = (d / (d + snapping_tolerance))^distance_factor_strength with d the
// distance to the nearest fixed point; snapped vertices have w = 0.
double proximity_weight(const DeformationState& state, int vertex, const FfmgConfig& config) {
    if (state.snap_target[vertex] >= 0) return 0.0;
    if (config.distance_factor_strength == 0.0 || state.fixed_tree.empty()) return 1.0;
    auto [idx, dist] = state.fixed_tree.nearest(state.mesh.vertices[vertex]);
    (void)idx;
    double base = dist / (dist + config.snapping_tolerance);
    return std::pow(base, config.distance_factor_strength);
}

} // namespace

void validate_config(const FfmgConfig& config) {
    if (!(config.dt > 0.0)) raise(ErrorCode::InvalidArgument, "dt must be positive");
    if (!(config.deformation_tolerance > 0.0))
        raise(ErrorCode::InvalidArgument, "deformation_tolerance must be positive");
    if (!(config.damping_factor > 0.0))
        raise(ErrorCode::InvalidArgument, "damping_factor must be positive");
    if (!(config.snapping_tolerance > 0.0))
        raise(ErrorCode::InvalidArgument, "snapping_tolerance must be positive");
    if (config.subdivision_level < 0)
        raise(ErrorCode::InvalidArgument, "subdivision_level must be non-negative");
    if (config.deformation_max_iterations < 1)
        raise(ErrorCode::InvalidArgument, "deformation_max_iterations must be at least 1");
    if (config.smoothingIterations < 0)
        raise(ErrorCode::InvalidArgument, "smoothingIterations must be non-negative");
    if (!(config.refinement_gamma > 1.0))
        raise(ErrorCode::InvalidArgument, "refinement_gamma must exceed 1");
    if (config.local_com_k < 1) raise(ErrorCode::InvalidArgument, "local_com_k must be positive");
    if (!(config.max_step() > 0.0)) raise(ErrorCode::InvalidArgument, "mTol must be positive");
    if (config.stiffness < 0.0) raise(ErrorCode::InvalidArgument, "stiffness must be non-negative");
}

std::pair<std::vector<Vec3>, density::NormalizationRecord>
normalize_points(const std::vector<Vec3>& points) {
    if (points.size() < 4)
        raise(ErrorCode::DegenerateInput, "normalization needs at least 4 points");

    Vec3 lo = points[0], hi = points[0];
    for (const Vec3& p : points) {
        if (!is_finite(p)) raise(ErrorCode::InvalidArgument, "non-finite point");
        for (int a = 0; a < 3; ++a) {
            if (p[a] < lo[a]) lo.set(a, p[a]);
            if (p[a] > hi[a]) hi.set(a, p[a]);
        }
    }
    for (int a = 0; a < 3; ++a)
        if (!(hi[a] > lo[a]))
            raise(ErrorCode::DegenerateExtent,
                  "point cloud has zero extent along axis " + std::to_string(a));

    std::vector<Vec3> out;
    out.reserve(points.size());
    for (const Vec3& p : points) {
        Vec3 q;
        for (int a = 0; a < 3; ++a) q.set(a, 2.0 * (p[a] - lo[a]) / (hi[a] - lo[a]) - 1.0);
        out.push_back(q);
    }
    return {std::move(out), density::NormalizationRecord{lo, hi}};
}

double median_nn_spacing(const std::vector<Vec3>& points) {
    if (points.size() < 2) raise(ErrorCode::DegenerateInput, "need at least 2 points");
    KdTree3 tree(points);
    std::vector<double> nn;
    nn.reserve(points.size());
    for (const Vec3& p : points) {
        auto idxs = tree.k_nearest(p, 2); // self plus the true neighbor
        double best = -1.0;
        for (int idx : idxs) {
            double d = distance(points[idx], p);
            if (d > 0.0 && (best < 0.0 || d < best)) best = d;
        }
        if (best > 0.0) nn.push_back(best);
    }
    if (nn.empty()) raise(ErrorCode::DegenerateInput, "all points coincident");
    std::size_t mid = nn.size() / 2;
    std::nth_element(nn.begin(), nn.begin() + mid, nn.end());
    return nn[mid];
}

TriangleMesh refine_adaptive(const TriangleMesh& mesh, double gamma, double L_min,
                             int max_passes) {
    if (!(gamma > 1.0)) raise(ErrorCode::InvalidArgument, "refinement gamma must exceed 1");
    if (!(L_min > 0.0)) raise(ErrorCode::InvalidArgument, "L_min must be positive");

    TriangleMesh current = mesh;
    for (int pass = 0; pass < max_passes; ++pass) {
        const std::vector<double> avg = vertex_avg_edge_length(current);
        std::vector<char> flagged(current.vertex_count(), 0);
        bool any = false;
        for (std::size_t v = 0; v < current.vertex_count(); ++v) {
            if (avg[v] > gamma * L_min) {
                flagged[v] = 1;
                any = true;
            }
        }
        if (!any) break;

        // Full split for faces touching a flagged vertex, then split every
        // edge of those faces; partial splits keep the neighbors conforming.
        std::vector<char> full(current.face_count(), 0);
        for (std::size_t f = 0; f < current.face_count(); ++f)
            for (int c = 0; c < 3; ++c)
                if (flagged[current.faces[f][c]]) full[f] = 1;

        std::map<std::pair<int, int>, int> midpoint;
        std::vector<Vec3> vertices = current.vertices;
        auto midpoint_of = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            int idx = static_cast<int>(vertices.size());
            vertices.push_back(0.5 * (vertices[a] + vertices[b]));
            midpoint.emplace(key, idx);
            return idx;
        };

        // Never split an edge already below the target length: subdividing
        // hull slivers produces microscopic faces that tangle during
        // contraction.
        for (std::size_t e = 0; e < current.edge_count(); ++e) {
            const auto& ef = current.edge_faces[e];
            if (!full[ef[0]] && !full[ef[1]]) continue;
            int a = current.edges[e][0];
            int b = current.edges[e][1];
            if (distance(current.vertices[a], current.vertices[b]) < L_min) continue;
            midpoint_of(a, b);
        }

        std::vector<std::array<int, 3>> faces;
        faces.reserve(current.face_count() * 4);
        for (std::size_t f = 0; f < current.face_count(); ++f) {
            int a = current.faces[f][0], b = current.faces[f][1], c = current.faces[f][2];
            auto mid = [&](int u, int v) -> int {
                auto it = midpoint.find(std::minmax(u, v));
                return it == midpoint.end() ? -1 : it->second;
            };
            int mab = mid(a, b), mbc = mid(b, c), mca = mid(c, a);
            int split = (mab >= 0) + (mbc >= 0) + (mca >= 0);
            if (split == 3) {
                faces.push_back({a, mab, mca});
                faces.push_back({mab, b, mbc});
                faces.push_back({mca, mbc, c});
                faces.push_back({mab, mbc, mca});
            } else if (split == 2) {
                // Rotate so the unsplit edge is (c, a).
                while (mid(c, a) >= 0) {
                    int t = a;
                    a = b;
                    b = c;
                    c = t;
                }
                mab = mid(a, b);
                mbc = mid(b, c);
                faces.push_back({mab, b, mbc});
                faces.push_back({a, mab, mbc});
                faces.push_back({a, mbc, c});
            } else if (split == 1) {
                while (mid(a, b) < 0) {
                    int t = a;
                    a = b;
                    b = c;
                    c = t;
                }
                mab = mid(a, b);
                faces.push_back({a, mab, c});
                faces.push_back({mab, b, c});
            } else {
                faces.push_back({a, b, c});
            }
        }
        current = build_mesh(std::move(vertices), std::move(faces));
    }
    return current;
}

DeformationState make_state(TriangleMesh mesh, std::vector<Vec3> fixed_points, double stiffness) {
    (void)stiffness;
    DeformationState state;
    state.mesh = std::move(mesh);
    state.fixed_points = std::move(fixed_points);
    state.fixed_tree.build(state.fixed_points);
    state.fixed_centroid = {0, 0, 0};
    for (const Vec3& p : state.fixed_points) state.fixed_centroid += p;
    if (!state.fixed_points.empty())
        state.fixed_centroid = state.fixed_centroid / static_cast<double>(state.fixed_points.size());
    state.rest_length.reserve(state.mesh.edge_count());
    for (const auto& e : state.mesh.edges)
        state.rest_length.push_back(distance(state.mesh.vertices[e[0]], state.mesh.vertices[e[1]]));
    state.snap_target.assign(state.mesh.vertex_count(), -1);
    state.velocity.assign(state.mesh.vertex_count(), Vec3{});
    return state;
}

std::vector<Vec3> elastic_forces(DeformationState& state, const FfmgConfig& config) {
    std::vector<Vec3> force(state.mesh.vertex_count(), Vec3{});
    const double k0 = config.stiffness;
    if (k0 == 0.0) return force;

    for (std::size_t e = 0; e < state.mesh.edge_count(); ++e) {
        int i = state.mesh.edges[e][0];
        int j = state.mesh.edges[e][1];
        Vec3 d = state.mesh.vertices[j] - state.mesh.vertices[i];
        double len = norm(d);
        if (len < kCoincidentDistance) {
            state.coincident_skips += 1;
            continue;
        }
        double rest = state.rest_length[e];
        double strain = (len - rest) / rest;
        double k = k0 * (1.0 + config.strain_factor *
                                   std::max(0.0, std::abs(strain) - config.max_strain));
        Vec3 f = (k * strain / len) * d;
        force[i] += f;
        force[j] -= f;
    }
    return force;
}

std::vector<Vec3> pressure_forces(const DeformationState& state, PressureMode mode, double p,
                                  int local_k) {
    std::vector<Vec3> force(state.mesh.vertex_count(), Vec3{});
    if (p == 0.0) return force;

    for (std::size_t f = 0; f < state.mesh.face_count(); ++f) {
        const auto& tri = state.mesh.faces[f];
        const Vec3& v0 = state.mesh.vertices[tri[0]];
        const Vec3& v1 = state.mesh.vertices[tri[1]];
        const Vec3& v2 = state.mesh.vertices[tri[2]];
        Vec3 n = cross(v1 - v0, v2 - v0);
        double len = norm(n);
        double area = 0.5 * len;
        if (area < kDegenerateFaceArea) continue;

        Vec3 dir;
        if (mode == PressureMode::Norm) {
            dir = n / len;
        } else {
            // Radial direction through the relevant fixed-point centroid,
            // oriented away from it so that negative p compresses, matching
            // the face-normal convention.
            Vec3 centroid = (v0 + v1 + v2) / 3.0;
            Vec3 reference = state.fixed_centroid;
            if (mode == PressureMode::LocalCoM && !state.fixed_tree.empty()) {
                auto idxs = state.fixed_tree.k_nearest(centroid, local_k);
                Vec3 acc{};
                for (int idx : idxs) acc += state.fixed_points[idx];
                reference = acc / static_cast<double>(idxs.size());
            }
            Vec3 away = centroid - reference;
            double alen = norm(away);
            if (alen < kCoincidentDistance) continue;
            dir = away / alen;
        }

        Vec3 contribution = (p * area / 3.0) * dir;
        force[tri[0]] += contribution;
        force[tri[1]] += contribution;
        force[tri[2]] += contribution;
    }
    return force;
}

void apply_step(DeformationState& state, const std::vector<Vec3>& elastic,
                const std::vector<Vec3>& pressure, const FfmgConfig& config) {
    const double max_step = config.max_step();
    const double scale = config.dt / config.damping_factor;
    double max_disp = 0.0;

    for (std::size_t v = 0; v < state.mesh.vertex_count(); ++v) {
        if (state.snap_target[v] >= 0) continue;
        double w = proximity_weight(state, static_cast<int>(v), config);
        Vec3 net = elastic[v] + w * pressure[v];
        if (!is_finite(net))
            raise(ErrorCode::NonFiniteForce,
                  "non-finite force on vertex " + std::to_string(v) + " at iteration " +
                      std::to_string(state.iteration));

        Vec3 step;
        if (config.integration == Integration::Overdamped) {
            step = scale * net;
        } else {
            Vec3 accel = net - config.damping_factor * state.velocity[v];
            state.velocity[v] += config.dt * accel;
            step = config.dt * state.velocity[v];
        }

        double len = norm(step);
        if (len > max_step) {
            step *= max_step / len;
            len = max_step;
            if (config.integration == Integration::Inertial)
                state.velocity[v] = step / config.dt;
        }
        state.mesh.vertices[v] += step;
        if (len > max_disp) max_disp = len;
    }
    state.last_max_displacement = max_disp;
}

double ramp_pressure(DeformationState& state, const FfmgConfig& config) {
    const double target = config.target_pressure();
    const double step = config.pressure_increment * std::abs(target);
    double p = state.current_pressure;
    if (p < target)
        p = std::min(p + step, target);
    else if (p > target)
        p = std::max(p - step, target);
    state.current_pressure = p;
    return p;
}

void snap_vertices(DeformationState& state, const FfmgConfig& config) {
    if (!config.apply_snapping || state.fixed_tree.empty()) return;
    for (int pass = 0; pass < config.max_NNsnapping_iterations; ++pass) {
        bool changed = false;
        for (std::size_t v = 0; v < state.mesh.vertex_count(); ++v) {
            if (state.snap_target[v] >= 0) continue;
            auto [idx, dist] = state.fixed_tree.nearest(state.mesh.vertices[v]);
            if (idx >= 0 && dist <= config.snapping_tolerance) {
                state.mesh.vertices[v] = state.fixed_points[idx];
                state.snap_target[v] = idx;
                state.velocity[v] = Vec3{};
                state.n_snapped += 1;
                changed = true;
            }
        }
        if (!changed) break;
    }
}

void laplacian_smooth(DeformationState& state, const FfmgConfig& config) {
    if (config.smoothingIterations <= 0 || config.smoothingTol <= 0.0) return;
    std::vector<Vec3> moves(state.mesh.vertex_count());
    for (int it = 0; it < config.smoothingIterations; ++it) {
        for (std::size_t v = 0; v < state.mesh.vertex_count(); ++v) {
            moves[v] = Vec3{};
            if (state.snap_target[v] >= 0) continue;
            const auto& nbrs = state.mesh.vertex_neighbors[v];
            if (nbrs.empty()) continue;
            Vec3 delta{};
            for (int j : nbrs) delta += state.mesh.vertices[j] - state.mesh.vertices[v];
            delta = delta / static_cast<double>(nbrs.size());
            double len = norm(delta);
            if (len > config.smoothingTol) delta *= config.smoothingTol / len;
            moves[v] = proximity_weight(state, static_cast<int>(v), config) * delta;
        }
        for (std::size_t v = 0; v < state.mesh.vertex_count(); ++v)
            state.mesh.vertices[v] += moves[v];
    }
}

bool check_convergence(const DeformationState& state, double eps) {
    return state.last_max_displacement < eps;
}

double cfl_limit(const DeformationState& state, const FfmgConfig& config) {
    if (config.stiffness <= 0.0) return std::numeric_limits<double>::infinity();

    double k_max = 0.0;
    for (std::size_t e = 0; e < state.mesh.edge_count(); ++e) {
        int i = state.mesh.edges[e][0];
        int j = state.mesh.edges[e][1];
        double len = distance(state.mesh.vertices[i], state.mesh.vertices[j]);
        if (len < kCoincidentDistance) continue;
        double strain = (len - state.rest_length[e]) / state.rest_length[e];
        double k = config.stiffness *
                   (1.0 + config.strain_factor * std::max(0.0, std::abs(strain) - config.max_strain));
        k_max = std::max(k_max, k);
    }
    std::size_t deg_max = 0;
    for (const auto& nbrs : state.mesh.vertex_neighbors) deg_max = std::max(deg_max, nbrs.size());
    if (k_max <= 0.0 || deg_max == 0) return std::numeric_limits<double>::infinity();

    const double omega_max = std::sqrt(2.0 * k_max * static_cast<double>(deg_max));
    return 2.0 / omega_max;
}

RunResult run_deformation(const density::FocalPointCloud& cloud, const FfmgConfig& config,
                          const IterationObserver& observer) {
    return run_deformation(cloud.points, config, observer);
}

RunResult run_deformation(const std::vector<Vec3>& points, const FfmgConfig& config,
                          const IterationObserver& observer) {
    validate_config(config);

    auto [normalized, record] = normalize_points(points);
    TriangleMesh hull = convex_hull(normalized);

    const double l_min = config.L_min > 0.0 ? config.L_min : median_nn_spacing(normalized);
    TriangleMesh refined =
        config.subdivision_level > 0
            ? refine_adaptive(hull, config.refinement_gamma, l_min, config.subdivision_level)
            : hull;

    DeformationState state = make_state(std::move(refined), std::move(normalized), config.stiffness);

    RunResult result;
    result.normalization = record;

    const int tp = std::clamp(config.test_point_index, 0,
                              static_cast<int>(state.mesh.vertex_count()) - 1);

    for (int it = 0; it < config.deformation_max_iterations; ++it) {
        state.iteration = it;
        ramp_pressure(state, config);
        std::vector<Vec3> fe = elastic_forces(state, config);
        std::vector<Vec3> fp =
            pressure_forces(state, config.pressure_mode, state.current_pressure, config.local_com_k);
        apply_step(state, fe, fp, config);
        if (config.apply_snapping) snap_vertices(state, config);
        laplacian_smooth(state, config);

        MetricsRow row;
        row.iteration = it;
        row.max_displacement = state.last_max_displacement;
        row.avg_edge_length = avg_edge_length(state.mesh);
        row.volume = signed_volume(state.mesh);
        row.n_snapped = state.n_snapped;
        row.pressure = state.current_pressure;
        row.test_point_pressure_force = fp[tp];
        row.test_point_elastic_force = fe[tp];
        row.test_point_position = state.mesh.vertices[tp];
        result.log.push_back(row);

        if (observer) observer(state);

        // A stable configuration is only meaningful once the pressure ramp
        // has saturated; tiny early-ramp forces must not end the run.
        const bool ramp_complete = state.current_pressure == config.target_pressure();
        if (ramp_complete && check_convergence(state, config.deformation_tolerance)) {
            result.converged = true;
            break;
        }
    }

    result.iterations = static_cast<int>(result.log.size());
    result.coincident_skips = state.coincident_skips;
    result.mesh = std::move(state.mesh);
    return result;
}

} // namespace fb::ffmg
