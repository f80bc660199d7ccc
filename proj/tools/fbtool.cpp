// fbtool — pipeline driver for the focalbody shared library.
//
// Subcommands: trace, extract, wrap, validate, pipeline. Every command is a
// pure function of (config, input files, seed); identical invocations produce
// byte-identical outputs.
//
// Exit codes: 0 success, 2 configuration/input error, 3 runtime error,
// 4 empty result, 5 validation failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "focalbody/focalbody.h"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitEmpty = 4;
constexpr int kExitValidation = 5;

struct CliError {
    int exit_code;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) { throw CliError{code, message}; }

int exit_code_for(fb_status status) {
    switch (status) {
        case FB_OK: return kExitOk;
        case FB_ERR_INVALID_ARGUMENT:
        case FB_ERR_NON_MANIFOLD:
        case FB_ERR_INCONSISTENT_ORIENTATION:
        case FB_ERR_PARSE:
        case FB_ERR_EMPTY_FILE:
        case FB_ERR_EMPTY_MESH:
            return kExitConfig;
        case FB_ERR_EMPTY_CLOUD:
            return kExitEmpty;
        default:
            return kExitRuntime;
    }
}

void check(fb_status status, const std::string& what) {
    if (status == FB_OK) return;
    fail(exit_code_for(status),
         what + ": " + fb_status_name(status) + ": " + fb_last_error());
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct Options {
    std::string config_path;
    std::string output_dir;
    long long seed = -1; // -1: keep config value
    std::vector<std::string> overrides;
    bool analytic = false;
    std::string rays_path;
    std::string cloud_path;
    std::string mesh_path;
    double tolerance = -1.0; // validate only; -1: ffmg.snapping_tolerance
};

json default_config() {
    json cfg;
    cfg["mirror"] = {{"radius_of_curvature", 1.0}, {"aperture_diameter", 1.0}};
    cfg["source"] = {{"n_rays", 100000},
                     {"tilt", {0.0, 0.0}},
                     {"sampling", "sunflower_disk"},
                     {"seed", 1}};
    // grid defaults depend on the mirror radius; filled in after merging.
    cfg["threshold_fraction"] = 0.01;

    fb_ffmg_config d;
    fb_ffmg_config_defaults(&d);
    cfg["ffmg"] = {{"subdivision_level", d.subdivision_level},
                   {"PR_in", d.PR_in},
                   {"PR_out", d.PR_out},
                   {"pressure_scaling_factor", d.pressure_scaling_factor},
                   {"pressure_mode", "globalCoM"},
                   {"pressure_increment", d.pressure_increment},
                   {"snapping_tolerance", d.snapping_tolerance},
                   {"max_NNsnapping_iterations", d.max_NNsnapping_iterations},
                   {"deformation_tolerance", d.deformation_tolerance},
                   {"mTol", 0.8 * d.snapping_tolerance},
                   {"deformation_max_iterations", d.deformation_max_iterations},
                   {"dt", d.dt},
                   {"smoothingIterations", d.smoothingIterations},
                   {"smoothingTol", d.smoothingTol},
                   {"damping_factor", d.damping_factor},
                   {"apply_snapping", true},
                   {"stiffness", d.stiffness},
                   {"strain_factor", d.strain_factor},
                   {"max_strain", d.max_strain},
                   {"distance_factor_strength", d.distance_factor_strength},
                   {"refinement_gamma", d.refinement_gamma},
                   {"L_min", d.L_min},
                   {"local_com_k", d.local_com_k},
                   {"integration", "overdamped"},
                   {"test_point_index", d.test_point_index}};
    cfg["output_dir"] = "out";
    cfg["seed"] = 1;
    return cfg;
}

void merge_into(json& base, const json& overlay, const std::string& prefix) {
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (path != "grid" && !base.contains(it.key()))
            fail(kExitConfig, "unknown configuration key '" + path + "'");
        if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object())
            merge_into(base[it.key()], it.value(), path);
        else
            base[it.key()] = it.value();
    }
}

json load_config(const Options& opts) {
    json cfg = default_config();

    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) fail(kExitConfig, "cannot open config file '" + opts.config_path + "'");
        json file_cfg;
        try {
            file_cfg = json::parse(in);
        } catch (const std::exception& e) {
            fail(kExitConfig, std::string("config parse error: ") + e.what());
        }
        if (!file_cfg.is_object()) fail(kExitConfig, "config root must be a JSON object");
        merge_into(cfg, file_cfg, "");
    }

    if (!cfg.contains("grid")) {
        // The default grid scales with the configured mirror radius.
        fb_mirror mirror{cfg["mirror"]["radius_of_curvature"].get<double>(),
                         cfg["mirror"]["aperture_diameter"].get<double>()};
        fb_grid_spec spec;
        fb_grid_spec_default(&mirror, &spec);
        cfg["grid"] = {{"min", {spec.min[0], spec.min[1], spec.min[2]}},
                       {"max", {spec.max[0], spec.max[1], spec.max[2]}},
                       {"resolution", {spec.resolution[0], spec.resolution[1], spec.resolution[2]}}};
    }

    for (const std::string& kv : opts.overrides) {
        auto pos = kv.find('=');
        if (pos == std::string::npos || pos == 0)
            fail(kExitConfig, "--set expects key=value, got '" + kv + "'");
        std::string key = kv.substr(0, pos);
        std::string value = kv.substr(pos + 1);
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const std::exception&) {
            parsed = value; // bare strings allowed
        }
        std::string pointer = "/" + key;
        for (auto& c : pointer)
            if (c == '.') c = '/';
        try {
            json::json_pointer jp(pointer);
            if (!cfg.contains(jp))
                fail(kExitConfig, "--set: unknown configuration key '" + key + "'");
            cfg[jp] = parsed;
        } catch (const CliError&) {
            throw;
        } catch (const std::exception& e) {
            fail(kExitConfig, "--set '" + kv + "': " + e.what());
        }
    }

    if (opts.seed >= 0) {
        cfg["seed"] = opts.seed;
        cfg["source"]["seed"] = opts.seed;
    }
    if (!opts.output_dir.empty()) cfg["output_dir"] = opts.output_dir;

    return cfg;
}

template <typename T>
T field(const json& cfg, const std::string& pointer, const char* name) {
    try {
        return cfg.at(json::json_pointer(pointer)).get<T>();
    } catch (const std::exception& e) {
        fail(kExitConfig, std::string("bad config field '") + name + "': " + e.what());
    }
}

fb_mirror mirror_from(const json& cfg) {
    fb_mirror m;
    m.radius_of_curvature = field<double>(cfg, "/mirror/radius_of_curvature",
                                          "mirror.radius_of_curvature");
    m.aperture_diameter = field<double>(cfg, "/mirror/aperture_diameter",
                                        "mirror.aperture_diameter");
    if (!(m.radius_of_curvature > 0.0))
        fail(kExitConfig, "mirror.radius_of_curvature must be positive");
    if (!(m.aperture_diameter > 0.0) || m.aperture_diameter > 2.0 * m.radius_of_curvature)
        fail(kExitConfig,
             "mirror.aperture_diameter must satisfy 0 < D <= 2 * radius_of_curvature");
    return m;
}

fb_source source_from(const json& cfg) {
    fb_source s;
    s.n_rays = field<long long>(cfg, "/source/n_rays", "source.n_rays");
    if (s.n_rays < 0) fail(kExitConfig, "source.n_rays must be non-negative");
    auto tilt = field<std::vector<double>>(cfg, "/source/tilt", "source.tilt");
    if (tilt.size() != 2) fail(kExitConfig, "source.tilt must have two components");
    s.tilt_x = tilt[0];
    s.tilt_y = tilt[1];
    auto sampling = field<std::string>(cfg, "/source/sampling", "source.sampling");
    if (sampling == "sunflower_disk") s.sampling = FB_SAMPLING_SUNFLOWER_DISK;
    else if (sampling == "square_grid") s.sampling = FB_SAMPLING_SQUARE_GRID;
    else fail(kExitConfig, "source.sampling must be 'sunflower_disk' or 'square_grid'");
    s.seed = field<uint64_t>(cfg, "/source/seed", "source.seed");
    return s;
}

fb_grid_spec grid_from(const json& cfg) {
    fb_grid_spec g;
    auto mn = field<std::vector<double>>(cfg, "/grid/min", "grid.min");
    auto mx = field<std::vector<double>>(cfg, "/grid/max", "grid.max");
    auto res = field<std::vector<int>>(cfg, "/grid/resolution", "grid.resolution");
    if (mn.size() != 3 || mx.size() != 3 || res.size() != 3)
        fail(kExitConfig, "grid.min/max/resolution must have three components");
    for (int a = 0; a < 3; ++a) {
        g.min[a] = mn[a];
        g.max[a] = mx[a];
        g.resolution[a] = res[a];
        if (!(g.min[a] < g.max[a])) fail(kExitConfig, "grid.min must be below grid.max per axis");
        if (g.resolution[a] <= 0) fail(kExitConfig, "grid.resolution must be positive");
    }
    return g;
}

fb_ffmg_config ffmg_from(const json& cfg) {
    fb_ffmg_config c;
    fb_ffmg_config_defaults(&c);
    c.subdivision_level = field<int>(cfg, "/ffmg/subdivision_level", "ffmg.subdivision_level");
    c.PR_in = field<double>(cfg, "/ffmg/PR_in", "ffmg.PR_in");
    c.PR_out = field<double>(cfg, "/ffmg/PR_out", "ffmg.PR_out");
    c.pressure_scaling_factor =
        field<double>(cfg, "/ffmg/pressure_scaling_factor", "ffmg.pressure_scaling_factor");
    auto mode = field<std::string>(cfg, "/ffmg/pressure_mode", "ffmg.pressure_mode");
    if (mode == "globalCoM") c.pressure_mode = FB_PRESSURE_GLOBAL_COM;
    else if (mode == "Norm") c.pressure_mode = FB_PRESSURE_NORM;
    else if (mode == "localCoM") c.pressure_mode = FB_PRESSURE_LOCAL_COM;
    else fail(kExitConfig, "ffmg.pressure_mode must be 'globalCoM', 'Norm' or 'localCoM'");
    c.pressure_increment = field<double>(cfg, "/ffmg/pressure_increment", "ffmg.pressure_increment");
    c.snapping_tolerance = field<double>(cfg, "/ffmg/snapping_tolerance", "ffmg.snapping_tolerance");
    c.max_NNsnapping_iterations =
        field<int>(cfg, "/ffmg/max_NNsnapping_iterations", "ffmg.max_NNsnapping_iterations");
    c.deformation_tolerance =
        field<double>(cfg, "/ffmg/deformation_tolerance", "ffmg.deformation_tolerance");
    c.mTol = field<double>(cfg, "/ffmg/mTol", "ffmg.mTol");
    c.deformation_max_iterations =
        field<int>(cfg, "/ffmg/deformation_max_iterations", "ffmg.deformation_max_iterations");
    c.dt = field<double>(cfg, "/ffmg/dt", "ffmg.dt");
    c.smoothingIterations =
        field<int>(cfg, "/ffmg/smoothingIterations", "ffmg.smoothingIterations");
    c.smoothingTol = field<double>(cfg, "/ffmg/smoothingTol", "ffmg.smoothingTol");
    c.damping_factor = field<double>(cfg, "/ffmg/damping_factor", "ffmg.damping_factor");
    c.apply_snapping = field<bool>(cfg, "/ffmg/apply_snapping", "ffmg.apply_snapping") ? 1 : 0;
    c.stiffness = field<double>(cfg, "/ffmg/stiffness", "ffmg.stiffness");
    c.strain_factor = field<double>(cfg, "/ffmg/strain_factor", "ffmg.strain_factor");
    c.max_strain = field<double>(cfg, "/ffmg/max_strain", "ffmg.max_strain");
    c.distance_factor_strength =
        field<double>(cfg, "/ffmg/distance_factor_strength", "ffmg.distance_factor_strength");
    c.refinement_gamma = field<double>(cfg, "/ffmg/refinement_gamma", "ffmg.refinement_gamma");
    c.L_min = field<double>(cfg, "/ffmg/L_min", "ffmg.L_min");
    c.local_com_k = field<int>(cfg, "/ffmg/local_com_k", "ffmg.local_com_k");
    auto integ = field<std::string>(cfg, "/ffmg/integration", "ffmg.integration");
    if (integ == "overdamped") c.integration = FB_INTEGRATION_OVERDAMPED;
    else if (integ == "inertial") c.integration = FB_INTEGRATION_INERTIAL;
    else fail(kExitConfig, "ffmg.integration must be 'overdamped' or 'inertial'");
    c.test_point_index = field<int>(cfg, "/ffmg/test_point_index", "ffmg.test_point_index");
    return c;
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(kExitRuntime, "cannot create output directory '" + dir + "'");
}

void write_manifest(const json& cfg, const std::string& command, const json& results,
                    const std::vector<std::string>& outputs, const std::string& path) {
    json manifest;
    manifest["tool"] = fb_version();
    manifest["command"] = command;
    manifest["seed"] = cfg["seed"];
    // The echoed configuration is what a rerun needs; the output directory is
    // environment, and omitting it keeps reruns byte-identical anywhere.
    json echoed = cfg;
    echoed.erase("output_dir");
    manifest["config"] = echoed;
    manifest["outputs"] = outputs;
    manifest["results"] = results;
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(kExitRuntime, "cannot write manifest '" + path + "'");
    out << manifest.dump(2) << "\n";
}

struct TraceGuard {
    fb_trace* p = nullptr;
    ~TraceGuard() { fb_trace_free(p); }
};
struct GridGuard {
    fb_grid* p = nullptr;
    ~GridGuard() { fb_grid_free(p); }
};
struct CloudGuard {
    fb_cloud* p = nullptr;
    ~CloudGuard() { fb_cloud_free(p); }
};
struct MeshGuard {
    fb_mesh* p = nullptr;
    ~MeshGuard() { fb_mesh_free(p); }
};
struct MetricsGuard {
    fb_metrics* p = nullptr;
    ~MetricsGuard() { fb_metrics_free(p); }
};
struct ReportGuard {
    fb_report* p = nullptr;
    ~ReportGuard() { fb_report_free(p); }
};

void write_analytic(const json& cfg, const std::string& path) {
    fb_mirror mirror = mirror_from(cfg);
    std::vector<double> heights;
    const double y_max = 0.5 * mirror.aperture_diameter;
    for (int i = 1; i <= 100; ++i)
        heights.push_back(y_max * static_cast<double>(i) / 100.0);
    check(fb_analytic_write_csv(&mirror, heights.data(), heights.size(), path.c_str()),
          "analytic table");
}

// ---------------------------------------------------------------------------
// Stages (shared between individual commands and `pipeline`)
// ---------------------------------------------------------------------------

json stage_trace(const json& cfg, const std::string& dir, bool analytic,
                 std::vector<std::string>& outputs) {
    fb_mirror mirror = mirror_from(cfg);
    fb_source source = source_from(cfg);

    TraceGuard trace;
    check(fb_trace_run(&mirror, &source, &trace.p), "trace");
    size_t count = 0;
    check(fb_trace_count(trace.p, &count), "trace");

    const std::string rays = join(dir, "rays.csv");
    check(fb_trace_write_csv(trace.p, rays.c_str()), "trace output");
    outputs.push_back("rays.csv");
    std::printf("wrote %s (%zu records)\n", rays.c_str(), count);

    if (analytic) {
        const std::string path = join(dir, "analytic.csv");
        write_analytic(cfg, path);
        outputs.push_back("analytic.csv");
        std::printf("wrote %s\n", path.c_str());
    }
    return json{{"reflected_rays", count}};
}

json stage_extract(const json& cfg, const std::string& dir, const std::string& rays_path,
                   std::vector<std::string>& outputs) {
    TraceGuard trace;
    check(fb_trace_read_csv(rays_path.c_str(), &trace.p), "reading rays");

    fb_grid_spec spec = grid_from(cfg);
    GridGuard grid;
    check(fb_grid_accumulate(&spec, trace.p, &grid.p), "density accumulation");

    const std::string grid_csv = join(dir, "grid.csv");
    const std::string grid_json = join(dir, "grid.json");
    check(fb_grid_write_csv(grid.p, grid_csv.c_str()), "grid output");
    check(fb_grid_write_json(grid.p, grid_json.c_str()), "grid output");
    outputs.push_back("grid.csv");
    outputs.push_back("grid.json");

    const double fraction = field<double>(cfg, "/threshold_fraction", "threshold_fraction");
    CloudGuard cloud;
    fb_status status = fb_cloud_extract(grid.p, fraction, &cloud.p);
    if (status == FB_ERR_EMPTY_CLOUD)
        fail(kExitEmpty, std::string("focal body is empty at threshold_fraction=") +
                             std::to_string(fraction) + "; lower the threshold");
    check(status, "focal body extraction");

    size_t n_points = 0;
    check(fb_cloud_size(cloud.p, &n_points), "focal body extraction");
    const std::string cloud_xyz = join(dir, "cloud.xyz");
    check(fb_cloud_write_xyz(cloud.p, cloud_xyz.c_str()), "cloud output");
    outputs.push_back("cloud.xyz");

    long long total = 0;
    check(fb_grid_total_rays(grid.p, &total), "grid output");
    std::printf("wrote %s (%zu points, %lld rays)\n", cloud_xyz.c_str(), n_points, total);
    return json{{"total_rays", total}, {"cloud_points", n_points}};
}

json stage_wrap(const json& cfg, const std::string& dir, const std::string& cloud_path,
                std::vector<std::string>& outputs) {
    CloudGuard cloud;
    check(fb_cloud_read_xyz(cloud_path.c_str(), &cloud.p), "reading cloud");

    fb_ffmg_config config = ffmg_from(cfg);
    MeshGuard mesh;
    MetricsGuard metrics;
    fb_run_info info{};
    check(fb_ffmg_run(cloud.p, &config, &mesh.p, &metrics.p, &info), "surface reconstruction");

    const std::string mesh_obj = join(dir, "mesh.obj");
    const std::string metrics_csv = join(dir, "metrics.csv");
    check(fb_mesh_write_obj(mesh.p, mesh_obj.c_str()), "mesh output");
    check(fb_metrics_write_csv(metrics.p, metrics_csv.c_str()), "metrics output");
    outputs.push_back("mesh.obj");
    outputs.push_back("metrics.csv");

    std::printf("wrote %s (%d vertices, %d faces, %d iterations, %s)\n", mesh_obj.c_str(),
                info.mesh_vertices, info.mesh_faces, info.iterations,
                info.converged ? "converged" : "not converged");
    return json{{"iterations", info.iterations},
                {"converged", info.converged != 0},
                {"n_snapped", info.n_snapped},
                {"mesh_vertices", info.mesh_vertices},
                {"mesh_faces", info.mesh_faces},
                {"normalization",
                 {{"p_min", {info.p_min[0], info.p_min[1], info.p_min[2]}},
                  {"p_max", {info.p_max[0], info.p_max[1], info.p_max[2]}}}}};
}

struct ValidateOutcome {
    json results;
    bool passed = false;
};

ValidateOutcome stage_validate(const json& cfg, const std::string& dir,
                               const std::string& mesh_path, const std::string& cloud_path,
                               double tolerance, std::vector<std::string>& outputs) {
    MeshGuard mesh;
    check(fb_mesh_read_obj(mesh_path.c_str(), &mesh.p), "reading mesh");
    CloudGuard cloud;
    check(fb_cloud_read_xyz(cloud_path.c_str(), &cloud.p), "reading cloud");

    // The reconstructed surface lives in normalized coordinates; mapping the
    // cloud onto [-1,1] reproduces the transform the wrap stage applied.
    CloudGuard normalized;
    check(fb_cloud_normalize(cloud.p, &normalized.p, nullptr, nullptr), "normalizing cloud");

    if (tolerance < 0.0)
        tolerance = field<double>(cfg, "/ffmg/snapping_tolerance", "ffmg.snapping_tolerance");
    const uint64_t seed = field<uint64_t>(cfg, "/seed", "seed");

    ReportGuard report;
    check(fb_validate_run(mesh.p, normalized.p, tolerance, seed, &report.p), "validation");

    const std::string report_json = join(dir, "report.json");
    check(fb_report_write_json(report.p, report_json.c_str()), "report output");
    outputs.push_back("report.json");

    int passed = 0;
    check(fb_report_passed(report.p, &passed), "validation");
    long long inside = 0, within = 0, outside = 0, pairs = 0;
    check(fb_report_counts(report.p, &inside, &within, &outside, &pairs), "validation");
    double worst = 0.0;
    check(fb_report_worst_outside(report.p, &worst), "validation");

    std::printf("validation: %lld inside, %lld within tolerance, %lld outside, "
                "%lld self-intersection pairs -> %s\n",
                inside, within, outside, pairs, passed ? "pass" : "FAIL");
    if (!passed && outside > 0)
        std::printf("worst outside distance: %.17g\n", worst);

    ValidateOutcome outcome;
    outcome.passed = passed != 0;
    outcome.results = json{{"tolerance", tolerance},
                           {"n_inside", inside},
                           {"n_within_tolerance", within},
                           {"n_outside", outside},
                           {"n_self_intersection_pairs", pairs},
                           {"worst_outside_distance", worst},
                           {"passed", outcome.passed}};
    return outcome;
}

// ---------------------------------------------------------------------------

int run_command(const std::string& command, const Options& opts) {
    json cfg = load_config(opts);
    const std::string dir = cfg["output_dir"].get<std::string>();
    ensure_dir(dir);

    std::vector<std::string> outputs;
    json results;
    bool validation_failed = false;

    if (command == "trace") {
        results = stage_trace(cfg, dir, opts.analytic, outputs);
    } else if (command == "extract") {
        const std::string rays = opts.rays_path.empty() ? join(dir, "rays.csv") : opts.rays_path;
        results = stage_extract(cfg, dir, rays, outputs);
    } else if (command == "wrap") {
        const std::string cloud =
            opts.cloud_path.empty() ? join(dir, "cloud.xyz") : opts.cloud_path;
        results = stage_wrap(cfg, dir, cloud, outputs);
    } else if (command == "validate") {
        const std::string mesh = opts.mesh_path.empty() ? join(dir, "mesh.obj") : opts.mesh_path;
        const std::string cloud =
            opts.cloud_path.empty() ? join(dir, "cloud.xyz") : opts.cloud_path;
        ValidateOutcome outcome =
            stage_validate(cfg, dir, mesh, cloud, opts.tolerance, outputs);
        results = outcome.results;
        validation_failed = !outcome.passed;
    } else if (command == "pipeline") {
        results["trace"] = stage_trace(cfg, dir, opts.analytic, outputs);
        results["extract"] = stage_extract(cfg, dir, join(dir, "rays.csv"), outputs);
        results["wrap"] = stage_wrap(cfg, dir, join(dir, "cloud.xyz"), outputs);
        ValidateOutcome outcome = stage_validate(cfg, dir, join(dir, "mesh.obj"),
                                                 join(dir, "cloud.xyz"), opts.tolerance, outputs);
        results["validate"] = outcome.results;
        validation_failed = !outcome.passed;
    }

    outputs.push_back("manifest.json");
    write_manifest(cfg, command, results, outputs, join(dir, "manifest.json"));

    return validation_failed ? kExitValidation : kExitOk;
}

void add_common_options(CLI::App* cmd, Options& opts) {
    cmd->add_option("--config", opts.config_path, "JSON configuration file");
    cmd->add_option("--out", opts.output_dir, "output directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "seed (overrides config seed and source.seed)");
    cmd->add_option("--set", opts.overrides, "dotted-path config override, e.g. ffmg.dt=0.01")
        ->take_all();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"focal-body pipeline: ray tracing, density extraction, surface reconstruction"};
    app.set_version_flag("--version", fb_version());
    app.require_subcommand(1);

    Options opts;

    CLI::App* trace = app.add_subcommand("trace", "trace a collimated bundle off the mirror");
    add_common_options(trace, opts);
    trace->add_flag("--analytic", opts.analytic, "also emit the analytic caustic table");

    CLI::App* extract =
        app.add_subcommand("extract", "accumulate ray density and extract the focal body");
    add_common_options(extract, opts);
    extract->add_option("--rays", opts.rays_path, "trace CSV (default <out>/rays.csv)");

    CLI::App* wrap = app.add_subcommand("wrap", "reconstruct a closed surface around a cloud");
    add_common_options(wrap, opts);
    wrap->add_option("--cloud", opts.cloud_path, "cloud XYZ (default <out>/cloud.xyz)");

    CLI::App* validate = app.add_subcommand("validate", "validate a surface against a cloud");
    add_common_options(validate, opts);
    validate->add_option("--mesh", opts.mesh_path, "mesh OBJ (default <out>/mesh.obj)");
    validate->add_option("--cloud", opts.cloud_path, "cloud XYZ (default <out>/cloud.xyz)");
    validate->add_option("--tolerance", opts.tolerance,
                         "enclosure tolerance (default ffmg.snapping_tolerance)");

    CLI::App* pipeline = app.add_subcommand("pipeline", "trace, extract, wrap and validate");
    add_common_options(pipeline, opts);
    pipeline->add_flag("--analytic", opts.analytic, "also emit the analytic caustic table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        for (auto* cmd : {trace, extract, wrap, validate, pipeline})
            if (cmd->parsed()) return run_command(cmd->get_name(), opts);
        return kExitConfig;
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.message.c_str());
        return e.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
}
