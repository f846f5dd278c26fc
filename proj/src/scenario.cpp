#include "kglab/scenario.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"
#include "kglab/bessel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace kglab {
namespace {

constexpr double pi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Formatting, hashing, small file helpers
// ---------------------------------------------------------------------------

/// Shortest round-trip decimal text for a double (what the JSON writer
/// emits), used for CSV cells so re-parsing recovers the exact value.
std::string num_str(double v) { return json(v).dump(); }

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

std::string iso_utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ValidationError("cannot open for writing: " + path.string());
    out << body;
    out.flush();
    if (!out)
        throw ValidationError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open for reading: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// One CSV cell: commas and line breaks would corrupt the row structure, so
/// free-text cells (error messages) get them replaced.
std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

// ---------------------------------------------------------------------------
// Enum <-> name maps
// ---------------------------------------------------------------------------

const char* averaging_name(Averaging a) {
    return a == Averaging::instantaneous ? "instantaneous" : "cycle_averaged";
}

Averaging parse_averaging(const std::string& s, const std::string& where) {
    if (s == "instantaneous") return Averaging::instantaneous;
    if (s == "cycle_averaged") return Averaging::cycle_averaged;
    throw ValidationError("config: " + where +
                          " must be \"instantaneous\" or \"cycle_averaged\", got \"" + s +
                          "\"");
}

const char* exec_name(Exec e) { return e == Exec::serial ? "serial" : "parallel"; }

Exec parse_exec(const std::string& s, const std::string& where) {
    if (s == "serial") return Exec::serial;
    if (s == "parallel") return Exec::parallel;
    throw ValidationError("config: " + where + " must be \"serial\" or \"parallel\", got \"" +
                          s + "\"");
}

const char* boundary_class_name(BoundaryClass k) {
    switch (k) {
        case BoundaryClass::coordinate_bc: return "coordinate_bc";
        case BoundaryClass::natural_ncbc: return "natural_ncbc";
        default: return "non_extremizing_ncbc";
    }
}

// ---------------------------------------------------------------------------
// Strict-schema JSON access
// ---------------------------------------------------------------------------

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw ValidationError("config: unknown key \"" + it.key() + "\" at " + path);
    }
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return nullptr;
    return &*it;
}

double get_double(const json& obj, const std::string& path, const char* key,
                  double fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number())
        throw ValidationError("config: " + path + "." + key + " must be a number");
    return v->get<double>();
}

long long get_int(const json& obj, const std::string& path, const char* key,
                  long long fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer())
        throw ValidationError("config: " + path + "." + key + " must be an integer");
    return v->get<long long>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean())
        throw ValidationError("config: " + path + "." + key + " must be a boolean");
    return v->get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_string())
        throw ValidationError("config: " + path + "." + key + " must be a string");
    return v->get<std::string>();
}

RadialWindow parse_window(const json& obj, const std::string& path) {
    if (!obj.is_object())
        throw ValidationError("config: " + path + " must be an object");
    check_keys(obj, path, {"inner_start", "inner_len", "outer_start", "outer_len"});
    RadialWindow w;
    w.inner_start = get_double(obj, path, "inner_start", 0.0);
    w.inner_len = get_double(obj, path, "inner_len", 0.0);
    w.outer_start = get_double(obj, path, "outer_start", 0.0);
    w.outer_len = get_double(obj, path, "outer_len", 0.0);
    return w;
}

// ---------------------------------------------------------------------------
// Config serialization
// ---------------------------------------------------------------------------

json window_json(const std::optional<RadialWindow>& w) {
    if (!w) return json(nullptr);
    return json{{"inner_start", w->inner_start},
                {"inner_len", w->inner_len},
                {"outer_start", w->outer_start},
                {"outer_len", w->outer_len}};
}

json config_json(const ScenarioConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["constants"] = {{"c", cfg.constants.c}, {"hbar", cfg.constants.hbar},
                      {"m", cfg.constants.m}};
    j["preset"] = cfg.preset;
    if (!cfg.preset.empty()) {
        j["preset_params"] = {{"l", cfg.params.l},
                              {"l2", cfg.params.l2},
                              {"alpha", cfg.params.alpha},
                              {"amplitude", cfg.params.amplitude},
                              {"amplitude2", cfg.params.amplitude2},
                              {"phase", cfg.params.phase},
                              {"k_z", cfg.params.k_z},
                              {"window_radius", cfg.params.window_radius},
                              {"windowed", cfg.params.windowed}};
    } else {
        json arr = json::array();
        for (const ModeConfig& m : cfg.modes)
            arr.push_back(json{{"amplitude", m.amplitude},
                               {"l", m.l},
                               {"k_r", m.k_r},
                               {"k_z", m.k_z},
                               {"phase", m.phase},
                               {"axial_phase", m.axial_phase},
                               {"window", window_json(m.window)}});
        j["modes"] = std::move(arr);
    }
    j["checks"] = {{"kge", cfg.checks.kge},
                   {"variation", cfg.checks.variation},
                   {"surface", cfg.checks.surface},
                   {"quantization", cfg.checks.quantization}};
    j["grid"] = {{"surface_n_r", cfg.grid.surface_n_r},
                 {"surface_n_theta", cfg.grid.surface_n_theta},
                 {"surface_n_z", cfg.grid.surface_n_z},
                 {"surface_band", {cfg.grid.surface_band_lo, cfg.grid.surface_band_hi}},
                 {"z_half", cfg.grid.z_half},
                 {"trace_rel_tol", cfg.grid.trace_rel_tol},
                 {"quad_n_r", cfg.grid.quad_n_r},
                 {"quad_n_theta", cfg.grid.quad_n_theta},
                 {"quad_n_z", cfg.grid.quad_n_z},
                 {"kge_points", cfg.grid.kge_points},
                 {"tol_natural_factor", cfg.grid.tol_natural_factor},
                 {"closure_rel_tol", cfg.grid.closure_rel_tol},
                 {"exec", exec_name(cfg.grid.exec)}};
    j["output_dir"] = cfg.output_dir;
    j["seed"] = cfg.seed;
    j["averaging"] = averaging_name(cfg.averaging);
    j["normalize_energy_to"] =
        cfg.normalize_energy_to ? json(*cfg.normalize_energy_to) : json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------
// Shared run machinery
// ---------------------------------------------------------------------------

fs::path resolve_output_dir(const ScenarioConfig& cfg) {
    fs::path p = cfg.output_dir.empty() ? fs::path("out") / cfg.name
                                        : fs::path(cfg.output_dir);
    if (p.is_relative()) {
        if (const char* root = std::getenv("KGLAB_OUT"); root && *root)
            p = fs::path(root) / p;
    }
    return p;
}

SurfaceQuadSpec quad_spec(const GridSpec& g) {
    SurfaceQuadSpec s;
    s.n_r = g.quad_n_r;
    s.n_theta = g.quad_n_theta;
    s.n_z = g.quad_n_z;
    s.exec = g.exec;
    return s;
}

double support_radius(const FieldState& field) {
    double r = 0.0;
    for (const CylindricalMode& m : field.modes)
        if (m.window) r = std::max(r, m.window->knots().back());
    return r;
}

NaturalSurfaceMesh trace_band_mesh(const ScenarioConfig& cfg, const FieldState& field,
                                   double r_peak) {
    SurfaceDomain dom;
    const int nr = cfg.grid.surface_n_r;
    for (int i = 0; i < nr; ++i)
        dom.r_values.push_back(
            (cfg.grid.surface_band_lo +
             (cfg.grid.surface_band_hi - cfg.grid.surface_band_lo) * i / (nr - 1.0)) *
            r_peak);
    const int nz = cfg.grid.surface_n_z;
    if (nz > 1) {
        dom.z_values.clear();
        for (int i = 0; i < nz; ++i)
            dom.z_values.push_back(-cfg.grid.z_half +
                                   2.0 * cfg.grid.z_half * i / (nz - 1.0));
    }
    dom.n_theta = cfg.grid.surface_n_theta;

    TraceOptions opts;
    opts.averaging = cfg.averaging;
    opts.rel_tol = cfg.grid.trace_rel_tol;
    opts.exec = cfg.grid.exec;
    const CylPoint seed = crest_point(field, 0, r_peak, 0.0, 0.0);
    return trace_surface(field, seed, dom, opts);
}

/// Rescale so the chain's own support-slice energy integral lands on the
/// target: the slice here replicates the one quantization_chain builds
/// (mean mesh time, outermost window close or 1.5x the band, unit z-slab).
FieldState normalize_for_chain(const ScenarioConfig& cfg, const FieldState& field,
                               const NaturalSurfaceMesh& mesh, double target) {
    double t_mean = 0.0;
    for (double t : mesh.t_of_x) t_mean += t;
    t_mean /= static_cast<double>(std::max<std::size_t>(mesh.t_of_x.size(), 1));
    double r_max = support_radius(field);
    if (r_max == 0.0) r_max = 1.5 * mesh.r_values.back();
    const double z_half =
        mesh.z_values.size() > 1
            ? std::max(std::abs(mesh.z_values.front()), std::abs(mesh.z_values.back()))
            : 0.5;
    const FlatSlice slice{t_mean, r_max, z_half, +1};
    return normalize_energy(field, slice, target, cfg.averaging, quad_spec(cfg.grid));
}

struct RunContext {
    const ScenarioConfig& cfg;
    fs::path out;
    RunManifest manifest;
    std::optional<FieldState> field;
    std::optional<NaturalSurfaceMesh> mesh;
    std::optional<SeamReport> seam;
    double r_peak = 0.0;
    double r_support = 0.0;  // 0 means unwindowed
};

void emit_file(RunContext& ctx, const std::string& name, const std::string& body) {
    write_text(ctx.out / name, body);
    ctx.manifest.files.push_back(name);
}

void emit_json(RunContext& ctx, const std::string& name, json j) {
    j["config_hash"] = ctx.manifest.config_hash;
    emit_file(ctx, name, j.dump(2) + "\n");
}

template <typename Fn>
void run_check(RunContext& ctx, const std::string& name, bool enabled, Fn&& fn) {
    if (!enabled) return;
    CheckResult res;
    res.name = name;
    try {
        fn(res);
    } catch (const std::exception& e) {
        res.ok = false;
        res.error = e.what();
    }
    ctx.manifest.checks.push_back(std::move(res));
}

const FieldState& need_field(const RunContext& ctx) {
    if (!ctx.field)
        throw ValidationError("skipped: field build failed");
    return *ctx.field;
}

// ---------------------------------------------------------------------------
// Check stages
// ---------------------------------------------------------------------------

void stage_field(RunContext& ctx) {
    run_check(ctx, "field", true, [&](CheckResult& res) {
        const ScenarioConfig& cfg = ctx.cfg;
        FieldState f = build_scenario_field(cfg);
        ctx.r_peak = crest_radius(f);
        ctx.r_support = support_radius(f);

        json modes = json::array();
        for (const CylindricalMode& m : f.modes) {
            std::optional<RadialWindow> w = m.window;
            modes.push_back(json{{"amplitude", m.amplitude},
                                 {"l", m.l},
                                 {"k_r", m.k_r},
                                 {"k_z", m.k_z},
                                 {"phase", m.phase},
                                 {"axial_phase", m.axial_phase},
                                 {"omega", m.omega},
                                 {"window", window_json(w)}});
        }
        json j;
        j["name"] = cfg.name;
        j["alpha"] = f.alpha;
        j["omega0"] = f.constants.omega0();
        j["constants"] = {{"c", f.constants.c}, {"hbar", f.constants.hbar},
                          {"m", f.constants.m}};
        j["modes"] = std::move(modes);
        j["crest_radius"] = ctx.r_peak;
        j["support_radius"] =
            ctx.r_support > 0.0 ? json(ctx.r_support) : json(nullptr);
        j["scales"] = {{"phi", f.phi_scale},
                       {"dphi_dt", f.dphi_dt_scale},
                       {"grad", f.grad_scale},
                       {"t00", f.t00_scale}};
        j["relativistic"] = f.relativistic;
        j["windowed"] = f.windowed;
        emit_json(ctx, "field.json", j);

        res.ok = true;
        res.verdict = std::to_string(f.modes.size()) + " mode(s), alpha=" +
                      fmt6(f.alpha) + ", crest radius " + fmt6(ctx.r_peak) +
                      (f.windowed ? ", windowed (support " + fmt6(ctx.r_support) + ")"
                                  : ", unwindowed");
        ctx.field = std::move(f);
    });
}

void stage_kge(RunContext& ctx) {
    run_check(ctx, "kge", ctx.cfg.checks.kge, [&](CheckResult& res) {
        const FieldState& f = need_field(ctx);
        const ScenarioConfig& cfg = ctx.cfg;
        const double kappa = f.constants.compton_k();
        const double r_box =
            ctx.r_support > 0.0 ? ctx.r_support
                                : std::max(12.0 / kappa, 2.0 * ctx.r_peak);
        const double z_box = 2.0 / kappa;
        const double t_span = 2.0 * pi / f.constants.omega0();
        const int n = cfg.grid.kge_points;

        std::mt19937 rng(static_cast<std::uint32_t>(cfg.seed));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<CylPoint> pts;
        pts.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            CylPoint p;
            p.t = unit(rng) * t_span;
            p.r = unit(rng) * r_box;
            p.theta = unit(rng) * 2.0 * pi;
            p.z = (2.0 * unit(rng) - 1.0) * z_box;
            pts.push_back(p);
        }

        std::string csv = "index,t,r,theta,z,residual\n";
        double max_res = 0.0;
        std::size_t argmax = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double r = kge_residual(f, pts[i]);
            csv += std::to_string(i) + ',' + num_str(pts[i].t) + ',' +
                   num_str(pts[i].r) + ',' + num_str(pts[i].theta) + ',' +
                   num_str(pts[i].z) + ',' + num_str(r) + '\n';
            if (r > max_res) {
                max_res = r;
                argmax = i;
            }
        }

        const bool gated = !f.windowed;
        const double gate = 1e-10;
        const bool pass = !gated || max_res < gate;

        json j;
        j["n_points"] = n;
        j["seed"] = cfg.seed;
        j["box"] = {{"r_max", r_box}, {"z_half", z_box}, {"t_span", t_span}};
        j["max_residual"] = max_res;
        j["argmax"] = {{"index", argmax},
                       {"t", pts[argmax].t},
                       {"r", pts[argmax].r},
                       {"theta", pts[argmax].theta},
                       {"z", pts[argmax].z}};
        j["windowed"] = f.windowed;
        j["gated"] = gated;
        j["gate"] = gated ? json(gate) : json(nullptr);
        j["pass"] = pass;
        emit_json(ctx, "kge.json", j);
        emit_file(ctx, "kge.csv", csv);

        res.ok = pass;
        res.verdict = "max |residual| " + fmt6(max_res) + " over " + std::to_string(n) +
                      " points" +
                      (gated ? std::string(", gate 1e-10: ") + (pass ? "pass" : "FAIL")
                             : " (windowed taper; informational)");
    });
}

void stage_stress_energy(RunContext& ctx) {
    run_check(ctx, "stress_energy", ctx.cfg.checks.any_physics(), [&](CheckResult& res) {
        const FieldState& f = need_field(ctx);
        const ScenarioConfig& cfg = ctx.cfg;
        const double t_crest = crest_point(f, 0, ctx.r_peak, 0.0, 0.0).t;
        const double r_scan =
            ctx.r_support > 0.0 ? ctx.r_support : 2.5 * ctx.r_peak;
        const int n_scan = 96;

        double peak_t00 = 0.0, max_v = 0.0;
        bool any_superluminal = false;
        for (int i = 1; i <= n_scan; ++i) {
            const CylPoint p{t_crest, r_scan * i / n_scan, 0.0, 0.0};
            const StressEnergySample s = stress_energy_at(f, p, cfg.averaging);
            peak_t00 = std::max(peak_t00, s.t00);
            if (s.v_defined) max_v = std::max(max_v, s.v.norm() / f.constants.c);
            any_superluminal = any_superluminal || s.v_superluminal;
        }
        const StressEnergySample crest =
            stress_energy_at(f, CylPoint{t_crest, ctx.r_peak, 0.0, 0.0}, cfg.averaging);

        json j;
        j["averaging"] = averaging_name(cfg.averaging);
        j["scan"] = {{"n", n_scan},
                     {"r_max", r_scan},
                     {"t", t_crest},
                     {"peak_t00", peak_t00},
                     {"max_v_over_c", max_v},
                     {"any_superluminal", any_superluminal}};
        j["crest"] = {{"r", ctx.r_peak},
                      {"t00", crest.t00},
                      {"p_theta", crest.p_theta},
                      {"v", {{"r", crest.v.r}, {"theta", crest.v.theta}, {"z", crest.v.z}}},
                      {"v_defined", crest.v_defined},
                      {"v_superluminal", crest.v_superluminal}};
        emit_json(ctx, "stress_energy.json", j);

        res.ok = !any_superluminal;
        res.verdict = "peak T00 " + fmt6(peak_t00) + ", max |v|/c " + fmt6(max_v) +
                      (any_superluminal ? ", superluminal: FOUND" : ", superluminal: none");
    });
}

void stage_surface(RunContext& ctx) {
    run_check(ctx, "surface", ctx.cfg.checks.surface, [&](CheckResult& res) {
        const FieldState& f = need_field(ctx);
        const ScenarioConfig& cfg = ctx.cfg;
        NaturalSurfaceMesh mesh = trace_band_mesh(cfg, f, ctx.r_peak);
        const SeamReport seam =
            seam_uniformity(mesh, f.alpha, cfg.grid.tol_natural_factor);

        export_mesh_csv(mesh, (ctx.out / "mesh.csv").string());
        ctx.manifest.files.push_back("mesh.csv");
        std::map<std::string, std::string> meta;
        meta["config_hash"] = ctx.manifest.config_hash;
        meta["units"] = "c=" + num_str(f.constants.c) +
                        " hbar=" + num_str(f.constants.hbar) +
                        " m=" + num_str(f.constants.m);
        meta["alpha"] = num_str(f.alpha);
        meta["averaging"] = averaging_name(mesh.averaging);
        export_mesh_json(mesh, (ctx.out / "mesh.json").string(), meta);
        ctx.manifest.files.push_back("mesh.json");

        std::string seam_csv = "r,z,seam_jump\n";
        const std::size_t nz = mesh.z_values.size();
        for (std::size_t ir = 0; ir < mesh.r_values.size(); ++ir)
            for (std::size_t iz = 0; iz < nz; ++iz)
                seam_csv += num_str(mesh.r_values[ir]) + ',' +
                            num_str(mesh.z_values[iz]) + ',' +
                            num_str(mesh.seam_jump[ir * nz + iz]) + '\n';
        emit_file(ctx, "seam.csv", seam_csv);

        json j;
        j["integrable"] = mesh.integrable;
        j["spacelike_ok"] = mesh.spacelike_ok;
        j["max_ct_grad"] = mesh.max_ct_grad;
        j["path_residual"] = mesh.path_residual;
        j["refine_residual"] = mesh.refine_residual;
        j["max_normal_deriv"] = mesh.max_normal_deriv;
        j["n_theta"] = mesh.n_theta;
        j["theta_seed"] = mesh.theta_seed;
        j["r_values"] = mesh.r_values;
        j["z_values"] = mesh.z_values;
        j["averaging"] = averaging_name(mesh.averaging);
        j["seam"] = {{"mean_jump", seam.mean_jump},
                     {"spread", seam.spread},
                     {"rel_spread", seam.rel_spread},
                     {"is_uniform", seam.is_uniform},
                     {"tol_used", seam.tol_used}};
        emit_json(ctx, "surface.json", j);

        if (cfg.preset == "mixed_l")
            res.ok = !seam.is_uniform;  // the expected physics: no uniform seam
        else if (!cfg.preset.empty())
            res.ok = seam.is_uniform && mesh.integrable && mesh.spacelike_ok;
        else
            res.ok = true;
        res.verdict = std::string("seam mean ") + fmt6(seam.mean_jump) +
                      ", rel spread " + fmt6(seam.rel_spread) +
                      ", uniform: " + (seam.is_uniform ? "yes" : "no") +
                      ", integrable: " + (mesh.integrable ? "yes" : "no") +
                      ", spacelike: " + (mesh.spacelike_ok ? "yes" : "no");
        ctx.mesh = std::move(mesh);
        ctx.seam = seam;
    });
}

void stage_variation(RunContext& ctx) {
    run_check(ctx, "variation", ctx.cfg.checks.variation, [&](CheckResult& res) {
        const FieldState& f = need_field(ctx);
        const ScenarioConfig& cfg = ctx.cfg;
        const double r_cap = ctx.r_support > 0.0 ? ctx.r_support : 1.5 * ctx.r_peak;
        const double tol_nat =
            std::max(cfg.grid.tol_natural_factor * f.alpha * f.alpha, 1e-6);

        SurfaceDomain probe;
        for (int i = 1; i <= 24; ++i) probe.r_values.push_back(r_cap * i / 24.0);
        probe.n_theta = 48;

        const double t_crest = crest_point(f, 0, ctx.r_peak, 0.0, 0.0).t;
        const double omega = f.modes.front().omega;
        const FlatSlice crest{t_crest, r_cap, cfg.grid.z_half, +1};
        const FlatSlice offset{t_crest + pi / (2.0 * omega), r_cap, cfg.grid.z_half, +1};

        const BoundaryInspection crest_free =
            classify_boundary(f, crest, probe, false, tol_nat);
        const BoundaryInspection offset_free =
            classify_boundary(f, offset, probe, false, tol_nat);
        const BoundaryInspection crest_pinned =
            classify_boundary(f, crest, probe, true, tol_nat);

        auto inspection_json = [](const char* surface, bool phi_fixed,
                                  const BoundaryInspection& b) {
            return json{{"surface", surface},
                        {"phi_fixed", phi_fixed},
                        {"kind", boundary_class_name(b.kind)},
                        {"max_normal_deriv", b.max_normal_deriv},
                        {"witness_term", b.witness_term},
                        {"tol_used", b.tol_used}};
        };
        json inspections = json::array();
        inspections.push_back(inspection_json("crest_slice", false, crest_free));
        inspections.push_back(inspection_json("quarter_period_slice", false, offset_free));
        inspections.push_back(inspection_json("crest_slice", true, crest_pinned));

        std::optional<BoundaryClass> mesh_kind;
        std::string mesh_note;
        if (ctx.mesh && ctx.mesh->spacelike_ok) {
            const BoundaryInspection on_mesh =
                classify_boundary(f, *ctx.mesh, false, tol_nat);
            inspections.push_back(inspection_json("traced_mesh", false, on_mesh));
            mesh_kind = on_mesh.kind;
        } else {
            mesh_note = ctx.mesh ? "traced mesh not spacelike; inspection skipped"
                                 : "no traced mesh (surface check not run)";
            inspections.push_back(json{{"surface", "traced_mesh"}, {"note", mesh_note}});
        }

        json j;
        j["tol_natural"] = tol_nat;
        j["r_cap"] = r_cap;
        j["inspections"] = std::move(inspections);
        emit_json(ctx, "variation.json", j);

        const bool crest_natural = crest_free.kind == BoundaryClass::natural_ncbc;
        const bool crest_moving = crest_free.kind == BoundaryClass::non_extremizing_ncbc;
        const bool offset_moving = offset_free.kind == BoundaryClass::non_extremizing_ncbc;
        const bool pinned_ok = crest_pinned.kind == BoundaryClass::coordinate_bc;
        const bool mesh_natural_if_any =
            !mesh_kind || *mesh_kind == BoundaryClass::natural_ncbc;
        if (cfg.preset == "uniform_oscillator")
            res.ok = crest_natural && offset_moving && pinned_ok && mesh_natural_if_any;
        else if (cfg.preset == "rotor_l")
            res.ok = crest_moving && pinned_ok && mesh_natural_if_any;
        else if (cfg.preset == "mixed_l")
            res.ok = crest_moving && pinned_ok;
        else
            res.ok = true;
        res.verdict = std::string("crest slice: ") + boundary_class_name(crest_free.kind) +
                      ", quarter-period slice: " + boundary_class_name(offset_free.kind) +
                      ", phi fixed: " + boundary_class_name(crest_pinned.kind) +
                      ", traced mesh: " +
                      (mesh_kind ? boundary_class_name(*mesh_kind) : "unavailable");
    });
}

void stage_quantization(RunContext& ctx) {
    run_check(ctx, "quantization", ctx.cfg.checks.quantization, [&](CheckResult& res) {
        const FieldState& f = need_field(ctx);
        const ScenarioConfig& cfg = ctx.cfg;
        if (!ctx.mesh) ctx.mesh = trace_band_mesh(cfg, f, ctx.r_peak);

        FieldState fq = f;
        if (cfg.normalize_energy_to)
            fq = normalize_for_chain(cfg, f, *ctx.mesh, *cfg.normalize_energy_to);
        const QuantizationReport rep = quantization_chain(
            fq, *ctx.mesh, quad_spec(cfg.grid), cfg.grid.closure_rel_tol);

        json j = json::parse(serialize_report(rep));
        j["normalized_energy_target"] =
            cfg.normalize_energy_to ? json(*cfg.normalize_energy_to) : json(nullptr);
        emit_json(ctx, "quantization.json", j);

        if (rep.flags.no_natural_surface) {
            res.verdict = "no natural surface (seam spread " + fmt6(rep.seam_spread) +
                          "); count withheld";
        } else {
            res.verdict = "n=" + std::to_string(rep.n_est) + " (residual " +
                          fmt6(rep.n_residual) + "), bs_ratio " + fmt6(rep.bs_ratio) +
                          ", E_tot " + fmt6(rep.E_tot) + ", L_z " + fmt6(rep.L_z) +
                          ", chain closed: " + (rep.chain_closed ? "yes" : "no");
        }
        if (cfg.preset == "uniform_oscillator")
            res.ok = rep.flags.quantized && rep.n_est == 0 && rep.chain_closed;
        else if (cfg.preset == "rotor_l")
            res.ok = rep.flags.quantized && rep.chain_closed &&
                     (cfg.params.k_z != 0.0 ||
                      rep.n_est == 2LL * static_cast<long long>(cfg.params.l));
        else if (cfg.preset == "mixed_l")
            res.ok = rep.flags.no_natural_surface;
        else
            res.ok = true;
    });
}

} // namespace

// ---------------------------------------------------------------------------
// Public API
// ---------------------------------------------------------------------------

std::vector<std::string> preset_names() {
    return {"uniform_oscillator", "rotor_l", "mixed_l"};
}

void ScenarioConfig::validate() const {
    constants.validate();
    if (name.empty())
        throw ValidationError("config: name must be nonempty");
    const bool has_preset = !preset.empty();
    const bool has_modes = !modes.empty();
    if (has_preset == has_modes)
        throw ValidationError(
            "config: exactly one of a preset or an explicit mode list is required");
    if (has_preset) {
        const auto names = preset_names();
        if (std::find(names.begin(), names.end(), preset) == names.end()) {
            std::string msg = "config: unknown preset \"" + preset + "\"; available:";
            for (const std::string& n : names) msg += " " + n;
            throw ValidationError(msg);
        }
        if (preset == "mixed_l" && params.l2 == params.l)
            throw ValidationError("config: mixed_l needs two distinct angular indices");
        if (preset != "uniform_oscillator") {
            if (!(params.alpha > 0.0) || !std::isfinite(params.alpha))
                throw ValidationError("config: preset_params.alpha must be positive");
            if (!(params.window_radius > 0.0))
                throw ValidationError("config: preset_params.window_radius must be positive");
        }
        for (double v : {params.amplitude, params.amplitude2, params.phase, params.k_z})
            if (!std::isfinite(v))
                throw ValidationError("config: preset_params must be finite");
    }
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const ModeConfig& m = modes[i];
        if (!std::isfinite(m.amplitude) || !std::isfinite(m.phase) ||
            !std::isfinite(m.axial_phase) || !std::isfinite(m.k_z) || !(m.k_r >= 0.0))
            throw ValidationError("config: modes[" + std::to_string(i) +
                                  "] has non-finite parameters");
        if (m.window) m.window->validate();
    }
    if (grid.surface_n_r < 2 || grid.surface_n_theta < 8 || grid.surface_n_z < 1)
        throw ValidationError("config: grid surface resolutions too small");
    if (!(grid.surface_band_lo > 0.0) || !(grid.surface_band_hi > grid.surface_band_lo))
        throw ValidationError("config: grid.surface_band needs 0 < lo < hi");
    if (!(grid.z_half > 0.0))
        throw ValidationError("config: grid.z_half must be positive");
    if (!(grid.trace_rel_tol > 0.0))
        throw ValidationError("config: grid.trace_rel_tol must be positive");
    if (grid.quad_n_r < 2 || grid.quad_n_theta < 4 || grid.quad_n_z < 1)
        throw ValidationError("config: grid quadrature resolutions too small");
    if (grid.kge_points < 1)
        throw ValidationError("config: grid.kge_points must be at least 1");
    if (!(grid.tol_natural_factor > 0.0))
        throw ValidationError("config: grid.tol_natural_factor must be positive");
    if (!(grid.closure_rel_tol > 0.0))
        throw ValidationError("config: grid.closure_rel_tol must be positive");
    if (normalize_energy_to &&
        (!(*normalize_energy_to > 0.0) || !std::isfinite(*normalize_energy_to)))
        throw ValidationError("config: normalize_energy_to must be positive");
}

ScenarioConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!root.is_object())
        throw ValidationError("config: top level must be an object");
    check_keys(root, "$",
               {"name", "constants", "preset", "preset_params", "modes", "checks", "grid",
                "output_dir", "seed", "averaging", "normalize_energy_to"});

    ScenarioConfig cfg;
    cfg.name = get_string(root, "$", "name", "scenario");

    if (const json* c = find(root, "constants")) {
        if (!c->is_object())
            throw ValidationError("config: constants must be an object");
        check_keys(*c, "$.constants", {"c", "hbar", "m"});
        cfg.constants.c = get_double(*c, "$.constants", "c", 1.0);
        cfg.constants.hbar = get_double(*c, "$.constants", "hbar", 1.0);
        cfg.constants.m = get_double(*c, "$.constants", "m", 1.0);
    }

    cfg.preset = get_string(root, "$", "preset", "");

    if (const json* p = find(root, "preset_params")) {
        if (!p->is_object())
            throw ValidationError("config: preset_params must be an object");
        check_keys(*p, "$.preset_params",
                   {"l", "l2", "alpha", "amplitude", "amplitude2", "phase", "k_z",
                    "window_radius", "windowed"});
        cfg.params.l = static_cast<int>(get_int(*p, "$.preset_params", "l", cfg.params.l));
        cfg.params.l2 =
            static_cast<int>(get_int(*p, "$.preset_params", "l2", cfg.params.l2));
        cfg.params.alpha = get_double(*p, "$.preset_params", "alpha", cfg.params.alpha);
        cfg.params.amplitude =
            get_double(*p, "$.preset_params", "amplitude", cfg.params.amplitude);
        cfg.params.amplitude2 =
            get_double(*p, "$.preset_params", "amplitude2", cfg.params.amplitude2);
        cfg.params.phase = get_double(*p, "$.preset_params", "phase", cfg.params.phase);
        cfg.params.k_z = get_double(*p, "$.preset_params", "k_z", cfg.params.k_z);
        cfg.params.window_radius =
            get_double(*p, "$.preset_params", "window_radius", cfg.params.window_radius);
        cfg.params.windowed =
            get_bool(*p, "$.preset_params", "windowed", cfg.params.windowed);
    }

    if (const json* ms = find(root, "modes")) {
        if (!ms->is_array())
            throw ValidationError("config: modes must be an array");
        for (std::size_t i = 0; i < ms->size(); ++i) {
            const json& mj = (*ms)[i];
            const std::string path = "$.modes[" + std::to_string(i) + "]";
            if (!mj.is_object())
                throw ValidationError("config: " + path + " must be an object");
            check_keys(mj, path,
                       {"amplitude", "l", "k_r", "k_z", "phase", "axial_phase", "window"});
            ModeConfig m;
            m.amplitude = get_double(mj, path, "amplitude", 1.0);
            m.l = static_cast<int>(get_int(mj, path, "l", 0));
            m.k_r = get_double(mj, path, "k_r", 0.0);
            m.k_z = get_double(mj, path, "k_z", 0.0);
            m.phase = get_double(mj, path, "phase", 0.0);
            m.axial_phase = get_double(mj, path, "axial_phase", 0.0);
            if (const json* w = find(mj, "window"))
                m.window = parse_window(*w, path + ".window");
            cfg.modes.push_back(std::move(m));
        }
    }

    if (const json* ck = find(root, "checks")) {
        if (!ck->is_object())
            throw ValidationError("config: checks must be an object");
        check_keys(*ck, "$.checks", {"kge", "variation", "surface", "quantization"});
        cfg.checks.kge = get_bool(*ck, "$.checks", "kge", true);
        cfg.checks.variation = get_bool(*ck, "$.checks", "variation", true);
        cfg.checks.surface = get_bool(*ck, "$.checks", "surface", true);
        cfg.checks.quantization = get_bool(*ck, "$.checks", "quantization", true);
    }

    // Preset-dependent grid defaults, then explicit overrides on top.  The
    // mixed preset's default radial band straddles the crossover between its
    // two modes' angular dominance (in units of the crest radius of the
    // leading mode), where the seam cannot be uniform; its trace tolerance is
    // relaxed because the flow there is genuinely non-integrable.
    if (cfg.preset == "mixed_l") {
        const double fm = bessel::first_max(std::abs(cfg.params.l));
        cfg.grid.surface_n_r = 5;
        cfg.grid.surface_n_theta = 48;
        cfg.grid.trace_rel_tol = 1e-7;
        cfg.grid.surface_band_lo = 1.8 / fm;
        cfg.grid.surface_band_hi = 3.4 / fm;
    }
    if (const json* g = find(root, "grid")) {
        if (!g->is_object())
            throw ValidationError("config: grid must be an object");
        check_keys(*g, "$.grid",
                   {"surface_n_r", "surface_n_theta", "surface_n_z", "surface_band",
                    "z_half", "trace_rel_tol", "quad_n_r", "quad_n_theta", "quad_n_z",
                    "kge_points", "tol_natural_factor", "closure_rel_tol", "exec"});
        cfg.grid.surface_n_r = static_cast<int>(
            get_int(*g, "$.grid", "surface_n_r", cfg.grid.surface_n_r));
        cfg.grid.surface_n_theta = static_cast<int>(
            get_int(*g, "$.grid", "surface_n_theta", cfg.grid.surface_n_theta));
        cfg.grid.surface_n_z = static_cast<int>(
            get_int(*g, "$.grid", "surface_n_z", cfg.grid.surface_n_z));
        if (const json* band = find(*g, "surface_band")) {
            if (!band->is_array() || band->size() != 2 || !(*band)[0].is_number() ||
                !(*band)[1].is_number())
                throw ValidationError(
                    "config: $.grid.surface_band must be a [lo, hi] number pair");
            cfg.grid.surface_band_lo = (*band)[0].get<double>();
            cfg.grid.surface_band_hi = (*band)[1].get<double>();
        }
        cfg.grid.z_half = get_double(*g, "$.grid", "z_half", cfg.grid.z_half);
        cfg.grid.trace_rel_tol =
            get_double(*g, "$.grid", "trace_rel_tol", cfg.grid.trace_rel_tol);
        cfg.grid.quad_n_r =
            static_cast<int>(get_int(*g, "$.grid", "quad_n_r", cfg.grid.quad_n_r));
        cfg.grid.quad_n_theta = static_cast<int>(
            get_int(*g, "$.grid", "quad_n_theta", cfg.grid.quad_n_theta));
        cfg.grid.quad_n_z =
            static_cast<int>(get_int(*g, "$.grid", "quad_n_z", cfg.grid.quad_n_z));
        cfg.grid.kge_points =
            static_cast<int>(get_int(*g, "$.grid", "kge_points", cfg.grid.kge_points));
        cfg.grid.tol_natural_factor =
            get_double(*g, "$.grid", "tol_natural_factor", cfg.grid.tol_natural_factor);
        cfg.grid.closure_rel_tol =
            get_double(*g, "$.grid", "closure_rel_tol", cfg.grid.closure_rel_tol);
        if (const json* e = find(*g, "exec")) {
            if (!e->is_string())
                throw ValidationError("config: $.grid.exec must be a string");
            cfg.grid.exec = parse_exec(e->get<std::string>(), "$.grid.exec");
        }
    }

    cfg.output_dir = get_string(root, "$", "output_dir", "");
    if (const json* s = find(root, "seed")) {
        if (!s->is_number_unsigned())
            throw ValidationError("config: $.seed must be an unsigned integer");
        cfg.seed = s->get<unsigned long>();
    }
    if (const json* a = find(root, "averaging")) {
        if (!a->is_string())
            throw ValidationError("config: $.averaging must be a string");
        cfg.averaging = parse_averaging(a->get<std::string>(), "$.averaging");
    }
    if (const json* nt = find(root, "normalize_energy_to")) {
        if (!nt->is_number())
            throw ValidationError("config: $.normalize_energy_to must be a number or null");
        cfg.normalize_energy_to = nt->get<double>();
    }

    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    return parse_config(read_text(path));
}

std::string canonical_config_json(const ScenarioConfig& config) {
    return config_json(config).dump(2) + "\n";
}

std::string config_hash(const ScenarioConfig& config) {
    json j = config_json(config);
    j["output_dir"] = "";  // where results land must not change what they are
    return fnv1a_hex(j.dump());
}

FieldState build_scenario_field(const ScenarioConfig& config) {
    config.validate();
    const PresetParams& p = config.params;
    if (config.preset == "uniform_oscillator")
        return make_uniform_oscillator(config.constants, p.amplitude, p.phase);
    if (config.preset == "rotor_l" || config.preset == "mixed_l") {
        const double k_r = p.alpha * config.constants.compton_k();
        std::optional<RadialWindow> window;
        if (p.windowed) {
            RadialWindow w;
            w.outer_start = (2.0 / 3.0) * p.window_radius / k_r;
            w.outer_len = (1.0 / 3.0) * p.window_radius / k_r;
            window = w;
        }
        if (config.preset == "rotor_l")
            return make_rotor(p.l, p.alpha, config.constants, p.amplitude, window, p.k_z);
        return make_mixed(p.l, p.l2, p.alpha, config.constants, p.amplitude, p.amplitude2,
                          window);
    }
    std::vector<CylindricalMode> modes;
    for (const ModeConfig& mc : config.modes) {
        CylindricalMode m;
        m.amplitude = mc.amplitude;
        m.l = mc.l;
        m.k_r = mc.k_r;
        m.k_z = mc.k_z;
        m.phase = mc.phase;
        m.axial_phase = mc.axial_phase;
        m.window = mc.window;
        modes.push_back(std::move(m));
    }
    return build_field(config.constants, std::move(modes));
}

double crest_radius(const FieldState& field) {
    const CylindricalMode& m = field.modes.front();
    if (!(m.k_r > 0.0)) return 1.0 / field.constants.compton_k();
    return bessel::first_max(std::abs(m.l)) / m.k_r;
}

bool RunManifest::all_ok() const {
    for (const CheckResult& c : checks)
        if (!c.ok) return false;
    return !checks.empty();
}

RunManifest run_scenario(const ScenarioConfig& config) {
    config.validate();
    RunContext ctx{config, resolve_output_dir(config), {}, {}, {}, {}, 0.0, 0.0};
    fs::create_directories(ctx.out);

    ctx.manifest.config_hash = config_hash(config);
    ctx.manifest.tool_version = tool_version;
    ctx.manifest.kind = "run";
    ctx.manifest.started_at = iso_utc_now();
    ctx.manifest.output_dir = ctx.out.string();

    emit_file(ctx, "config.json", canonical_config_json(config));

    stage_field(ctx);
    stage_kge(ctx);
    stage_stress_energy(ctx);
    stage_surface(ctx);
    stage_variation(ctx);
    stage_quantization(ctx);

    ctx.manifest.finished_at = iso_utc_now();
    write_manifest(ctx.manifest, (ctx.out / "manifest.json").string());
    return ctx.manifest;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    json checks = json::array();
    for (const CheckResult& c : manifest.checks)
        checks.push_back(json{{"name", c.name},
                              {"ok", c.ok},
                              {"verdict", c.verdict},
                              {"error", c.error}});
    json j;
    j["config_hash"] = manifest.config_hash;
    j["tool_version"] = manifest.tool_version;
    j["kind"] = manifest.kind;
    j["started_at"] = manifest.started_at;
    j["finished_at"] = manifest.finished_at;
    j["output_dir"] = manifest.output_dir;
    j["files"] = manifest.files;
    j["checks"] = std::move(checks);
    j["ok"] = manifest.all_ok();
    write_text(path, j.dump(2) + "\n");
}

RunManifest read_manifest(const std::string& path) {
    json root;
    try {
        root = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("manifest: not valid JSON: ") + e.what());
    }
    if (!root.is_object())
        throw ValidationError("manifest: top level must be an object");
    check_keys(root, "$",
               {"config_hash", "tool_version", "kind", "started_at", "finished_at",
                "output_dir", "files", "checks", "ok"});
    RunManifest m;
    m.config_hash = get_string(root, "$", "config_hash", "");
    m.tool_version = get_string(root, "$", "tool_version", "");
    m.kind = get_string(root, "$", "kind", "run");
    m.started_at = get_string(root, "$", "started_at", "");
    m.finished_at = get_string(root, "$", "finished_at", "");
    m.output_dir = get_string(root, "$", "output_dir", "");
    if (const json* files = find(root, "files")) {
        if (!files->is_array())
            throw ValidationError("manifest: files must be an array");
        for (const json& f : *files) {
            if (!f.is_string())
                throw ValidationError("manifest: files entries must be strings");
            m.files.push_back(f.get<std::string>());
        }
    }
    if (const json* checks = find(root, "checks")) {
        if (!checks->is_array())
            throw ValidationError("manifest: checks must be an array");
        for (std::size_t i = 0; i < checks->size(); ++i) {
            const json& cj = (*checks)[i];
            const std::string path_i = "$.checks[" + std::to_string(i) + "]";
            if (!cj.is_object())
                throw ValidationError("manifest: " + path_i + " must be an object");
            check_keys(cj, path_i, {"name", "ok", "verdict", "error"});
            CheckResult c;
            c.name = get_string(cj, path_i, "name", "");
            c.ok = get_bool(cj, path_i, "ok", false);
            c.verdict = get_string(cj, path_i, "verdict", "");
            c.error = get_string(cj, path_i, "error", "");
            m.checks.push_back(std::move(c));
        }
    }
    return m;
}

int SweepResult::error_count() const {
    int n = 0;
    for (const SweepRow& r : rows)
        if (!r.ok) ++n;
    return n;
}

namespace {

void apply_sweep_value(ScenarioConfig& cfg, const std::string& parameter, double v) {
    if (parameter == "l") {
        if (!std::isfinite(v) || v != std::nearbyint(v) || std::abs(v) > 1e6)
            throw ValidationError("sweep: l must be an integer, got " + num_str(v));
        cfg.params.l = static_cast<int>(v);
    } else if (parameter == "alpha") {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ValidationError("sweep: alpha must be positive, got " + num_str(v));
        cfg.params.alpha = v;
    } else {
        if (!std::isfinite(v) || v == 0.0)
            throw ValidationError("sweep: amplitude must be nonzero, got " + num_str(v));
        cfg.params.amplitude = v;
    }
}

} // namespace

SweepResult sweep(const ScenarioConfig& config, const std::string& parameter,
                  const std::vector<double>& values) {
    config.validate();
    if (config.preset.empty())
        throw ValidationError("sweep: requires a preset scenario");
    if (values.empty())
        throw ValidationError("sweep: values list is empty");
    if (parameter == "l") {
        if (config.preset != "rotor_l")
            throw ValidationError("sweep: parameter l applies to the rotor_l preset only");
    } else if (parameter == "alpha") {
        if (config.preset == "uniform_oscillator")
            throw ValidationError(
                "sweep: parameter alpha does not apply to uniform_oscillator");
    } else if (parameter != "amplitude") {
        throw ValidationError("sweep: unknown parameter \"" + parameter +
                              "\" (expected l, alpha or amplitude)");
    }

    SweepResult result;
    result.parameter = parameter;
    const fs::path out = resolve_output_dir(config);
    fs::create_directories(out);

    RunManifest& manifest = result.manifest;
    manifest.config_hash = config_hash(config);
    manifest.tool_version = tool_version;
    manifest.kind = "sweep";
    manifest.started_at = iso_utc_now();
    manifest.output_dir = out.string();

    write_text(out / "config.json", canonical_config_json(config));
    manifest.files.push_back("config.json");

    std::string csv =
        "parameter,value,n_est,n_residual,bs_ratio,lz_mc2_over_e_hbar,flags,error\n";
    for (double v : values) {
        SweepRow row;
        row.value = v;
        CheckResult check;
        check.name = parameter + "=" + num_str(v);
        try {
            ScenarioConfig c = config;
            apply_sweep_value(c, parameter, v);
            c.validate();
            const FieldState field = build_scenario_field(c);
            const double r_peak = crest_radius(field);
            const NaturalSurfaceMesh mesh = trace_band_mesh(c, field, r_peak);
            FieldState fq = field;
            if (c.normalize_energy_to)
                fq = normalize_for_chain(c, field, mesh, *c.normalize_energy_to);
            row.report =
                quantization_chain(fq, mesh, quad_spec(c.grid), c.grid.closure_rel_tol);
            row.ok = true;
            if (row.report.flags.no_natural_surface) row.flags = "no_natural_surface";
            if (row.report.flags.relativistic)
                row.flags += (row.flags.empty() ? "" : ";") + std::string("relativistic");
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }

        std::string n_cell, res_cell, bs_cell, lz_cell;
        if (row.ok) {
            bs_cell = num_str(row.report.bs_ratio);
            if (row.report.E_tot > 0.0) {
                const PhysicalConstants& pc = config.constants;
                lz_cell = num_str(row.report.L_z * pc.m * pc.c * pc.c /
                                  (row.report.E_tot * pc.hbar));
            }
            if (!row.report.flags.no_natural_surface) {
                n_cell = std::to_string(row.report.n_est);
                res_cell = num_str(row.report.n_residual);
            }
            check.ok = true;
            check.verdict = row.report.flags.no_natural_surface
                                ? "no natural surface"
                                : "n_est=" + n_cell + ", n_residual=" +
                                      fmt6(row.report.n_residual) + ", bs_ratio=" +
                                      fmt6(row.report.bs_ratio);
        } else {
            check.ok = false;
            check.error = row.error;
        }
        csv += parameter + ',' + num_str(v) + ',' + n_cell + ',' + res_cell + ',' +
               bs_cell + ',' + lz_cell + ',' + row.flags + ',' + csv_safe(row.error) +
               '\n';
        manifest.checks.push_back(std::move(check));
        result.rows.push_back(std::move(row));
    }

    const std::string csv_name = "sweep_" + parameter + ".csv";
    write_text(out / csv_name, csv);
    manifest.files.push_back(csv_name);
    result.csv_body = std::move(csv);
    result.csv_path = (out / csv_name).string();

    manifest.finished_at = iso_utc_now();
    write_manifest(manifest, (out / "manifest.json").string());
    return result;
}

namespace {

std::string surface_plot_script(const std::string& hash) {
    return "# corkscrew rendering of the traced natural hypersurface\n"
           "# config " + hash + "\n"
           "set datafile separator \",\"\n"
           "set title \"natural surface t'(x, y)\"\n"
           "set xlabel \"x\"\n"
           "set ylabel \"y\"\n"
           "set zlabel \"t'\"\n"
           "set view 62, 32\n"
           "set ticslevel 0\n"
           "splot \"mesh.csv\" every ::1 using ($1*cos($2)):($1*sin($2)):4 "
           "with points palette pointtype 7 pointsize 0.5 title \"t_surface\"\n"
           "pause -1 \"press enter to close\"\n";
}

std::string seam_plot_script(const std::string& hash) {
    return "# seam time-jump against radius (flat where the surface closes "
           "after n half-periods)\n"
           "# config " + hash + "\n"
           "set datafile separator \",\"\n"
           "set title \"seam jump vs radius\"\n"
           "set xlabel \"r\"\n"
           "set ylabel \"seam jump\"\n"
           "plot \"seam.csv\" every ::1 using 1:3 with linespoints pointtype 7 "
           "title \"seam jump\"\n"
           "pause -1 \"press enter to close\"\n";
}

std::string sweep_plot_script(const std::string& hash, const std::string& param,
                              const std::string& csv_name) {
    if (param == "alpha")
        return "# seam residual against alpha; the expected slope on the "
               "log-log axes is 2\n"
               "# config " + hash + "\n"
               "set datafile separator \",\"\n"
               "set logscale xy\n"
               "set title \"seam residual vs alpha\"\n"
               "set xlabel \"alpha\"\n"
               "set ylabel \"n residual\"\n"
               "plot \"" + csv_name + "\" every ::1 using 2:4 with linespoints "
               "pointtype 7 title \"n residual\"\n"
               "pause -1 \"press enter to close\"\n";
    return "# quantization outputs against " + param + "\n"
           "# config " + hash + "\n"
           "set datafile separator \",\"\n"
           "set title \"quantization vs " + param + "\"\n"
           "set xlabel \"" + param + "\"\n"
           "set ylabel \"value\"\n"
           "plot \"" + csv_name + "\" every ::1 using 2:3 with linespoints "
           "pointtype 7 title \"n_est\", \\\n"
           "     \"" + csv_name + "\" every ::1 using 2:5 with linespoints "
           "pointtype 5 title \"bs_ratio\"\n"
           "pause -1 \"press enter to close\"\n";
}

} // namespace

std::vector<std::string> emit_plots(const RunManifest& manifest, const std::string& dir) {
    const fs::path base(dir);
    if (!fs::is_directory(base))
        throw ValidationError("plot: output directory does not exist: " + dir);
    auto listed = [&](const std::string& name) {
        return std::find(manifest.files.begin(), manifest.files.end(), name) !=
               manifest.files.end();
    };
    auto require_data = [&](const std::string& name) {
        if (!fs::exists(base / name))
            throw ValidationError("plot: referenced data file missing: " +
                                  (base / name).string());
    };

    std::vector<std::string> written;
    std::vector<std::string> notes;

    if (listed("mesh.csv")) {
        require_data("mesh.csv");
        write_text(base / "plot_surface.gp", surface_plot_script(manifest.config_hash));
        written.push_back("plot_surface.gp");
    } else {
        notes.push_back("no mesh file in manifest; surface plot omitted");
    }
    if (listed("seam.csv")) {
        require_data("seam.csv");
        write_text(base / "plot_seam.gp", seam_plot_script(manifest.config_hash));
        written.push_back("plot_seam.gp");
    } else {
        notes.push_back("no seam series in manifest; seam plot omitted");
    }
    for (const std::string& f : manifest.files) {
        if (f.rfind("sweep_", 0) == 0 && f.size() > 10 &&
            f.compare(f.size() - 4, 4, ".csv") == 0) {
            require_data(f);
            const std::string param = f.substr(6, f.size() - 10);
            const std::string script = "plot_sweep_" + param + ".gp";
            write_text(base / script,
                       sweep_plot_script(manifest.config_hash, param, f));
            written.push_back(script);
        }
    }

    std::string notes_body = "plot scripts for config " + manifest.config_hash + "\n";
    for (const std::string& w : written) notes_body += "written: " + w + "\n";
    for (const std::string& n : notes) notes_body += "note: " + n + "\n";
    write_text(base / "plot_notes.txt", notes_body);
    written.push_back("plot_notes.txt");
    return written;
}

} // namespace kglab
