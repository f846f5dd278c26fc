#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "kglab/bessel.hpp"
#include "kglab/hypersurface.hpp"

using namespace kglab;

namespace {

constexpr double pi = std::numbers::pi;

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path tmp_path(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("loop time advance for a vortex flow matches 2 pi kappa / c^2") {
    const double kappa = 0.37;
    auto vortex = [&](const CylPoint& p) { return Vec3Cyl{0.0, kappa / p.r, 0.0}; };
    for (double r : {0.5, 1.0, 2.3}) {
        const double dt = trace_loop_velocity(vortex, 1.0, LoopSpec{r, 0.0, 0.0});
        CHECK(dt == doctest::Approx(2.0 * pi * kappa).epsilon(1e-12));
    }
    const double dt_c2 = trace_loop_velocity(vortex, 2.0, LoopSpec{1.4, 0.0, 0.0});
    CHECK(dt_c2 == doctest::Approx(2.0 * pi * kappa / 4.0).epsilon(1e-12));
}

TEST_CASE("loop time advance is linear and orientation-odd in the flow") {
    const double kappa = 0.21, Omega = 0.04;
    auto vortex = [&](const CylPoint& p) { return Vec3Cyl{0.0, kappa / p.r, 0.0}; };
    auto rigid = [&](const CylPoint& p) { return Vec3Cyl{0.0, Omega * p.r, 0.0}; };
    auto both = [&](const CylPoint& p) {
        return Vec3Cyl{0.0, kappa / p.r + Omega * p.r, 0.0};
    };
    auto minus = [&](const CylPoint& p) { return Vec3Cyl{0.0, -(kappa / p.r), 0.0}; };
    const LoopSpec loop{1.7, 0.0, 0.0};
    const double a = trace_loop_velocity(vortex, 1.0, loop);
    const double b = trace_loop_velocity(rigid, 1.0, loop);
    const double ab = trace_loop_velocity(both, 1.0, loop);
    CHECK(ab == doctest::Approx(a + b).epsilon(1e-12));
    CHECK(trace_loop_velocity(minus, 1.0, loop) == doctest::Approx(-a).epsilon(1e-12));
}

TEST_CASE("vortex flow traces an exact helicoid with a uniform seam") {
    const double kappa = 0.37;
    auto vortex = [&](const CylPoint& p) { return Vec3Cyl{0.0, kappa / p.r, 0.0}; };
    SurfaceDomain dom;
    dom.r_values = {0.8, 1.0, 1.2, 1.5, 2.0};
    dom.n_theta = 32;
    const CylPoint seed{0.1, 1.2, 0.5, 0.0};
    NaturalSurfaceMesh mesh = trace_surface_velocity(vortex, {}, seed, dom);

    for (std::size_t ir = 0; ir < dom.r_values.size(); ++ir) {
        for (int k = 0; k <= mesh.n_theta; ++k) {
            const double expect = seed.t + kappa * (mesh.theta_at(k) - seed.theta);
            CHECK(mesh.t_of_x[mesh.idx(ir, k, 0)] == doctest::Approx(expect).epsilon(1e-10));
        }
        CHECK(mesh.seam_jump[ir] == doctest::Approx(2.0 * pi * kappa).epsilon(1e-10));
        // dt/dl along theta is v_theta / c^2 = kappa / r
        CHECK(mesh.slope_theta[mesh.idx(ir, 5, 0)] ==
              doctest::Approx(kappa / dom.r_values[ir]).epsilon(1e-10));
    }
    CHECK(mesh.integrable);
    CHECK(mesh.spacelike_ok);
    CHECK(mesh.path_residual < 1e-9);
    CHECK(mesh.max_ct_grad == doctest::Approx(kappa / 0.8).epsilon(1e-6));

    SeamReport rep = seam_uniformity(mesh, 0.05);
    CHECK(rep.is_uniform);
    CHECK(rep.mean_jump == doctest::Approx(2.0 * pi * kappa).epsilon(1e-10));
    CHECK(rep.spread < 1e-9);
}

TEST_CASE("gradient flow with radial component still closes uniformly") {
    // v / c^2 = grad chi with chi = kappa theta + eps r sin theta: curl-free,
    // theta-dependent slopes, nonzero radial legs on the spokes.
    const double kappa = 0.3, eps = 0.1;
    auto flow = [&](const CylPoint& p) {
        return Vec3Cyl{eps * std::sin(p.theta), kappa / p.r + eps * std::cos(p.theta), 0.0};
    };
    SurfaceDomain dom;
    dom.r_values = {0.8, 1.1, 1.6};
    dom.n_theta = 32;
    const CylPoint seed{0.2, 1.2, 0.5, 0.0};
    NaturalSurfaceMesh mesh = trace_surface_velocity(flow, {}, seed, dom);

    auto chi = [&](double r, double theta) { return kappa * theta + eps * r * std::sin(theta); };
    for (std::size_t ir = 0; ir < dom.r_values.size(); ++ir) {
        for (int k = 0; k <= mesh.n_theta; ++k) {
            const double expect =
                seed.t + chi(dom.r_values[ir], mesh.theta_at(k)) - chi(seed.r, seed.theta);
            CHECK(mesh.t_of_x[mesh.idx(ir, k, 0)] == doctest::Approx(expect).epsilon(1e-8));
        }
        CHECK(mesh.seam_jump[ir] == doctest::Approx(2.0 * pi * kappa).epsilon(1e-9));
    }
    CHECK(mesh.integrable);
    CHECK(seam_uniformity(mesh, 0.05).is_uniform);
}

TEST_CASE("rigid rotation is flagged path-dependent with a non-uniform seam") {
    const double Omega = 0.05;
    auto rigid = [&](const CylPoint& p) { return Vec3Cyl{0.0, Omega * p.r, 0.0}; };
    SurfaceDomain dom;
    dom.r_values = {1.0, 1.4, 2.0};
    dom.n_theta = 16;
    NaturalSurfaceMesh mesh = trace_surface_velocity(rigid, {}, {0.0, 1.2, 0.0, 0.0}, dom);

    for (std::size_t ir = 0; ir < dom.r_values.size(); ++ir) {
        const double r = dom.r_values[ir];
        CHECK(mesh.seam_jump[ir] == doctest::Approx(2.0 * pi * Omega * r * r).epsilon(1e-9));
    }
    CHECK_FALSE(mesh.integrable);
    // alternate route reaches theta_seed + pi via the seed circle instead
    CHECK(mesh.path_residual ==
          doctest::Approx(pi * Omega * (2.0 * 2.0 - 1.2 * 1.2)).epsilon(1e-6));
    CHECK_FALSE(seam_uniformity(mesh, 0.05).is_uniform);
    CHECK(mesh.spacelike_ok);
}

TEST_CASE("flow at the speed of light trips the spacelike flag") {
    auto fast = [&](const CylPoint&) { return Vec3Cyl{0.0, 1.5, 0.0}; };
    SurfaceDomain dom;
    dom.r_values = {1.0};
    dom.n_theta = 16;
    NaturalSurfaceMesh mesh = trace_surface_velocity(fast, {}, {0.0, 1.0, 0.0, 0.0}, dom);
    CHECK(mesh.max_ct_grad == doctest::Approx(1.5));
    CHECK_FALSE(mesh.spacelike_ok);
}

TEST_CASE("rotor surface: helical, seam equal to the loop integral, near-silent normal derivative") {
    const double alpha = 0.05;
    FieldState field = make_rotor(1, alpha);
    const double r_peak = bessel::first_max(1) / alpha;
    SurfaceDomain dom;
    for (int i = 0; i < 9; ++i) dom.r_values.push_back((0.7 + 0.6 * i / 8.0) * r_peak);
    dom.n_theta = 96;
    const CylPoint seed = crest_point(field, 0, r_peak, 0.0, 0.0);
    NaturalSurfaceMesh mesh = trace_surface(field, seed, dom);

    CHECK(mesh.integrable);
    CHECK(mesh.spacelike_ok);

    // seam vs an independent fixed-time loop quadrature of the same flow
    for (std::size_t ir = 0; ir < dom.r_values.size(); ++ir) {
        const double loop_dt = trace_loop(field, LoopSpec{dom.r_values[ir], 0.0, 0.0});
        CHECK(mesh.seam_jump[ir] == doctest::Approx(loop_dt).epsilon(1e-9));
    }

    // static axisymmetric flow: t' is linear in theta on each circle
    for (int k = 0; k <= mesh.n_theta; ++k) {
        const double expect = mesh.t_of_x[mesh.idx(4, 0, 0)] +
                              mesh.seam_jump[4] * k / mesh.n_theta;
        CHECK(mesh.t_of_x[mesh.idx(4, k, 0)] == doctest::Approx(expect).epsilon(1e-9));
    }

    // one corkscrew turn advances time by ~ one rotation period: n = 2l
    const double omega0 = field.constants.omega0();
    const double bs = mesh.seam_jump[4] * omega0 / pi;
    CHECK(std::abs(bs - 2.0) <= 2.0 * 2.0 * alpha * alpha);

    SeamReport rep = seam_uniformity(mesh, alpha);
    CHECK(rep.is_uniform);
    CHECK(rep.rel_spread > 0.0);
    CHECK(rep.rel_spread <= 5.0 * alpha * alpha);

    // crest-following surface: normalized |dphi/deta| at the wave-zone level
    CHECK(mesh.max_normal_deriv > 0.0);
    CHECK(mesh.max_normal_deriv <= 5.0 * alpha * alpha);

    // a flat slice through the same region is loud by comparison
    NormalDerivativeProfile flat =
        normal_derivative_profile(field, FlatSlice{0.0, 1.3 * r_peak, 0.5, +1}, dom);
    CHECK(flat.max_abs >= 0.1);
}

TEST_CASE("uniform oscillator surface is the flat crest slice") {
    FieldState field = make_uniform_oscillator();
    SurfaceDomain dom;
    dom.r_values = {0.5, 1.0, 2.0};
    dom.n_theta = 16;
    NaturalSurfaceMesh mesh = trace_surface(field, {0.0, 1.0, 0.0, 0.0}, dom);
    for (double t : mesh.t_of_x) CHECK(std::abs(t) < 1e-14);
    for (double j : mesh.seam_jump) CHECK(std::abs(j) < 1e-14);
    CHECK(mesh.integrable);
    CHECK(seam_uniformity(mesh, 0.0).is_uniform);
    CHECK(mesh.max_normal_deriv < 1e-12);
}

TEST_CASE("equal-frequency l=1 + l=2 mix leaves no single natural surface") {
    // The loop advance locks onto the winding number of the superposed
    // amplitude A1 J1 e^{i theta} + A2 J2 e^{2 i theta}: ~2 pi / omega where
    // J1 dominates and ~4 pi / omega where J2 does.  A domain spanning both
    // first peaks straddles the J1 = J2 crossover, where the seam sweeps
    // continuously between those plateaus -- no uniform gap exists.
    const double alpha = 0.05;
    FieldState field = make_mixed(1, 2, alpha);
    SurfaceDomain dom;
    for (double x : {1.8, 2.2, 2.6, 3.0, 3.4}) dom.r_values.push_back(x / alpha);
    dom.n_theta = 48;
    TraceOptions opts;
    opts.rel_tol = 1e-7;
    const double r_seed = bessel::first_max(1) / alpha;
    const CylPoint seed = crest_point(field, 0, r_seed, 0.0, 0.0);
    NaturalSurfaceMesh mesh = trace_surface(field, seed, dom, opts);
    SeamReport rep = seam_uniformity(mesh, alpha);
    CHECK_FALSE((mesh.integrable && rep.is_uniform));
    CHECK(rep.rel_spread > 5.0 * alpha * alpha);
    // the two ends of the domain really do sit on different plateaus
    const double omega0 = field.constants.omega0();
    CHECK(mesh.seam_jump.front() * omega0 / pi == doctest::Approx(2.0).epsilon(0.02));
    CHECK(mesh.seam_jump.back() * omega0 / pi == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("surface seed away from a crest is rejected") {
    FieldState field = make_rotor(1, 0.05);
    SurfaceDomain dom;
    dom.r_values = {bessel::first_max(1) / 0.05};
    dom.n_theta = 16;
    CHECK_THROWS_AS(trace_surface(field, {0.3, dom.r_values[0], 0.0, 0.0}, dom),
                    ValidationError);
}

TEST_CASE("loop through the windowed-out vacuum reports the dead region") {
    const double alpha = 0.05;
    FieldState field = make_rotor(1, alpha, {}, 1.0, default_rotor_window(alpha));
    CHECK_THROWS_AS(trace_loop(field, LoopSpec{13.0 / alpha, 0.0, 0.0}), VacuumRegionError);
}

TEST_CASE("mesh CSV export is deterministic; JSON round-trips bit-identically") {
    const double kappa = 0.25;
    auto vortex = [&](const CylPoint& p) { return Vec3Cyl{0.0, kappa / p.r, 0.0}; };
    SurfaceDomain dom;
    dom.r_values = {0.9, 1.3};
    dom.n_theta = 8;
    NaturalSurfaceMesh mesh = trace_surface_velocity(vortex, {}, {0.0, 1.0, 0.0, 0.0}, dom);

    const auto csv_a = tmp_path("kglab_mesh_a.csv"), csv_b = tmp_path("kglab_mesh_b.csv");
    export_mesh_csv(mesh, csv_a.string());
    export_mesh_csv(mesh, csv_b.string());
    const std::string body_a = slurp(csv_a);
    CHECK(body_a == slurp(csv_b));
    CHECK(body_a.rfind("r,theta,z,t_surface,seam_flag\n", 0) == 0);
    CHECK(std::count(body_a.begin(), body_a.end(), '\n') ==
          1 + static_cast<long>(dom.r_values.size() * (dom.n_theta + 1)));

    const auto js_a = tmp_path("kglab_mesh_a.json"), js_b = tmp_path("kglab_mesh_b.json");
    export_mesh_json(mesh, js_a.string(), {{"scenario", "vortex-test"}});
    NaturalSurfaceMesh back = import_mesh_json(js_a.string());
    REQUIRE(back.t_of_x.size() == mesh.t_of_x.size());
    for (std::size_t i = 0; i < mesh.t_of_x.size(); ++i)
        CHECK(back.t_of_x[i] == mesh.t_of_x[i]);  // exact, not approximate
    CHECK(back.seam_jump == mesh.seam_jump);
    CHECK(back.path_residual == mesh.path_residual);
    export_mesh_json(back, js_b.string(), {{"scenario", "vortex-test"}});
    CHECK(slurp(js_a) == slurp(js_b));

    std::filesystem::remove(csv_a);
    std::filesystem::remove(csv_b);
    std::filesystem::remove(js_a);
    std::filesystem::remove(js_b);
}
