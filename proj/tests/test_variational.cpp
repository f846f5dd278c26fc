#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kglab/bessel.hpp"
#include "kglab/field.hpp"
#include "kglab/variational.hpp"

using namespace kglab;

namespace {

constexpr double pi = std::numbers::pi;

ParticleScenario harmonic_scenario(double mass, double k, double A, double phi0,
                                   double t0, double t1) {
    const double Om = std::sqrt(k / mass);
    ParticleScenario s;
    s.mass = mass;
    s.potential = Potential{PotentialKind::harmonic, k, 0.0};
    s.path = analytic_trajectory(
        [A, Om, phi0](double t) { return A * std::cos(Om * t + phi0); },
        [A, Om, phi0](double t) { return -A * Om * std::sin(Om * t + phi0); },
        [A, Om, phi0](double t) { return -A * Om * Om * std::cos(Om * t + phi0); });
    s.t0 = t0;
    s.t1 = t1;
    return s;
}

ParticleScenario free_line(double x0, double v0, double t0, double t1) {
    ParticleScenario s;
    s.path = analytic_trajectory([x0, v0](double t) { return x0 + v0 * t; },
                                 [v0](double) { return v0; }, [](double) { return 0.0; });
    s.t0 = t0;
    s.t1 = t1;
    return s;
}

} // namespace

// ---------------------------------------------------------------------------
// Particle action values
// ---------------------------------------------------------------------------

TEST_CASE("free particle action is kinetic energy times elapsed time") {
    ParticleScenario s = free_line(0.3, 2.0, 0.0, 1.0);
    CHECK(particle_action(s) == doctest::Approx(2.0).epsilon(1e-12));

    ParticleScenario rest = free_line(5.0, 0.0, 0.0, 1.0);
    CHECK(particle_action(rest) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("harmonic oscillator action matches the closed form") {
    const double m = 1.0, k = 4.0, A = 1.3, phi0 = 0.4, T = 0.9;
    const double Om = 2.0;
    ParticleScenario s = harmonic_scenario(m, k, A, phi0, 0.0, T);
    // On-shell the Lagrangian is -(k A^2 / 2) cos(2(Om t + phi0)); integrating
    // gives the closed form below.
    const double expect =
        -(m * A * A * Om / 4.0) * (std::sin(2.0 * (Om * T + phi0)) - std::sin(2.0 * phi0));
    CHECK(particle_action(s) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("action of a sampled path converges to the analytic value") {
    const double m = 1.0, k = 4.0, A = 1.0, phi0 = 0.3;
    ParticleScenario exact = harmonic_scenario(m, k, A, phi0, 0.0, 1.0);
    const double s_exact = particle_action(exact);

    auto sampled = [&](int n) {
        std::vector<double> t, x;
        for (int i = 0; i <= n; ++i) {
            const double ti = static_cast<double>(i) / n;
            t.push_back(ti);
            x.push_back(A * std::cos(2.0 * ti + phi0));
        }
        ParticleScenario s = exact;
        s.path = spline_trajectory(t, x);
        return s;
    };

    const double e200 = std::abs(particle_action(sampled(200)) - s_exact);
    const double e400 = std::abs(particle_action(sampled(400)) - s_exact);
    CHECK(e200 < 1e-5);
    CHECK(e400 < e200 / 2.0);
}

TEST_CASE("spline trajectory reproduces a straight line exactly") {
    std::vector<double> t, x;
    for (int i = 0; i <= 10; ++i) {
        t.push_back(0.1 * i);
        x.push_back(1.0 + 2.0 * (0.1 * i));
    }
    Trajectory tr = spline_trajectory(t, x);
    CHECK(tr.x(0.37) == doctest::Approx(1.74).epsilon(1e-13));
    CHECK(tr.v(0.63) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(tr.a(0.5) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(tr.knots.size() == 9);
}

TEST_CASE("trajectory and scenario validation reject bad input") {
    CHECK_THROWS_AS(spline_trajectory({0.0, 1.0}, {0.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(spline_trajectory({0.0, 1.0, 0.5}, {0.0, 1.0, 2.0}), ValidationError);
    CHECK_THROWS_AS(spline_trajectory({0.0, 0.5, 1.0}, {0.0, std::nan(""), 1.0}),
                    ValidationError);
    CHECK_THROWS_AS(analytic_trajectory(nullptr, nullptr, nullptr), ValidationError);
    CHECK_THROWS_AS(bump_variation(0.5, 0.5, 1.0), ValidationError);

    ParticleScenario s = free_line(0.0, 1.0, 0.0, 1.0);
    s.mass = -1.0;
    CHECK_THROWS_AS(particle_action(s), ValidationError);
    s.mass = 1.0;
    s.t1 = s.t0;
    CHECK_THROWS_AS(particle_action(s), ValidationError);
}

TEST_CASE("declared endpoint data are checked against the trajectory") {
    ParticleScenario s = free_line(0.0, 2.0, 0.0, 1.0);
    s.start = {EndpointCondition::Kind::position_fixed, 0.0};
    s.end = {EndpointCondition::Kind::velocity_fixed, 2.0};
    CHECK_NOTHROW(particle_action(s));

    s.end.pinned = 3.0;  // path has v(t1) = 2, not 3
    CHECK_THROWS_AS(particle_action(s), ValidationError);
}

// ---------------------------------------------------------------------------
// First variation: Euler-Lagrange bulk and endpoint terms
// ---------------------------------------------------------------------------

TEST_CASE("equation-of-motion paths null the bulk term for every admissible variation") {
    std::vector<ParticleScenario> on_shell;
    on_shell.push_back(free_line(0.3, 2.0, 0.0, 1.0));
    on_shell.push_back(harmonic_scenario(1.0, 4.0, 1.0, 0.3, 0.0, 1.5));
    {
        // V = g x: x(t) = x0 + v0 t - (g / 2m) t^2
        const double g = 3.0, m = 2.0, x0 = 0.1, v0 = 1.0;
        ParticleScenario s;
        s.mass = m;
        s.potential = Potential{PotentialKind::linear, 0.0, g};
        s.path = analytic_trajectory(
            [=](double t) { return x0 + v0 * t - 0.5 * (g / m) * t * t; },
            [=](double t) { return v0 - (g / m) * t; }, [=](double) { return -g / m; });
        s.t0 = 0.0;
        s.t1 = 1.2;
        on_shell.push_back(s);
    }

    for (ParticleScenario& s : on_shell) {
        s.start.kind = EndpointCondition::Kind::position_fixed;
        s.end.kind = EndpointCondition::Kind::velocity_fixed;
        const auto family = variation_family(s, 21, 1234u);
        bool saw_moving_endpoint = false;
        for (const ParticleVariation& var : family) {
            const FirstVariation fv = particle_first_variation(s, var);
            CHECK(std::abs(fv.bulk) < 5e-10);
            CHECK(std::abs(var.ddelta(s.t1)) < 1e-12);  // velocity pin preserved
            if (std::abs(var.delta(s.t1)) > 0.1) saw_moving_endpoint = true;
        }
        CHECK(saw_moving_endpoint);  // the family exercises the free endpoint
    }
}

TEST_CASE("sampled equation-of-motion paths keep their variational character") {
    const double A = 1.0, phi0 = 0.2, Om = 2.0;
    ParticleScenario base = harmonic_scenario(1.0, 4.0, A, phi0, 0.0, 1.0);

    auto sampled = [&](int n) {
        std::vector<double> t, x;
        for (int i = 0; i <= n; ++i) {
            const double ti = static_cast<double>(i) / n;
            t.push_back(ti);
            x.push_back(A * std::cos(Om * ti + phi0));
        }
        return spline_trajectory(t, x);
    };

    // Pointwise, the sampled acceleration misses by O(h^2): quarter the
    // error when the sampling is twice as fine.
    auto acc_err = [&](const Trajectory& tr, int n) {
        double worst = 0.0;
        for (int i = n / 4; i < 3 * n / 4; ++i) {
            const double tm = (i + 0.5) / n;
            worst = std::max(worst,
                             std::abs(tr.a(tm) + A * Om * Om * std::cos(Om * tm + phi0)));
        }
        return worst;
    };
    const double e200 = acc_err(sampled(200), 200);
    const double e400 = acc_err(sampled(400), 400);
    CHECK(e200 > 1e-6);
    const double ratio = e200 / e400;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);

    // Weakly the residual cancels much further: its oscillatory part has
    // near-zero mean per interval, so against a smooth variation the bulk
    // term sits at quadrature noise even at modest sampling.
    ParticleScenario s = base;
    s.path = sampled(200);
    const ParticleVariation var = bump_variation(0.3, 0.7, 1.0);
    CHECK(std::abs(particle_first_variation(s, var).bulk) < 1e-10);
}

TEST_CASE("free endpoint contributes m v delta x to the first variation") {
    ParticleScenario s = free_line(0.0, 2.0, 0.0, 1.0);
    s.start = {EndpointCondition::Kind::position_fixed, 0.0};
    s.end = {EndpointCondition::Kind::velocity_fixed, 2.0};

    const ParticleVariation ramp = ramp_variation(s.t0, s.t1, 1.0, true);
    CHECK(ramp.delta(s.t1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ramp.delta(s.t0) == 0.0);
    CHECK(std::abs(ramp.ddelta(s.t1)) < 1e-14);

    const FirstVariation fv = particle_first_variation(s, ramp);
    CHECK(std::abs(fv.bulk) < 1e-12);
    CHECK(fv.boundary == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fv.total() == doctest::Approx(2.0).epsilon(1e-12));

    // Finite difference agrees: S(eps) - S = eps * m v delta + O(eps^2).
    const double s0 = particle_action(s);
    const double eps = 1e-4;
    const double s1 = particle_action(perturbed(s, ramp, eps), 1e-12);
    CHECK((s1 - s0) / eps == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("turning-point endpoints extremize with no condition on the variation") {
    // x = A cos(Om t) on [0, pi/Om]: the velocity vanishes at both ends, so
    // the endpoint term m v delta x dies for every variation, pinned or not.
    const double A = 0.8, k = 4.0, Om = 2.0;
    ParticleScenario s = harmonic_scenario(1.0, k, A, 0.0, 0.0, pi / Om);
    s.start = {EndpointCondition::Kind::velocity_fixed, 0.0};
    s.end = {EndpointCondition::Kind::velocity_fixed, 0.0};

    for (const ParticleVariation& var : variation_family(s, 12, 77u)) {
        const FirstVariation fv = particle_first_variation(s, var);
        CHECK(std::abs(fv.boundary) < 1e-12);
        CHECK(std::abs(fv.total()) < 5e-10);
    }
}

TEST_CASE("variations that move a pinned position are rejected") {
    ParticleScenario s = free_line(0.0, 2.0, 0.0, 1.0);
    s.start.kind = EndpointCondition::Kind::position_fixed;
    s.end.kind = EndpointCondition::Kind::position_fixed;
    const ParticleVariation ramp = ramp_variation(s.t0, s.t1, 1.0, true);
    CHECK_THROWS_AS(particle_first_variation(s, ramp), ValidationError);
}

TEST_CASE("first variation matches finite differences to second order") {
    // Off-shell path x = t^3 in a harmonic well; V''' = 0 makes S(eps)
    // exactly quadratic, so the finite-difference defect is linear in eps.
    ParticleScenario s;
    s.potential = Potential{PotentialKind::harmonic, 1.0, 0.0};
    s.path = analytic_trajectory([](double t) { return t * t * t; },
                                 [](double t) { return 3.0 * t * t; },
                                 [](double t) { return 6.0 * t; });
    s.t0 = 0.0;
    s.t1 = 1.0;

    const ParticleVariation var = bump_variation(0.2, 0.8, 1.0);
    const double ds = particle_first_variation(s, var, 1e-12).total();
    const double s0 = particle_action(s, 1e-12);

    double err[3];
    int i = 0;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const double se = particle_action(perturbed(s, var, eps), 1e-12);
        err[i++] = std::abs((se - s0) / eps - ds);
    }
    CHECK(err[0] > 1e-4);  // quadratic remainder is visible at eps = 1e-2
    CHECK(err[0] / err[1] == doctest::Approx(10.0).epsilon(0.05));
    CHECK(err[1] / err[2] == doctest::Approx(10.0).epsilon(0.05));
}

// ---------------------------------------------------------------------------
// Field action over a bounded region
// ---------------------------------------------------------------------------

TEST_CASE("uniform oscillator action vanishes over a full cycle") {
    FieldState field = make_uniform_oscillator({}, 0.7);
    Region4D region{0.0, 2.0 * pi, 1.0, 0.5};
    VolumeQuadSpec spec;
    spec.n_t = 24;
    spec.n_r = 8;
    spec.n_theta = 8;
    spec.n_z = 2;
    const FieldActionResult res = field_action(field, region, spec);
    CHECK(std::abs(res.action) < 1e-8);
}

TEST_CASE("field action scales quadratically with amplitude") {
    Region4D region{0.0, 0.3, 1.0, 0.5};
    VolumeQuadSpec spec;
    spec.n_t = 8;
    spec.n_r = 8;
    spec.n_theta = 8;
    spec.n_z = 2;
    const double s1 = field_action(make_uniform_oscillator({}, 1.0), region, spec).action;
    const double s2 = field_action(make_uniform_oscillator({}, 2.0), region, spec).action;
    CHECK(std::abs(s1) > 1e-3);
    CHECK(s2 == doctest::Approx(4.0 * s1).epsilon(1e-12));
}

TEST_CASE("field action is identical for serial and parallel execution") {
    FieldState field = make_rotor(1, 0.2);
    Region4D region{0.0, 0.4, 12.0, 0.4};
    VolumeQuadSpec spec;
    spec.n_t = 6;
    spec.n_r = 16;
    spec.n_theta = 12;
    spec.n_z = 2;
    spec.exec = Exec::serial;
    const double serial = field_action(field, region, spec).action;
    spec.exec = Exec::parallel;
    const double parallel = field_action(field, region, spec).action;
    CHECK(serial == parallel);  // bitwise: slot-filled, serial reduction
}

TEST_CASE("cutoff tail bound brackets the change from enlarging the region") {
    FieldState field = make_rotor(1, 0.5);  // no window: the mode fills all space
    VolumeQuadSpec spec;
    spec.n_t = 8;
    spec.n_r = 24;
    spec.n_theta = 16;
    spec.n_z = 2;
    Region4D small{0.0, 0.4, 6.0, 0.4};
    Region4D big = small;
    big.r_max = 12.0;
    const FieldActionResult rs = field_action(field, small, spec);
    const FieldActionResult rb = field_action(field, big, spec);
    CHECK(rs.tail_bound > 0.0);
    CHECK(std::abs(rb.action - rs.action) <= rs.tail_bound);

    spec.tail_tol = rs.tail_bound / 10.0;
    CHECK_THROWS_AS(field_action(field, small, spec), QuadratureError);
}

TEST_CASE("a closed radial window zeroes the cutoff tail") {
    const double alpha = 0.5;
    FieldState field = make_rotor(1, alpha, {}, 1.0, default_rotor_window(alpha));
    // default window falls to zero at x = k_r r = 12, i.e. r = 24 here
    Region4D region{0.0, 0.4, 26.0, 0.4};
    VolumeQuadSpec spec;
    spec.n_t = 4;
    spec.n_r = 20;
    spec.n_theta = 12;
    spec.n_z = 2;
    spec.tail_tol = 0.0;  // any nonzero tail would throw
    const FieldActionResult res = field_action(field, region, spec);
    CHECK(res.tail_bound == 0.0);
    CHECK(std::isfinite(res.action));
}

TEST_CASE("field region and quadrature validation reject bad input") {
    FieldState field = make_uniform_oscillator();
    CHECK_THROWS_AS(field_action(field, Region4D{0.0, 0.0, 1.0, 0.5}), ValidationError);
    CHECK_THROWS_AS(field_action(field, Region4D{0.0, 1.0, -1.0, 0.5}), ValidationError);
    VolumeQuadSpec coarse;
    coarse.n_theta = 2;
    CHECK_THROWS_AS(field_action(field, Region4D{}, coarse), ValidationError);
}

// ---------------------------------------------------------------------------
// Boundary terms and their classification
// ---------------------------------------------------------------------------

TEST_CASE("flat-cap boundary term reduces to phi_dot times the cap volume") {
    const double A = 0.9, r_max = 1.2, z_half = 0.4;
    FieldState field = make_uniform_oscillator({}, A);
    const double w0 = field.constants.omega0();
    const double vol = pi * r_max * r_max * 2.0 * z_half;
    VolumeQuadSpec spec;
    spec.n_r = 12;
    spec.n_theta = 8;
    spec.n_z = 4;

    // Quarter period after a crest: phi = 0, phi_dot = -A omega0.
    FlatSlice slice{pi / (2.0 * w0), r_max, z_half, +1};
    FieldVariation unit{[](const CylPoint&) { return 1.0; }};
    const BoundaryTerm bt = field_boundary_term(field, slice, unit, spec);
    CHECK(bt.value == doctest::Approx(-A * w0 * vol).epsilon(1e-10));
    CHECK(bt.max_normal_deriv == doctest::Approx(1.0).epsilon(1e-10));

    // At the crest the normal derivative vanishes identically.
    FlatSlice crest{0.0, r_max, z_half, +1};
    const BoundaryTerm bc = field_boundary_term(field, crest, unit, spec);
    CHECK(std::abs(bc.value) < 1e-12);
    CHECK(bc.max_normal_deriv < 1e-12);

    // Orientation flips the sign, linearity in the variation holds.
    FlatSlice down{pi / (2.0 * w0), r_max, z_half, -1};
    const BoundaryTerm bd = field_boundary_term(field, down, unit, spec);
    CHECK(bd.value == doctest::Approx(A * w0 * vol).epsilon(1e-10));
    FieldVariation twice{[](const CylPoint&) { return 2.0; }};
    const BoundaryTerm b2 = field_boundary_term(field, slice, twice, spec);
    CHECK(b2.value == doctest::Approx(2.0 * bt.value).epsilon(1e-12));
}

TEST_CASE("traced-surface boundary term stays within the residual budget") {
    const double alpha = 0.05;
    FieldState field = make_rotor(1, alpha);
    const double r_peak = bessel::first_max(1) / alpha;
    SurfaceDomain dom;
    for (int i = 0; i < 7; ++i) dom.r_values.push_back((0.7 + 0.6 * i / 6.0) * r_peak);
    dom.n_theta = 64;
    const CylPoint seed = crest_point(field, 0, r_peak, 0.0, 0.0);
    const NaturalSurfaceMesh mesh = trace_surface(field, seed, dom);
    REQUIRE(mesh.spacelike_ok);

    FieldVariation unit{[](const CylPoint&) { return 1.0; }};
    const BoundaryTerm bt = field_boundary_term(field, mesh, unit);
    // |integral| <= sup|dphi/deta| * area; normal derivative is alpha^2-small
    const double r_lo = dom.r_values.front(), r_hi = dom.r_values.back();
    const double area = pi * (r_hi * r_hi - r_lo * r_lo);
    const double scale = field.dphi_dt_scale / field.constants.c;
    CHECK(bt.max_normal_deriv < 5.0 * alpha * alpha);
    CHECK(std::abs(bt.value) <= bt.max_normal_deriv * scale * area * 1.01);

    FieldVariation twice{[](const CylPoint&) { return 2.0; }};
    const BoundaryTerm b2 = field_boundary_term(field, mesh, twice);
    CHECK(b2.value == doctest::Approx(2.0 * bt.value).epsilon(1e-12));
}

TEST_CASE("boundary term on a non-spacelike surface is refused") {
    auto fast = [](const CylPoint&) { return Vec3Cyl{0.0, 1.5, 0.0}; };
    SurfaceDomain dom;
    dom.r_values = {1.0, 1.5};
    dom.n_theta = 16;
    const NaturalSurfaceMesh mesh =
        trace_surface_velocity(fast, {}, CylPoint{0.0, 1.0, 0.0, 0.0}, dom);
    REQUIRE_FALSE(mesh.spacelike_ok);
    FieldState field = make_uniform_oscillator();
    FieldVariation unit{[](const CylPoint&) { return 1.0; }};
    CHECK_THROWS_AS(field_boundary_term(field, mesh, unit), ValidationError);
}

TEST_CASE("crest slice of the uniform oscillator meets the natural condition") {
    FieldState field = make_uniform_oscillator({}, 0.9);
    SurfaceDomain probe;
    for (int i = 0; i <= 8; ++i) probe.r_values.push_back(1.2 * i / 8.0);
    probe.z_values = {-0.4, 0.0, 0.4};
    probe.n_theta = 16;

    FlatSlice crest{0.0, 1.2, 0.4, +1};
    const BoundaryInspection natural = classify_boundary(field, crest, probe, false);
    CHECK(natural.kind == BoundaryClass::natural_ncbc);
    CHECK(natural.max_normal_deriv < 1e-12);
    CHECK(natural.witness_term < 1e-20);

    // The same slice with the field value pinned is a coordinate condition.
    const BoundaryInspection pinned = classify_boundary(field, crest, probe, true);
    CHECK(pinned.kind == BoundaryClass::coordinate_bc);
}

TEST_CASE("off-crest slice fails the natural condition with an explicit witness") {
    const double A = 0.9, r_max = 1.2, z_half = 0.4;
    FieldState field = make_uniform_oscillator({}, A);
    const double w0 = field.constants.omega0();
    SurfaceDomain probe;
    for (int i = 0; i <= 8; ++i) probe.r_values.push_back(r_max * i / 8.0);
    probe.z_values = {-z_half, 0.0, z_half};
    probe.n_theta = 16;

    FlatSlice off{pi / (2.0 * w0), r_max, z_half, +1};
    const BoundaryInspection insp = classify_boundary(field, off, probe, false);
    CHECK(insp.kind == BoundaryClass::non_extremizing_ncbc);
    CHECK(insp.max_normal_deriv == doctest::Approx(1.0).epsilon(1e-10));
    // Self-witness variation delta phi = dphi/deta gives the integral of
    // (A omega0)^2 over the cap: the obstruction is finite, not marginal.
    const double expect = A * w0 * A * w0 * pi * r_max * r_max * 2.0 * z_half;
    CHECK(insp.witness_term == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("traced rotor surface passes the natural test at its alpha^2 budget") {
    const double alpha = 0.05;
    FieldState field = make_rotor(1, alpha);
    const double r_peak = bessel::first_max(1) / alpha;
    SurfaceDomain dom;
    for (int i = 0; i < 7; ++i) dom.r_values.push_back((0.7 + 0.6 * i / 6.0) * r_peak);
    dom.n_theta = 64;
    const CylPoint seed = crest_point(field, 0, r_peak, 0.0, 0.0);
    const NaturalSurfaceMesh mesh = trace_surface(field, seed, dom);

    const BoundaryInspection at_budget = classify_boundary(field, mesh, false,
                                                           5.0 * alpha * alpha);
    CHECK(at_budget.kind == BoundaryClass::natural_ncbc);
    CHECK(at_budget.max_normal_deriv > 0.0);

    // A flat cut through the same rotor misses the crest badly: the normal
    // derivative is order one, far outside any alpha^2 allowance.
    SurfaceDomain probe;
    for (int i = 0; i < 7; ++i) probe.r_values.push_back((0.7 + 0.6 * i / 6.0) * r_peak);
    probe.n_theta = 32;
    FlatSlice flat{0.0, 1.3 * r_peak, 0.5, +1};
    const BoundaryInspection cut = classify_boundary(field, flat, probe, false,
                                                     5.0 * alpha * alpha);
    CHECK(cut.kind == BoundaryClass::non_extremizing_ncbc);
    CHECK(cut.max_normal_deriv > 0.1);
    CHECK(cut.witness_term > 0.0);
}
