#include "doctest.h"

#include "kglab/stress_energy.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace kglab;

namespace {
constexpr double pi = std::numbers::pi;

// First maxima of J_l, classic table values (independent of the library).
double bessel_peak_hint(int l) {
    switch (l) {
        case 1: return 1.8411837813406593;
        case 2: return 3.0542369282271403;
        case 3: return 4.2011889412105285;
        default: return 1.0 + l;
    }
}

// Closed-form cycle averages for a single rotor mode, derived by hand from
// phi = A J_l(k_r r) cos(l th - w t):  <T_0theta> = A^2 w l J^2 / (2r) and
// <T_00> = (A^2/4)[(w^2 + w0^2) J^2 + k_r^2 (J'^2 + l^2 J^2/x^2)].
struct RotorOracle {
    double A, l, kr, w;
    double J(double r) const { return std::cyl_bessel_j(l, kr * r); }
    double Jp(double r) const {
        const double x = kr * r;
        return 0.5 * (std::cyl_bessel_j(l - 1, x) - std::cyl_bessel_j(l + 1, x));
    }
    double t0theta(double r) const { return A * A * w * l * J(r) * J(r) / (2 * r); }
    double t00(double r) const {
        const double x = kr * r;
        const double G = Jp(r) * Jp(r) + l * l * J(r) * J(r) / (x * x);
        return 0.25 * A * A * ((w * w + 1.0) * J(r) * J(r) + kr * kr * G);
    }
    double vtheta(double r) const { return t0theta(r) / t00(r); }
};
} // namespace

TEST_CASE("uniform oscillator stress-energy at the crest") {
    auto f = make_uniform_oscillator({}, 1.0);
    auto s = stress_energy_at(f, {0.0, 1.0, 0.0, 0.0}, Averaging::instantaneous);
    // potential term only: t00 = (1/2) omega0^2 A^2
    CHECK(s.t00 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(s.t0i.r == 0.0);
    CHECK(s.t0i.theta == 0.0);
    CHECK(s.t0i.z == 0.0);
    CHECK(s.v_defined);
    CHECK(s.v.norm() == doctest::Approx(0.0).scale(1.0));
    CHECK_FALSE(s.v_superluminal);
}

TEST_CASE("in-phase superposition scales as the squared amplitude sum") {
    const double A = 0.7, B = 0.4;
    CylindricalMode ma, mb;
    ma.amplitude = A;
    mb.amplitude = B;
    auto f = build_field({}, {ma, mb});
    auto s = stress_energy_at(f, {0.0, 1.0, 0.0, 0.0}, Averaging::instantaneous);
    CHECK(s.t00 == doctest::Approx(0.5 * (A + B) * (A + B)).epsilon(1e-14));
}

TEST_CASE("rotor cycle average matches the closed forms") {
    const double alpha = 0.05;
    for (int l : {1, 2}) {
        auto f = make_rotor(l, alpha, {}, 1.3);
        RotorOracle o{1.3, static_cast<double>(l), f.modes[0].k_r, f.modes[0].omega};
        const double r_peak = bessel_peak_hint(l) / f.modes[0].k_r;
        for (double r : {0.6 * r_peak, r_peak, 1.4 * r_peak}) {
            auto s = stress_energy_at(f, {0.4, r, 1.0, 0.0}, Averaging::cycle_averaged);
            CHECK(s.p_theta == doctest::Approx(o.t0theta(r)).epsilon(1e-12));
            CHECK(s.t00 == doctest::Approx(o.t00(r)).epsilon(1e-12));
            CHECK(s.v.theta == doctest::Approx(o.vtheta(r)).epsilon(1e-12));
            CHECK(s.p_theta > 0.0);  // positive l flows toward +theta
            CHECK(std::abs(s.t0i.r) < 1e-14);
            CHECK(std::abs(s.v.theta) < 1.0);  // subluminal
        }
    }
}

TEST_CASE("rotor velocity approaches l/(omega r) as alpha shrinks") {
    double prev_err = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double alpha = 0.1 / (1 << k);
        auto f = make_rotor(1, alpha);
        const double r = bessel_peak_hint(1) / f.modes[0].k_r;
        auto s = stress_energy_at(f, {0.0, r, 0.0, 0.0}, Averaging::cycle_averaged);
        const double ideal = 1.0 / (f.modes[0].omega * r);
        const double err = std::abs(s.v.theta / ideal - 1.0);
        if (k > 0) CHECK(prev_err / err == doctest::Approx(4.0).epsilon(0.15));
        prev_err = err;
    }
}

TEST_CASE("quadrature average over the mode period reproduces the analytic average") {
    auto f = make_rotor(2, 0.05);
    const double r = bessel_peak_hint(2) / f.modes[0].k_r;
    const CylPoint p{0.7, r, 0.4, 0.0};
    auto an = stress_energy_at(f, p, Averaging::cycle_averaged);
    auto qu = cycle_average_quadrature(f, p, 2 * pi / f.modes[0].omega);
    CHECK(qu.t00 == doctest::Approx(an.t00).epsilon(1e-12));
    CHECK(qu.p_theta == doctest::Approx(an.p_theta).epsilon(1e-12));
    // over the Compton period 2 pi / omega0 instead: only O(alpha^2) leakage
    auto qw = cycle_average_quadrature(f, p, 2 * pi);
    CHECK(qw.t00 == doctest::Approx(an.t00).epsilon(4 * 0.05 * 0.05));
}

TEST_CASE("instantaneous p_theta vanishes on a crest") {
    auto f = make_rotor(1, 0.05);
    const double r = bessel_peak_hint(1) / f.modes[0].k_r;
    const CylPoint crest = crest_point(f, 0, r, 1.2, 0.0);
    CHECK(std::abs(momentum_density_theta(f, crest, Averaging::instantaneous)) < 1e-13);
    // cycle-averaged is nonzero at the same point
    CHECK(momentum_density_theta(f, crest, Averaging::cycle_averaged) > 1e-6);
}

TEST_CASE("t00 is nonnegative everywhere") {
    std::mt19937 rng(77001u);
    std::uniform_real_distribution<double> ur(0.0, 80.0), uth(0.0, 2 * pi),
        ut(0.0, 10.0), uz(-3.0, 3.0);
    auto f = make_mixed(1, 2, 0.05);
    for (int i = 0; i < 300; ++i) {
        const CylPoint p{ut(rng), ur(rng), uth(rng), uz(rng)};
        CHECK(stress_energy_at(f, p, Averaging::instantaneous).t00 >= 0.0);
        CHECK(stress_energy_at(f, p, Averaging::cycle_averaged).t00 >= 0.0);
    }
}

TEST_CASE("amplitude scaling is quadratic in T and leaves v unchanged") {
    auto f1 = make_rotor(1, 0.05, {}, 1.0);
    auto f2 = make_rotor(1, 0.05, {}, 2.0);
    const double r = bessel_peak_hint(1) / f1.modes[0].k_r;
    const CylPoint p{0.3, r, 0.2, 0.0};
    for (auto avg : {Averaging::instantaneous, Averaging::cycle_averaged}) {
        auto s1 = stress_energy_at(f1, p, avg);
        auto s2 = stress_energy_at(f2, p, avg);
        CHECK(s2.t00 == doctest::Approx(4.0 * s1.t00).epsilon(1e-13));
        CHECK(s2.p_theta == doctest::Approx(4.0 * s1.p_theta).epsilon(1e-13));
        if (s1.v_defined && s2.v_defined)
            CHECK(s2.v.theta == doctest::Approx(s1.v.theta).epsilon(1e-13));
    }
}

TEST_CASE("vacuum region beyond the window raises on velocity access") {
    auto f = make_rotor(1, 0.05, {}, 1.0, default_rotor_window(0.05));
    const double r_out = (8.0 + 4.0) / 0.05 + 50.0;  // past the outer ramp
    auto s = stress_energy_at(f, {0.0, r_out, 0.0, 0.0}, Averaging::cycle_averaged);
    CHECK(s.t00 == 0.0);
    CHECK_FALSE(s.v_defined);
    CHECK_THROWS_AS(local_group_velocity(s), VacuumRegionError);
    // inside the flat region the velocity is available
    auto sin_ = stress_energy_at(f, {0.0, 40.0, 0.0, 0.0}, Averaging::cycle_averaged);
    CHECK_NOTHROW(local_group_velocity(sin_));
}

TEST_CASE("velocity conventions coincide in natural units") {
    auto f = make_rotor(1, 0.05);
    const double r = bessel_peak_hint(1) / f.modes[0].k_r;
    StressEnergyOptions a, b;
    a.convention = VelocityConvention::flux_over_energy;
    b.convention = VelocityConvention::c_times_ratio;
    auto sa = stress_energy_at(f, {0.0, r, 0.0, 0.0}, Averaging::cycle_averaged, a);
    auto sb = stress_energy_at(f, {0.0, r, 0.0, 0.0}, Averaging::cycle_averaged, b);
    CHECK(sa.v.theta == doctest::Approx(sb.v.theta).epsilon(1e-15));
}

TEST_CASE("mixed superposition has static but angle-dependent averaged flow") {
    auto f = make_mixed(1, 2, 0.05);
    const double r = bessel_peak_hint(1) / f.modes[0].k_r;
    auto s1 = stress_energy_at(f, {0.0, r, 0.3, 0.0}, Averaging::cycle_averaged);
    auto s2 = stress_energy_at(f, {5.0, r, 0.3, 0.0}, Averaging::cycle_averaged);
    // equal frequencies: the average is time-independent...
    CHECK(s1.p_theta == doctest::Approx(s2.p_theta).epsilon(1e-12));
    CHECK(s1.t00 == doctest::Approx(s2.t00).epsilon(1e-12));
    // ...but varies around the circle (cross terms ~ cos((l2-l1) theta))
    auto s3 = stress_energy_at(f, {0.0, r, 0.3 + pi, 0.0}, Averaging::cycle_averaged);
    CHECK(std::abs(s1.p_theta - s3.p_theta) > 1e-4);
    // and acquires a radial component somewhere on the circle
    auto s4 = stress_energy_at(f, {0.0, r, 0.3 + pi / 3, 0.0}, Averaging::cycle_averaged);
    const bool radial_flow = std::abs(s3.t0i.r) > 1e-8 || std::abs(s4.t0i.r) > 1e-8 ||
                             std::abs(s1.t0i.r) > 1e-8;
    CHECK(radial_flow);
}
