#include "kglab/stress_energy.hpp"

#include <cmath>

#include "kglab/quadrature.hpp"

namespace kglab {

namespace {

using Cx = std::complex<double>;

// <X Y>(t) with X = sum_a Re(X_a e^{-i w_a t}): fast terms dropped, beat
// terms kept at their instantaneous value.
double avg_bilinear(const std::vector<ModePhasor>& ph, Cx ModePhasor::*X,
                    Cx ModePhasor::*Y, double t) {
    double s = 0.0;
    for (const auto& a : ph)
        for (const auto& b : ph) {
            const Cx beat = std::exp(Cx(0.0, -(a.omega - b.omega) * t));
            s += 0.5 * (a.*X * std::conj(b.*Y) * beat).real();
        }
    return s;
}

void fill_velocity(StressEnergySample& s, const FieldState& field,
                   const StressEnergyOptions& opts) {
    const double c = field.constants.c;
    const double floor = opts.vacuum_floor_rel * field.t00_scale;
    if (s.t00 > floor) {
        const double fac =
            (opts.convention == VelocityConvention::flux_over_energy ? c * c : c) /
            s.t00;
        s.v = {fac * s.t0i.r, fac * s.t0i.theta, fac * s.t0i.z};
        s.v_defined = true;
        s.v_superluminal = s.v.norm() > c * (1.0 + 1e-9);
    }
}

} // namespace

StressEnergySample stress_energy_at(const FieldState& field, const CylPoint& point,
                                    Averaging averaging,
                                    const StressEnergyOptions& opts) {
    const double c2 = field.constants.c * field.constants.c;
    const double w0 = field.constants.omega0();

    StressEnergySample s;
    s.averaging = averaging;
    if (averaging == Averaging::instantaneous) {
        const FieldSample f = evaluate(field, point);
        const double g2 = f.grad.r * f.grad.r + f.grad.theta * f.grad.theta +
                          f.grad.z * f.grad.z;
        s.t00 = 0.5 * (f.d_t * f.d_t + c2 * g2 + w0 * w0 * f.phi * f.phi);
        s.t0i = {-f.d_t * f.grad.r, -f.d_t * f.grad.theta, -f.d_t * f.grad.z};
    } else {
        const auto ph = phasors(field, point.r, point.theta, point.z);
        const double t = point.t;
        const double dd = avg_bilinear(ph, &ModePhasor::d_t, &ModePhasor::d_t, t);
        const double rr = avg_bilinear(ph, &ModePhasor::d_r, &ModePhasor::d_r, t);
        const double tt =
            avg_bilinear(ph, &ModePhasor::d_theta_over_r, &ModePhasor::d_theta_over_r, t);
        const double zz = avg_bilinear(ph, &ModePhasor::d_z, &ModePhasor::d_z, t);
        const double pp = avg_bilinear(ph, &ModePhasor::phi, &ModePhasor::phi, t);
        s.t00 = 0.5 * (dd + c2 * (rr + tt + zz) + w0 * w0 * pp);
        s.t0i = {-avg_bilinear(ph, &ModePhasor::d_t, &ModePhasor::d_r, t),
                 -avg_bilinear(ph, &ModePhasor::d_t, &ModePhasor::d_theta_over_r, t),
                 -avg_bilinear(ph, &ModePhasor::d_t, &ModePhasor::d_z, t)};
    }
    s.p_theta = s.t0i.theta;
    fill_velocity(s, field, opts);
    return s;
}

Vec3Cyl local_group_velocity(const StressEnergySample& sample) {
    if (!sample.v_defined)
        throw VacuumRegionError("energy density below vacuum floor");
    return sample.v;
}

double momentum_density_theta(const FieldState& field, const CylPoint& point,
                              Averaging averaging) {
    return stress_energy_at(field, point, averaging).p_theta;
}

StressEnergySample cycle_average_quadrature(const FieldState& field,
                                            const CylPoint& point, double period,
                                            std::size_t n_samples,
                                            const StressEnergyOptions& opts) {
    if (!(period > 0.0)) throw ValidationError("averaging period must be > 0");
    if (n_samples < 4) throw ValidationError("averaging needs n_samples >= 4");

    StressEnergySample acc;
    acc.averaging = Averaging::cycle_averaged;
    auto add = [&](double tt) {
        CylPoint p = point;
        p.t = tt;
        const auto inst = stress_energy_at(field, p, Averaging::instantaneous, opts);
        acc.t00 += inst.t00;
        acc.t0i.r += inst.t0i.r;
        acc.t0i.theta += inst.t0i.theta;
        acc.t0i.z += inst.t0i.z;
    };
    const double h = period / static_cast<double>(n_samples);
    const double t0 = point.t - 0.5 * period;
    for (std::size_t i = 0; i < n_samples; ++i) add(t0 + h * static_cast<double>(i));
    const double inv = 1.0 / static_cast<double>(n_samples);
    acc.t00 *= inv;
    acc.t0i.r *= inv;
    acc.t0i.theta *= inv;
    acc.t0i.z *= inv;
    acc.p_theta = acc.t0i.theta;
    fill_velocity(acc, field, opts);
    return acc;
}

} // namespace kglab
