#pragma once

#include "kglab/field.hpp"

namespace kglab {

/// Instantaneous samples oscillate at 2 omega0; cycle-averaged samples are
/// the smooth energy flow obtained by dropping the fast terms analytically
/// (the default source for hypersurface tracing).
enum class Averaging { instantaneous, cycle_averaged };

/// Energy density, momentum density and the local group velocity at a point.
/// Orientation convention: t0i is the energy *flux* direction, so that for a
/// positive-l rotor (phase l theta - omega t) the flow points toward +theta
/// and seam duration, n and L_z all come out with the same sign.
struct StressEnergySample {
    double t00 = 0.0;
    Vec3Cyl t0i;            ///< -phi_dot * grad phi, physical components
    double p_theta = 0.0;   ///< angular momentum density factor, = t0i.theta
    Vec3Cyl v;              ///< local group velocity; valid when v_defined
    bool v_defined = false; ///< false where t00 is below the vacuum floor
    bool v_superluminal = false;  ///< |v| > c flagged, never clipped
    Averaging averaging = Averaging::instantaneous;
};

struct StressEnergyOptions {
    VelocityConvention convention = VelocityConvention::flux_over_energy;
    /// Vacuum floor as a fraction of the field's characteristic peak t00.
    double vacuum_floor_rel = 1e-12;
};

/// T_00, T_0i, p_theta and v at a spacetime point.  cycle_averaged uses the
/// analytic phasor average: <XY>(t) = 1/2 sum_ab Re[X_a conj(Y_b)
/// exp(-i(w_a - w_b)t)], exact for equal-frequency superpositions.
StressEnergySample stress_energy_at(const FieldState& field, const CylPoint& point,
                                    Averaging averaging,
                                    const StressEnergyOptions& opts = {});

/// The velocity of a sample; throws VacuumRegionError where the energy
/// density was below the floor (the caller decides to skip or abort).
Vec3Cyl local_group_velocity(const StressEnergySample& sample);

/// p_theta component only.
double momentum_density_theta(const FieldState& field, const CylPoint& point,
                              Averaging averaging);

/// Quadrature cycle average over [t - period/2, t + period/2]: the oracle
/// for (and alternative to) the analytic phasor average.  Default period of
/// interest is 2 pi / omega0; for a single-frequency field, passing that
/// mode's own period reproduces the analytic average to rounding.
StressEnergySample cycle_average_quadrature(const FieldState& field,
                                            const CylPoint& point, double period,
                                            std::size_t n_samples = 64,
                                            const StressEnergyOptions& opts = {});

} // namespace kglab
