#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "kglab/hypersurface.hpp"

namespace kglab {

// ---------------------------------------------------------------------------
// Particle side: S = integral of (m v^2 / 2 - V(x)) dt on [t0, t1].
// ---------------------------------------------------------------------------

enum class PotentialKind { free, harmonic, linear };

struct Potential {
    PotentialKind kind = PotentialKind::free;
    double k = 0.0;  ///< harmonic: V = k x^2 / 2
    double g = 0.0;  ///< linear:   V = g x
    double value(double x) const;
    double slope(double x) const;
};

/// C^2 path x(t) with velocity and acceleration.  `knots` lists interior
/// points where higher derivatives kink (sampled paths); quadrature splits
/// there so each panel sees a smooth integrand.
struct Trajectory {
    std::function<double(double)> x, v, a;
    std::vector<double> knots;
};

Trajectory analytic_trajectory(std::function<double(double)> x,
                               std::function<double(double)> v,
                               std::function<double(double)> a);

/// Natural cubic spline through (t_i, x_i): C^2, zero second derivative at
/// the ends, analytic v and a per segment.
Trajectory spline_trajectory(const std::vector<double>& t, const std::vector<double>& x);

struct EndpointCondition {
    enum class Kind { position_fixed, velocity_fixed } kind = Kind::position_fixed;
    /// Declared boundary datum (x for position_fixed, v for velocity_fixed);
    /// when set, validate() checks the trajectory against it.
    std::optional<double> pinned;
};

struct ParticleScenario {
    double mass = 1.0;
    Potential potential;
    Trajectory path;
    double t0 = 0.0, t1 = 1.0;
    EndpointCondition start, end;
    void validate() const;
};

/// Smooth delta x(t) with two derivatives.  Families generated below keep
/// d(delta)/dt = 0 at velocity-pinned endpoints so the constraint class is
/// preserved; delta itself vanishes at position-pinned endpoints.
struct ParticleVariation {
    std::function<double(double)> delta, ddelta, d2delta;
};

/// Compact bump a(u(1-u))^3 on [lo, hi], identically zero outside.
ParticleVariation bump_variation(double lo, double hi, double amplitude);

/// Smootherstep ramp from 0 to `amplitude` at the chosen endpoint of
/// [t0, t1], flat (zero slope) at both ends of its support.
ParticleVariation ramp_variation(double t0, double t1, double amplitude, bool at_end);

/// Seeded family of admissible variations: random interior bumps, plus
/// endpoint-supported ramps wherever the scenario leaves the position free.
std::vector<ParticleVariation> variation_family(const ParticleScenario& s, int count,
                                                unsigned seed);

double particle_action(const ParticleScenario& s, double abs_tol = 1e-10);

struct FirstVariation {
    double bulk = 0.0;      ///< integral of (-V'(x) - m a) delta dt
    double boundary = 0.0;  ///< m v delta at t1 minus at t0
    double total() const { return bulk + boundary; }
};

/// Throws ValidationError if the variation is inadmissible (nonzero delta at
/// a position-fixed endpoint).
FirstVariation particle_first_variation(const ParticleScenario& s,
                                        const ParticleVariation& var,
                                        double abs_tol = 1e-10);

/// Scenario with path x + eps * delta (for finite-difference checks of the
/// first variation).
ParticleScenario perturbed(const ParticleScenario& s, const ParticleVariation& var,
                           double eps);

// ---------------------------------------------------------------------------
// Field side: S = integral over [t0,t1] x {r <= r_max, |z| <= z_half} of
// (1/2)[(dphi/dt / c)^2 - |grad phi|^2 - (mc/hbar)^2 phi^2].
// ---------------------------------------------------------------------------

struct Region4D {
    double t0 = 0.0, t1 = 1.0;
    double r_max = 1.0;
    double z_half = 0.5;
    void validate() const;
};

struct VolumeQuadSpec {
    int n_t = 32;      ///< Gauss-Legendre points in t
    int n_r = 48;      ///< Gauss-Legendre points per radial piece
    int n_theta = 32;  ///< periodic trapezoid samples
    int n_z = 8;       ///< Gauss-Legendre points in z
    Exec exec = Exec::parallel;
    /// Throw if the reported shell tail bound exceeds this.
    double tail_tol = std::numeric_limits<double>::infinity();
};

struct FieldActionResult {
    double action = 0.0;
    /// sup |L| sampled on the shell [r_max, 2 r_max] times the shell
    /// 4-volume; identically zero once a radial window has closed.
    double tail_bound = 0.0;
};

FieldActionResult field_action(const FieldState& field, const Region4D& region,
                               const VolumeQuadSpec& spec = {});

struct FieldVariation {
    std::function<double(const CylPoint&)> delta;
};

struct BoundaryTerm {
    double value = 0.0;            ///< surface integral of (dphi/deta) delta
    double max_normal_deriv = 0.0; ///< normalized sup |dphi/deta| over the surface
};

/// Flat constant-t cap: dphi/deta = orientation * phi_dot / c, measure r dr
/// dtheta dz.
BoundaryTerm field_boundary_term(const FieldState& field, const FlatSlice& slice,
                                 const FieldVariation& var,
                                 const VolumeQuadSpec& spec = {});

/// Traced surface: trapezoid sum over the mesh with the induced volume
/// element sqrt(1 - c^2 |grad t'|^2) r dr dtheta dz.  Throws on a mesh that
/// is not spacelike.
BoundaryTerm field_boundary_term(const FieldState& field, const NaturalSurfaceMesh& mesh,
                                 const FieldVariation& var);

enum class BoundaryClass { coordinate_bc, natural_ncbc, non_extremizing_ncbc };

struct BoundaryInspection {
    BoundaryClass kind = BoundaryClass::coordinate_bc;
    double max_normal_deriv = 0.0;  ///< normalized sup |dphi/deta|
    /// Boundary term for the self-witness variation delta phi = dphi/deta:
    /// the integral of (dphi/deta)^2, strictly positive exactly when the
    /// surface fails the natural condition somewhere.
    double witness_term = 0.0;
    double tol_used = 0.0;
};

/// phi_fixed on the surface -> coordinate_bc; else natural_ncbc when the
/// normalized sup |dphi/deta| stays below tol_natural, else
/// non_extremizing_ncbc (witness returned).  tol_natural is relative to the
/// peak |dphi/dt| envelope over the probe surface.
BoundaryInspection classify_boundary(const FieldState& field, const FlatSlice& slice,
                                     const SurfaceDomain& probe, bool phi_fixed,
                                     double tol_natural = 1e-6);
BoundaryInspection classify_boundary(const FieldState& field,
                                     const NaturalSurfaceMesh& mesh, bool phi_fixed,
                                     double tol_natural = 1e-6);

} // namespace kglab
