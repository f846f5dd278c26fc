#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "kglab/constants.hpp"

namespace kglab {

/// Spacetime point in cylindrical coordinates (t, r, theta, z).
struct CylPoint {
    double t = 0.0;
    double r = 0.0;
    double theta = 0.0;
    double z = 0.0;
};

/// Vector in the local orthonormal cylindrical basis (e_r, e_theta, e_z).
/// The theta component is physical, i.e. r * dtheta/dt for a velocity.
struct Vec3Cyl {
    double r = 0.0;
    double theta = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(r * r + theta * theta + z * z); }
};

/// C^1 raised-cosine radial window: 0 below the inner ramp, 1 on the flat
/// region, 0 beyond the outer ramp.  Used to localize Bessel modes so
/// energy integrals converge; a windowed mode is no longer an exact
/// Klein-Gordon solution (the residual scales with the ramp gentleness).
struct RadialWindow {
    double inner_start = 0.0;  ///< rise begins here; inner_len == 0 disables
    double inner_len = 0.0;
    double outer_start = 0.0;  ///< fall begins here
    double outer_len = 0.0;

    void validate() const;
    double value(double r) const;
    double deriv(double r) const;
    double second(double r) const;
    /// Radii where the window's piecewise definition changes; quadratures
    /// split at these knots.
    std::vector<double> knots() const;
};

/// One exact cylindrical mode
///   phi = A * W(r) * J_|l|(k_r r) * cos(l theta + k_z z - omega t + phase + axial_phase)
/// with omega fixed by the dispersion relation omega^2 = c^2(k_r^2+k_z^2) + omega0^2.
/// Without a window the mode solves the Klein-Gordon equation exactly.
struct CylindricalMode {
    double amplitude = 1.0;
    int l = 0;             ///< signed angular index; sign encodes rotation sense
    double k_r = 0.0;      ///< radial wavenumber, >= 0
    double k_z = 0.0;
    double phase = 0.0;
    double axial_phase = 0.0;
    std::optional<RadialWindow> window;

    double omega = 0.0;    ///< filled by build_field from the dispersion relation

    double total_phase() const { return phase + axial_phase; }
};

/// Evaluation frame: rigid time translation, rotation about z, and a
/// helical tilt t_lab = t' + t_shift + pitch * (theta' - theta_ref).
/// pitch = l/omega makes t' = 0 follow a rotor crest.  Full boosts are
/// out of scope (nonrelativistic regime).
struct Frame {
    double t_shift = 0.0;
    double theta_shift = 0.0;
    double pitch = 0.0;
    double theta_ref = 0.0;

    bool is_lab() const {
        return t_shift == 0.0 && theta_shift == 0.0 && pitch == 0.0;
    }
    /// Lab time of the frame's t' = 0 surface at lab angle theta.
    double surface_time(double theta_lab) const {
        return t_shift + pitch * (theta_lab - theta_shift - theta_ref);
    }
};

/// A finite superposition of exact cylindrical Klein-Gordon modes.
/// Immutable after construction; safe to share across threads.
struct FieldState {
    PhysicalConstants constants;
    std::vector<CylindricalMode> modes;
    Frame frame;

    double alpha = 0.0;      ///< k_max * hbar / (m c), nonrelativistic parameter
    double phi_scale = 0.0;  ///< sum of |A| * peak J, amplitude scale of phi
    double dphi_dt_scale = 0.0;  ///< sum of |A| * omega * peak J
    double grad_scale = 0.0;     ///< gradient magnitude scale
    double t00_scale = 0.0;      ///< characteristic peak energy density
    bool relativistic = false;   ///< alpha >= 1
    bool windowed = false;       ///< any mode carries a radial window
};

/// phi and its analytic derivatives at one spacetime point.
struct FieldSample {
    double phi = 0.0;
    double d_t = 0.0;
    Vec3Cyl grad;          ///< (d/dr, (1/r) d/dtheta, d/dz), physical components
    double d_tt = 0.0;     ///< filled when second derivatives are requested
    double laplacian = 0.0;
    bool has_second = false;
};

/// Complex amplitude of one mode at a fixed spatial point:
/// phi_a(t) = Re(phi * exp(-i omega t)), and likewise for each derivative.
/// The basis of all analytic cycle averages of quadratic quantities.
struct ModePhasor {
    std::complex<double> phi;
    std::complex<double> d_t;
    std::complex<double> d_r;
    std::complex<double> d_theta_over_r;
    std::complex<double> d_z;
    double omega = 0.0;
};

/// 4-volume for envelope extraction: a ball of radius c*duration around
/// `center` in space, times [center.t - duration/2, center.t + duration/2].
struct Window4D {
    CylPoint center;
    double duration = 0.0;
    int n_t = 9;       ///< time samples
    int n_space = 5;   ///< samples per spatial axis
};

/// Decomposition phi = phi_c cos(omega0 t') + phi_s sin(omega0 t') in the
/// frame time t'.  The envelopes vary on the slow O(alpha^2 omega0) scale.
struct EnvelopePair {
    std::vector<double> phi_c;  ///< flattened (t, r, theta, z) grid, t slowest
    std::vector<double> phi_s;
    Window4D window;
    Frame frame;
    double ratio_s_over_c = 0.0;    ///< max|phi_s| / max|phi_c| over the window
    double alpha_omega0_dt = 0.0;   ///< validity diagnostic; small means good
    double recon_err_exact = 0.0;   ///< identity reconstruction error (rounding)
    double recon_err_frozen = 0.0;  ///< error with envelopes frozen at center
};

/// Validate constants and modes, fill dispersion omegas and derived scales.
FieldState build_field(const PhysicalConstants& pc, std::vector<CylindricalMode> modes,
                       const Frame& frame = {});

/// Spatially uniform oscillation phi = A cos(omega0 t - phase): the
/// zero-wavenumber mode, alpha = 0.
FieldState make_uniform_oscillator(const PhysicalConstants& pc = {},
                                   double amplitude = 1.0, double phase = 0.0);

/// Single rotating mode with angular index l and k_r = alpha * m c / hbar.
FieldState make_rotor(int l, double alpha, const PhysicalConstants& pc = {},
                      double amplitude = 1.0,
                      std::optional<RadialWindow> window = std::nullopt,
                      double k_z = 0.0);

/// Two co-rotating modes l1 and l2 sharing the same k_r (hence the same
/// omega); their superposed energy flow is static but angle-dependent.
FieldState make_mixed(int l1, int l2, double alpha, const PhysicalConstants& pc = {},
                      double a1 = 1.0, double a2 = 1.0,
                      std::optional<RadialWindow> window = std::nullopt);

/// Outer-taper window in units of 1/k_r: flat through x = k_r r = 8,
/// raised-cosine fall over x in [8, 12].  Gentle enough that window terms
/// perturb energy ratios only at O(alpha^2).
RadialWindow default_rotor_window(double k_r);

/// phi and its analytic 4-gradient (plus d'Alembertian ingredients on
/// request) at a lab-frame point.  Linear in the mode amplitudes.
FieldSample evaluate(const FieldState& field, const CylPoint& point,
                     bool second_derivs = false);

/// Per-mode complex amplitudes at a spatial point (r, theta, z).
std::vector<ModePhasor> phasors(const FieldState& field, double r, double theta,
                                double z);

/// Klein-Gordon residual (box phi + (mc/hbar)^2 phi) normalized by
/// (mc/hbar)^2 * phi_scale.  Zero to rounding for unwindowed fields.
double kge_residual(const FieldState& field, const CylPoint& point);

/// k_max * hbar / (m c) over all modes.
double alpha_parameter(const FieldState& field);

/// Frame whose t' = 0 surface follows the crest of mode `mode_index`
/// passing through lab angle theta_ref (pitch = l/omega).
Frame crest_frame(const FieldState& field, std::size_t mode_index,
                  double theta_ref = 0.0);

/// A point on the crest of mode `mode_index`: the lab time at which the
/// mode's phase is zero (phi maximal, phi_dot = 0) at (r, theta, z).
CylPoint crest_point(const FieldState& field, std::size_t mode_index, double r,
                     double theta, double z);

/// Envelope extraction over the window in the given frame's time.
EnvelopePair envelope_decompose(const FieldState& field, const Window4D& window,
                                const Frame& frame);

} // namespace kglab
