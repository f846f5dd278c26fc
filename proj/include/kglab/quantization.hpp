#pragma once

#include <string>

#include "kglab/hypersurface.hpp"
#include "kglab/stress_energy.hpp"

namespace kglab {

/// Nearest half-period count in a seam duration, nearest-even at ties.
struct SeamQuantum {
    long long n_est = 0;      ///< round(delta_t * omega0 / pi), signed
    double n_residual = 0.0;  ///< |delta_t * omega0 / pi - n_est|, <= 0.5
};

SeamQuantum quantize_seam(double delta_t, const PhysicalConstants& constants);

/// Half-action of one loop of the energy flow: m * contour integral of
/// v . dl, expressed in half-quanta of h.
struct BohrSommerfeld {
    double bs_lhs = 0.0;    ///< m c^2 delta_t, action units
    double bs_ratio = 0.0;  ///< bs_lhs / (h / 2); identical to delta_t omega0 / pi
};

/// Traces the loop and forms the action ratio.  The ratio equals
/// delta_t * omega0 / pi by construction; the identity is re-derived both
/// ways internally and a disagreement beyond rounding is a logic error.
BohrSommerfeld bohr_sommerfeld_check(const FieldState& field, const LoopSpec& loop,
                                     const TraceOptions& opts = {});

/// Quadrature settings for integrals over a spatial slice or traced surface.
struct SurfaceQuadSpec {
    int n_r = 48;      ///< Gauss-Legendre points per radial piece
    int n_theta = 64;  ///< periodic trapezoid samples
    int n_z = 4;       ///< Gauss-Legendre points in z (flat slices)
    Exec exec = Exec::parallel;
    /// Throw if the reported shell tail bound exceeds this.
    double tail_tol = std::numeric_limits<double>::infinity();
};

/// Integral of a density over a flat constant-t slice, with the cutoff
/// tail bound from sampling the [r_max, 2 r_max] shell.  The z extent is a
/// slab of thickness 2 z_half; z-independent fields use z_half = 0.5 so the
/// slab has unit thickness.
struct DensityIntegral {
    double value = 0.0;
    double tail_bound = 0.0;
};

/// Total field energy: integral of T_00 over the slice.
DensityIntegral total_energy(const FieldState& field, const FlatSlice& slice,
                             Averaging averaging = Averaging::cycle_averaged,
                             const SurfaceQuadSpec& spec = {});

/// Axial angular momentum: integral of r * (momentum density) over the
/// slice, the momentum density being the energy flux component over c^2.
/// Positive-l rotors carry positive L_z under the flux orientation.
DensityIntegral angular_momentum(const FieldState& field, const FlatSlice& slice,
                                 Averaging averaging = Averaging::cycle_averaged,
                                 const SurfaceQuadSpec& spec = {});

/// Integral of a density over a traced surface: evaluated at t = t'(x) with
/// the induced volume element, against the same integral frozen at the
/// surface's mean coordinate time with a flat element.  The difference is
/// the tilt correction, expected O(alpha^2) for crest-locked surfaces.
struct SurfaceIntegral {
    double value = 0.0;            ///< on the tilted surface, induced element
    double flat_value = 0.0;       ///< flat slice at the mean surface time
    double tilt_correction = 0.0;  ///< |value - flat_value|
};

/// Mesh integrals use the averaging mode the trace was built with.
SurfaceIntegral total_energy(const FieldState& field, const NaturalSurfaceMesh& mesh);
SurfaceIntegral angular_momentum(const FieldState& field,
                                 const NaturalSurfaceMesh& mesh);

/// Same field with amplitudes rescaled so the slice energy equals target
/// (e.g. m c^2 to express L_z in half-quanta of hbar directly).
FieldState normalize_energy(const FieldState& field, const FlatSlice& slice,
                            double target,
                            Averaging averaging = Averaging::cycle_averaged,
                            const SurfaceQuadSpec& spec = {});

struct QuantizationFlags {
    bool quantized = false;           ///< uniform seam and residual in tolerance
    bool no_natural_surface = false;  ///< non-integrable flow or non-uniform seam
    bool relativistic = false;        ///< alpha >= 1: asymptotics not trusted
};

/// The full chain from a traced surface to quantized angular momentum:
/// seam duration -> integer n -> half-quantum action ratio -> L_z against
/// its predicted (n/2) hbar E / (m c^2).
struct QuantizationReport {
    double delta_t = 0.0;       ///< mean seam duration across the mesh radii
    long long n_est = 0;        ///< half-period count of the seam
    double n_residual = 0.0;    ///< distance of delta_t omega0 / pi from n_est
    double bs_lhs = 0.0;        ///< m c^2 delta_t
    double bs_ratio = 0.0;      ///< bs_lhs / (h/2)
    double L_z = 0.0;           ///< over the field's full support (flat slice)
    double E_tot = 0.0;         ///< over the field's full support (flat slice)
    double E_tail_bound = 0.0;  ///< cutoff tail of the support integrals
    double L_z_predicted = 0.0; ///< (n_est / 2) hbar E_tot / (m c^2)
    double spread_bound = 0.0;  ///< alpha^2 n^2 hbar, expected measurement spread
    double seam_spread = 0.0;   ///< max - min seam duration across radii
    double tilt_correction_E = 0.0;  ///< mesh-band tilted vs flat, diagnostics
    double tilt_correction_L = 0.0;
    bool chain_closed = false;  ///< |L_z - L_z_predicted| within its bound
    QuantizationFlags flags;
};

/// Assemble the report from a traced surface.  The mesh supplies the seam
/// (trace it over the band where the seam is uniform: near the axis the
/// gradient-floored flow cannot keep the corkscrew pitch, and that region
/// is where the surface genuinely breaks); the energy and angular momentum
/// are full-support flat-slice integrals, r_max at the outermost window
/// close (falling back to 1.5x the mesh's outer radius for unwindowed
/// fields, tail bound reported).  Failure modes (non-uniform seam,
/// non-integrable flow) surface as flags, not errors.  The chain check
/// compares |L_z - L_z_predicted| against max(spread_bound,
/// closure_rel_tol * hbar E_tot / (m c^2)).
QuantizationReport quantization_chain(const FieldState& field,
                                      const NaturalSurfaceMesh& mesh,
                                      const SurfaceQuadSpec& spec = {},
                                      double closure_rel_tol = 0.005);

/// JSON text with the stable keys delta_t, n_est, n_residual, bs_ratio,
/// L_z, E_tot, L_z_predicted, spread_bound, flags.  When no natural
/// surface exists the integer count and everything derived from it are
/// omitted: no n is reported for a field that has none.
std::string serialize_report(const QuantizationReport& report);

} // namespace kglab
