#include "kglab/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"
#include "kglab/quadrature.hpp"

namespace kglab {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::vector<double> radial_cuts(const FieldState& field, double r_max) {
    std::vector<double> cuts{0.0, r_max};
    for (const CylindricalMode& m : field.modes) {
        if (!m.window) continue;
        for (double k : m.window->knots())
            if (k > 0.0 && k < r_max) cuts.push_back(k);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

struct SliceGrid {
    std::vector<double> r, wr, z, wz;
    int n_theta = 0;
    double wth = 0.0;
};

SliceGrid slice_grid(const FieldState& field, double r_max, double z_half,
                     const SurfaceQuadSpec& spec) {
    SliceGrid g;
    const auto& nodes = quad::GaussLegendre::nodes(spec.n_r);
    const auto& weights = quad::GaussLegendre::weights(spec.n_r);
    const std::vector<double> cuts = radial_cuts(field, r_max);
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double mid = 0.5 * (cuts[p] + cuts[p + 1]);
        const double half = 0.5 * (cuts[p + 1] - cuts[p]);
        for (int i = 0; i < spec.n_r; ++i) {
            g.r.push_back(mid + half * nodes[i]);
            g.wr.push_back(half * weights[i]);
        }
    }
    const auto& zn = quad::GaussLegendre::nodes(spec.n_z);
    const auto& zw = quad::GaussLegendre::weights(spec.n_z);
    for (int i = 0; i < spec.n_z; ++i) {
        g.z.push_back(z_half * zn[i]);
        g.wz.push_back(z_half * zw[i]);
    }
    g.n_theta = spec.n_theta;
    g.wth = two_pi / spec.n_theta;
    return g;
}

// Density integrated over a flat slice with its shell tail bound.
template <class Density>
DensityIntegral integrate_slice(const FieldState& field, const FlatSlice& slice,
                                const SurfaceQuadSpec& spec, Density&& density) {
    slice.validate();
    if (spec.n_r < 2 || spec.n_theta < 4 || spec.n_z < 1)
        throw ValidationError("quadrature spec is too coarse");

    DensityIntegral out;
    double sup = 0.0;
    for (int i = 0; i <= 10; ++i) {
        const double r = slice.r_max * (1.0 + 0.1 * i);
        for (int k = 0; k < 16; ++k)
            for (double z : {-slice.z_half, 0.0, slice.z_half})
                sup = std::max(sup,
                               std::abs(density(CylPoint{slice.t, r, two_pi * k / 16.0, z})));
    }
    out.tail_bound = sup * 3.0 * std::numbers::pi * slice.r_max * slice.r_max * 2.0 *
                     slice.z_half;
    if (out.tail_bound > spec.tail_tol)
        throw QuadratureError("cutoff tail bound " + std::to_string(out.tail_bound) +
                              " exceeds the requested tolerance");

    const SliceGrid g = slice_grid(field, slice.r_max, slice.z_half, spec);
    out.value = indexed_sum(g.r.size(), spec.exec, [&](std::size_t ir) {
        double ring = 0.0;
        for (int k = 0; k < g.n_theta; ++k) {
            const double th = two_pi * k / g.n_theta;
            for (std::size_t iz = 0; iz < g.z.size(); ++iz)
                ring += g.wth * g.wz[iz] *
                        density(CylPoint{slice.t, g.r[ir], th, g.z[iz]});
        }
        return g.wr[ir] * g.r[ir] * ring;
    });
    return out;
}

std::vector<double> trapezoid_weights(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 1) return {1.0};  // unit-thickness slab convention
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = i > 0 ? x[i - 1] : x[0];
        const double hi = i + 1 < n ? x[i + 1] : x[n - 1];
        w[i] = 0.5 * (hi - lo);
    }
    return w;
}

// Density integrated over the traced surface (induced element, t = t'(x))
// and over its flat stand-in (mean surface time, unit element).
template <class Density>
SurfaceIntegral integrate_mesh(const FieldState& field, const NaturalSurfaceMesh& mesh,
                               Density&& density) {
    if (mesh.t_of_x.empty()) throw ValidationError("mesh is empty");
    if (!mesh.spacelike_ok)
        throw ValidationError("surface is not spacelike; surface integral undefined");
    const NormalDerivativeProfile prof = normal_derivative_profile(field, mesh);
    const std::vector<double> wr = trapezoid_weights(mesh.r_values);
    const std::vector<double> wz = trapezoid_weights(mesh.z_values);
    const double h_th = two_pi / mesh.n_theta;

    double t_mean = 0.0;
    for (double t : mesh.t_of_x) t_mean += t;
    t_mean /= static_cast<double>(mesh.t_of_x.size());

    SurfaceIntegral out;
    for (std::size_t ir = 0; ir < mesh.r_values.size(); ++ir) {
        for (int ith = 0; ith <= mesh.n_theta; ++ith) {
            const double wth = (ith == 0 || ith == mesh.n_theta) ? 0.5 * h_th : h_th;
            const double theta = mesh.theta_at(ith);
            for (std::size_t iz = 0; iz < mesh.z_values.size(); ++iz) {
                const std::size_t at = mesh.idx(ir, ith, iz);
                const double w = wr[ir] * wth * wz[iz] * mesh.r_values[ir];
                out.value += w * prof.lapse[at] *
                             density(CylPoint{mesh.t_of_x[at], mesh.r_values[ir], theta,
                                              mesh.z_values[iz]});
                out.flat_value += w * density(CylPoint{t_mean, mesh.r_values[ir], theta,
                                                       mesh.z_values[iz]});
            }
        }
    }
    out.tilt_correction = std::abs(out.value - out.flat_value);
    return out;
}

double energy_density(const FieldState& field, const CylPoint& p, Averaging avg) {
    return stress_energy_at(field, p, avg).t00;
}

double angular_momentum_density(const FieldState& field, const CylPoint& p,
                                Averaging avg) {
    const double c2 = field.constants.c * field.constants.c;
    return p.r * stress_energy_at(field, p, avg).t0i.theta / c2;
}

} // namespace

SeamQuantum quantize_seam(double delta_t, const PhysicalConstants& constants) {
    if (!std::isfinite(delta_t)) throw ValidationError("seam duration must be finite");
    constants.validate();
    const double x = delta_t * constants.omega0() / std::numbers::pi;
    SeamQuantum q;
    // nearbyint under the default rounding mode resolves .5 ties to the
    // even neighbour, so a dead-center seam never invents an extra quantum.
    q.n_est = static_cast<long long>(std::nearbyint(x));
    q.n_residual = std::abs(x - static_cast<double>(q.n_est));
    return q;
}

BohrSommerfeld bohr_sommerfeld_check(const FieldState& field, const LoopSpec& loop,
                                     const TraceOptions& opts) {
    const double delta_t = trace_loop(field, loop, opts);
    const PhysicalConstants& pc = field.constants;
    BohrSommerfeld bs;
    // m * contour integral of v . dl; the trace already divided by c^2.
    bs.bs_lhs = pc.m * pc.c * pc.c * delta_t;
    bs.bs_ratio = bs.bs_lhs / (0.5 * pc.h());
    const double other_route = delta_t * pc.omega0() / std::numbers::pi;
    if (std::abs(bs.bs_ratio - other_route) >
        1e-12 * std::max(1.0, std::abs(other_route)))
        throw std::logic_error("action ratio disagrees with its seam-duration form");
    return bs;
}

DensityIntegral total_energy(const FieldState& field, const FlatSlice& slice,
                             Averaging averaging, const SurfaceQuadSpec& spec) {
    return integrate_slice(field, slice, spec, [&](const CylPoint& p) {
        return energy_density(field, p, averaging);
    });
}

DensityIntegral angular_momentum(const FieldState& field, const FlatSlice& slice,
                                 Averaging averaging, const SurfaceQuadSpec& spec) {
    return integrate_slice(field, slice, spec, [&](const CylPoint& p) {
        return angular_momentum_density(field, p, averaging);
    });
}

SurfaceIntegral total_energy(const FieldState& field, const NaturalSurfaceMesh& mesh) {
    return integrate_mesh(field, mesh, [&](const CylPoint& p) {
        return energy_density(field, p, mesh.averaging);
    });
}

SurfaceIntegral angular_momentum(const FieldState& field,
                                 const NaturalSurfaceMesh& mesh) {
    return integrate_mesh(field, mesh, [&](const CylPoint& p) {
        return angular_momentum_density(field, p, mesh.averaging);
    });
}

FieldState normalize_energy(const FieldState& field, const FlatSlice& slice,
                            double target, Averaging averaging,
                            const SurfaceQuadSpec& spec) {
    if (!(target > 0.0) || !std::isfinite(target))
        throw ValidationError("target energy must be positive and finite");
    const double raw = total_energy(field, slice, averaging, spec).value;
    if (!(raw > 0.0))
        throw ValidationError("field carries no energy on the slice; cannot rescale");
    const double scale = std::sqrt(target / raw);
    std::vector<CylindricalMode> modes = field.modes;
    for (CylindricalMode& m : modes) m.amplitude *= scale;
    return build_field(field.constants, std::move(modes), field.frame);
}

QuantizationReport quantization_chain(const FieldState& field,
                                      const NaturalSurfaceMesh& mesh,
                                      const SurfaceQuadSpec& spec,
                                      double closure_rel_tol) {
    const PhysicalConstants& pc = field.constants;
    const double alpha = field.alpha;

    QuantizationReport rep;
    const SeamReport seam = seam_uniformity(mesh, alpha);
    rep.delta_t = seam.mean_jump;
    rep.seam_spread = seam.spread;
    rep.flags.no_natural_surface = !mesh.integrable || !seam.is_uniform;
    rep.flags.relativistic = field.relativistic;

    const SeamQuantum q = quantize_seam(rep.delta_t, pc);
    rep.n_est = q.n_est;
    rep.n_residual = q.n_residual;
    rep.flags.quantized =
        seam.is_uniform && q.n_residual < std::max(5.0 * alpha * alpha, 0.01);

    rep.bs_lhs = pc.m * pc.c * pc.c * rep.delta_t;
    rep.bs_ratio = rep.bs_lhs / (0.5 * pc.h());

    // Full-support energy and angular momentum: out to the last window
    // close, or past the mesh with a reported tail for unwindowed fields.
    double r_support = 0.0;
    for (const CylindricalMode& m : field.modes)
        if (m.window) r_support = std::max(r_support, m.window->knots().back());
    if (r_support == 0.0) r_support = 1.5 * mesh.r_values.back();

    double t_mean = 0.0;
    for (double t : mesh.t_of_x) t_mean += t;
    t_mean /= static_cast<double>(std::max<std::size_t>(mesh.t_of_x.size(), 1));
    const double z_half =
        mesh.z_values.size() > 1
            ? std::max(std::abs(mesh.z_values.front()), std::abs(mesh.z_values.back()))
            : 0.5;  // unit-thickness slab for z-uniform fields
    const FlatSlice support{t_mean, r_support, z_half, +1};

    const DensityIntegral energy = total_energy(field, support, mesh.averaging, spec);
    const DensityIntegral momentum = angular_momentum(field, support, mesh.averaging, spec);
    rep.E_tot = energy.value;
    rep.L_z = momentum.value;
    rep.E_tail_bound = energy.tail_bound;

    // Band diagnostics: how much the tilted-surface integrals over the mesh
    // domain differ from their flat counterparts.
    rep.tilt_correction_E = total_energy(field, mesh).tilt_correction;
    rep.tilt_correction_L = angular_momentum(field, mesh).tilt_correction;

    const double mc2 = pc.m * pc.c * pc.c;
    rep.L_z_predicted = 0.5 * static_cast<double>(rep.n_est) * pc.hbar * rep.E_tot / mc2;
    rep.spread_bound = alpha * alpha * static_cast<double>(rep.n_est) *
                       static_cast<double>(rep.n_est) * pc.hbar;
    const double closure_tol =
        std::max(rep.spread_bound, closure_rel_tol * pc.hbar * rep.E_tot / mc2);
    // the chain cannot close without a surface to carry the seam
    rep.chain_closed = !rep.flags.no_natural_surface &&
                       std::abs(rep.L_z - rep.L_z_predicted) <= closure_tol;
    return rep;
}

std::string serialize_report(const QuantizationReport& report) {
    nlohmann::json j;
    j["delta_t"] = report.delta_t;
    j["bs_ratio"] = report.bs_ratio;
    j["L_z"] = report.L_z;
    j["E_tot"] = report.E_tot;
    j["seam_spread"] = report.seam_spread;
    j["E_tail_bound"] = report.E_tail_bound;
    j["tilt_correction_E"] = report.tilt_correction_E;
    j["tilt_correction_L"] = report.tilt_correction_L;
    j["chain_closed"] = report.chain_closed;
    if (!report.flags.no_natural_surface) {
        // the integer count only means something when a closed surface exists
        j["n_est"] = report.n_est;
        j["n_residual"] = report.n_residual;
        j["L_z_predicted"] = report.L_z_predicted;
        j["spread_bound"] = report.spread_bound;
    }
    j["flags"] = {{"quantized", report.flags.quantized},
                  {"no_natural_surface", report.flags.no_natural_surface},
                  {"relativistic", report.flags.relativistic}};
    return j.dump(2);
}

} // namespace kglab
