#include "kglab/variational.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "kglab/quadrature.hpp"

namespace kglab {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Adaptive quadrature split at interior knots so each panel integrand is
// smooth (sampled paths kink in the third derivative at spline knots).
double integrate_split(const std::function<double(double)>& f, double a, double b,
                       const std::vector<double>& knots, double abs_tol) {
    std::vector<double> cuts;
    for (double k : knots)
        if (k > a && k < b) cuts.push_back(k);
    std::sort(cuts.begin(), cuts.end());
    const double per_piece = abs_tol / static_cast<double>(cuts.size() + 1);
    double s = 0.0, lo = a;
    for (double k : cuts) {
        s += quad::adaptive_gk(f, lo, k, per_piece, 1e-12);
        lo = k;
    }
    return s + quad::adaptive_gk(f, lo, b, per_piece, 1e-12);
}

void check_endpoint(const EndpointCondition& cond, const Trajectory& path, double t,
                    const char* which) {
    if (!cond.pinned) return;
    const double want = *cond.pinned;
    const double have =
        cond.kind == EndpointCondition::Kind::position_fixed ? path.x(t) : path.v(t);
    if (std::abs(have - want) > 1e-6 * std::max(1.0, std::abs(want)))
        throw ValidationError(std::string("trajectory violates the declared ") + which +
                              " boundary datum");
}

} // namespace

double Potential::value(double x) const {
    switch (kind) {
        case PotentialKind::free: return 0.0;
        case PotentialKind::harmonic: return 0.5 * k * x * x;
        case PotentialKind::linear: return g * x;
    }
    return 0.0;
}

double Potential::slope(double x) const {
    switch (kind) {
        case PotentialKind::free: return 0.0;
        case PotentialKind::harmonic: return k * x;
        case PotentialKind::linear: return g;
    }
    return 0.0;
}

Trajectory analytic_trajectory(std::function<double(double)> x,
                               std::function<double(double)> v,
                               std::function<double(double)> a) {
    if (!x || !v || !a) throw ValidationError("trajectory needs x, v, and a");
    return Trajectory{std::move(x), std::move(v), std::move(a), {}};
}

Trajectory spline_trajectory(const std::vector<double>& t, const std::vector<double>& x) {
    const std::size_t n = t.size();
    if (n < 3 || x.size() != n)
        throw ValidationError("spline needs >= 3 samples with matching sizes");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(t[i + 1] > t[i])) throw ValidationError("spline times must increase strictly");
    for (double v : x)
        if (!std::isfinite(v)) throw ValidationError("spline samples must be finite");

    struct Data {
        std::vector<double> t, y, m;  // m: second derivatives, natural ends
    };
    auto d = std::make_shared<Data>();
    d->t = t;
    d->y = x;
    d->m.assign(n, 0.0);

    // Tridiagonal solve for interior second derivatives (Thomas algorithm).
    if (n > 2) {
        const std::size_t ni = n - 2;
        std::vector<double> diag(ni), upper(ni), rhs(ni);
        for (std::size_t i = 0; i < ni; ++i) {
            const double h0 = t[i + 1] - t[i], h1 = t[i + 2] - t[i + 1];
            diag[i] = 2.0 * (h0 + h1);
            upper[i] = h1;
            rhs[i] = 6.0 * ((x[i + 2] - x[i + 1]) / h1 - (x[i + 1] - x[i]) / h0);
        }
        for (std::size_t i = 1; i < ni; ++i) {
            const double lower = t[i + 1] - t[i];  // sub-diagonal h_i
            const double w = lower / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        d->m[ni] = rhs[ni - 1] / diag[ni - 1];
        for (std::size_t i = ni - 1; i > 0; --i)
            d->m[i] = (rhs[i - 1] - upper[i - 1] * d->m[i + 1]) / diag[i - 1];
    }

    auto segment = [d](double tt) {
        const auto it = std::upper_bound(d->t.begin(), d->t.end(), tt);
        const std::size_t hi = std::clamp<std::size_t>(it - d->t.begin(), 1, d->t.size() - 1);
        return hi - 1;
    };
    auto xf = [d, segment](double tt) {
        const std::size_t i = segment(tt);
        const double h = d->t[i + 1] - d->t[i], a = d->t[i + 1] - tt, b = tt - d->t[i];
        return d->m[i] * a * a * a / (6.0 * h) + d->m[i + 1] * b * b * b / (6.0 * h) +
               (d->y[i] - d->m[i] * h * h / 6.0) * a / h +
               (d->y[i + 1] - d->m[i + 1] * h * h / 6.0) * b / h;
    };
    auto vf = [d, segment](double tt) {
        const std::size_t i = segment(tt);
        const double h = d->t[i + 1] - d->t[i], a = d->t[i + 1] - tt, b = tt - d->t[i];
        return -d->m[i] * a * a / (2.0 * h) + d->m[i + 1] * b * b / (2.0 * h) +
               (d->y[i + 1] - d->y[i]) / h - (d->m[i + 1] - d->m[i]) * h / 6.0;
    };
    auto af = [d, segment](double tt) {
        const std::size_t i = segment(tt);
        const double h = d->t[i + 1] - d->t[i];
        return (d->m[i] * (d->t[i + 1] - tt) + d->m[i + 1] * (tt - d->t[i])) / h;
    };

    Trajectory out{xf, vf, af, {}};
    out.knots.assign(t.begin() + 1, t.end() - 1);
    return out;
}

void ParticleScenario::validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) throw ValidationError("mass must be positive");
    if (!(t1 > t0) || !std::isfinite(t0) || !std::isfinite(t1))
        throw ValidationError("need a finite interval with t1 > t0");
    if (!path.x || !path.v || !path.a) throw ValidationError("trajectory is incomplete");
    if (!std::isfinite(potential.k) || !std::isfinite(potential.g))
        throw ValidationError("potential parameters must be finite");
    check_endpoint(start, path, t0, "start");
    check_endpoint(end, path, t1, "end");
}

ParticleVariation bump_variation(double lo, double hi, double amplitude) {
    if (!(hi > lo)) throw ValidationError("bump support must have hi > lo");
    const double w = hi - lo;
    // 64 (u(1-u))^3 peaks at 1, is C^2, and vanishes with two derivatives
    // at the support edges.
    auto delta = [lo, w, amplitude](double t) {
        const double u = (t - lo) / w;
        if (u <= 0.0 || u >= 1.0) return 0.0;
        const double p = u * (1.0 - u);
        return amplitude * 64.0 * p * p * p;
    };
    auto ddelta = [lo, w, amplitude](double t) {
        const double u = (t - lo) / w;
        if (u <= 0.0 || u >= 1.0) return 0.0;
        const double p = u * (1.0 - u);
        return amplitude * 192.0 * p * p * (1.0 - 2.0 * u) / w;
    };
    auto d2delta = [lo, w, amplitude](double t) {
        const double u = (t - lo) / w;
        if (u <= 0.0 || u >= 1.0) return 0.0;
        const double p = u * (1.0 - u), q = 1.0 - 2.0 * u;
        return amplitude * 384.0 * p * (q * q - p) / (w * w);
    };
    return ParticleVariation{delta, ddelta, d2delta};
}

ParticleVariation ramp_variation(double t0, double t1, double amplitude, bool at_end) {
    if (!(t1 > t0)) throw ValidationError("ramp needs t1 > t0");
    const double w = 0.35 * (t1 - t0);
    // smootherstep 6u^5 - 15u^4 + 10u^3: value `amplitude`, slope 0, curvature
    // 0 at the touched endpoint, identically 0 beyond its support.
    auto shape = [w, amplitude](double s) {  // s: distance into the support
        const double u = s / w;
        if (u <= 0.0) return 0.0;
        if (u >= 1.0) return amplitude;
        return amplitude * u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
    };
    auto dshape = [w, amplitude](double s) {
        const double u = s / w;
        if (u <= 0.0 || u >= 1.0) return 0.0;
        const double m = u * (1.0 - u);
        return amplitude * 30.0 * m * m / w;
    };
    auto d2shape = [w, amplitude](double s) {
        const double u = s / w;
        if (u <= 0.0 || u >= 1.0) return 0.0;
        return amplitude * 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / (w * w);
    };
    if (at_end) {
        const double base = t1 - w;
        return ParticleVariation{[shape, base](double t) { return shape(t - base); },
                                 [dshape, base](double t) { return dshape(t - base); },
                                 [d2shape, base](double t) { return d2shape(t - base); }};
    }
    const double base = t0 + w;
    return ParticleVariation{[shape, base](double t) { return shape(base - t); },
                             [dshape, base](double t) { return -dshape(base - t); },
                             [d2shape, base](double t) { return d2shape(base - t); }};
}

std::vector<ParticleVariation> variation_family(const ParticleScenario& s, int count,
                                                unsigned seed) {
    if (count < 1) throw ValidationError("variation family needs count >= 1");
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double T = s.t1 - s.t0;
    const bool start_free = s.start.kind == EndpointCondition::Kind::velocity_fixed;
    const bool end_free = s.end.kind == EndpointCondition::Kind::velocity_fixed;

    std::vector<ParticleVariation> family;
    family.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double lo = s.t0 + T * (0.05 + 0.5 * uni(gen));
        const double width = T * (0.15 + 0.25 * uni(gen));
        const double hi = std::min(lo + width, s.t1 - 0.05 * T);
        const double amp = (uni(gen) < 0.5 ? -1.0 : 1.0) * (0.5 + uni(gen));
        ParticleVariation var = bump_variation(lo, std::max(hi, lo + 0.05 * T), amp);

        const bool add_end = end_free && i % 3 == 2;
        const bool add_start = start_free && i % 3 == 1;
        if (add_end || add_start) {
            const double ramp_amp = (uni(gen) < 0.5 ? -1.0 : 1.0) * (0.5 + uni(gen));
            ParticleVariation ramp = ramp_variation(s.t0, s.t1, ramp_amp, add_end);
            auto add = [](std::function<double(double)> f, std::function<double(double)> g) {
                return [f = std::move(f), g = std::move(g)](double t) { return f(t) + g(t); };
            };
            var = ParticleVariation{add(var.delta, ramp.delta),
                                    add(var.ddelta, ramp.ddelta),
                                    add(var.d2delta, ramp.d2delta)};
        }
        family.push_back(std::move(var));
    }
    return family;
}

double particle_action(const ParticleScenario& s, double abs_tol) {
    s.validate();
    auto lagrangian = [&s](double t) {
        const double v = s.path.v(t);
        return 0.5 * s.mass * v * v - s.potential.value(s.path.x(t));
    };
    return integrate_split(lagrangian, s.t0, s.t1, s.path.knots, abs_tol);
}

FirstVariation particle_first_variation(const ParticleScenario& s,
                                        const ParticleVariation& var, double abs_tol) {
    s.validate();
    if (!var.delta || !var.ddelta || !var.d2delta)
        throw ValidationError("variation is incomplete");

    double amp = 0.0;
    for (int i = 0; i <= 32; ++i)
        amp = std::max(amp, std::abs(var.delta(s.t0 + (s.t1 - s.t0) * i / 32.0)));
    const double edge_tol = 1e-9 * std::max(amp, 1e-30);
    if (s.start.kind == EndpointCondition::Kind::position_fixed &&
        std::abs(var.delta(s.t0)) > edge_tol)
        throw ValidationError("variation moves the position-fixed start point");
    if (s.end.kind == EndpointCondition::Kind::position_fixed &&
        std::abs(var.delta(s.t1)) > edge_tol)
        throw ValidationError("variation moves the position-fixed end point");

    auto integrand = [&](double t) {
        return (-s.potential.slope(s.path.x(t)) - s.mass * s.path.a(t)) * var.delta(t);
    };
    FirstVariation out;
    out.bulk = integrate_split(integrand, s.t0, s.t1, s.path.knots, abs_tol);
    out.boundary = s.mass * (s.path.v(s.t1) * var.delta(s.t1) -
                             s.path.v(s.t0) * var.delta(s.t0));
    return out;
}

ParticleScenario perturbed(const ParticleScenario& s, const ParticleVariation& var,
                           double eps) {
    ParticleScenario out = s;
    auto shift = [eps](std::function<double(double)> f, std::function<double(double)> d) {
        return [f = std::move(f), d = std::move(d), eps](double t) {
            return f(t) + eps * d(t);
        };
    };
    out.path.x = shift(s.path.x, var.delta);
    out.path.v = shift(s.path.v, var.ddelta);
    out.path.a = shift(s.path.a, var.d2delta);
    // declared boundary data may no longer hold on the perturbed path
    out.start.pinned.reset();
    out.end.pinned.reset();
    return out;
}

// ---------------------------------------------------------------------------
// Field side
// ---------------------------------------------------------------------------

void Region4D::validate() const {
    if (!(t1 > t0)) throw ValidationError("region needs t1 > t0");
    if (!(r_max > 0.0) || !(z_half > 0.0))
        throw ValidationError("region needs r_max > 0 and z_half > 0");
    if (!std::isfinite(t0) || !std::isfinite(t1) || !std::isfinite(r_max) ||
        !std::isfinite(z_half))
        throw ValidationError("region bounds must be finite");
}

namespace {

// Radial integration pieces: [0, r_max] split at every window knot.
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

struct GLAxis {
    std::vector<double> x, w;
};

GLAxis gl_axis(double a, double b, int n) {
    GLAxis ax;
    const auto& nodes = quad::GaussLegendre::nodes(n);
    const auto& weights = quad::GaussLegendre::weights(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        ax.x.push_back(mid + half * nodes[i]);
        ax.w.push_back(half * weights[i]);
    }
    return ax;
}

// Spatial quadrature nodes for a cylinder: GL in r per piece, periodic
// trapezoid in theta, GL in z.
struct CylinderGrid {
    std::vector<double> r, wr, th, z, wz;
    double wth = 0.0;
};

CylinderGrid cylinder_grid(const FieldState& field, double r_max, double z_half,
                           const VolumeQuadSpec& spec) {
    CylinderGrid g;
    const std::vector<double> cuts = radial_cuts(field, r_max);
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        GLAxis ax = gl_axis(cuts[p], cuts[p + 1], spec.n_r);
        g.r.insert(g.r.end(), ax.x.begin(), ax.x.end());
        g.wr.insert(g.wr.end(), ax.w.begin(), ax.w.end());
    }
    for (int i = 0; i < spec.n_theta; ++i) g.th.push_back(two_pi * i / spec.n_theta);
    g.wth = two_pi / spec.n_theta;
    GLAxis az = gl_axis(-z_half, z_half, spec.n_z);
    g.z = az.x;
    g.wz = az.w;
    return g;
}

double shell_tail_bound(const Region4D& region,
                        const std::function<double(const CylPoint&)>& density) {
    double sup = 0.0;
    for (int i = 0; i <= 10; ++i) {
        const double r = region.r_max * (1.0 + 0.1 * i);
        for (int k = 0; k < 16; ++k) {
            const double th = two_pi * k / 16.0;
            for (double z : {-region.z_half, 0.0, region.z_half}) {
                for (int j = 0; j < 7; ++j) {
                    const double t = region.t0 + (region.t1 - region.t0) * j / 6.0;
                    sup = std::max(sup, std::abs(density(CylPoint{t, r, th, z})));
                }
            }
        }
    }
    const double shell_vol = 3.0 * std::numbers::pi * region.r_max * region.r_max *
                             2.0 * region.z_half;
    return sup * shell_vol * (region.t1 - region.t0);
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

} // namespace

FieldActionResult field_action(const FieldState& field, const Region4D& region,
                               const VolumeQuadSpec& spec) {
    region.validate();
    if (spec.n_t < 2 || spec.n_r < 2 || spec.n_theta < 4 || spec.n_z < 1)
        throw ValidationError("quadrature spec is too coarse");

    const double c2 = field.constants.c * field.constants.c;
    const double kap = field.constants.compton_k();
    const double kap2 = kap * kap;
    auto density = [&](const CylPoint& p) {
        const FieldSample fs = evaluate(field, p);
        const double grad2 = fs.grad.r * fs.grad.r + fs.grad.theta * fs.grad.theta +
                             fs.grad.z * fs.grad.z;
        return 0.5 * (fs.d_t * fs.d_t / c2 - grad2 - kap2 * fs.phi * fs.phi);
    };

    FieldActionResult out;
    out.tail_bound = shell_tail_bound(region, density);
    if (out.tail_bound > spec.tail_tol)
        throw QuadratureError("cutoff tail bound " + std::to_string(out.tail_bound) +
                              " exceeds the requested tolerance");

    const CylinderGrid g = cylinder_grid(field, region.r_max, region.z_half, spec);
    const GLAxis at = gl_axis(region.t0, region.t1, spec.n_t);
    out.action = indexed_sum(at.x.size(), spec.exec, [&](std::size_t i) {
        const double t = at.x[i];
        double slab = 0.0;
        for (std::size_t ir = 0; ir < g.r.size(); ++ir)
            for (double th : g.th)
                for (std::size_t iz = 0; iz < g.z.size(); ++iz)
                    slab += g.wr[ir] * g.wth * g.wz[iz] * g.r[ir] *
                            density(CylPoint{t, g.r[ir], th, g.z[iz]});
        return at.w[i] * slab;
    });
    return out;
}

BoundaryTerm field_boundary_term(const FieldState& field, const FlatSlice& slice,
                                 const FieldVariation& var, const VolumeQuadSpec& spec) {
    slice.validate();
    if (!var.delta) throw ValidationError("field variation is incomplete");
    const double c = field.constants.c;
    const CylinderGrid g = cylinder_grid(field, slice.r_max, slice.z_half, spec);

    BoundaryTerm out;
    const double scale = std::max(field.dphi_dt_scale / c, 1e-300);
    std::vector<double> slot(g.r.size(), 0.0);
    std::vector<double> slot_max(g.r.size(), 0.0);
    std::vector<std::exception_ptr> errors(g.r.size());
    for_each_index(g.r.size(), spec.exec, [&](std::size_t ir) {
        try {
            double ring = 0.0, ring_max = 0.0;
            for (double th : g.th) {
                for (std::size_t iz = 0; iz < g.z.size(); ++iz) {
                    const CylPoint p{slice.t, g.r[ir], th, g.z[iz]};
                    const double dn = slice.orientation * evaluate(field, p).d_t / c;
                    ring_max = std::max(ring_max, std::abs(dn));
                    ring += g.wth * g.wz[iz] * dn * var.delta(p);
                }
            }
            slot[ir] = g.wr[ir] * g.r[ir] * ring;
            slot_max[ir] = ring_max;
        } catch (...) {
            errors[ir] = std::current_exception();
        }
    });
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
    double sup = 0.0;
    for (std::size_t ir = 0; ir < g.r.size(); ++ir) {
        out.value += slot[ir];
        sup = std::max(sup, slot_max[ir]);
    }
    out.max_normal_deriv = sup / scale;
    return out;
}

BoundaryTerm field_boundary_term(const FieldState& field, const NaturalSurfaceMesh& mesh,
                                 const FieldVariation& var) {
    if (!var.delta) throw ValidationError("field variation is incomplete");
    if (!mesh.spacelike_ok)
        throw ValidationError("surface is not spacelike; boundary term undefined");
    const NormalDerivativeProfile prof = normal_derivative_profile(field, mesh);

    const std::vector<double> wr = trapezoid_weights(mesh.r_values);
    const std::vector<double> wz = trapezoid_weights(mesh.z_values);
    const double h_th = two_pi / mesh.n_theta;

    BoundaryTerm out;
    out.max_normal_deriv = prof.max_abs;
    for (std::size_t ir = 0; ir < mesh.r_values.size(); ++ir) {
        for (int ith = 0; ith <= mesh.n_theta; ++ith) {
            const double wth = (ith == 0 || ith == mesh.n_theta) ? 0.5 * h_th : h_th;
            for (std::size_t iz = 0; iz < mesh.z_values.size(); ++iz) {
                const std::size_t at = mesh.idx(ir, ith, iz);
                const CylPoint p{mesh.t_of_x[at], mesh.r_values[ir], mesh.theta_at(ith),
                                 mesh.z_values[iz]};
                out.value += wr[ir] * wth * wz[iz] * mesh.r_values[ir] *
                             prof.lapse[at] * prof.values[at] * var.delta(p);
            }
        }
    }
    return out;
}

namespace {

BoundaryInspection inspect(const NormalDerivativeProfile& prof,
                           const std::vector<double>& r_values,
                           const std::vector<double>& z_values, int n_theta,
                           bool phi_fixed, double tol_natural) {
    BoundaryInspection insp;
    insp.max_normal_deriv = prof.max_abs;
    insp.tol_used = tol_natural;

    const std::vector<double> wr = trapezoid_weights(r_values);
    const std::vector<double> wz = trapezoid_weights(z_values);
    const double h_th = two_pi / n_theta;
    std::size_t at = 0;
    for (std::size_t ir = 0; ir < r_values.size(); ++ir)
        for (int ith = 0; ith <= n_theta; ++ith) {
            const double wth = (ith == 0 || ith == n_theta) ? 0.5 * h_th : h_th;
            for (std::size_t iz = 0; iz < z_values.size(); ++iz, ++at)
                insp.witness_term += wr[ir] * wth * wz[iz] * r_values[ir] *
                                     prof.lapse[at] * prof.values[at] * prof.values[at];
        }

    if (phi_fixed)
        insp.kind = BoundaryClass::coordinate_bc;
    else if (prof.max_abs < tol_natural)
        insp.kind = BoundaryClass::natural_ncbc;
    else
        insp.kind = BoundaryClass::non_extremizing_ncbc;
    return insp;
}

} // namespace

BoundaryInspection classify_boundary(const FieldState& field, const FlatSlice& slice,
                                     const SurfaceDomain& probe, bool phi_fixed,
                                     double tol_natural) {
    const NormalDerivativeProfile prof = normal_derivative_profile(field, slice, probe);
    const int nth = std::max(probe.n_theta, 8);
    return inspect(prof, probe.r_values, probe.z_values, nth, phi_fixed, tol_natural);
}

BoundaryInspection classify_boundary(const FieldState& field,
                                     const NaturalSurfaceMesh& mesh, bool phi_fixed,
                                     double tol_natural) {
    const NormalDerivativeProfile prof = normal_derivative_profile(field, mesh);
    return inspect(prof, mesh.r_values, mesh.z_values, mesh.n_theta, phi_fixed,
                   tol_natural);
}

} // namespace kglab
