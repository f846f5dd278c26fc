#include "kglab/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kglab/bessel.hpp"

namespace kglab {

namespace {

constexpr double pi = std::numbers::pi;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw ValidationError(std::string("non-finite ") + what);
}

// R(r) = W(r) J_|l|(k_r r) and the radial ingredients of the gradient and
// the Laplacian, with the removable r = 0 singularities taken by series.
struct RadialEval {
    double R = 0.0;
    double dR = 0.0;        // dR/dr
    double R_over_r = 0.0;  // R/r, finite for |l| >= 1
    double lap = 0.0;       // R'' + R'/r - l^2 R / r^2
};

// J'' + J'/x - n^2 J / x^2 for small x, from the power series of J_n:
// the x^{n+2m-2} coefficient is c_m * 4m(m+n).  Equals -J_n exactly by the
// Bessel ODE; computed independently here so the residual check stays honest.
double bessel_lap_series(int n, double x) {
    double fact = 1.0;  // (n+1)!
    for (int k = 2; k <= n + 1; ++k) fact *= k;
    const double p2 = std::ldexp(1.0, -(n + 2));  // 2^-(n+2)
    double xp = 1.0;                              // x^n
    for (int k = 0; k < n; ++k) xp *= x;
    const double x2 = x * x;
    const double t1 = -xp * p2 * 4.0 * (n + 1) / fact;              // - x^n / (2^n n!)
    const double t2 = xp * x2 * p2 / fact;                          // + x^{n+2}/(2^{n+2} (n+1)!)
    const double t3 = -xp * x2 * x2 * p2 / (8.0 * fact * (n + 2));  // - x^{n+4}/(2^{n+5} (n+2)!)
    return t1 + t2 + t3;
}

RadialEval radial_eval(const CylindricalMode& mode, double r) {
    RadialEval out;
    const int al = std::abs(mode.l);
    const double kr = mode.k_r;
    const double x = kr * r;

    const double J = bessel::jn(al, x);
    const double Jp = bessel::jn_prime(al, x);

    double W = 1.0, Wp = 0.0, Wpp = 0.0;
    if (mode.window) {
        W = mode.window->value(r);
        Wp = mode.window->deriv(r);
        Wpp = mode.window->second(r);
    }

    out.R = W * J;
    out.dR = Wp * J + W * kr * Jp;

    if (al >= 1) {
        out.R_over_r = W * kr * bessel::jn_over_x(al, x);
    } else if (r > 0.0) {
        out.R_over_r = out.R / r;
    }  // l = 0 modes never use R/r through the angular gradient

    // Pure Bessel part of R'' + R'/r - l^2 R/r^2 is k_r^2 (J'' + J'/x - n^2 J/x^2);
    // window terms W''J + 2W'k_r J' + W'J/r are only nonzero inside ramps,
    // which validation keeps away from the axis.
    double D;
    if (al == 0) {
        // J0''(x) + J0'(x)/x with J0' = -J1; stable via J1(x)/x
        D = bessel::jn_second(0, x) - bessel::jn_over_x(1, x);
    } else if (x >= 0.05) {
        D = bessel::jn_second(al, x) + Jp / x -
            static_cast<double>(al) * al * bessel::jn_over_x(al, x) / x;
    } else {
        D = bessel_lap_series(al, x);
    }
    out.lap = W * kr * kr * D;
    if (Wp != 0.0 || Wpp != 0.0) {
        // r > 0 inside any ramp by RadialWindow::validate
        out.lap += Wpp * J + 2.0 * Wp * kr * Jp + Wp * J / r;
    }
    return out;
}

} // namespace

void RadialWindow::validate() const {
    for (double v : {inner_start, inner_len, outer_start, outer_len})
        if (!std::isfinite(v) || v < 0.0)
            throw ValidationError("radial window parameters must be finite and >= 0");
    if (inner_len > 0.0 && inner_start <= 0.0)
        throw ValidationError("radial window inner ramp must start at r > 0");
    if (outer_len > 0.0) {
        if (outer_start <= 0.0)
            throw ValidationError("radial window outer ramp must start at r > 0");
        if (inner_len > 0.0 && outer_start < inner_start + inner_len)
            throw ValidationError("radial window ramps overlap");
    }
}

double RadialWindow::value(double r) const {
    if (inner_len > 0.0) {
        if (r <= inner_start) return 0.0;
        if (r < inner_start + inner_len) {
            const double u = (r - inner_start) / inner_len;
            return 0.5 * (1.0 - std::cos(pi * u));
        }
    }
    if (outer_len > 0.0) {
        if (r >= outer_start + outer_len) return 0.0;
        if (r > outer_start) {
            const double u = (r - outer_start) / outer_len;
            return 0.5 * (1.0 + std::cos(pi * u));
        }
    }
    return 1.0;
}

double RadialWindow::deriv(double r) const {
    if (inner_len > 0.0 && r > inner_start && r < inner_start + inner_len) {
        const double u = (r - inner_start) / inner_len;
        return 0.5 * pi / inner_len * std::sin(pi * u);
    }
    if (outer_len > 0.0 && r > outer_start && r < outer_start + outer_len) {
        const double u = (r - outer_start) / outer_len;
        return -0.5 * pi / outer_len * std::sin(pi * u);
    }
    return 0.0;
}

double RadialWindow::second(double r) const {
    if (inner_len > 0.0 && r > inner_start && r < inner_start + inner_len) {
        const double u = (r - inner_start) / inner_len;
        return 0.5 * pi * pi / (inner_len * inner_len) * std::cos(pi * u);
    }
    if (outer_len > 0.0 && r > outer_start && r < outer_start + outer_len) {
        const double u = (r - outer_start) / outer_len;
        return -0.5 * pi * pi / (outer_len * outer_len) * std::cos(pi * u);
    }
    return 0.0;
}

std::vector<double> RadialWindow::knots() const {
    std::vector<double> k;
    if (inner_len > 0.0) {
        k.push_back(inner_start);
        k.push_back(inner_start + inner_len);
    }
    if (outer_len > 0.0) {
        k.push_back(outer_start);
        k.push_back(outer_start + outer_len);
    }
    return k;
}

FieldState build_field(const PhysicalConstants& pc, std::vector<CylindricalMode> modes,
                       const Frame& frame) {
    pc.validate();
    if (modes.empty()) throw ValidationError("empty mode list");

    FieldState f;
    f.constants = pc;
    f.frame = frame;

    const double w0 = pc.omega0();
    double kmax = 0.0;
    for (auto& m : modes) {
        require_finite(m.amplitude, "amplitude");
        require_finite(m.k_r, "k_r");
        require_finite(m.k_z, "k_z");
        require_finite(m.phase, "phase");
        require_finite(m.axial_phase, "axial_phase");
        if (m.k_r < 0.0) throw ValidationError("k_r must be >= 0");
        if (m.window) {
            m.window->validate();
            f.windowed = true;
        }
        const double k2 = m.k_r * m.k_r + m.k_z * m.k_z;
        m.omega = std::sqrt(pc.c * pc.c * k2 + w0 * w0);
        kmax = std::max(kmax, std::sqrt(k2));

        const double pj = bessel::peak_value(std::abs(m.l));
        const double a = std::abs(m.amplitude);
        f.phi_scale += a * pj;
        f.dphi_dt_scale += a * m.omega * pj;
        f.grad_scale += a * std::sqrt(k2) * pj;
    }
    f.modes = std::move(modes);
    f.alpha = kmax / pc.compton_k();
    f.relativistic = f.alpha >= 1.0;
    f.t00_scale = 0.5 * (f.dphi_dt_scale * f.dphi_dt_scale +
                         pc.c * pc.c * f.grad_scale * f.grad_scale +
                         w0 * w0 * f.phi_scale * f.phi_scale);
    return f;
}

FieldState make_uniform_oscillator(const PhysicalConstants& pc, double amplitude,
                                   double phase) {
    CylindricalMode m;
    m.amplitude = amplitude;
    m.phase = phase;
    return build_field(pc, {m});
}

FieldState make_rotor(int l, double alpha, const PhysicalConstants& pc,
                      double amplitude, std::optional<RadialWindow> window,
                      double k_z) {
    if (!(alpha > 0.0)) throw ValidationError("rotor needs alpha > 0");
    CylindricalMode m;
    m.amplitude = amplitude;
    m.l = l;
    m.k_r = alpha * pc.compton_k();
    m.k_z = k_z;
    m.window = std::move(window);
    return build_field(pc, {m});
}

FieldState make_mixed(int l1, int l2, double alpha, const PhysicalConstants& pc,
                      double a1, double a2, std::optional<RadialWindow> window) {
    if (!(alpha > 0.0)) throw ValidationError("mixed preset needs alpha > 0");
    CylindricalMode m1, m2;
    m1.amplitude = a1;
    m1.l = l1;
    m1.k_r = alpha * pc.compton_k();
    m1.window = window;
    m2.amplitude = a2;
    m2.l = l2;
    m2.k_r = m1.k_r;  // same omega: the superposed flow is static in time
    m2.window = std::move(window);
    return build_field(pc, {m1, m2});
}

RadialWindow default_rotor_window(double k_r) {
    if (!(k_r > 0.0)) throw ValidationError("window scale needs k_r > 0");
    RadialWindow w;
    w.outer_start = 8.0 / k_r;
    w.outer_len = 4.0 / k_r;
    return w;
}

FieldSample evaluate(const FieldState& field, const CylPoint& point,
                     bool second_derivs) {
    require_finite(point.t, "t");
    require_finite(point.r, "r");
    require_finite(point.theta, "theta");
    require_finite(point.z, "z");
    if (point.r < 0.0) throw ValidationError("r must be >= 0");

    FieldSample s;
    s.has_second = second_derivs;
    for (const auto& m : field.modes) {
        const RadialEval re = radial_eval(m, point.r);
        const double psi = m.l * point.theta + m.k_z * point.z - m.omega * point.t +
                           m.total_phase();
        const double cp = std::cos(psi);
        const double sp = std::sin(psi);
        const double A = m.amplitude;
        s.phi += A * re.R * cp;
        s.d_t += A * re.R * m.omega * sp;
        s.grad.r += A * re.dR * cp;
        s.grad.theta += -A * m.l * re.R_over_r * sp;
        s.grad.z += -A * m.k_z * re.R * sp;
        if (second_derivs) {
            s.d_tt += -A * re.R * m.omega * m.omega * cp;
            s.laplacian += A * cp * (re.lap - m.k_z * m.k_z * re.R);
        }
    }
    return s;
}

std::vector<ModePhasor> phasors(const FieldState& field, double r, double theta,
                                double z) {
    if (r < 0.0) throw ValidationError("r must be >= 0");
    std::vector<ModePhasor> out;
    out.reserve(field.modes.size());
    for (const auto& m : field.modes) {
        const RadialEval re = radial_eval(m, r);
        const double chi = m.l * theta + m.k_z * z + m.total_phase();
        const std::complex<double> E(std::cos(chi), std::sin(chi));
        ModePhasor p;
        p.omega = m.omega;
        p.phi = m.amplitude * re.R * E;
        p.d_t = std::complex<double>(0.0, -m.omega) * p.phi;
        p.d_r = m.amplitude * re.dR * E;
        p.d_theta_over_r =
            std::complex<double>(0.0, static_cast<double>(m.l)) * m.amplitude * re.R_over_r * E;
        p.d_z = std::complex<double>(0.0, m.k_z) * p.phi;
        out.push_back(p);
    }
    return out;
}

double kge_residual(const FieldState& field, const CylPoint& point) {
    const FieldSample s = evaluate(field, point, true);
    const double c2 = field.constants.c * field.constants.c;
    const double kap2 = field.constants.compton_k() * field.constants.compton_k();
    const double res = s.d_tt / c2 - s.laplacian + kap2 * s.phi;
    return res / (kap2 * field.phi_scale);
}

double alpha_parameter(const FieldState& field) { return field.alpha; }

Frame crest_frame(const FieldState& field, std::size_t mode_index, double theta_ref) {
    if (mode_index >= field.modes.size())
        throw ValidationError("mode index out of range");
    const auto& m = field.modes[mode_index];
    if (m.k_z != 0.0)
        throw ValidationError("helical crest frame requires k_z = 0");
    Frame fr;
    fr.pitch = m.omega > 0.0 ? static_cast<double>(m.l) / m.omega : 0.0;
    fr.theta_ref = theta_ref;
    fr.t_shift = (m.l * theta_ref + m.total_phase()) / m.omega;
    return fr;
}

CylPoint crest_point(const FieldState& field, std::size_t mode_index, double r,
                     double theta, double z) {
    if (mode_index >= field.modes.size())
        throw ValidationError("mode index out of range");
    const auto& m = field.modes[mode_index];
    CylPoint p;
    p.r = r;
    p.theta = theta;
    p.z = z;
    p.t = (m.l * theta + m.k_z * z + m.total_phase()) / m.omega;
    return p;
}

EnvelopePair envelope_decompose(const FieldState& field, const Window4D& window,
                                const Frame& frame) {
    if (!(window.duration > 0.0))
        throw ValidationError("envelope window must have positive duration");
    if (window.n_t < 2 || window.n_space < 1)
        throw ValidationError("envelope window needs n_t >= 2, n_space >= 1");
    if (window.center.r < 0.0) throw ValidationError("r must be >= 0");

    const double w0 = field.constants.omega0();
    const double rho = field.constants.c * window.duration;

    auto axis = [](double lo, double hi, int n) {
        std::vector<double> v(n);
        if (n == 1) {
            v[0] = 0.5 * (lo + hi);
            return v;
        }
        for (int i = 0; i < n; ++i)
            v[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
        return v;
    };

    const auto rs = axis(std::max(0.0, window.center.r - rho), window.center.r + rho,
                         window.n_space);
    const double th_span = window.center.r > rho ? rho / window.center.r : pi;
    const auto ths = axis(window.center.theta - th_span, window.center.theta + th_span,
                          window.n_space);
    const auto zs = axis(window.center.z - rho, window.center.z + rho, window.n_space);
    const auto tps = axis(-0.5 * window.duration, 0.5 * window.duration, window.n_t);

    EnvelopePair out;
    out.window = window;
    out.frame = frame;
    out.alpha_omega0_dt = field.alpha * w0 * window.duration;

    const std::size_t nsp = rs.size() * ths.size() * zs.size();
    out.phi_c.resize(tps.size() * nsp);
    out.phi_s.resize(tps.size() * nsp);

    // Per spatial point: Q_a = P_a exp(-i w_a t0(x)) rotates the phasor onto
    // the frame's t' = 0 surface; the envelope then carries only the slow
    // factors exp(-i (w_a - w0) t').
    std::vector<std::vector<std::complex<double>>> Q(nsp);
    std::vector<double> t0s(nsp);
    std::size_t is = 0;
    for (double r : rs)
        for (double th : ths)
            for (double z : zs) {
                const double t0 = frame.surface_time(th);
                const auto ph = phasors(field, r, th, z);
                auto& q = Q[is];
                q.reserve(ph.size());
                for (const auto& p : ph)
                    q.push_back(p.phi * std::exp(std::complex<double>(0.0, -p.omega * t0)));
                t0s[is] = t0;
                ++is;
            }

    double max_c = 0.0, max_s = 0.0, err_exact = 0.0, err_frozen = 0.0;
    std::vector<std::complex<double>> Z0(nsp);  // envelopes at window center t' = 0
    for (std::size_t j = 0; j < nsp; ++j) {
        std::complex<double> z{};
        for (const auto& q : Q[j]) z += q;
        Z0[j] = z;
    }

    for (std::size_t it = 0; it < tps.size(); ++it) {
        const double tp = tps[it];
        is = 0;
        for (std::size_t jr = 0; jr < rs.size(); ++jr)
            for (std::size_t jt = 0; jt < ths.size(); ++jt)
                for (std::size_t jz = 0; jz < zs.size(); ++jz) {
                    std::complex<double> Z{};
                    std::size_t a = 0;
                    for (const auto& m : field.modes) {
                        Z += Q[is][a] *
                             std::exp(std::complex<double>(0.0, -(m.omega - w0) * tp));
                        ++a;
                    }
                    const double pc_v = Z.real();
                    const double ps_v = Z.imag();
                    out.phi_c[it * nsp + is] = pc_v;
                    out.phi_s[it * nsp + is] = ps_v;
                    max_c = std::max(max_c, std::abs(pc_v));
                    max_s = std::max(max_s, std::abs(ps_v));

                    CylPoint pt{t0s[is] + tp, rs[jr], ths[jt], zs[jz]};
                    const double phi_direct = evaluate(field, pt).phi;
                    const double cw = std::cos(w0 * tp);
                    const double sw = std::sin(w0 * tp);
                    err_exact = std::max(err_exact,
                                         std::abs(pc_v * cw + ps_v * sw - phi_direct));
                    err_frozen = std::max(
                        err_frozen, std::abs(Z0[is].real() * cw + Z0[is].imag() * sw -
                                             phi_direct));
                    ++is;
                }
    }

    const double floor_c = std::max(max_c, 1e-300);
    out.ratio_s_over_c = max_s / floor_c;
    const double norm = std::max({max_c, max_s, 1e-300});
    out.recon_err_exact = err_exact / norm;
    out.recon_err_frozen = err_frozen / norm;
    return out;
}

} // namespace kglab
