#include "kglab/hypersurface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <numbers>
#include <utility>

#include "json.hpp"

namespace kglab {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

Vec3Cyl field_velocity(const FieldState& field, const CylPoint& p, Averaging avg,
                       const StressEnergyOptions& so) {
    StressEnergySample s = stress_energy_at(field, p, avg, so);
    if (!s.v_defined)
        throw VacuumRegionError("flow velocity undefined at r=" + std::to_string(p.r) +
                                ", theta=" + std::to_string(p.theta));
    return s.v;
}

// RK2 (midpoint) along the parameter s through the given stations, uniform
// substeps per interval.  eval(t, s) returns dt/ds.  Optionally records
// dt/ds at each station (one extra eval per station).
template <class Eval>
std::vector<double> march_stations(Eval&& eval, double t0, const std::vector<double>& s,
                                   int substeps, std::vector<double>* dtds) {
    const std::size_t m = s.size();
    std::vector<double> out(m);
    out[0] = t0;
    if (dtds) {
        dtds->assign(m, 0.0);
        (*dtds)[0] = eval(t0, s[0]);
    }
    double t = t0;
    for (std::size_t i = 1; i < m; ++i) {
        const double h = (s[i] - s[i - 1]) / substeps;
        for (int j = 0; j < substeps; ++j) {
            const double sj = s[i - 1] + j * h;
            const double g0 = eval(t, sj);
            const double tm = t + 0.5 * h * g0;
            t += h * eval(tm, sj + 0.5 * h);
        }
        out[i] = t;
        if (dtds) (*dtds)[i] = eval(t, s[i]);
    }
    return out;
}

struct MarchOut {
    std::vector<double> t;
    std::vector<double> dtds;
    double diff = 0.0;  ///< last inter-level station change (pre-extrapolation)
};

// Doubles substeps until station values settle to tol, then applies one
// Richardson step (midpoint rule is O(h^2), so combine as t2 + (t2-t1)/3).
template <class Eval>
MarchOut march_adaptive(Eval&& eval, double t0, const std::vector<double>& s,
                        const TraceOptions& opts, double tol, bool want_slopes) {
    int sub = std::max(1, opts.substeps_init);
    std::vector<double> prev = march_stations(eval, t0, s, sub, nullptr);
    for (int d = 0;; ++d) {
        sub *= 2;
        MarchOut out;
        out.t = march_stations(eval, t0, s, sub, want_slopes ? &out.dtds : nullptr);
        double diff = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i)
            diff = std::max(diff, std::abs(out.t[i] - prev[i]));
        out.diff = diff;
        if (diff <= tol || d == opts.max_substep_doublings) {
            if (diff > 1e3 * std::max(tol, 1e-300))
                throw QuadratureError("hypersurface march did not converge (step change " +
                                      std::to_string(diff) + ")");
            for (std::size_t i = 0; i < s.size(); ++i)
                out.t[i] += (out.t[i] - prev[i]) / 3.0;
            return out;
        }
        prev = std::move(out.t);
    }
}

// Station sequences from an interior start value out to the ends of a sorted
// grid; the start itself is station 0 of each branch.
struct SpokeBranches {
    std::vector<double> down;          // start, then grid values below in descending order
    std::vector<double> up;            // start, then grid values >= start ascending
    std::vector<std::size_t> down_idx; // grid index of down[k+1]
    std::vector<std::size_t> up_idx;
};

SpokeBranches split_spoke(double start, const std::vector<double>& grid) {
    SpokeBranches b;
    b.down.push_back(start);
    b.up.push_back(start);
    for (std::size_t i = grid.size(); i-- > 0;) {
        if (grid[i] < start) {
            b.down.push_back(grid[i]);
            b.down_idx.push_back(i);
        }
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] >= start) {
            b.up.push_back(grid[i]);
            b.up_idx.push_back(i);
        }
    }
    return b;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const char* averaging_name(Averaging a) {
    return a == Averaging::cycle_averaged ? "cycle_averaged" : "instantaneous";
}

Averaging averaging_from_name(const std::string& s) {
    if (s == "cycle_averaged") return Averaging::cycle_averaged;
    if (s == "instantaneous") return Averaging::instantaneous;
    throw ValidationError("unknown averaging tag: " + s);
}

} // namespace

void FlatSlice::validate() const {
    if (!(r_max > 0.0) || !(z_half > 0.0))
        throw ValidationError("flat slice needs r_max > 0 and z_half > 0");
    if (orientation != 1 && orientation != -1)
        throw ValidationError("flat slice orientation must be +1 or -1");
    if (!std::isfinite(t)) throw ValidationError("flat slice time is not finite");
}

double NaturalSurfaceMesh::theta_at(std::size_t ith) const {
    return theta_seed + two_pi * static_cast<double>(ith) / n_theta;
}

double trace_loop_velocity(const std::function<Vec3Cyl(const CylPoint&)>& v, double c,
                           const LoopSpec& loop, const TraceOptions& opts) {
    if (!(loop.r > 0.0)) throw ValidationError("loop radius must be positive");
    if (!(c > 0.0)) throw ValidationError("loop trace needs c > 0");
    const double c2 = c * c;
    auto f = [&](double theta) {
        return v(CylPoint{loop.t, loop.r, theta, loop.z}).theta * loop.r / c2;
    };
    // Periodic trapezoid with halving reuse; spectral for smooth flows.
    int n = 16;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += f(two_pi * k / n);
    double integral = sum * two_pi / n;
    for (int d = 0; d < opts.max_doublings; ++d) {
        double odd = 0.0;
        for (int k = 0; k < n; ++k) odd += f(two_pi * (2 * k + 1) / (2 * n));
        n *= 2;
        const double next = 0.5 * integral + odd * two_pi / n;
        const double diff = std::abs(next - integral);
        integral = next;
        if (diff <= std::max(opts.abs_tol, opts.rel_tol * std::abs(next))) return integral;
    }
    throw QuadratureError("loop time-advance integral did not converge");
}

double trace_loop(const FieldState& field, const LoopSpec& loop, const TraceOptions& opts) {
    StressEnergyOptions so;
    so.convention = opts.convention;
    so.vacuum_floor_rel = opts.vacuum_floor_rel;
    auto v = [&](const CylPoint& p) { return field_velocity(field, p, opts.averaging, so); };
    return trace_loop_velocity(v, field.constants.c, loop, opts);
}

namespace {

NaturalSurfaceMesh trace_surface_core(const std::function<Vec3Cyl(const CylPoint&)>& base_vel,
                                      double c, double tscale, const CylPoint& seed,
                                      const SurfaceDomain& domain, const TraceOptions& opts) {
    if (domain.r_values.empty() || domain.z_values.empty())
        throw ValidationError("surface domain needs at least one radius and one z value");
    if (!std::is_sorted(domain.r_values.begin(), domain.r_values.end()) ||
        !std::is_sorted(domain.z_values.begin(), domain.z_values.end()))
        throw ValidationError("surface domain axes must be sorted ascending");
    if (domain.r_values.front() <= 0.0)
        throw ValidationError("surface domain radii must be positive");
    if (domain.n_theta < 8 || domain.n_theta % 2 != 0)
        throw ValidationError("surface domain needs an even n_theta >= 8");
    if (!(seed.r > 0.0)) throw ValidationError("surface seed radius must be positive");

    const double c2 = c * c;
    const double tol_march = std::max(opts.abs_tol, opts.rel_tol * tscale);

    const std::size_t nr = domain.r_values.size();
    const std::size_t nz = domain.z_values.size();
    const int nth = domain.n_theta;

    NaturalSurfaceMesh mesh;
    mesh.r_values = domain.r_values;
    mesh.z_values = domain.z_values;
    mesh.n_theta = nth;
    mesh.theta_seed = seed.theta;
    mesh.averaging = opts.averaging;
    mesh.t_of_x.assign(nr * (nth + 1) * nz, 0.0);
    mesh.slope_theta.assign(nr * (nth + 1) * nz, 0.0);
    mesh.seam_jump.assign(nr * nz, 0.0);

    double max_v = 0.0;       // serial-phase max |v|
    double refine_max = 0.0;  // serial-phase max march residual

    // Velocity evaluator that tracks the largest |v| seen (spacelike check).
    auto make_vel = [&base_vel](double& vmax) {
        return [&base_vel, &vmax](const CylPoint& p) {
            Vec3Cyl v = base_vel(p);
            vmax = std::max(vmax, v.norm());
            return v;
        };
    };
    auto vel_serial = make_vel(max_v);

    // Axial spoke through the seed: t at (seed.r, theta_seed, z_j).
    std::vector<double> t_at_z(nz, 0.0);
    {
        SpokeBranches zb = split_spoke(seed.z, domain.z_values);
        auto eval_z = [&](double t, double z) {
            return vel_serial(CylPoint{t, seed.r, seed.theta, z}).z / c2;
        };
        for (int branch = 0; branch < 2; ++branch) {
            const auto& sts = branch == 0 ? zb.down : zb.up;
            const auto& idxs = branch == 0 ? zb.down_idx : zb.up_idx;
            if (idxs.empty()) continue;
            MarchOut mo = march_adaptive(eval_z, seed.t, sts, opts, tol_march, false);
            refine_max = std::max(refine_max, mo.diff);
            for (std::size_t k = 0; k < idxs.size(); ++k) t_at_z[idxs[k]] = mo.t[k + 1];
        }
    }

    // Radial spokes at theta_seed, one per z: t at (r_i, theta_seed, z_j).
    std::vector<double> t_start(nr * nz, 0.0);
    SpokeBranches rb = split_spoke(seed.r, domain.r_values);
    for (std::size_t iz = 0; iz < nz; ++iz) {
        const double z = domain.z_values[iz];
        auto eval_r = [&](double t, double r) {
            return vel_serial(CylPoint{t, r, seed.theta, z}).r / c2;
        };
        for (int branch = 0; branch < 2; ++branch) {
            const auto& sts = branch == 0 ? rb.down : rb.up;
            const auto& idxs = branch == 0 ? rb.down_idx : rb.up_idx;
            if (idxs.empty()) continue;
            MarchOut mo = march_adaptive(eval_r, t_at_z[iz], sts, opts, tol_march, false);
            refine_max = std::max(refine_max, mo.diff);
            for (std::size_t k = 0; k < idxs.size(); ++k)
                t_start[idxs[k] * nz + iz] = mo.t[k + 1];
        }
    }

    // Angular stations shared by every circle.
    std::vector<double> thetas(nth + 1);
    for (int k = 0; k <= nth; ++k) thetas[k] = seed.theta + two_pi * k / nth;

    // March every circle; independent tasks, deterministic slot writes.
    const std::size_t n_circ = nr * nz;
    std::vector<double> vmax_slot(n_circ, 0.0), diff_slot(n_circ, 0.0);
    std::vector<std::exception_ptr> errors(n_circ);
    for_each_index(n_circ, opts.exec, [&](std::size_t ci) {
        try {
            const std::size_t ir = ci / nz, iz = ci % nz;
            const double r = domain.r_values[ir];
            const double z = domain.z_values[iz];
            auto vel = make_vel(vmax_slot[ci]);
            auto eval_th = [&](double t, double theta) {
                return vel(CylPoint{t, r, theta, z}).theta * r / c2;
            };
            MarchOut mo = march_adaptive(eval_th, t_start[ci], thetas, opts, tol_march, true);
            diff_slot[ci] = mo.diff;
            for (int k = 0; k <= nth; ++k) {
                const std::size_t at = mesh.idx(ir, k, iz);
                mesh.t_of_x[at] = mo.t[k];
                mesh.slope_theta[at] = mo.dtds[k] / r;  // dt/dtheta -> dt/dl
            }
            mesh.seam_jump[ci] = mo.t[nth] - mo.t[0];
        } catch (...) {
            errors[ci] = std::current_exception();
        }
    });
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (std::size_t i = 0; i < n_circ; ++i) {
        max_v = std::max(max_v, vmax_slot[i]);
        refine_max = std::max(refine_max, diff_slot[i]);
    }

    // Path-independence probe: reach (r_i, theta_seed + pi, z_j) the other
    // way around -- angular march first at seed.r, then a radial spoke.
    const int kmid = nth / 2;
    std::vector<double> half(kmid + 1);
    for (int k = 0; k <= kmid; ++k) half[k] = thetas[k];
    double path_res = 0.0;
    for (std::size_t iz = 0; iz < nz; ++iz) {
        const double z = domain.z_values[iz];
        auto eval_th = [&](double t, double theta) {
            return vel_serial(CylPoint{t, seed.r, theta, z}).theta * seed.r / c2;
        };
        MarchOut half_out = march_adaptive(eval_th, t_at_z[iz], half, opts, tol_march, false);
        const double theta_mid = thetas[kmid];
        auto eval_r = [&](double t, double r) {
            return vel_serial(CylPoint{t, r, theta_mid, z}).r / c2;
        };
        for (int branch = 0; branch < 2; ++branch) {
            const auto& sts = branch == 0 ? rb.down : rb.up;
            const auto& idxs = branch == 0 ? rb.down_idx : rb.up_idx;
            if (idxs.empty()) continue;
            MarchOut mo = march_adaptive(eval_r, half_out.t[kmid], sts, opts, tol_march, false);
            for (std::size_t k = 0; k < idxs.size(); ++k) {
                const double direct = mesh.t_of_x[mesh.idx(idxs[k], kmid, iz)];
                path_res = std::max(path_res, std::abs(mo.t[k + 1] - direct));
            }
        }
    }

    mesh.path_residual = path_res;
    mesh.refine_residual = refine_max;
    mesh.max_ct_grad = max_v / c;
    mesh.spacelike_ok = mesh.max_ct_grad < 1.0;
    // Crest-locked single-mode flows reroute within O(alpha^2) of a Compton
    // period; genuinely curl-infested flows miss by a sizable fraction of
    // one.  2.5% of 2 pi / omega0 splits the two regimes with margin.
    mesh.integrable = path_res <= std::max(1e3 * tol_march, 0.025 * tscale);
    return mesh;
}

} // namespace

NaturalSurfaceMesh trace_surface_velocity(const std::function<Vec3Cyl(const CylPoint&)>& v,
                                          const PhysicalConstants& constants,
                                          const CylPoint& seed, const SurfaceDomain& domain,
                                          const TraceOptions& opts) {
    constants.validate();
    const double omega0 = constants.omega0();
    const double tscale = omega0 > 0.0 ? two_pi / omega0 : 1.0;
    return trace_surface_core(v, constants.c, tscale, seed, domain, opts);
}

NaturalSurfaceMesh trace_surface(const FieldState& field, const CylPoint& seed,
                                 const SurfaceDomain& domain, const TraceOptions& opts) {
    const FieldSample at_seed = evaluate(field, seed);
    if (std::abs(at_seed.d_t) > 1e-6 * std::max(field.dphi_dt_scale, 1e-300))
        throw ValidationError("surface seed is not on a crest: |dphi/dt| = " +
                              std::to_string(std::abs(at_seed.d_t)));

    StressEnergyOptions so;
    so.convention = opts.convention;
    so.vacuum_floor_rel = opts.vacuum_floor_rel;
    auto v = [&field, &so, &opts](const CylPoint& p) {
        return field_velocity(field, p, opts.averaging, so);
    };
    const double omega0 = field.constants.omega0();
    const double tscale = omega0 > 0.0 ? two_pi / omega0 : 1.0;
    NaturalSurfaceMesh mesh =
        trace_surface_core(v, field.constants.c, tscale, seed, domain, opts);
    mesh.max_normal_deriv = normal_derivative_profile(field, mesh).max_abs;
    return mesh;
}

SeamReport seam_uniformity(const NaturalSurfaceMesh& mesh, double alpha, double tol_factor,
                           double abs_floor) {
    if (mesh.seam_jump.empty()) throw ValidationError("mesh has no seam data");
    SeamReport rep;
    double lo = mesh.seam_jump[0], hi = mesh.seam_jump[0], sum = 0.0;
    for (double j : mesh.seam_jump) {
        lo = std::min(lo, j);
        hi = std::max(hi, j);
        sum += j;
    }
    rep.spread = hi - lo;
    rep.mean_jump = sum / static_cast<double>(mesh.seam_jump.size());
    rep.rel_spread = rep.mean_jump != 0.0 ? rep.spread / std::abs(rep.mean_jump) : 0.0;
    rep.tol_used = std::max(tol_factor * alpha * alpha * std::abs(rep.mean_jump), abs_floor);
    rep.is_uniform = rep.spread <= rep.tol_used;
    return rep;
}

namespace {

// Peak |dphi/dt| envelope over the mesh's (r, z) axes: sum of per-mode
// |A omega R(r)| magnitudes, theta-independent.
double dt_envelope_scale(const FieldState& field, const std::vector<double>& r_values,
                         const std::vector<double>& z_values, double theta_ref) {
    double scale = 0.0;
    for (double r : r_values) {
        for (double z : z_values) {
            double here = 0.0;
            for (const ModePhasor& ph : phasors(field, r, theta_ref, z))
                here += std::abs(ph.d_t);
            scale = std::max(scale, here);
        }
    }
    return std::max(scale, 1e-300);
}

} // namespace

NormalDerivativeProfile normal_derivative_profile(const FieldState& field,
                                                  const NaturalSurfaceMesh& mesh) {
    const std::size_t nr = mesh.r_values.size();
    const std::size_t nz = mesh.z_values.size();
    const int nth = mesh.n_theta;
    if (mesh.t_of_x.size() != nr * (nth + 1) * nz)
        throw ValidationError("mesh grid size is inconsistent");
    const double c = field.constants.c;
    const double c2 = c * c;
    const double h_theta = two_pi / nth;

    NormalDerivativeProfile prof;
    prof.values.assign(mesh.t_of_x.size(), 0.0);
    prof.lapse.assign(mesh.t_of_x.size(), 0.0);
    prof.scale = dt_envelope_scale(field, mesh.r_values, mesh.z_values, mesh.theta_seed);

    auto tmesh = [&](std::size_t ir, std::size_t ith, std::size_t iz) {
        return mesh.t_of_x[mesh.idx(ir, ith, iz)];
    };

    for (std::size_t ir = 0; ir < nr; ++ir) {
        const double r = mesh.r_values[ir];
        for (int ith = 0; ith <= nth; ++ith) {
            const double theta = mesh.theta_at(ith);
            for (std::size_t iz = 0; iz < nz; ++iz) {
                // Mesh-difference gradient of t'; one-sided at the seam cut
                // and at the domain edges.
                double dtdr = 0.0;
                if (nr > 1) {
                    const std::size_t ia = ir > 0 ? ir - 1 : 0;
                    const std::size_t ib = ir + 1 < nr ? ir + 1 : nr - 1;
                    dtdr = (tmesh(ib, ith, iz) - tmesh(ia, ith, iz)) /
                           (mesh.r_values[ib] - mesh.r_values[ia]);
                }
                const int ka = ith > 0 ? ith - 1 : 0;
                const int kb = ith < nth ? ith + 1 : nth;
                const double dtdth =
                    (tmesh(ir, kb, iz) - tmesh(ir, ka, iz)) / ((kb - ka) * h_theta);
                double dtdz = 0.0;
                if (nz > 1) {
                    const std::size_t ja = iz > 0 ? iz - 1 : 0;
                    const std::size_t jb = iz + 1 < nz ? iz + 1 : nz - 1;
                    dtdz = (tmesh(ir, ith, jb) - tmesh(ir, ith, ja)) /
                           (mesh.z_values[jb] - mesh.z_values[ja]);
                }
                const double g_r = dtdr, g_th = dtdth / r, g_z = dtdz;
                const double gg = g_r * g_r + g_th * g_th + g_z * g_z;
                const double lapse2 = 1.0 - c2 * gg;

                const CylPoint p{tmesh(ir, ith, iz), r, theta, mesh.z_values[iz]};
                const FieldSample fs = evaluate(field, p);
                const double along = fs.d_t + c2 * (g_r * fs.grad.r + g_th * fs.grad.theta +
                                                    g_z * fs.grad.z);
                double value, lapse;
                if (lapse2 > 0.0) {
                    lapse = std::sqrt(lapse2);
                    value = along / (c * lapse);
                } else {
                    lapse = 0.0;  // not spacelike here
                    value = std::numeric_limits<double>::infinity();
                }
                prof.values[mesh.idx(ir, ith, iz)] = value;
                prof.lapse[mesh.idx(ir, ith, iz)] = lapse;
                prof.max_abs = std::max(prof.max_abs, std::abs(value) / prof.scale);
            }
        }
    }
    return prof;
}

NormalDerivativeProfile normal_derivative_profile(const FieldState& field,
                                                  const FlatSlice& slice,
                                                  const SurfaceDomain& domain) {
    slice.validate();
    if (domain.r_values.empty() || domain.z_values.empty())
        throw ValidationError("profile domain needs at least one radius and one z value");
    const int nth = std::max(domain.n_theta, 8);
    const std::size_t nr = domain.r_values.size();
    const std::size_t nz = domain.z_values.size();

    NormalDerivativeProfile prof;
    prof.values.assign(nr * (nth + 1) * nz, 0.0);
    prof.lapse.assign(nr * (nth + 1) * nz, 1.0);
    prof.scale = dt_envelope_scale(field, domain.r_values, domain.z_values, 0.0);
    const double c = field.constants.c;

    std::size_t at = 0;
    for (std::size_t ir = 0; ir < nr; ++ir) {
        for (int ith = 0; ith <= nth; ++ith) {
            const double theta = two_pi * ith / nth;
            for (std::size_t iz = 0; iz < nz; ++iz) {
                const CylPoint p{slice.t, domain.r_values[ir], theta, domain.z_values[iz]};
                const double value = slice.orientation * evaluate(field, p).d_t / c;
                prof.values[at++] = value;
                prof.max_abs = std::max(prof.max_abs, std::abs(value) / prof.scale);
            }
        }
    }
    return prof;
}

void export_mesh_csv(const NaturalSurfaceMesh& mesh, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open mesh CSV for writing: " + path);
    out << "r,theta,z,t_surface,seam_flag\n";
    const std::size_t nr = mesh.r_values.size();
    const std::size_t nz = mesh.z_values.size();
    for (std::size_t ir = 0; ir < nr; ++ir) {
        for (int ith = 0; ith <= mesh.n_theta; ++ith) {
            const double theta = mesh.theta_at(ith);
            for (std::size_t iz = 0; iz < nz; ++iz) {
                out << fmt17(mesh.r_values[ir]) << ',' << fmt17(theta) << ','
                    << fmt17(mesh.z_values[iz]) << ','
                    << fmt17(mesh.t_of_x[mesh.idx(ir, ith, iz)]) << ','
                    << (ith == mesh.n_theta ? 1 : 0) << '\n';
            }
        }
    }
    if (!out) throw ValidationError("failed writing mesh CSV: " + path);
}

void export_mesh_json(const NaturalSurfaceMesh& mesh, const std::string& path,
                      const std::map<std::string, std::string>& metadata) {
    nlohmann::json j;
    j["format"] = "kglab-mesh/1";
    nlohmann::json meta(metadata);
    meta["averaging"] = averaging_name(mesh.averaging);
    j["metadata"] = std::move(meta);
    j["n_theta"] = mesh.n_theta;
    j["theta_seed"] = mesh.theta_seed;
    j["r_values"] = mesh.r_values;
    j["z_values"] = mesh.z_values;
    j["t_of_x"] = mesh.t_of_x;
    j["slope_theta"] = mesh.slope_theta;
    j["seam_jump"] = mesh.seam_jump;
    j["diagnostics"] = {{"path_residual", mesh.path_residual},
                        {"refine_residual", mesh.refine_residual},
                        {"max_ct_grad", mesh.max_ct_grad},
                        {"spacelike_ok", mesh.spacelike_ok},
                        {"integrable", mesh.integrable},
                        {"max_normal_deriv", mesh.max_normal_deriv}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open mesh JSON for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw ValidationError("failed writing mesh JSON: " + path);
}

NaturalSurfaceMesh import_mesh_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open mesh JSON: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("mesh JSON parse failed: ") + e.what());
    }
    if (j.value("format", "") != "kglab-mesh/1")
        throw ValidationError("unrecognized mesh format tag");
    NaturalSurfaceMesh mesh;
    mesh.n_theta = j.at("n_theta").get<int>();
    mesh.theta_seed = j.at("theta_seed").get<double>();
    mesh.r_values = j.at("r_values").get<std::vector<double>>();
    mesh.z_values = j.at("z_values").get<std::vector<double>>();
    mesh.t_of_x = j.at("t_of_x").get<std::vector<double>>();
    mesh.slope_theta = j.at("slope_theta").get<std::vector<double>>();
    mesh.seam_jump = j.at("seam_jump").get<std::vector<double>>();
    const auto& d = j.at("diagnostics");
    mesh.path_residual = d.at("path_residual").get<double>();
    mesh.refine_residual = d.at("refine_residual").get<double>();
    mesh.max_ct_grad = d.at("max_ct_grad").get<double>();
    mesh.spacelike_ok = d.at("spacelike_ok").get<bool>();
    mesh.integrable = d.at("integrable").get<bool>();
    mesh.max_normal_deriv = d.at("max_normal_deriv").get<double>();
    mesh.averaging = averaging_from_name(j.at("metadata").at("averaging").get<std::string>());
    const std::size_t expect = mesh.r_values.size() * (mesh.n_theta + 1) * mesh.z_values.size();
    if (mesh.t_of_x.size() != expect || mesh.slope_theta.size() != expect ||
        mesh.seam_jump.size() != mesh.r_values.size() * mesh.z_values.size())
        throw ValidationError("mesh JSON arrays have inconsistent sizes");
    return mesh;
}

} // namespace kglab
