#pragma once

#include <functional>
#include <map>
#include <string>

#include "kglab/batch.hpp"
#include "kglab/stress_energy.hpp"

namespace kglab {

/// A constant-t slice with cylindrical extent, oriented by its outward
/// normal (+1 along +t for a final surface, -1 for an initial one).
struct FlatSlice {
    double t = 0.0;
    double r_max = 1.0;
    double z_half = 0.5;
    int orientation = +1;

    void validate() const;
};

/// Closed circle r = const, z = const at lab time t, traversed toward
/// +theta (counterclockwise).
struct LoopSpec {
    double r = 1.0;
    double z = 0.0;
    double t = 0.0;
};

struct TraceOptions {
    Averaging averaging = Averaging::cycle_averaged;
    VelocityConvention convention = VelocityConvention::flux_over_energy;
    double vacuum_floor_rel = 1e-12;
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    int max_doublings = 14;       ///< refinement budget for loop quadrature
    int substeps_init = 4;        ///< RK2 substeps per grid interval
    int max_substep_doublings = 10;
    Exec exec = Exec::parallel;
};

/// A discretized hypersurface t'(r, theta, z) built by path-integrating the
/// slope v/c^2 from a crest seed.  The angular grid carries n_theta + 1
/// stations: theta_seed + 2 pi k / n_theta for k = 0..n_theta, the last one
/// being the far side of the seam cut at theta_seed + 2 pi.
struct NaturalSurfaceMesh {
    std::vector<double> r_values;
    std::vector<double> z_values;
    int n_theta = 0;
    double theta_seed = 0.0;

    std::vector<double> t_of_x;       ///< [(ir * (n_theta+1) + ith) * nz + iz]
    std::vector<double> slope_theta;  ///< dt/dl used in the march, same layout
    std::vector<double> seam_jump;    ///< [ir * nz + iz]

    double path_residual = 0.0;   ///< alt-route disagreement, time units
    double refine_residual = 0.0; ///< last Richardson step change
    double max_ct_grad = 0.0;     ///< max c |grad t'|; < 1 means spacelike
    bool spacelike_ok = true;
    bool integrable = true;  ///< reroute ambiguity under 2.5% of a Compton period
    double max_normal_deriv = 0.0;  ///< max normalized |dphi/deta| over the mesh
    Averaging averaging = Averaging::cycle_averaged;

    std::size_t idx(std::size_t ir, std::size_t ith, std::size_t iz) const {
        return (ir * (n_theta + 1) + ith) * z_values.size() + iz;
    }
    double theta_at(std::size_t ith) const;
    std::size_t size() const { return t_of_x.size(); }
};

/// Time advance (1/c^2) closed-integral of v . dl around the loop, for a
/// generic velocity field (synthetic flows in tests plug in here).
double trace_loop_velocity(const std::function<Vec3Cyl(const CylPoint&)>& v,
                           double c, const LoopSpec& loop,
                           const TraceOptions& opts = {});

/// Same, with v taken from the field's (averaged) stress-energy at the
/// loop's lab time.  Counterclockwise; sign preserved.
double trace_loop(const FieldState& field, const LoopSpec& loop,
                  const TraceOptions& opts = {});

struct SurfaceDomain {
    std::vector<double> r_values;
    std::vector<double> z_values = {0.0};
    int n_theta = 96;
};

/// Trace the natural surface through the crest seed over the domain grid:
/// radial and axial spokes from the seed, then an angular march around each
/// circle; the seam sits at theta_seed + 2 pi.  Non-integrable flows and
/// spacelike violations are reported in the mesh flags, not thrown.
NaturalSurfaceMesh trace_surface(const FieldState& field, const CylPoint& seed,
                                 const SurfaceDomain& domain,
                                 const TraceOptions& opts = {});

/// Surface trace for a generic velocity field (no crest validation, no
/// normal-derivative diagnostic); synthetic flows in tests plug in here.
NaturalSurfaceMesh trace_surface_velocity(const std::function<Vec3Cyl(const CylPoint&)>& v,
                                          const PhysicalConstants& constants,
                                          const CylPoint& seed, const SurfaceDomain& domain,
                                          const TraceOptions& opts = {});

struct SeamReport {
    bool is_uniform = false;
    double spread = 0.0;     ///< max - min of seam_jump
    double mean_jump = 0.0;
    double rel_spread = 0.0; ///< spread / |mean| (0 when mean is 0)
    double tol_used = 0.0;
};

/// Uniformity of the seam across (r, z): spread below tol_factor * alpha^2
/// relative (with a small absolute floor for identically-zero seams).
SeamReport seam_uniformity(const NaturalSurfaceMesh& mesh, double alpha,
                           double tol_factor = 5.0, double abs_floor = 1e-9);

struct NormalDerivativeProfile {
    std::vector<double> values;  ///< dphi/deta at mesh points, mesh layout
    std::vector<double> lapse;   ///< sqrt(1 - c^2 |grad t'|^2): induced volume factor
    double max_abs = 0.0;        ///< max |value| / scale
    double scale = 0.0;          ///< peak |dphi/dt| envelope over the mesh
};

/// Instantaneous normal derivative of phi on the traced surface, exact
/// field derivatives against the finite-difference mesh normal.
NormalDerivativeProfile normal_derivative_profile(const FieldState& field,
                                                  const NaturalSurfaceMesh& mesh);

/// Normal derivative on a flat slice (there: dphi/deta = orientation *
/// phi_dot / c), sampled on an (r, theta, z) grid of the same shape.
NormalDerivativeProfile normal_derivative_profile(const FieldState& field,
                                                  const FlatSlice& slice,
                                                  const SurfaceDomain& domain);

/// CSV with columns r,theta,z,t_surface,seam_flag in fixed row order.
void export_mesh_csv(const NaturalSurfaceMesh& mesh, const std::string& path);

/// Structured-text mesh: a JSON document with a metadata header (units,
/// alpha, averaging, caller-supplied entries) plus the full grid, written
/// with round-trip-exact number formatting.
void export_mesh_json(const NaturalSurfaceMesh& mesh, const std::string& path,
                      const std::map<std::string, std::string>& metadata = {});

/// Inverse of export_mesh_json; bit-identical round trip.
NaturalSurfaceMesh import_mesh_json(const std::string& path);

} // namespace kglab
