#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kglab/quantization.hpp"
#include "kglab/variational.hpp"

namespace kglab {

inline constexpr const char* tool_version = "0.1.0";

/// Which checks a scenario run executes.  Dependencies are implicit: the
/// field is always built, a stress-energy summary accompanies any of the
/// physics checks, and the quantization check traces a surface mesh on its
/// own if the surface check was not requested.
struct CheckSet {
    bool kge = true;
    bool variation = true;
    bool surface = true;
    bool quantization = true;

    bool any_physics() const { return variation || surface || quantization; }
};

/// Grid, quadrature and tolerance settings.  Fields left unset in the
/// config text resolve to defaults that may depend on the preset (the mixed
/// preset widens its surface band so the radial domain straddles the
/// crossover between its two modes' angular dominance).
struct GridSpec {
    int surface_n_r = 9;          ///< radii in the traced band
    int surface_n_theta = 96;     ///< angular stations per circle
    int surface_n_z = 1;          ///< axial stations (1 = seed plane)
    double surface_band_lo = 0.7; ///< band edges, relative to the crest radius
    double surface_band_hi = 1.3;
    double z_half = 0.5;          ///< half-thickness of the unit z-slab used by
                                  ///< flat-slice integrals and multi-z meshes
    double trace_rel_tol = 1e-10; ///< loop/march quadrature tolerance
    int quad_n_r = 48;            ///< Gauss-Legendre radial points per piece
    int quad_n_theta = 64;        ///< angular samples for slice integrals
    int quad_n_z = 4;             ///< Gauss-Legendre axial points
    int kge_points = 1000;        ///< random sample count for the residual scan
    double tol_natural_factor = 5.0;  ///< natural-surface tolerance, x alpha^2
    double closure_rel_tol = 0.005;   ///< L_z closure floor, relative
    Exec exec = Exec::parallel;
};

/// Parameters consumed by the named presets; ignored fields are harmless
/// but unknown keys in the config text are errors.
struct PresetParams {
    int l = 1;                  ///< angular index (rotor_l, mixed_l first mode)
    int l2 = 2;                 ///< second angular index (mixed_l)
    double alpha = 0.05;        ///< k_r in units of m c / hbar
    double amplitude = 1.0;
    double amplitude2 = 1.0;    ///< second amplitude (mixed_l)
    double phase = 0.0;         ///< oscillator phase (uniform_oscillator)
    double k_z = 0.0;           ///< axial wavenumber (rotor_l)
    double window_radius = 12.0;  ///< window close, in units of 1/k_r
    bool windowed = true;       ///< apply the radial taper (rotor_l, mixed_l)
};

/// One explicit mode in a config that lists modes instead of a preset.
/// Mirrors CylindricalMode minus the derived omega.
struct ModeConfig {
    double amplitude = 1.0;
    int l = 0;
    double k_r = 0.0;
    double k_z = 0.0;
    double phase = 0.0;
    double axial_phase = 0.0;
    std::optional<RadialWindow> window;
};

/// A fully resolved scenario: what field to build, which checks to run,
/// where to write.  Parse with parse_config / load_config (strict schema:
/// unknown keys anywhere are errors); hash with config_hash.
struct ScenarioConfig {
    std::string name = "scenario";
    PhysicalConstants constants;
    std::string preset;              ///< one of preset_names(), or empty
    PresetParams params;
    std::vector<ModeConfig> modes;   ///< used when preset is empty
    CheckSet checks;
    GridSpec grid;
    std::string output_dir;          ///< empty -> out/<name>; relative paths
                                     ///< resolve under $KGLAB_OUT when set
    unsigned long seed = 20260822;
    Averaging averaging = Averaging::cycle_averaged;
    std::optional<double> normalize_energy_to;  ///< rescale so E_tot = target

    void validate() const;
};

std::vector<std::string> preset_names();

/// Parse config text (JSON object, strict keys at every level) and resolve
/// preset-dependent defaults.  Throws ValidationError with the offending
/// key path on schema violations.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Canonical serialization of the resolved config: stable key order,
/// shortest round-trip numbers.  The exact text written to config.json.
std::string canonical_config_json(const ScenarioConfig& config);

/// FNV-1a 64 over the canonical serialization with output_dir blanked
/// (where results land must not change what they are), as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

/// The field a config describes (preset or explicit mode list).
FieldState build_scenario_field(const ScenarioConfig& config);

/// Crest radius of the field's leading mode: the first maximum of the
/// windowed Bessel envelope (1 / compton_k for a zero-wavenumber mode).
double crest_radius(const FieldState& field);

struct CheckResult {
    std::string name;
    bool ok = false;
    std::string verdict;  ///< one-line summary, deterministic for a config+seed
    std::string error;    ///< exception text when the check failed or was skipped
};

struct RunManifest {
    std::string config_hash;
    std::string tool_version;
    std::string kind = "run";  ///< "run" or "sweep"
    std::string started_at;    ///< ISO-8601 UTC; the only nondeterministic fields
    std::string finished_at;
    std::string output_dir;
    std::vector<std::string> files;  ///< every emitted file (besides the manifest
                                     ///< itself), relative to output_dir
    std::vector<CheckResult> checks;

    bool all_ok() const;
};

/// Execute the requested checks in dependency order (field build ->
/// stress-energy -> surface -> variation -> quantization), writing reports,
/// meshes and CSV series plus manifest.json into the resolved output
/// directory.  Per-check errors are captured in the manifest; downstream
/// checks run where their inputs still exist.
RunManifest run_scenario(const ScenarioConfig& config);

void write_manifest(const RunManifest& manifest, const std::string& path);
RunManifest read_manifest(const std::string& path);

struct SweepRow {
    double value = 0.0;
    bool ok = false;            ///< false only for captured errors
    std::string flags;          ///< e.g. "no_natural_surface"
    std::string error;
    QuantizationReport report;  ///< valid when ok
};

struct SweepResult {
    std::string parameter;
    std::vector<SweepRow> rows;
    std::string csv_body;   ///< exactly what was written (header + rows)
    std::string csv_path;
    RunManifest manifest;

    int error_count() const;
};

/// One quantization chain per value of the swept parameter ("l", "alpha" or
/// "amplitude"), aggregated into sweep_<parameter>.csv with columns
/// parameter,value,n_est,n_residual,bs_ratio,lz_mc2_over_e_hbar,flags,error.
/// Rows that error are flagged and the sweep continues; an empty value list
/// or a parameter the preset cannot absorb throws.
SweepResult sweep(const ScenarioConfig& config, const std::string& parameter,
                  const std::vector<double>& values);

/// Plain-text gnuplot scripts next to the data files a manifest references:
/// a surface plot and a seam-vs-radius plot when a mesh was emitted, a
/// residual plot per sweep CSV (log-log for alpha).  plot_notes.txt records
/// what was written and what was omitted.  Returns the written file names;
/// throws if a referenced data file is missing.
std::vector<std::string> emit_plots(const RunManifest& manifest,
                                    const std::string& dir);

} // namespace kglab
