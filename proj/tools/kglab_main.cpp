#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kglab/scenario.hpp"

namespace {

void print_checks(const kglab::RunManifest& manifest) {
    for (const kglab::CheckResult& c : manifest.checks) {
        if (c.ok)
            std::printf("  [ ok ] %-14s %s\n", c.name.c_str(), c.verdict.c_str());
        else
            std::printf("  [FAIL] %-14s %s\n", c.name.c_str(),
                        c.error.empty() ? c.verdict.c_str() : c.error.c_str());
    }
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
    kglab::ScenarioConfig cfg = kglab::load_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    const kglab::RunManifest manifest = kglab::run_scenario(cfg);
    std::printf("run %s (config %s)\n", cfg.name.c_str(), manifest.config_hash.c_str());
    print_checks(manifest);
    std::printf("wrote %zu file(s) to %s\n", manifest.files.size(),
                manifest.output_dir.c_str());
    return manifest.all_ok() ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, const std::string& parameter,
              const std::vector<double>& values, const std::string& out_override) {
    kglab::ScenarioConfig cfg = kglab::load_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    const kglab::SweepResult result = kglab::sweep(cfg, parameter, values);
    std::printf("sweep %s over %zu value(s) (config %s)\n", parameter.c_str(),
                values.size(), result.manifest.config_hash.c_str());
    print_checks(result.manifest);
    std::printf("wrote %s\n", result.csv_path.c_str());
    return result.error_count() == 0 ? 0 : 1;
}

int cmd_plot(const std::string& manifest_path) {
    const kglab::RunManifest manifest = kglab::read_manifest(manifest_path);
    const std::string dir =
        std::filesystem::path(manifest_path).parent_path().string();
    const std::vector<std::string> written =
        kglab::emit_plots(manifest, dir.empty() ? "." : dir);
    for (const std::string& f : written) std::printf("wrote %s\n", f.c_str());
    return 0;
}

int cmd_presets() {
    std::printf("available presets:\n");
    std::printf("  uniform_oscillator  spatially uniform oscillation; parameters: "
                "amplitude, phase\n");
    std::printf("  rotor_l             single rotating mode; parameters: l, alpha, "
                "amplitude, k_z, window_radius, windowed\n");
    std::printf("  mixed_l             two co-rotating modes sharing one frequency; "
                "parameters: l, l2, alpha, amplitude, amplitude2, window_radius, "
                "windowed\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cylindrical Klein-Gordon field laboratory: traced natural "
                 "hypersurfaces, seam quantization and reproducible scenario runs"};
    app.set_version_flag("--version", std::string(kglab::tool_version));
    app.require_subcommand(1);

    std::string config_path, manifest_path, parameter, out_override;
    std::vector<double> values;

    CLI::App* run = app.add_subcommand("run", "Execute a scenario config");
    run->add_option("config", config_path, "Scenario config file (JSON)")->required();
    run->add_option("--out", out_override, "Override the output directory");

    CLI::App* sw = app.add_subcommand("sweep", "Quantization chain across one parameter");
    sw->add_option("config", config_path, "Scenario config file (JSON)")->required();
    sw->add_option("--param", parameter, "Swept parameter: l, alpha or amplitude")
        ->required();
    sw->add_option("--values", values, "Values to sweep")->required()->expected(-1);
    sw->add_option("--out", out_override, "Override the output directory");

    CLI::App* plot = app.add_subcommand("plot", "Emit plot scripts for a manifest");
    plot->add_option("manifest", manifest_path, "manifest.json from a run or sweep")
        ->required();

    app.add_subcommand("presets", "List the built-in field presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_override);
        if (sw->parsed()) return cmd_sweep(config_path, parameter, values, out_override);
        if (plot->parsed()) return cmd_plot(manifest_path);
        return cmd_presets();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
