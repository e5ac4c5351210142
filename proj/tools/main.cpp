// shadowlab command line: refine pseudo-orbits into certified true orbits and
// evaluate attractor distance bounds.
//
// Verbs: shadow, sweep, bounds, inspect-splitting, perturb.
// Exit codes: 0 valid certificate, 1 I/O or config error, 2 hypothesis failure.

#include <CLI11.hpp>

#include "shadowlab/experiment.hpp"

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> d;
    std::optional<std::string> preset;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--seed", flags.seed, "override the run seed");
    cmd->add_option("--out", flags.out_dir, "override the output directory");
    cmd->add_option("--d", flags.d, "override the defect / noise level");
    cmd->add_option("--preset", flags.preset,
                    "override the system preset "
                    "(radial|double_well_gradient|linear_diag|custom)");
}

shadowlab::ExperimentConfig resolve_config(const CommonFlags& flags) {
    shadowlab::ExperimentConfig config;
    if (!flags.config_path.empty()) {
        config = shadowlab::ExperimentConfig::from_json_file(flags.config_path);
    }
    // Flags beat file values, file values beat defaults.
    if (flags.seed) config.seed = *flags.seed;
    if (flags.out_dir) config.output_dir = *flags.out_dir;
    if (flags.d) config.noise_level = *flags.d;
    if (flags.preset) {
        config.system.preset = shadowlab::preset_from_name(*flags.preset);
        if (config.system.preset == shadowlab::Preset::kLinearDiag &&
            config.system.diag.empty()) {
            config.system.diag.assign(config.system.dimension, 0.5);
        }
    }
    return config;
}

int status_code(const shadowlab::RunReport& report) {
    return report.status == shadowlab::RunStatus::kValid ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shadowlab: pseudo-orbit refinement and attractor bound calculus"};
    app.require_subcommand(1);

    CommonFlags shadow_flags, sweep_flags, bounds_flags, inspect_flags, perturb_flags;
    std::vector<double> sweep_d_values;

    CLI::App* shadow_cmd =
        app.add_subcommand("shadow", "refine one pseudo-orbit into a certificate");
    add_common_flags(shadow_cmd, shadow_flags);

    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep", "shadow across defect values and fit the error scaling slope");
    add_common_flags(sweep_cmd, sweep_flags);
    sweep_cmd->add_option("--d-values", sweep_d_values,
                          "defect values (>= 3, spanning >= 2 decades)");

    CLI::App* bounds_cmd = app.add_subcommand(
        "bounds", "evaluate the attractor distance-bound formulas");
    add_common_flags(bounds_cmd, bounds_flags);

    CLI::App* inspect_cmd = app.add_subcommand(
        "inspect-splitting", "build and export the splitting frame for an orbit");
    add_common_flags(inspect_cmd, inspect_flags);

    CLI::App* perturb_cmd = app.add_subcommand(
        "perturb", "re-target a perturbed system's orbit and shadow it");
    add_common_flags(perturb_cmd, perturb_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (shadow_cmd->parsed()) {
            const auto config = resolve_config(shadow_flags);
            const auto report = shadowlab::run_experiment(config);
            std::printf("%s\n", report.status == shadowlab::RunStatus::kValid
                                    ? "certificate valid"
                                    : ("failed: " + report.failure_reason).c_str());
            return status_code(report);
        }
        if (sweep_cmd->parsed()) {
            auto config = resolve_config(sweep_flags);
            std::vector<double> d_values =
                !sweep_d_values.empty() ? sweep_d_values : config.d_values;
            if (d_values.empty()) d_values = {1e-3, 1e-4, 1e-5, 1e-6};
            const auto report = shadowlab::sweep(config, d_values);
            std::printf("slope %.4f over %zu runs\n", report.slope,
                        report.rows.size());
            return 0;
        }
        if (bounds_cmd->parsed()) {
            const auto config = resolve_config(bounds_flags);
            const auto report = shadowlab::run_bounds_evaluation(config);
            if (report.holder) {
                std::printf("regime %s, bound %.6g\n",
                            shadowlab::regime_name(report.holder->regime).c_str(),
                            report.holder->value);
            }
            return status_code(report);
        }
        if (inspect_cmd->parsed()) {
            const auto config = resolve_config(inspect_flags);
            const auto report = shadowlab::run_splitting_inspection(config);
            return status_code(report);
        }
        if (perturb_cmd->parsed()) {
            const auto config = resolve_config(perturb_flags);
            const auto report = shadowlab::run_perturbation_experiment(config);
            std::printf("%s\n", report.status == shadowlab::RunStatus::kValid
                                    ? "certificate valid"
                                    : ("failed: " + report.failure_reason).c_str());
            return status_code(report);
        }
    } catch (const shadowlab::HypothesisError& e) {
        std::fprintf(stderr, "hypothesis failure: %s\n", e.what());
        return 2;
    } catch (const shadowlab::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
