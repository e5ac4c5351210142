#pragma once

#include "shadowlab/bounds.hpp"
#include "shadowlab/equilibrium.hpp"
#include "shadowlab/estimates.hpp"
#include "shadowlab/pseudo_orbit.hpp"
#include "shadowlab/solver.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace shadowlab {

enum class OrbitSource { kGenerateNoisy, kLoadCsv };

struct PerturbationSpec {
    std::string kind;  // "shift" or "tilt"
    double epsilon = 0.0;
    std::vector<double> shift;  // optional explicit shift vector
};

/// Full description of a run. A single JSON document configures it; CLI flags
/// override individual fields (flags > file > defaults).
struct ExperimentConfig {
    SystemSpec system;
    OrbitSource orbit_source = OrbitSource::kGenerateNoisy;
    std::filesystem::path csv_path;
    double noise_level = 1e-5;
    int window = 200;
    BoundaryMode boundary_mode = BoundaryMode::kFree;
    int unstable_dim = -1;  // negative: infer from the nearest equilibrium
    double mu = 0.2;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";
    std::vector<double> start;  // empty: preset default
    int settle_steps = 0;
    int attraction_horizon = 40;
    std::vector<std::vector<double>> attractor_grid;  // empty: preset default
    std::vector<double> d_values;                     // sweep mode
    std::optional<PerturbationSpec> perturbation;
    std::optional<double> bound_C, bound_gamma, bound_L1;  // bounds-verb overrides

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::filesystem::path& path);
    [[nodiscard]] std::string to_json_text() const;
};

struct LedgerEntry {
    std::string name;
    double value = 0.0;
    std::string formula;
};

enum class RunStatus { kValid, kHypothesisFailure };

struct RunReport {
    RunStatus status = RunStatus::kValid;
    std::string failure_stage;
    std::string failure_reason;
    std::optional<ShadowingCertificate> certificate;
    std::optional<AttractionProfile> profile;
    std::optional<HolderBound> holder;
    std::vector<LedgerEntry> ledger;
    std::vector<std::pair<std::string, double>> timings_ms;
    std::string report_json;  // the serialized report as written to disk
};

/// Builds the configured system. Warns (does not fail) when sampling finds
/// region-invariance violations.
SmoothMap build_configured_system(const ExperimentConfig& config);

/// Preset default start point and attractor sample; empty sample when the
/// preset has no usable attractor description.
Vec default_start(const SystemSpec& system);
std::vector<Vec> default_attractor_sample(const SystemSpec& system);

/// The configured pseudo-orbit (generated or loaded).
PseudoOrbit make_configured_orbit(const ExperimentConfig& config,
                                  const SmoothMap& map);

/// Resolves a negative unstable_dim via hyperbolicity_check at the equilibrium
/// nearest to the orbit's final state (0 when no hyperbolic equilibrium is
/// found).
int resolve_unstable_dim(const ExperimentConfig& config, const SmoothMap& map,
                         const PseudoOrbit& orbit);

/// Full pipeline: orbit -> splitting -> constants -> solve -> bounds ->
/// report.json / orbit.csv / shadow.csv / shadow_error.csv in output_dir.
RunReport run_experiment(const ExperimentConfig& config);

struct SweepRow {
    double d = 0.0;
    double sup_error = 0.0;
    double bound = 0.0;
    bool valid = false;
};

struct SweepReport {
    double slope = 0.0;
    std::vector<SweepRow> rows;
    std::string report_json;
};

/// Runs the shadow pipeline per defect value and fits the log-log slope of
/// sup-error against d. Requires >= 3 values spanning >= 2 decades. Noise
/// directions are shared across the runs (same seed) so the scaling is clean.
/// An individual failure aborts after saving partial rows to sweep.csv.
SweepReport sweep(const ExperimentConfig& config, const std::vector<double>& d_values);

/// Builds the perturbed companion system of a perturb run.
SmoothMap build_perturbed_system(const ExperimentConfig& config,
                                 const SmoothMap& base);

/// Perturbation pipeline: true orbit of the perturbed system, defect
/// re-targeted at the base system, then the shadow pipeline under the base
/// system.
RunReport run_perturbation_experiment(const ExperimentConfig& config);

/// Bounds-verb entry: evaluates the distance-bound formulas for the configured
/// system (or explicit constants) at the configured defect; writes bounds.json.
RunReport run_bounds_evaluation(const ExperimentConfig& config);

/// inspect-splitting verb: builds and serializes the frame to splitting.json.
RunReport run_splitting_inspection(const ExperimentConfig& config);

/// Serializers shared by the CLI and tests.
std::string certificate_to_json_text(const ShadowingCertificate& cert);
std::string frame_to_json_text(const SplittingFrame& frame);

}  // namespace shadowlab
