#include "shadowlab/experiment.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

namespace shadowlab {

using nlohmann::json;

namespace {

double json_number(const json& doc, const char* key, double fallback) {
    return doc.contains(key) ? doc.at(key).get<double>() : fallback;
}

json system_to_json(const SystemSpec& spec) {
    json doc;
    doc["preset"] = preset_name(spec.preset);
    doc["dimension"] = spec.dimension;
    doc["h"] = spec.step_h;
    doc["integrator_tolerance"] = spec.integrator_tolerance;
    if (!spec.diag.empty()) doc["diag"] = spec.diag;
    if (spec.custom.has_value()) {
        const PolynomialSystem& poly = *spec.custom;
        json c;
        c["dimension"] = poly.dimension;
        c["kind"] = poly.is_flow ? "flow" : "map";
        c["h"] = poly.step_h;
        c["integrator_tolerance"] = poly.integrator_tolerance;
        if (!poly.region_lo.empty()) {
            c["region_lo"] = poly.region_lo;
            c["region_hi"] = poly.region_hi;
        }
        json comps = json::array();
        for (const auto& comp : poly.components) {
            json terms = json::array();
            for (const auto& t : comp) {
                terms.push_back(
                    {{"num", t.num}, {"den", t.den}, {"exponents", t.exponents}});
            }
            comps.push_back(terms);
        }
        c["components"] = comps;
        doc["custom"] = c;
    }
    return doc;
}

std::chrono::steady_clock::time_point now() { return std::chrono::steady_clock::now(); }

double ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(now() - start).count();
}

json matrix_to_json(const Mat& m) {
    // Row-major dense array with explicit shape.
    json doc;
    doc["rows"] = m.rows();
    doc["cols"] = m.cols();
    json data = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    }
    doc["data"] = data;
    return doc;
}

json constants_to_json(const SolverConstants& c) {
    json doc;
    doc["mu"] = c.mu;
    doc["nu0"] = c.nu0;
    doc["lambda"] = c.lambda;
    doc["M"] = c.M;
    doc["K"] = c.K;
    doc["nu"] = c.nu;
    doc["k1"] = c.k1;
    doc["N1"] = c.N1;
    doc["Delta"] = c.Delta;
    doc["d1"] = c.d1;
    doc["L"] = c.L;
    doc["N"] = c.N;
    return doc;
}

json certificate_to_json(const ShadowingCertificate& cert) {
    json doc;
    doc["valid"] = cert.valid;
    doc["input_defect"] = cert.input_defect;
    doc["bound"] = cert.bound;
    doc["measured_sup_error"] = cert.measured_sup_error;
    doc["orbit_residual"] = cert.orbit_residual;
    doc["iterations"] = cert.iterations;
    doc["L_star"] = cert.L_star;
    doc["C1"] = cert.C1;
    doc["L1"] = cert.L1;
    doc["constants"] = constants_to_json(cert.constants);
    return doc;
}

json profile_to_json(const AttractionProfile& p) {
    json doc;
    doc["C"] = p.C;
    doc["gamma"] = p.gamma;
    doc["L1"] = p.L1;
    doc["fit_residual"] = p.fit_residual;
    return doc;
}

json holder_to_json(const HolderBound& b) {
    json doc;
    doc["regime"] = regime_name(b.regime);
    doc["alpha"] = b.alpha;
    doc["beta_star"] = b.beta_star;
    doc["C2"] = b.C2;
    doc["value"] = b.value;
    doc["window_N"] = b.window_N;
    doc["K_of_d"] = b.K_of_d;
    doc["log_prefactor"] = b.log_prefactor;
    return doc;
}

std::vector<LedgerEntry> certificate_ledger(const ShadowingCertificate& cert) {
    const SolverConstants& c = cert.constants;
    return {
        {"N", static_cast<double>(c.N), "smallest N with C~ lambda1^(N-1) <= mu"},
        {"lambda", c.lambda, "lambda = (1 + nu0) mu"},
        {"N1", c.N1, "N1 = M (1 + lambda) / (1 - lambda)"},
        {"k1", c.k1, "largest halving-grid k1 below nu0 with k1 N1 <= 0.9"},
        {"nu", c.nu, "nu = 0.9 k1 / (2 K (2K + 1))"},
        {"K", c.K, "K = max(M, sup_k |DF^N(x_k)|)"},
        {"Delta", c.Delta, "largest radius with a k1/2-Lipschitz remainder of F^N"},
        {"L", c.L, "L = N1 / (1 - k1 N1)"},
        {"d1", c.d1, "d1 = Delta / L"},
        {"L1", cert.L1, "1.05 * max sampled |DF| over the region"},
        {"C1", cert.C1, "C1 = 1 + L1 + ... + L1^(N-1)"},
        {"L_star", cert.L_star, "L* = (1 + L1 + ... + L1^N) L"},
        {"bound", cert.bound, "bound = L* d"},
    };
}

json ledger_to_json(const std::vector<LedgerEntry>& ledger) {
    json arr = json::array();
    for (const auto& entry : ledger) {
        arr.push_back({{"name", entry.name},
                       {"value", entry.value},
                       {"formula", entry.formula}});
    }
    return arr;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

json config_echo(const ExperimentConfig& config) {
    json doc;
    doc["system"] = system_to_json(config.system);
    doc["orbit_source"] = config.orbit_source == OrbitSource::kGenerateNoisy
                              ? "generate_noisy"
                              : "load_csv";
    if (!config.csv_path.empty()) doc["csv_path"] = config.csv_path.string();
    doc["noise_level"] = config.noise_level;
    doc["window"] = config.window;
    doc["boundary_mode"] = boundary_mode_name(config.boundary_mode);
    doc["unstable_dim"] = config.unstable_dim;
    doc["mu"] = config.mu;
    doc["seed"] = config.seed;
    doc["settle_steps"] = config.settle_steps;
    doc["attraction_horizon"] = config.attraction_horizon;
    if (!config.start.empty()) doc["start"] = config.start;
    if (!config.d_values.empty()) doc["d_values"] = config.d_values;
    if (config.perturbation.has_value()) {
        doc["perturbation"] = {{"kind", config.perturbation->kind},
                               {"epsilon", config.perturbation->epsilon}};
        if (!config.perturbation->shift.empty()) {
            doc["perturbation"]["shift"] = config.perturbation->shift;
        }
    }
    return doc;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config JSON: ") + e.what());
    }
    ExperimentConfig config;
    try {
        if (doc.contains("system")) {
            config.system = SystemSpec::from_json_text(doc["system"].dump());
        }
        const std::string source = doc.value("orbit_source", "generate_noisy");
        if (source == "generate_noisy") {
            config.orbit_source = OrbitSource::kGenerateNoisy;
        } else if (source == "load_csv") {
            config.orbit_source = OrbitSource::kLoadCsv;
        } else {
            throw ConfigError("unknown orbit_source '" + source + "'");
        }
        if (doc.contains("csv_path")) {
            config.csv_path = doc["csv_path"].get<std::string>();
        }
        config.noise_level = json_number(doc, "noise_level", config.noise_level);
        config.window = doc.value("window", config.window);
        config.boundary_mode =
            boundary_mode_from_name(doc.value("boundary_mode", "free"));
        config.unstable_dim = doc.value("unstable_dim", -1);
        config.mu = json_number(doc, "mu", config.mu);
        config.seed = doc.value("seed", config.seed);
        if (doc.contains("output_dir")) {
            config.output_dir = doc["output_dir"].get<std::string>();
        }
        if (doc.contains("start")) {
            config.start = doc["start"].get<std::vector<double>>();
        }
        config.settle_steps = doc.value("settle_steps", 0);
        config.attraction_horizon = doc.value("attraction_horizon", 40);
        if (doc.contains("attractor_grid")) {
            config.attractor_grid =
                doc["attractor_grid"].get<std::vector<std::vector<double>>>();
        }
        if (doc.contains("d_values")) {
            config.d_values = doc["d_values"].get<std::vector<double>>();
        }
        if (doc.contains("perturbation")) {
            PerturbationSpec p;
            p.kind = doc["perturbation"].value("kind", "shift");
            p.epsilon = json_number(doc["perturbation"], "epsilon", 0.0);
            if (doc["perturbation"].contains("shift")) {
                p.shift = doc["perturbation"]["shift"].get<std::vector<double>>();
            }
            config.perturbation = std::move(p);
        }
        if (doc.contains("bounds")) {
            const json& b = doc["bounds"];
            if (b.contains("C")) config.bound_C = b["C"].get<double>();
            if (b.contains("gamma")) config.bound_gamma = b["gamma"].get<double>();
            if (b.contains("L1")) config.bound_L1 = b["L1"].get<double>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    return config;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return from_json_text(text);
}

std::string ExperimentConfig::to_json_text() const {
    return config_echo(*this).dump(2) + "\n";
}

SmoothMap build_configured_system(const ExperimentConfig& config) {
    SmoothMap map = make_system(config.system);
    Rng rng(config.seed ^ 0x7e9107ULL);
    const auto violations = region_invariance_violations(map, 64, rng);
    if (!violations.empty()) {
        log_warn("system '" + map.label() + "' leaves its region at " +
                 std::to_string(violations.size()) + "/64 sampled points");
    }
    return map;
}

Vec default_start(const SystemSpec& system) {
    const int n = system.dimension;
    Vec x = Vec::Zero(n);
    switch (system.preset) {
        case Preset::kRadial:
            x[0] = 2.5;
            break;
        case Preset::kDoubleWellGradient:
            x[0] = 0.5;
            break;
        case Preset::kLinearDiag:
            break;  // fixed point at the origin
        case Preset::kCustom:
            if (system.custom.has_value() && !system.custom->region_lo.empty()) {
                for (int i = 0; i < n; ++i) {
                    x[i] = 0.5 * (system.custom->region_lo[i] +
                                  system.custom->region_hi[i]);
                }
            }
            break;
    }
    return x;
}

std::vector<Vec> default_attractor_sample(const SystemSpec& system) {
    const int n = system.dimension;
    std::vector<Vec> sample;
    switch (system.preset) {
        case Preset::kRadial: {
            if (n == 1) {
                for (int i = 0; i <= 200; ++i) {
                    sample.push_back(Vec::Constant(1, 2.0 * i / 200.0));
                }
            } else {
                // Ball of radius 2: lattice over its bounding box.
                for (const Vec& x : box_lattice(Box::cube(n, 2.0), n == 2 ? 289 : 343)) {
                    if (x.norm() <= 2.0) sample.push_back(x);
                }
            }
            break;
        }
        case Preset::kDoubleWellGradient: {
            // Segment [-1,1] along the first axis (saddle connections + sinks).
            for (int i = 0; i <= 200; ++i) {
                Vec x = Vec::Zero(n);
                x[0] = -1.0 + 2.0 * i / 200.0;
                sample.push_back(x);
            }
            break;
        }
        case Preset::kLinearDiag: {
            bool contracting = true;
            for (double d : system.diag) {
                if (std::abs(d) >= 1.0) contracting = false;
            }
            if (contracting) sample.push_back(Vec::Zero(n));
            break;
        }
        case Preset::kCustom:
            break;
    }
    return sample;
}

PseudoOrbit make_configured_orbit(const ExperimentConfig& config,
                                  const SmoothMap& map) {
    if (config.orbit_source == OrbitSource::kLoadCsv) {
        if (config.csv_path.empty()) {
            throw ConfigError("orbit_source load_csv requires csv_path");
        }
        return PseudoOrbit(map, read_orbit_csv(config.csv_path),
                           config.boundary_mode);
    }
    if (!(config.noise_level > 0.0 && config.noise_level < 1.0)) {
        throw ConfigError("noise_level must lie in (0,1) when generating");
    }
    if (config.window < 2) throw ConfigError("window must be >= 2");
    Vec x0;
    if (!config.start.empty()) {
        if (static_cast<int>(config.start.size()) != map.dimension()) {
            throw ConfigError("start vector has wrong dimension");
        }
        x0 = Vec(map.dimension());
        for (int i = 0; i < map.dimension(); ++i) x0[i] = config.start[i];
    } else {
        x0 = default_start(config.system);
    }
    Rng rng(config.seed);
    return generate_noisy_orbit(map, x0, config.window, config.noise_level,
                                config.boundary_mode, rng, config.settle_steps);
}

int resolve_unstable_dim(const ExperimentConfig& config, const SmoothMap& map,
                         const PseudoOrbit& orbit) {
    if (config.unstable_dim >= 0) return config.unstable_dim;
    try {
        // Clamp the seed into the region; wild pseudo-orbits can end outside,
        // where Newton may settle on spurious points.
        Vec seed = orbit.states().back();
        for (int i = 0; i < map.dimension(); ++i) {
            seed[i] = std::clamp(seed[i], map.region().lo[i], map.region().hi[i]);
        }
        const Vec equilibrium = find_fixed_point(map, seed, 1e-12, 60);
        if (!map.region().contains(equilibrium, 1e-6)) {
            log_warn("nearest equilibrium lies outside the region; assuming "
                     "unstable_dim 0");
            return 0;
        }
        const EquilibriumReport report = hyperbolicity_check(map, equilibrium);
        const int inferred = report.unstable_basis.dim();
        if (report.hyperbolic && inferred < map.dimension()) {
            log_debug("inferred unstable_dim = " + std::to_string(inferred) +
                      " from the equilibrium nearest the orbit end");
            return inferred;
        }
        log_warn("nearest equilibrium gives no usable splitting dimension; "
                 "assuming unstable_dim 0");
    } catch (const Error& e) {
        log_warn(std::string("could not infer unstable_dim (") + e.what() +
                 "); assuming 0");
    }
    return 0;
}

std::string certificate_to_json_text(const ShadowingCertificate& cert) {
    json doc = certificate_to_json(cert);
    doc["refined_length"] = cert.refined_states.size();
    return doc.dump(2) + "\n";
}

std::string frame_to_json_text(const SplittingFrame& frame) {
    json doc;
    doc["boundary_mode"] = boundary_mode_name(frame.boundary_mode);
    doc["C_tilde"] = frame.C_tilde;
    doc["lambda1"] = frame.lambda1;
    doc["M"] = frame.M;
    doc["invariance_defect"] = frame.invariance_defect;
    doc["length"] = frame.length();
    doc["unstable_dim"] = frame.unstable_dim();
    json stable = json::array();
    json unstable = json::array();
    for (int k = 0; k < frame.length(); ++k) {
        stable.push_back(matrix_to_json(frame.stable[k].basis()));
        unstable.push_back(matrix_to_json(frame.unstable[k].basis()));
    }
    doc["stable_bases"] = stable;
    doc["unstable_bases"] = unstable;
    return doc.dump(2) + "\n";
}

namespace {

struct StageTimer {
    std::vector<std::pair<std::string, double>>& sink;
    std::string current_stage;
    std::chrono::steady_clock::time_point t0 = now();

    explicit StageTimer(std::vector<std::pair<std::string, double>>& s) : sink(s) {}
    void begin(const std::string& stage) {
        current_stage = stage;
        t0 = now();
    }
    void end() { sink.emplace_back(current_stage, ms_since(t0)); }
};

json timings_to_json(const std::vector<std::pair<std::string, double>>& timings) {
    json doc;
    for (const auto& [name, ms] : timings) doc[name] = ms;
    return doc;
}

void attach_bounds_section(json& report, const ExperimentConfig& config,
                           const SmoothMap& map, double defect,
                           std::optional<AttractionProfile>& profile_out,
                           std::optional<HolderBound>& holder_out) {
    std::vector<Vec> attractor;
    if (!config.attractor_grid.empty()) {
        for (const auto& row : config.attractor_grid) {
            Vec x(static_cast<int>(row.size()));
            for (std::size_t i = 0; i < row.size(); ++i) x[static_cast<int>(i)] = row[i];
            attractor.push_back(std::move(x));
        }
    } else {
        attractor = default_attractor_sample(config.system);
    }
    if (attractor.empty()) {
        report["bounds"] = {{"skipped", "no attractor sample for this system"}};
        return;
    }
    if (!(defect > 0.0 && defect < 1.0)) {
        report["bounds"] = {{"skipped", "defect outside (0,1)"}};
        return;
    }
    try {
        AttractionProfile profile = exp_attraction_estimate(
            map, attractor, map.region(), config.attraction_horizon, config.seed);
        HolderBound holder = distance_bound(profile, defect);
        report["bounds"] = {{"profile", profile_to_json(profile)},
                            {"holder", holder_to_json(holder)}};
        json ledger = json::array();
        ledger.push_back({{"name", "C2"},
                          {"value", holder.C2},
                          {"formula", "C2 = L1^(1 + ln(C)/gamma) / (L1 - 1) + 1"}});
        ledger.push_back({{"name", "alpha"},
                          {"value", holder.alpha},
                          {"formula", "alpha = gamma / (gamma + ln L1)"}});
        report["bounds"]["ledger"] = ledger;
        profile_out = profile;
        holder_out = holder;
    } catch (const Error& e) {
        report["bounds"] = {{"skipped", std::string(e.what())}};
    }
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config) {
    RunReport result;
    json report;
    report["config"] = config_echo(config);

    std::filesystem::create_directories(config.output_dir);
    StageTimer timer(result.timings_ms);
    const auto t_total = now();

    try {
        timer.begin("system");
        const SmoothMap map = build_configured_system(config);
        timer.end();

        timer.begin("orbit");
        const PseudoOrbit orbit = make_configured_orbit(config, map);
        write_orbit_csv(config.output_dir / "orbit.csv", orbit.states());
        timer.end();

        const int unstable_dim = resolve_unstable_dim(config, map, orbit);
        report["unstable_dim_used"] = unstable_dim;
        report["defect"] = orbit.defect();

        timer.begin("shadow");
        ShadowingCertificate cert =
            shadow_pseudo_orbit(map, orbit, unstable_dim, config.mu,
                                ShadowOptions{.warmup = 24,
                                              .lipschitz_samples = 512,
                                              .seed = config.seed});
        timer.end();

        write_orbit_csv(config.output_dir / "shadow.csv", cert.refined_states);
        {
            std::ofstream err_csv(config.output_dir / "shadow_error.csv");
            if (!err_csv) throw IoError("cannot write shadow_error.csv");
            err_csv << "k,error\n";
            char buf[64];
            for (std::size_t k = 0; k < cert.refined_states.size(); ++k) {
                std::snprintf(buf, sizeof(buf), "%.17g",
                              (cert.refined_states[k] - orbit.state(k)).norm());
                err_csv << k << ',' << buf << "\n";
            }
        }

        timer.begin("bounds");
        attach_bounds_section(report, config, map, orbit.defect(), result.profile,
                              result.holder);
        timer.end();

        result.certificate = cert;
        result.ledger = certificate_ledger(cert);
        report["certificate"] = certificate_to_json(cert);
        {
            json per_index = json::array();
            for (std::size_t k = 0; k < cert.refined_states.size(); ++k) {
                per_index.push_back((cert.refined_states[k] - orbit.state(static_cast<int>(k))).norm());
            }
            report["certificate"]["per_index_error"] = per_index;
        }
        report["constants_ledger"] = ledger_to_json(result.ledger);
        result.status = cert.valid ? RunStatus::kValid : RunStatus::kHypothesisFailure;
        if (!cert.valid) {
            result.failure_stage = "certificate";
            result.failure_reason = "measured_sup_error exceeds L* d";
            report["failure"] = {{"stage", result.failure_stage},
                                 {"reason", result.failure_reason}};
        }
    } catch (const HypothesisError& e) {
        timer.end();
        result.status = RunStatus::kHypothesisFailure;
        result.failure_stage = timer.current_stage;
        result.failure_reason = e.what();
        report["failure"] = {{"stage", result.failure_stage},
                             {"reason", result.failure_reason}};
        log_warn("hypothesis failure in stage '" + result.failure_stage +
                 "': " + result.failure_reason);
    }

    result.timings_ms.emplace_back("total", ms_since(t_total));
    report["timing_ms"] = timings_to_json(result.timings_ms);
    result.report_json = report.dump(2) + "\n";
    write_text_file(config.output_dir / "report.json", result.report_json);
    return result;
}

SweepReport sweep(const ExperimentConfig& config, const std::vector<double>& d_values) {
    if (d_values.size() < 3) throw ConfigError("sweep needs >= 3 defect values");
    double dmin = d_values[0], dmax = d_values[0];
    for (double d : d_values) {
        if (!(d > 0.0)) throw ConfigError("sweep defect values must be positive");
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
    }
    if (dmax / dmin < 100.0) {
        throw ConfigError("sweep defect values must span at least two decades");
    }

    std::filesystem::create_directories(config.output_dir);
    SweepReport out;

    auto save_rows = [&] {
        std::ofstream csv(config.output_dir / "sweep.csv");
        if (!csv) throw IoError("cannot write sweep.csv");
        csv << "d,sup_error,bound\n";
        char buf[160];
        for (const auto& row : out.rows) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", row.d,
                          row.sup_error, row.bound);
            csv << buf;
        }
    };

    for (std::size_t i = 0; i < d_values.size(); ++i) {
        ExperimentConfig run_config = config;
        run_config.noise_level = d_values[i];
        run_config.output_dir = config.output_dir / ("d" + std::to_string(i));
        RunReport report;
        try {
            report = run_experiment(run_config);
        } catch (const Error&) {
            save_rows();
            throw;
        }
        if (report.status != RunStatus::kValid || !report.certificate.has_value()) {
            save_rows();
            throw HypothesisError("sweep aborted: run at d = " +
                                  std::to_string(d_values[i]) + " failed (" +
                                  report.failure_reason + "); partial results saved");
        }
        const auto& cert = *report.certificate;
        out.rows.push_back(SweepRow{cert.input_defect, cert.measured_sup_error,
                                    cert.bound, cert.valid});
    }

    // Log-log least squares of sup-error against d.
    const int m = static_cast<int>(out.rows.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& row : out.rows) {
        const double x = std::log(row.d);
        const double y = std::log(row.sup_error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    save_rows();

    json doc;
    doc["slope"] = out.slope;
    json rows = json::array();
    for (const auto& row : out.rows) {
        rows.push_back({{"d", row.d},
                        {"sup_error", row.sup_error},
                        {"bound", row.bound},
                        {"valid", row.valid}});
    }
    doc["rows"] = rows;
    out.report_json = doc.dump(2) + "\n";
    write_text_file(config.output_dir / "sweep_report.json", out.report_json);
    return out;
}

SmoothMap build_perturbed_system(const ExperimentConfig& config,
                                 const SmoothMap& base) {
    if (!config.perturbation.has_value()) {
        throw ConfigError("perturb run requires a 'perturbation' config block");
    }
    const PerturbationSpec& p = *config.perturbation;
    const int n = base.dimension();
    if (p.kind == "shift") {
        Vec shift = Vec::Zero(n);
        if (!p.shift.empty()) {
            if (static_cast<int>(p.shift.size()) != n) {
                throw ConfigError("perturbation shift vector has wrong dimension");
            }
            for (int i = 0; i < n; ++i) shift[i] = p.shift[i];
        } else {
            shift[0] = p.epsilon;
        }
        return SmoothMap(
            n, [base, shift](const Vec& x) { return Vec(base(x) + shift); },
            [base](const Vec& x) { return base.jacobian(x); }, base.region(),
            base.label() + "+shift");
    }
    if (p.kind == "tilt") {
        if (config.system.preset != Preset::kDoubleWellGradient) {
            throw ConfigError("tilt perturbation is defined for the double-well "
                              "gradient preset");
        }
        const double eps = p.epsilon;
        VectorField field;
        field.dimension = n;
        field.f = [n, eps](const Vec& x) {
            Vec out(n);
            out[0] = x[0] - x[0] * x[0] * x[0] - eps;
            for (int i = 1; i < n; ++i) out[i] = -x[i];
            return out;
        };
        field.df = [n](const Vec& x) {
            Mat out = -Mat::Identity(n, n);
            out(0, 0) = 1.0 - 3.0 * x[0] * x[0];
            return out;
        };
        return FlowMap(std::move(field), config.system.step_h,
                       config.system.integrator_tolerance, base.region(),
                       base.label() + "+tilt");
    }
    throw ConfigError("unknown perturbation kind '" + p.kind + "'");
}

RunReport run_perturbation_experiment(const ExperimentConfig& config) {
    RunReport result;
    json report;
    report["config"] = config_echo(config);
    std::filesystem::create_directories(config.output_dir);
    StageTimer timer(result.timings_ms);
    const auto t_total = now();

    try {
        timer.begin("system");
        const SmoothMap base = build_configured_system(config);
        const SmoothMap perturbed = build_perturbed_system(config, base);
        timer.end();

        timer.begin("orbit");
        Vec x0;
        if (!config.start.empty()) {
            x0 = Vec(base.dimension());
            for (int i = 0; i < base.dimension(); ++i) x0[i] = config.start[i];
        } else {
            x0 = default_start(config.system);
        }
        Rng rng(config.seed);
        const PseudoOrbit perturbed_orbit =
            generate_noisy_orbit(perturbed, x0, config.window, 0.0,
                                 config.boundary_mode, rng,
                                 std::max(config.settle_steps, 50));
        const PseudoOrbit retargeted =
            perturbation_defect(base, perturbed, perturbed_orbit);
        write_orbit_csv(config.output_dir / "orbit.csv", retargeted.states());
        timer.end();

        report["delta_eps"] = retargeted.defect();
        double sup_gap = 0.0;
        for (const Vec& x : retargeted.states()) {
            sup_gap = std::max(sup_gap, (base(x) - perturbed(x)).norm());
        }
        report["sup_map_distance"] = sup_gap;

        const int unstable_dim = resolve_unstable_dim(config, base, retargeted);
        report["unstable_dim_used"] = unstable_dim;

        timer.begin("shadow");
        ShadowingCertificate cert =
            shadow_pseudo_orbit(base, retargeted, unstable_dim, config.mu,
                                ShadowOptions{.warmup = 24,
                                              .lipschitz_samples = 512,
                                              .seed = config.seed});
        timer.end();

        write_orbit_csv(config.output_dir / "shadow.csv", cert.refined_states);

        timer.begin("bounds");
        attach_bounds_section(report, config, base, retargeted.defect(),
                              result.profile, result.holder);
        timer.end();

        result.certificate = cert;
        result.ledger = certificate_ledger(cert);
        report["certificate"] = certificate_to_json(cert);
        report["constants_ledger"] = ledger_to_json(result.ledger);
        result.status = cert.valid ? RunStatus::kValid : RunStatus::kHypothesisFailure;
        if (!cert.valid) {
            result.failure_stage = "certificate";
            result.failure_reason = "measured_sup_error exceeds L* d";
            report["failure"] = {{"stage", result.failure_stage},
                                 {"reason", result.failure_reason}};
        }
    } catch (const HypothesisError& e) {
        timer.end();
        result.status = RunStatus::kHypothesisFailure;
        result.failure_stage = timer.current_stage;
        result.failure_reason = e.what();
        report["failure"] = {{"stage", result.failure_stage},
                             {"reason", result.failure_reason}};
    }

    result.timings_ms.emplace_back("total", ms_since(t_total));
    report["timing_ms"] = timings_to_json(result.timings_ms);
    result.report_json = report.dump(2) + "\n";
    write_text_file(config.output_dir / "report.json", result.report_json);
    return result;
}

RunReport run_bounds_evaluation(const ExperimentConfig& config) {
    RunReport result;
    json report;
    report["config"] = config_echo(config);
    std::filesystem::create_directories(config.output_dir);
    const auto t_total = now();

    try {
        AttractionProfile profile;
        if (config.bound_C && config.bound_gamma && config.bound_L1) {
            profile.C = *config.bound_C;
            profile.gamma = *config.bound_gamma;
            profile.L1 = *config.bound_L1;
        } else {
            const SmoothMap map = build_configured_system(config);
            std::vector<Vec> attractor;
            if (!config.attractor_grid.empty()) {
                for (const auto& row : config.attractor_grid) {
                    Vec x(static_cast<int>(row.size()));
                    for (std::size_t i = 0; i < row.size(); ++i) {
                        x[static_cast<int>(i)] = row[i];
                    }
                    attractor.push_back(std::move(x));
                }
            } else {
                attractor = default_attractor_sample(config.system);
            }
            if (attractor.empty()) {
                throw HypothesisError("bounds: no attractor sample for this system");
            }
            profile = exp_attraction_estimate(map, attractor, map.region(),
                                              config.attraction_horizon, config.seed);
        }
        report["profile"] = profile_to_json(profile);
        const HolderBound holder = distance_bound(profile, config.noise_level);
        report["holder"] = holder_to_json(holder);
        json ledger = json::array();
        ledger.push_back({{"name", "C2"},
                          {"value", holder.C2},
                          {"formula", "C2 = L1^(1 + ln(C)/gamma) / (L1 - 1) + 1"}});
        ledger.push_back({{"name", "alpha"},
                          {"value", holder.alpha},
                          {"formula", "alpha = gamma / (gamma + ln L1)"}});
        ledger.push_back({{"name", "value"},
                          {"value", holder.value},
                          {"formula", "bound = C2 d^alpha (regime-dependent)"}});
        report["constants_ledger"] = ledger;
        result.profile = profile;
        result.holder = holder;
        result.status = RunStatus::kValid;
    } catch (const HypothesisError& e) {
        result.status = RunStatus::kHypothesisFailure;
        result.failure_reason = e.what();
        report["failure"] = {{"stage", "bounds"}, {"reason", result.failure_reason}};
    }

    result.timings_ms.emplace_back("total", ms_since(t_total));
    report["timing_ms"] = timings_to_json(result.timings_ms);
    result.report_json = report.dump(2) + "\n";
    write_text_file(config.output_dir / "bounds.json", result.report_json);
    return result;
}

RunReport run_splitting_inspection(const ExperimentConfig& config) {
    RunReport result;
    json report;
    report["config"] = config_echo(config);
    std::filesystem::create_directories(config.output_dir);
    const auto t_total = now();

    try {
        const SmoothMap map = build_configured_system(config);
        const PseudoOrbit orbit = make_configured_orbit(config, map);
        write_orbit_csv(config.output_dir / "orbit.csv", orbit.states());
        const int unstable_dim = resolve_unstable_dim(config, map, orbit);
        const int warmup = std::clamp((orbit.length() - 10) / 2, 0, 24);
        const SplittingFrame frame =
            build_splitting(map, orbit, unstable_dim, warmup);
        const std::string frame_json = frame_to_json_text(frame);
        write_text_file(config.output_dir / "splitting.json", frame_json);
        report["frame"] = json::parse(frame_json);
        report["frame"].erase("stable_bases");
        report["frame"].erase("unstable_bases");
        result.status = RunStatus::kValid;
    } catch (const HypothesisError& e) {
        result.status = RunStatus::kHypothesisFailure;
        result.failure_reason = e.what();
        report["failure"] = {{"stage", "splitting"}, {"reason", result.failure_reason}};
    }

    result.timings_ms.emplace_back("total", ms_since(t_total));
    report["timing_ms"] = timings_to_json(result.timings_ms);
    result.report_json = report.dump(2) + "\n";
    write_text_file(config.output_dir / "report.json", result.report_json);
    return result;
}

}  // namespace shadowlab
