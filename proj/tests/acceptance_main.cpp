// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code next to each check.

#include "test_support.hpp"

#include "shadowlab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

using namespace shadowlab;
using namespace shadowlab::testing;

namespace {

int failures = 0;

void run_criterion(int number, const std::string& title,
                   const std::function<void()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string error;
    try {
        body();
    } catch (const std::exception& e) {
        error = e.what();
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                  t0)
            .count();
    if (error.empty()) {
        std::printf("[PASS] criterion %d: %s (%.0f ms)\n", number, title.c_str(), ms);
    } else {
        ++failures;
        std::printf("[FAIL] criterion %d: %s (%.0f ms)\n       %s\n", number,
                    title.c_str(), ms, error.c_str());
    }
}

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw CheckFailure(message);
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir =
        std::filesystem::temp_directory_path() / "shadowlab_acceptance" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// --------------------------------------------------------------------------
// 1. Radial decay envelope: rho(t) - 2 <= (rho(0) - 2) e^{-54 t} on the grid
//    t = 0.05 k up to 0.5, zero violations, under 1 second.
// --------------------------------------------------------------------------
void criterion_1() {
    const double h = 0.05;
    SmoothMap map = make_system(Preset::kRadial, 1, h, 1e-14);
    const double rho0 = 3.0;
    Vec x = Vec::Constant(1, rho0);
    int violations = 0;
    for (int k = 1; k * h <= 0.5 + 1e-12; ++k) {
        x = map(x);
        const double envelope = (rho0 - 2.0) * std::exp(-54.0 * k * h);
        if (x[0] - 2.0 > envelope) ++violations;
    }
    require(violations == 0, "decay envelope violated " +
                                 std::to_string(violations) + " times");
}

// --------------------------------------------------------------------------
// 2. Lipschitz shadowing scaling on linear_diag(0.5, 2) and the double-well
//    flow map: slope of log sup-error vs log d within [0.9, 1.1] over
//    d = 1e-3..1e-6, every run within L* d, under 30 s total.
// --------------------------------------------------------------------------
void criterion_2() {
    const std::vector<double> ds = {1e-3, 1e-4, 1e-5, 1e-6};

    {
        SmoothMap map = make_system(Preset::kLinearDiag, 2, 0.1, 1e-10, {0.5, 2.0});
        std::vector<double> log_d, log_err;
        for (double d : ds) {
            PseudoOrbit orbit = cloud_orbit(map, d, 200, 42);
            const ShadowingCertificate cert = shadow_pseudo_orbit(map, orbit, 1, 0.2);
            require(cert.valid, "saddle certificate invalid at d = " +
                                    std::to_string(d));
            require(cert.measured_sup_error <= cert.L_star * orbit.defect(),
                    "saddle error above L* d");
            log_d.push_back(std::log(orbit.defect()));
            log_err.push_back(std::log(cert.measured_sup_error));
        }
        const double slope = fitted_slope(log_d, log_err);
        require(slope >= 0.9 && slope <= 1.1,
                "saddle slope " + std::to_string(slope) + " outside [0.9, 1.1]");
    }

    {
        FlowMap map(double_well_vector_field(1), 1.0, 1e-12, Box::cube(1, 2.0),
                    "double_well");
        std::vector<double> log_d, log_err;
        for (double d : ds) {
            Rng rng(7);
            PseudoOrbit orbit = generate_noisy_orbit(map, Vec::Constant(1, 0.5), 200,
                                                     d, BoundaryMode::kFree, rng, 0);
            const ShadowingCertificate cert = shadow_pseudo_orbit(map, orbit, 0, 0.2);
            require(cert.valid, "double-well certificate invalid at d = " +
                                    std::to_string(d));
            require(cert.measured_sup_error <= cert.L_star * orbit.defect(),
                    "double-well error above L* d");
            log_d.push_back(std::log(orbit.defect()));
            log_err.push_back(std::log(cert.measured_sup_error));
        }
        const double slope = fitted_slope(log_d, log_err);
        require(slope >= 0.9 && slope <= 1.1,
                "double-well slope " + std::to_string(slope) + " outside [0.9, 1.1]");
    }
}

// --------------------------------------------------------------------------
// 3. contraction_solve equals the dense stacked Newton solve to 1e-10 on 20
//    random 4D hyperbolic instances, window 50, under 60 s.
// --------------------------------------------------------------------------
void criterion_3() {
    double worst = 0.0;
    for (int instance = 0; instance < 20; ++instance) {
        SmoothMap map = random_hyperbolic_map(1000 + instance, 2);

        // Pilot constants fix the contraction power N for this instance.
        PseudoOrbit pilot = cloud_orbit(map, 1e-5, 61, 999);
        SplittingFrame pilot_frame = build_splitting(map, pilot, 2, 20);
        SolverConstants constants = assemble_constants(pilot_frame, map, pilot, 0.3);
        const int n_power = constants.N;

        // Base window sized so the stacked solve window is exactly 50 states.
        PseudoOrbit orbit =
            cloud_orbit(map, 1e-5, 49 * n_power + 1, 50 + instance);
        SmoothMap power = map.power(n_power);
        std::vector<Vec> sub;
        for (int k = 0; k < orbit.length(); k += n_power) {
            sub.push_back(orbit.state(k));
        }
        PseudoOrbit sub_orbit(power, sub, BoundaryMode::kFree);
        SplittingFrame frame = build_splitting(power, sub_orbit, 2, 18);

        const ContractionResult result =
            contraction_solve(power, sub_orbit, frame, constants);
        const auto oracle = newton_window_oracle(power, sub_orbit, frame);
        require(oracle.size() == result.correction.size(), "oracle size mismatch");
        require(static_cast<int>(oracle.size()) == 50, "window is not 50");
        for (std::size_t k = 0; k < oracle.size(); ++k) {
            worst = std::max(worst, (oracle[k] - result.correction[k]).norm());
        }
    }
    require(worst <= 1e-10,
            "worst oracle gap " + std::to_string(worst) + " above 1e-10");
}

// --------------------------------------------------------------------------
// 4. Constant formulas, all to 1e-12.
// --------------------------------------------------------------------------
void criterion_4() {
    AttractionProfile profile;
    profile.C = 2.0;
    profile.gamma = std::log(2.0);
    profile.L1 = 2.0;
    const HolderBound bound = distance_bound(profile, 1e-4);
    require(std::abs(bound.alpha - 0.5) <= 1e-12, "alpha != 1/2");
    require(std::abs(bound.C2 - 5.0) <= 1e-12, "C2 != 5");
    require(std::abs(bound.value - 0.05) <= 1e-12, "bound != 0.05");

    require(std::abs(subsample_constants(2.0, 3) - 7.0) <= 1e-12,
            "subsample_constants(2, 3) != 7");
    require(std::abs(lift_constant(2.0, 2, 10.0) - 70.0) <= 1e-12,
            "lift_constant(2, 2, 10) != 70");

    const auto nc = neighborhood_shadowing_constants(5.0, 2.0, 10.0, 0.5, 0.1);
    require(std::abs(nc.C2 - 16.0) <= 1e-12, "C2 != 16");
    require(std::abs(nc.C3 - 176.0) <= 1e-12, "C3 != 176");
}

// --------------------------------------------------------------------------
// 5. beta* maximizes min{beta, gamma (1 - beta)/ln L1} for 100 random pairs,
//    grid resolution 1e-4.
// --------------------------------------------------------------------------
void criterion_5() {
    Rng rng(2025);
    for (int trial = 0; trial < 100; ++trial) {
        const double gamma = rng.uniform(0.05, 4.0);
        const double L1 = rng.uniform(1.01, 10.0);
        const double beta_star = gamma / (gamma + std::log(L1));
        double best_beta = 0.0, best = -1.0;
        const int grid = 10000;
        for (int i = 1; i < grid; ++i) {
            const double beta = static_cast<double>(i) / grid;
            const double a = alpha_of_beta(beta, gamma, L1);
            if (a > best) {
                best = a;
                best_beta = beta;
            }
        }
        require(std::abs(best_beta - beta_star) <= 1e-4 + 1e-12,
                "grid maximizer strayed from beta* at trial " +
                    std::to_string(trial));
        require(alpha_of_beta(beta_star, gamma, L1) >= best - 1e-9,
                "beta* not maximal at trial " + std::to_string(trial));
    }
}

// --------------------------------------------------------------------------
// 6. Empirical distance-bound soundness on the double-well map: 50 seeded
//    runs per defect in {1e-3, 1e-4, 1e-5}, zero violations.
// --------------------------------------------------------------------------
void criterion_6() {
    SmoothMap map = make_system(Preset::kDoubleWellGradient, 1, 0.1, 1e-12);
    std::vector<Vec> attractor;
    for (int i = 0; i <= 400; ++i) {
        attractor.push_back(Vec::Constant(1, -1.0 + 2.0 * i / 400));
    }
    const AttractionProfile profile =
        exp_attraction_estimate(map, attractor, map.region(), 40);
    require(profile.L1 > 1.0, "double-well profile not in the Holder regime");

    for (double d : {1e-3, 1e-4, 1e-5}) {
        const HolderBound bound = distance_bound(profile, d);
        for (int run = 0; run < 50; ++run) {
            Rng rng(9000 + run);
            PseudoOrbit orbit = generate_noisy_orbit(
                map, Vec::Constant(1, rng.uniform(-0.5, 0.5)), 120, d,
                BoundaryMode::kFree, rng, 200);
            for (const Vec& x : orbit.states()) {
                double dist = std::numeric_limits<double>::infinity();
                for (const Vec& a : attractor) dist = std::min(dist, (x - a).norm());
                require(dist <= bound.value,
                        "orbit point at distance " + std::to_string(dist) +
                            " above the bound " + std::to_string(bound.value) +
                            " (d = " + std::to_string(d) + ")");
            }
        }
    }
}

// --------------------------------------------------------------------------
// 7. Projection calculus identities on 100 random transversal pairs in
//    dimensions 2-8, tolerance 1e-8.
// --------------------------------------------------------------------------
void criterion_7() {
    Rng rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 7);
        const int s_dim =
            1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n - 1));
        auto [s, u] = random_transversal_pair(n, s_dim, rng);

        // Resolvent identity for the oblique projector.
        const Mat p_su = oblique_projector(s, u).matrix;
        const Mat ps = s.orthogonal_projector();
        const Mat pu = u.orthogonal_projector();
        const Mat t = Mat::Identity(n, n) - ps * pu;
        require(operator_norm(p_su - t.partialPivLu().solve(ps * t)) <= 1e-8,
                "resolvent identity violated at trial " + std::to_string(trial));

        // Composition norm strictly below 1 and within its structural bound.
        const double comp = operator_norm(ps * pu);
        require(comp < 1.0, "composition norm reached 1");
        const double p_us_norm = operator_norm(oblique_projector(u, s).matrix);
        require(comp <= std::sqrt(1.0 - 1.0 / (p_us_norm * p_us_norm)) + 1e-8,
                "composition norm above its bound");

        // Projection bound chain through the measured inclination.
        const double incl = inclination(s, u, u.orthogonal_complement());
        require(std::isfinite(incl), "inclination infinite for a transversal pair");
        require(operator_norm(p_su) <= projection_norm_bound(incl) + 1e-8,
                "oblique norm above 2 (M + 1)^2");
    }
}

// --------------------------------------------------------------------------
// 8. Splitting verification: exact constants on linear normal systems to
//    1e-9; double-well heteroclinic frame within 1e-4 of the covariant
//    oracle.
// --------------------------------------------------------------------------
void criterion_8() {
    {
        Rng rng(33);
        for (int trial = 0; trial < 5; ++trial) {
            Mat g(2, 2);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) g(i, j) = rng.gaussian();
            Eigen::HouseholderQR<Mat> qr(g);
            const Mat q = qr.householderQ() * Mat::Identity(2, 2);
            Mat d(2, 2);
            d << 0.5, 0, 0, 2.0;
            const Mat a = q * d * q.transpose();
            SmoothMap map(
                2, [a](const Vec& x) { return Vec(a * x); },
                [a](const Vec&) { return a; }, Box::cube(2, 2.0), "normal");
            std::vector<Vec> states(80, Vec::Zero(2));
            PseudoOrbit orbit(map, states, BoundaryMode::kFree);
            const SplittingFrame frame = build_splitting(map, orbit, 1, 20);
            require(std::abs(frame.C_tilde - 1.0) <= 1e-9, "C~ != 1");
            require(std::abs(frame.lambda1 - 0.5) <= 1e-9, "lambda1 != 1/2");
            require(std::abs(frame.M - 2.0) <= 1e-9, "M != 2");
        }
    }

    {
        const double h = 0.1;
        FlowMap map(double_well_vector_field(2), h, 1e-12, Box::cube(2, 2.0), "dw2");
        const int window = 261;
        const int warmup = 60;
        Vec x0(2);
        x0 << 1e-12, 0.0;
        std::vector<Vec> states;
        states.push_back(x0);
        for (int k = 1; k < window; ++k) states.push_back(map(states.back()));
        PseudoOrbit orbit(map, states, BoundaryMode::kFree);
        const SplittingFrame frame = build_splitting(map, orbit, 1, warmup);

        const int extra = 240;
        Vec x0_ext(2);
        x0_ext << 1e-12 * std::exp(-h * extra), 0.0;
        std::vector<Vec> extended;
        extended.push_back(x0_ext);
        for (int k = 1; k < window + extra; ++k) {
            extended.push_back(map(extended.back()));
        }
        const CovariantOracle oracle =
            covariant_oracle(map, extended, 1, 4 * warmup, 4 * warmup, 4242);

        double worst = 0.0;
        for (int k = warmup; k <= 140; ++k) {
            worst = std::max(
                worst, subspace_gap(frame.unstable[k], oracle.unstable[k + extra]));
            worst = std::max(worst,
                             subspace_gap(frame.stable[k], oracle.stable[k + extra]));
        }
        require(worst <= 1e-4, "heteroclinic frame gap " + std::to_string(worst) +
                                   " above 1e-4");
    }
}

// --------------------------------------------------------------------------
// 9. Determinism: identical configs and seeds give byte-identical reports
//    excluding timing.
// --------------------------------------------------------------------------
void criterion_9() {
    ExperimentConfig config;
    config.system.preset = Preset::kRadial;
    config.system.dimension = 1;
    config.system.step_h = 0.1;
    config.system.integrator_tolerance = 1e-12;
    config.noise_level = 1e-5;
    config.window = 160;
    config.seed = 77;
    config.output_dir = fresh_dir("det_a");
    const RunReport a = run_experiment(config);
    const RunReport b = [&] {
        ExperimentConfig again = config;  // identical, including output_dir
        return run_experiment(again);
    }();
    require(a.status == RunStatus::kValid, "first run failed");
    require(b.status == RunStatus::kValid, "second run failed");

    auto strip_timing = [](const std::string& text) {
        std::string out;
        bool in_timing = false;
        int depth = 0;
        std::size_t i = 0;
        while (i < text.size()) {
            static const std::string key = "\"timing_ms\":";
            if (!in_timing && text.compare(i, key.size(), key) == 0) {
                in_timing = true;
                depth = 0;
                i += key.size();
                continue;
            }
            if (in_timing) {
                if (text[i] == '{') ++depth;
                if (text[i] == '}') {
                    --depth;
                    if (depth == 0) in_timing = false;
                }
                ++i;
                continue;
            }
            out.push_back(text[i]);
            ++i;
        }
        return out;
    };
    require(strip_timing(a.report_json) == strip_timing(b.report_json),
            "reports differ outside the timing block");
}

}  // namespace

int main() {
    setvbuf(stdout, nullptr, _IONBF, 0);
    run_criterion(1, "radial e^{-54 t} decay envelope", criterion_1);
    run_criterion(2, "Lipschitz shadowing scaling in [0.9, 1.1]", criterion_2);
    run_criterion(3, "contraction solve equals the stacked Newton oracle",
                  criterion_3);
    run_criterion(4, "closed-form constants to 1e-12", criterion_4);
    run_criterion(5, "Holder exponent maximality over the beta grid", criterion_5);
    run_criterion(6, "empirical distance-bound soundness, 50 runs per defect",
                  criterion_6);
    run_criterion(7, "projection calculus identities in dimensions 2-8",
                  criterion_7);
    run_criterion(8, "splitting constants and covariant-vector oracle",
                  criterion_8);
    run_criterion(9, "byte-identical reports modulo timing", criterion_9);
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all 9 criteria passed\n");
    return 0;
}
