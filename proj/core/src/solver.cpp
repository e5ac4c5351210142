#include "shadowlab/solver.hpp"

#include "shadowlab/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace shadowlab {

namespace {

constexpr double kSolveTol = 1e-13;
constexpr int kSolveCap = 200;
constexpr double kMinDelta = 1e-12;

struct FrameProjectors {
    std::vector<Mat> stable;    // P_{S(k)U(k)}
    std::vector<Mat> unstable;  // I - P_{S(k)U(k)}
};

FrameProjectors frame_projectors(const SplittingFrame& frame) {
    FrameProjectors p;
    const int len = frame.length();
    p.stable.reserve(len);
    p.unstable.reserve(len);
    for (int k = 0; k < len; ++k) {
        Mat ps = frame.stable_projector(k);
        p.unstable.push_back(Mat::Identity(ps.rows(), ps.cols()) - ps);
        p.stable.push_back(std::move(ps));
    }
    return p;
}

/// Block-diagonal part of A_k relative to the frame.
Mat block_diagonalized(const Mat& a, const FrameProjectors& p, int k, int k1) {
    return p.stable[k1] * a * p.stable[k] + p.unstable[k1] * a * p.unstable[k];
}

}  // namespace

SolverConstants assemble_constants(const SplittingFrame& frame, const SmoothMap& map,
                                   const PseudoOrbit& orbit, double mu) {
    if (!(mu > 0.0 && mu < 1.0)) {
        throw ConfigError("assemble_constants: mu must lie in (0,1)");
    }
    if (!(frame.lambda1 > 0.0 && frame.lambda1 < 1.0)) {
        throw ConfigError("assemble_constants: frame carries no verified constants");
    }

    SolverConstants c;
    c.mu = mu;
    c.M = frame.M;
    c.N = choose_power(frame.C_tilde, frame.lambda1, mu);

    const SmoothMap power = map.power(c.N);

    // K = sup |DF^N| along the orbit (never below M).
    double k_meas = 0.0;
    for (const Vec& x : orbit.states()) {
        k_meas = std::max(k_meas, operator_norm(power.jacobian(x)));
    }
    c.K = std::max(frame.M, k_meas);

    // nu0: largest halving-grid value keeping lambda = (1 + nu0) mu below 1.
    c.nu0 = 0.5;
    while ((1.0 + c.nu0) * mu >= 1.0) {
        c.nu0 *= 0.5;
        if (c.nu0 < 1e-12) {
            throw HypothesisError("assemble_constants: no admissible nu0 for mu " +
                                  std::to_string(mu));
        }
    }
    c.lambda = (1.0 + c.nu0) * mu;
    c.N1 = c.M * (1.0 + c.lambda) / (1.0 - c.lambda);

    // k1: largest halving-grid value below nu0 with k1 N1 <= 0.9.
    c.k1 = 0.5 * c.nu0;
    while (c.k1 * c.N1 > 0.9) {
        c.k1 *= 0.5;
        if (c.k1 < 1e-8) {
            throw HypothesisError(
                "assemble_constants: hyperbolicity too weak, no admissible k1 "
                "(N1 = " + std::to_string(c.N1) + ")");
        }
    }
    c.nu = 0.9 * c.k1 / (2.0 * c.K * (2.0 * c.K + 1.0));

    // Delta: largest halving-grid radius on which the nonlinear remainder of
    // F^N is k1/2-Lipschitz, probed through second differences of the
    // Jacobian at sampled orbit points and directions.
    {
        const double target = 0.5 * c.k1;
        const int len = orbit.length();
        const int point_stride = std::max(1, len / 12);
        Rng rng(0xde17a ^ static_cast<std::uint64_t>(len));
        std::vector<Vec> dirs;
        for (int i = 0; i < 6; ++i) dirs.push_back(rng.unit_vector(map.dimension()));

        std::vector<std::pair<Vec, Mat>> base;  // orbit point, DF^N there
        for (int k = 0; k < len; k += point_stride) {
            base.emplace_back(orbit.state(k), power.jacobian(orbit.state(k)));
        }

        double radius = map.region().inner_radius();
        c.Delta = 0.0;
        while (radius >= kMinDelta) {
            double modulus = 0.0;
            for (const auto& [x, j0] : base) {
                for (const Vec& dir : dirs) {
                    for (double scale : {1.0, 0.5}) {
                        const Mat j1 = power.jacobian(x + (scale * radius) * dir);
                        modulus = std::max(modulus, operator_norm(j1 - j0));
                    }
                    if (modulus > target) break;
                }
                if (modulus > target) break;
            }
            if (modulus <= target) {
                c.Delta = radius;
                break;
            }
            radius *= 0.5;
        }
        if (c.Delta < kMinDelta) {
            throw HypothesisError(
                "assemble_constants: nonlinearity too strong, no radius with a "
                "k1/2-Lipschitz remainder above " + std::to_string(kMinDelta));
        }
    }

    c.L = c.N1 / (1.0 - c.k1 * c.N1);
    c.d1 = c.Delta / c.L;
    return c;
}

std::vector<Vec> linear_green_solve(const std::vector<Mat>& a,
                                    const SplittingFrame& frame,
                                    const std::vector<Vec>& g, BoundaryMode mode) {
    const int len = frame.length();
    const int transitions = static_cast<int>(g.size());
    if (static_cast<int>(a.size()) != transitions) {
        throw ConfigError("linear_green_solve: one matrix per transition required");
    }
    const int expected =
        (mode == BoundaryMode::kPeriodic) ? len : len - 1;
    if (transitions != expected) {
        throw ConfigError("linear_green_solve: transition count does not match frame");
    }
    const int n = frame.stable.front().ambient_dim();
    const int s_dim = frame.stable.front().dim();
    const int u_dim = frame.unstable.front().dim();
    const FrameProjectors proj = frame_projectors(frame);

    if (mode == BoundaryMode::kPeriodic) {
        // Cyclic system: solve the stacked block matrix exactly.
        const int dim = len * n;
        Mat system = Mat::Zero(dim, dim);
        Vec rhs(dim);
        for (int k = 0; k < len; ++k) {
            const int k1 = (k + 1) % len;
            system.block(k * n, k1 * n, n, n) = Mat::Identity(n, n);
            system.block(k * n, k * n, n, n) -= block_diagonalized(a[k], proj, k, k1);
            rhs.segment(k * n, n) = g[k];
        }
        Eigen::PartialPivLU<Mat> lu(system);
        const Vec flat = lu.solve(rhs);
        if (!flat.allFinite()) {
            throw HypothesisError("linear_green_solve: cyclic system is singular");
        }
        std::vector<Vec> v(len);
        for (int k = 0; k < len; ++k) v[k] = flat.segment(k * n, n);
        return v;
    }

    std::vector<Vec> v(len, Vec::Zero(n));

    // Stable sweep, forward from zero.
    if (s_dim > 0) {
        Vec coords = Vec::Zero(s_dim);
        std::vector<Vec> stable_part(len, Vec::Zero(n));
        for (int k = 0; k < transitions; ++k) {
            const Vec pushed =
                proj.stable[k + 1] *
                (a[k] * (frame.stable[k].basis() * coords) + g[k]);
            coords = frame.stable[k + 1].basis().transpose() * pushed;
            stable_part[k + 1] = frame.stable[k + 1].basis() * coords;
        }
        for (int k = 0; k < len; ++k) v[k] += stable_part[k];
    }

    // Unstable sweep, backward from zero at the right end.
    if (u_dim > 0) {
        Vec coords = Vec::Zero(u_dim);
        std::vector<Vec> unstable_part(len, Vec::Zero(n));
        for (int k = transitions - 1; k >= 0; --k) {
            const Mat w = frame.unstable[k + 1].basis().transpose() *
                          (proj.unstable[k + 1] * a[k] * frame.unstable[k].basis());
            Eigen::JacobiSVD<Mat> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
            if (svd.singularValues().minCoeff() < 1e-12) {
                throw HypothesisError(
                    "linear_green_solve: singular unstable block at index " +
                    std::to_string(k));
            }
            const Vec forced = frame.unstable[k + 1].basis().transpose() *
                               (proj.unstable[k + 1] * g[k]);
            coords = svd.solve(coords - forced);
            unstable_part[k] = frame.unstable[k].basis() * coords;
        }
        for (int k = 0; k < len; ++k) v[k] += unstable_part[k];
    }

    return v;
}

ContractionResult contraction_solve(const SmoothMap& power_map,
                                    const PseudoOrbit& orbit,
                                    const SplittingFrame& frame,
                                    const SolverConstants& constants) {
    const int len = orbit.length();
    if (frame.length() != len) {
        throw ConfigError("contraction_solve: frame does not cover the orbit");
    }
    if (orbit.defect() > constants.d1 * (1.0 + 1e-9)) {
        throw HypothesisError("contraction_solve: orbit defect " +
                              std::to_string(orbit.defect()) + " exceeds d1 = " +
                              std::to_string(constants.d1));
    }
    const int transitions = orbit.transitions();
    const BoundaryMode mode = orbit.boundary_mode();
    const FrameProjectors proj = frame_projectors(frame);

    std::vector<Mat> a;
    a.reserve(transitions);
    std::vector<Mat> a_hat;
    a_hat.reserve(transitions);
    for (int k = 0; k < transitions; ++k) {
        a.push_back(power_map.jacobian(orbit.state(k)));
        a_hat.push_back(block_diagonalized(a[k], proj, k, orbit.next_index(k)));
    }

    ContractionResult result;
    result.correction.assign(len, Vec::Zero(orbit.state(0).size()));
    std::vector<Vec> g(transitions);

    for (int iteration = 1; iteration <= kSolveCap; ++iteration) {
        for (int k = 0; k < transitions; ++k) {
            const int k1 = orbit.next_index(k);
            g[k] = power_map(orbit.state(k) + result.correction[k]) -
                   orbit.state(k1) - a_hat[k] * result.correction[k];
        }
        std::vector<Vec> next = linear_green_solve(a_hat, frame, g, mode);

        double change = 0.0;
        double sup = 0.0;
        for (int k = 0; k < len; ++k) {
            change = std::max(change, (next[k] - result.correction[k]).norm());
            sup = std::max(sup, next[k].norm());
        }
        result.correction = std::move(next);
        result.iterations = iteration;
        result.last_change = change;

        if (sup > constants.Delta) {
            throw ConvergenceError(
                "contraction_solve: iterate escaped the Delta-ball (sup " +
                    std::to_string(sup) + " > Delta " +
                    std::to_string(constants.Delta) + ")",
                sup);
        }
        if (change <= kSolveTol) return result;
    }
    throw ConvergenceError("contraction_solve: no convergence within " +
                               std::to_string(kSolveCap) + " iterations",
                           result.last_change);
}

ShadowingCertificate shadow_pseudo_orbit(const SmoothMap& map,
                                         const PseudoOrbit& orbit,
                                         int unstable_dim, double mu,
                                         const ShadowOptions& options) {
    const int len = orbit.length();
    const double d = orbit.defect();

    // Nontrivial unstable families need a few filtration steps to converge;
    // seed-only frames are meaningless.
    const int min_warmup = unstable_dim > 0 ? 3 : 0;
    if (len < 2 * min_warmup + 10) {
        throw HypothesisError("shadow_pseudo_orbit: window of " +
                              std::to_string(len) + " states is too short");
    }
    const int warmup1 =
        std::clamp((len - 10) / 2, min_warmup, std::max(options.warmup, min_warmup));
    const SplittingFrame frame = build_splitting(map, orbit, unstable_dim, warmup1);
    SolverConstants constants = assemble_constants(frame, map, orbit, mu);
    const int n_power = constants.N;

    const double L1 =
        lipschitz_estimate(map, map.region(), options.lipschitz_samples, options.seed);
    const double c1 = subsample_constants(L1, n_power);
    const double d0 = std::min(constants.Delta, constants.d1) / c1;
    if (d > d0) {
        throw HypothesisError("shadow_pseudo_orbit: defect d = " + std::to_string(d) +
                              " exceeds d0 = " + std::to_string(d0));
    }

    const bool periodic = orbit.boundary_mode() == BoundaryMode::kPeriodic;
    if (periodic && len % n_power != 0) {
        throw HypothesisError(
            "shadow_pseudo_orbit: periodic window length " + std::to_string(len) +
            " is not divisible by the contraction power N = " +
            std::to_string(n_power));
    }

    // Power-map reduction: subsample every N-th state.
    std::vector<Vec> subsampled;
    for (int k = 0; k < len; k += n_power) subsampled.push_back(orbit.state(k));
    if (static_cast<int>(subsampled.size()) < 2) {
        throw HypothesisError(
            "shadow_pseudo_orbit: window too short for contraction power N = " +
            std::to_string(n_power));
    }
    const SmoothMap power = map.power(n_power);
    const PseudoOrbit power_orbit(power, subsampled, orbit.boundary_mode());
    if (power_orbit.defect() > c1 * d + 1e-12) {
        throw Error("power-reduction consistency violated: subsampled defect " +
                    std::to_string(power_orbit.defect()) + " > C1 d = " +
                    std::to_string(c1 * d));
    }

    const int len_n = power_orbit.length();
    if (len_n < 2 * min_warmup + 10) {
        throw HypothesisError(
            "shadow_pseudo_orbit: window too short for contraction power N = " +
            std::to_string(n_power) + " (subsampled length " +
            std::to_string(len_n) + ")");
    }
    const int warmup_n =
        std::clamp((len_n - 10) / 2, min_warmup, std::max(warmup1, min_warmup));
    const SplittingFrame power_frame =
        build_splitting(power, power_orbit, unstable_dim, warmup_n);

    const ContractionResult solve =
        contraction_solve(power, power_orbit, power_frame, constants);

    // Re-expand by exact iteration from each corrected subsample point.
    std::vector<Vec> refined(len);
    for (int m = 0; m < len_n; ++m) {
        Vec y = power_orbit.state(m) + solve.correction[m];
        const int base = m * n_power;
        refined[base] = y;
        for (int j = 1; j < n_power && base + j < len; ++j) {
            y = map(y);
            refined[base + j] = y;
        }
    }

    ShadowingCertificate cert;
    cert.refined_states = std::move(refined);
    cert.input_defect = d;
    cert.constants = constants;
    cert.iterations = solve.iterations;
    cert.L1 = L1;
    cert.C1 = c1;
    cert.L_star = lift_constant(L1, n_power, constants.L);
    cert.bound = cert.L_star * d;

    double sup_err = 0.0;
    for (int k = 0; k < len; ++k) {
        sup_err = std::max(sup_err, (cert.refined_states[k] - orbit.state(k)).norm());
    }
    cert.measured_sup_error = sup_err;

    double residual = 0.0;
    for (int k = 0; k < orbit.transitions(); ++k) {
        const int k1 = orbit.next_index(k);
        residual = std::max(
            residual, (map(cert.refined_states[k]) - cert.refined_states[k1]).norm());
    }
    cert.orbit_residual = residual;
    cert.valid = sup_err <= cert.bound && residual <= 1e-11;
    return cert;
}

bool verify_certificate(const SmoothMap& map, const PseudoOrbit& orbit,
                        const ShadowingCertificate& certificate, double eps) {
    const auto& y = certificate.refined_states;
    if (static_cast<int>(y.size()) != orbit.length()) return false;
    double residual = 0.0;
    for (int k = 0; k < orbit.transitions(); ++k) {
        const int k1 = orbit.next_index(k);
        residual = std::max(residual, (map(y[k]) - y[k1]).norm());
    }
    if (residual > 1e-10) return false;
    double sup_err = 0.0;
    for (int k = 0; k < orbit.length(); ++k) {
        sup_err = std::max(sup_err, (y[k] - orbit.state(k)).norm());
    }
    return sup_err <= eps;
}

}  // namespace shadowlab
