#include "shadowlab/splitting.hpp"

#include <algorithm>
#include <cmath>

namespace shadowlab {

namespace {

constexpr double kDegenerateGap = 1e-6;
constexpr std::uint64_t kFiltrationSeed = 0x51a7f1caULL;

/// Thin-QR orthonormalization with a rank guard.
Mat orth_columns(const Mat& w, int index_for_error) {
    Eigen::HouseholderQR<Mat> qr(w);
    Mat q = qr.householderQ() * Mat::Identity(w.rows(), w.cols());
    const Mat r = qr.matrixQR().topRows(w.cols()).triangularView<Eigen::Upper>();
    for (int i = 0; i < w.cols(); ++i) {
        if (std::abs(r(i, i)) < 1e-290) {
            throw DegenerateSplittingError(
                "filtration lost rank at orbit index " +
                    std::to_string(index_for_error),
                index_for_error);
        }
    }
    return q;
}

/// Transition Jacobians along the orbit, one per transition (periodic windows
/// include the wrap).
std::vector<Mat> orbit_jacobians(const SmoothMap& map, const PseudoOrbit& orbit) {
    std::vector<Mat> jac;
    jac.reserve(orbit.transitions());
    for (int k = 0; k < orbit.transitions(); ++k) {
        jac.push_back(map.jacobian(orbit.state(k)));
    }
    return jac;
}

}  // namespace

Mat SplittingFrame::stable_projector(int k) const {
    return oblique_projector(stable[k], unstable[k]).matrix;
}

SplittingFrame build_splitting(const SmoothMap& map, const PseudoOrbit& orbit,
                               int unstable_dim, int warmup) {
    const int n = map.dimension();
    const int len = orbit.length();
    if (unstable_dim < 0 || unstable_dim >= n) {
        throw ConfigError("build_splitting: unstable_dim must lie in [0, n)");
    }
    if (warmup < 0) throw ConfigError("build_splitting: warmup must be >= 0");
    if (len < 2 * warmup + 10) {
        throw ConfigError("build_splitting: orbit shorter than 2*warmup + 10");
    }

    const bool periodic = orbit.boundary_mode() == BoundaryMode::kPeriodic;
    const std::vector<Mat> jac = orbit_jacobians(map, orbit);
    const int transitions = static_cast<int>(jac.size());

    SplittingFrame frame;
    frame.boundary_mode = orbit.boundary_mode();
    frame.warmup = warmup;
    frame.stable.reserve(len);
    frame.unstable.reserve(len);

    // Deterministic generic seed bases; a fixed axis seed could be orthogonal
    // to the target subspace and never converge.
    Rng rng(kFiltrationSeed + 1315423911ULL * static_cast<std::uint64_t>(n) +
            static_cast<std::uint64_t>(unstable_dim));
    Mat seed_fwd(n, unstable_dim);
    Mat seed_adj(n, unstable_dim);
    for (int j = 0; j < unstable_dim; ++j) {
        seed_fwd.col(j) = rng.gaussian_vector(n);
        seed_adj.col(j) = rng.gaussian_vector(n);
    }

    for (int k = 0; k < len; ++k) {
        if (unstable_dim == 0) {
            frame.stable.push_back(Subspace::full(n));
            frame.unstable.push_back(Subspace::zero(n));
            continue;
        }

        // Unstable: forward filtration over the `warmup` transitions before k.
        Mat q = orth_columns(seed_fwd, k);
        {
            const int lo = periodic ? k - warmup : std::max(0, k - warmup);
            for (int j = lo; j < k; ++j) {
                const int jj = periodic ? ((j % transitions) + transitions) % transitions : j;
                q = orth_columns(jac[jj] * q, k);
            }
        }
        frame.unstable.emplace_back(n, q);

        // Stable: orthogonal complement of the adjoint cocycle's dominant
        // family over the look-ahead window, applied in decreasing index order.
        Mat r = orth_columns(seed_adj, k);
        {
            const int hi = periodic ? k + warmup : std::min(transitions, k + warmup);
            for (int j = hi - 1; j >= k; --j) {
                const int jj = periodic ? ((j % transitions) + transitions) % transitions : j;
                r = orth_columns(jac[jj].transpose() * r, k);
            }
        }
        frame.stable.push_back(Subspace(n, r).orthogonal_complement());
    }

    for (int k = 0; k < len; ++k) {
        const auto check = direct_sum_check(frame.stable[k], frame.unstable[k]);
        if (!check.is_direct_sum || check.gap < kDegenerateGap) {
            throw DegenerateSplittingError(
                "no clean splitting at orbit index " + std::to_string(k) +
                    " (gap " + std::to_string(check.gap) + ")",
                k);
        }
    }

    const SplittingReport report = verify_splitting(map, orbit, frame);
    frame.C_tilde = report.C_tilde;
    frame.lambda1 = report.lambda1;
    frame.M = report.M;
    frame.invariance_defect = report.invariance_defect;
    return frame;
}

SplittingReport verify_splitting(const SmoothMap& map, const PseudoOrbit& orbit,
                                 const SplittingFrame& frame) {
    const int len = orbit.length();
    if (frame.length() != len) {
        throw ConfigError("verify_splitting: frame does not cover the orbit");
    }
    const bool periodic = orbit.boundary_mode() == BoundaryMode::kPeriodic;
    const std::vector<Mat> jac = orbit_jacobians(map, orbit);
    const int transitions = static_cast<int>(jac.size());
    const int n = map.dimension();
    const int s_dim = frame.stable.front().dim();
    const int u_dim = frame.unstable.front().dim();
    const int trim = periodic ? 0 : frame.warmup;

    // Valid transition ranges. Stable frames near the right end of a free
    // window come from truncated look-ahead filtration, unstable frames near
    // the left end from truncated history; both layers are excluded from the
    // measurements (they only enter the solve's boundary layers).
    const int s_hi = periodic ? transitions : std::max(1, transitions - trim);
    const int u_lo = periodic ? 0 : std::min(trim, transitions - 1);

    SplittingReport report;

    // Per-step oblique projectors and aligned transition blocks. Decay is
    // measured through products of these small blocks, exactly the operators
    // the Green sweeps apply; raw n x n cocycle products would drown stable
    // decay in rounding noise amplified along the unstable directions.
    std::vector<Mat> p_su(len);
    for (int k = 0; k < len; ++k) p_su[k] = frame.stable_projector(k);
    std::vector<Mat> block_s(transitions), block_u(transitions);
    for (int k = 0; k < transitions; ++k) {
        const int k1 = (k + 1) % len;
        if (s_dim > 0) {
            block_s[k] = frame.stable[k1].basis().transpose() *
                         (p_su[k1] * (jac[k] * frame.stable[k].basis()));
        }
        if (u_dim > 0) {
            const Mat q_us = Mat::Identity(n, n) - p_su[k1];
            block_u[k] = frame.unstable[k1].basis().transpose() *
                         (q_us * (jac[k] * frame.unstable[k].basis()));
        }
    }

    // Invariance: push each subspace one step and compare with the stored one.
    double invariance = 0.0;
    for (int k = 0; k < transitions; ++k) {
        const int k1 = (k + 1) % len;
        if (s_dim > 0 && s_dim < n && k < s_hi) {
            const Subspace pushed = Subspace::span(jac[k] * frame.stable[k].basis());
            invariance = std::max(invariance, subspace_gap(pushed, frame.stable[k1]));
        }
        if (u_dim > 0 && k >= u_lo) {
            const Subspace pushed = Subspace::span(jac[k] * frame.unstable[k].basis());
            invariance = std::max(invariance, subspace_gap(pushed, frame.unstable[k1]));
        }
    }
    report.invariance_defect = invariance;

    // Projection norm bound M over the reliable core.
    double m_bound = 1.0;
    {
        const int lo = periodic ? 0 : std::min(trim, len - 1);
        const int hi = periodic ? len : std::max(lo + 1, len - trim);
        for (int k = lo; k < hi; ++k) {
            const Mat p_us = Mat::Identity(n, n) - p_su[k];
            m_bound = std::max(m_bound, operator_norm(p_su[k]) + operator_norm(p_us));
        }
    }
    report.M = m_bound;

    // Window stretches from telescoped block products. stable_max(k, t) is the
    // largest growth of a stable vector over [k, k+t]; unstable_min(k, t) the
    // smallest unstable growth. Longest-window per-step rates define lambda1;
    // C_tilde is the smallest prefactor covering every sub-window.
    double lambda1 = 0.0;
    int worst_index = -1;
    struct WindowScan {
        int start;
        std::vector<double> stable_max;    // indexed by t-1
        std::vector<double> unstable_min;  // indexed by t-1
    };
    std::vector<WindowScan> scans;

    auto scan_windows = [&](bool stable_side) {
        const int lo = stable_side ? 0 : u_lo;
        const int hi = stable_side ? s_hi : transitions;
        const int dim = stable_side ? s_dim : u_dim;
        if (dim == 0) return;
        for (int k = lo; k < hi; ++k) {
            const int reach = periodic ? transitions : hi - k;
            WindowScan scan;
            scan.start = k;
            Mat prod = Mat::Identity(dim, dim);
            for (int t = 1; t <= reach; ++t) {
                const int j = (k + t - 1) % transitions;
                prod = (stable_side ? block_s[j] : block_u[j]) * prod;
                Eigen::JacobiSVD<Mat> svd(prod);
                if (stable_side) {
                    scan.stable_max.push_back(svd.singularValues().maxCoeff());
                } else {
                    const double smin = svd.singularValues().minCoeff();
                    if (smin <= 0.0) {
                        throw DegenerateSplittingError(
                            "unstable block became singular at index " +
                                std::to_string(j),
                            j);
                    }
                    scan.unstable_min.push_back(smin);
                }
            }
            const double t_last = static_cast<double>(reach);
            double rate;
            if (stable_side) {
                rate = std::pow(scan.stable_max.back(), 1.0 / t_last);
            } else {
                rate = std::pow(1.0 / scan.unstable_min.back(), 1.0 / t_last);
            }
            if (rate > lambda1) {
                lambda1 = rate;
                worst_index = k;
            }
            scans.push_back(std::move(scan));
        }
    };
    scan_windows(true);
    scan_windows(false);

    if (lambda1 >= 1.0) {
        throw NotUniformlyHyperbolicError(
            "stable/unstable ratio reached " + std::to_string(lambda1) +
            " over the longest window at index " + std::to_string(worst_index));
    }
    report.lambda1 = lambda1;

    double c_tilde = 1.0;
    for (const WindowScan& scan : scans) {
        double lt = 1.0;
        const auto& values = scan.stable_max.empty() ? scan.unstable_min
                                                     : scan.stable_max;
        const bool stable_side = !scan.stable_max.empty();
        for (double value : values) {
            lt *= lambda1;
            if (lt < 1e-290) break;
            if (stable_side) {
                c_tilde = std::max(c_tilde, value / lt);
            } else if (value > 0.0) {
                c_tilde = std::max(c_tilde, 1.0 / (lt * value));
            }
        }
    }
    report.C_tilde = c_tilde;
    return report;
}

int choose_power(double C_tilde, double lambda1, double mu) {
    if (!(mu > 0.0 && mu < 1.0)) throw ConfigError("choose_power: mu must lie in (0,1)");
    if (!(lambda1 > 0.0 && lambda1 < 1.0)) {
        throw ConfigError("choose_power: lambda1 must lie in (0,1)");
    }
    if (C_tilde < 1.0) throw ConfigError("choose_power: C_tilde must be >= 1");
    int n = 1;
    double decay = C_tilde;  // C_tilde * lambda1^(n-1)
    while (decay > mu) {
        decay *= lambda1;
        ++n;
        if (n > 100000) throw ConvergenceError("choose_power runaway", decay);
    }
    return n;
}

}  // namespace shadowlab
