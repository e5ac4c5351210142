#include "shadowlab/equilibrium.hpp"

#include <algorithm>
#include <cmath>

namespace shadowlab {

namespace {

constexpr double kUnitCircleTol = 1e-8;  // spectral distance from |z| = 1
constexpr int kProbeHorizon = 50;

/// Orthonormal real basis of the invariant subspace spanned by the eigenvectors
/// selected by `keep` (conjugate pairs contribute their real and imaginary
/// parts once).
Subspace realified_eigenspace(const Eigen::EigenSolver<Mat>& es,
                              const std::function<bool(std::complex<double>)>& keep) {
    const int n = static_cast<int>(es.eigenvalues().size());
    std::vector<Vec> columns;
    for (int i = 0; i < n; ++i) {
        const std::complex<double> lam = es.eigenvalues()[i];
        if (!keep(lam)) continue;
        const double imag_tol = 1e-12 * std::max(1.0, std::abs(lam));
        if (std::abs(lam.imag()) <= imag_tol) {
            columns.emplace_back(es.eigenvectors().col(i).real());
        } else if (lam.imag() > 0.0) {
            columns.emplace_back(es.eigenvectors().col(i).real());
            columns.emplace_back(es.eigenvectors().col(i).imag());
        }
        // Genuinely negative imaginary part: covered by the conjugate partner.
    }
    if (columns.empty()) return Subspace::zero(n);
    Mat m(n, static_cast<int>(columns.size()));
    for (int i = 0; i < static_cast<int>(columns.size()); ++i) m.col(i) = columns[i];
    return Subspace::span(m, 1e-10);
}

}  // namespace

Vec find_fixed_point(const SmoothMap& map, const Vec& seed, double tol,
                     int max_iterations) {
    Vec x = seed;
    double residual = (map(x) - x).norm();
    for (int it = 0; it < max_iterations && residual > tol; ++it) {
        const Mat j = map.jacobian(x) - Mat::Identity(map.dimension(), map.dimension());
        const Vec g = map(x) - x;
        const Vec step = j.fullPivLu().solve(-g);
        double damping = 1.0;
        Vec x_next = x + step;
        double next_residual = (map(x_next) - x_next).norm();
        while (next_residual > residual && damping > 1e-6) {
            damping *= 0.5;
            x_next = x + damping * step;
            next_residual = (map(x_next) - x_next).norm();
        }
        if (next_residual >= residual && residual > tol) {
            throw ConvergenceError("find_fixed_point: Newton stalled", residual);
        }
        x = x_next;
        residual = next_residual;
    }
    if (residual > tol) {
        throw ConvergenceError("find_fixed_point: no convergence", residual);
    }
    return x;
}

EquilibriumReport hyperbolicity_check(const SmoothMap& map, const Vec& x_star) {
    const int n = map.dimension();
    const double fp_residual = (map(x_star) - x_star).norm();
    if (fp_residual > 1e-8) {
        throw HypothesisError("hyperbolicity_check: not a fixed point (residual " +
                              std::to_string(fp_residual) + ")");
    }
    const Mat j = map.jacobian(x_star);

    EquilibriumReport report;
    report.location = x_star;
    report.stable_basis = Subspace::zero(n);
    report.unstable_basis = Subspace::zero(n);

    Eigen::JacobiSVD<Mat> svd(j);
    report.jacobian_min_singular_value = svd.singularValues().minCoeff();
    report.jacobian_injective = report.jacobian_min_singular_value > 1e-12;
    if (!report.jacobian_injective) {
        throw HypothesisError(
            "hyperbolicity_check: Jacobian not injective within tolerance "
            "(smallest singular value " +
            std::to_string(report.jacobian_min_singular_value) + ")");
    }

    Eigen::EigenSolver<Mat> es(j);
    if (es.info() != Eigen::Success) {
        throw Error("hyperbolicity_check: eigensolver failed");
    }
    for (int i = 0; i < n; ++i) report.jacobian_spectrum.push_back(es.eigenvalues()[i]);

    bool hyperbolic = true;
    for (const auto& lam : report.jacobian_spectrum) {
        if (std::abs(std::abs(lam) - 1.0) <= kUnitCircleTol) hyperbolic = false;
    }
    report.hyperbolic = hyperbolic;
    if (!hyperbolic) return report;

    report.stable_basis = realified_eigenspace(
        es, [](std::complex<double> z) { return std::abs(z) < 1.0; });
    report.unstable_basis = realified_eigenspace(
        es, [](std::complex<double> z) { return std::abs(z) > 1.0; });

    // lambda: slowest stable decay and slowest unstable backward decay.
    double lambda = 0.0;
    for (const auto& lam : report.jacobian_spectrum) {
        const double m = std::abs(lam);
        lambda = std::max(lambda, m < 1.0 ? m : 1.0 / m);
    }

    // C: worst ratio of the measured t-step decay to lambda^t over the probe
    // horizon, on both invariant subspaces. The powers run in the invariant
    // coordinates (B^T J B), where rounding cannot leak across the splitting
    // and get amplified by the unstable directions.
    double c = 1.0;
    {
        const Mat& bs = report.stable_basis.basis();
        const Mat& bu = report.unstable_basis.basis();
        const Mat rs = bs.transpose() * j * bs;
        const Mat ru = bu.transpose() * j * bu;
        Mat pow_s = rs;
        Mat pow_u = ru;
        double lt = 1.0;
        for (int t = 1; t <= kProbeHorizon; ++t) {
            lt *= lambda;
            if (lt < 1e-280) break;
            if (bs.cols() > 0) {
                c = std::max(c, operator_norm(pow_s) / lt);
                pow_s = rs * pow_s;
            }
            if (bu.cols() > 0) {
                Eigen::JacobiSVD<Mat> svd(pow_u);
                const double smin = svd.singularValues().minCoeff();
                if (smin > 0.0) c = std::max(c, 1.0 / (smin * lt));
                pow_u = ru * pow_u;
            }
        }
    }
    report.constants = HyperbolicityConstants{c, lambda};
    return report;
}

}  // namespace shadowlab
