#pragma once

#include "shadowlab/smooth_map.hpp"
#include "shadowlab/subspace.hpp"
#include "shadowlab/types.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace shadowlab {

struct HyperbolicityConstants {
    double C = 1.0;       // >= 1
    double lambda = 0.0;  // in (0,1)
};

struct EquilibriumReport {
    Vec location;
    std::vector<std::complex<double>> jacobian_spectrum;
    Subspace stable_basis;
    Subspace unstable_basis;
    bool hyperbolic = false;
    std::optional<HyperbolicityConstants> constants;
    /// Smallest singular value of the Jacobian; injectivity is flagged below
    /// 1e-12.
    double jacobian_min_singular_value = 0.0;
    bool jacobian_injective = true;
};

/// Damped Newton iteration for F(x) = x from a seed. Throws ConvergenceError
/// if the residual does not reach `tol`.
Vec find_fixed_point(const SmoothMap& map, const Vec& seed, double tol = 1e-12,
                     int max_iterations = 100);

/// Spectrum/splitting of the fixed point x_star and, when hyperbolic, the
/// decay constants (C, lambda) probed over 50 powers of the Jacobian.
/// Requires |F(x_star) - x_star| <= 1e-8.
EquilibriumReport hyperbolicity_check(const SmoothMap& map, const Vec& x_star);

}  // namespace shadowlab
