#pragma once

#include "shadowlab/smooth_map.hpp"
#include "shadowlab/types.hpp"

#include <vector>

namespace shadowlab {

/// Sampling safety factor applied to Lipschitz estimates; declared in reports.
inline constexpr double kLipschitzSafetyFactor = 1.05;

/// Largest acceptable max-deviation of the log-distance fit; beyond it the
/// attraction profile is reported with a warning.
inline constexpr double kAttractionFitTolerance = 5.0;

/// Exponential-attraction constants and the Lipschitz constant of the map on
/// the region: dist(F^n(region), attractor) <= C e^{-gamma n} with gamma per
/// map step.
struct AttractionProfile {
    double C = 1.0;        // >= 1
    double gamma = 0.0;    // > 0
    double L1 = 1.0;       // Lipschitz constant of F on the region
    Box region;
    double fit_residual = 0.0;  // max |log dist - (log C - gamma n)| over the fit
};

/// Max sampled Jacobian operator norm over the region, inflated by the safety
/// factor. Deterministic for a fixed seed.
double lipschitz_estimate(const SmoothMap& map, const Box& region,
                          int sample_count, std::uint64_t seed = 0);

/// Least-squares fit of log dist_H(F^n(grid), attractor_sample) against
/// log C - gamma n over n = 0..horizon; C clamped >= 1. Throws
/// HypothesisError when the distances do not decrease.
AttractionProfile exp_attraction_estimate(const SmoothMap& map,
                                          const std::vector<Vec>& attractor_sample,
                                          const Box& region, int horizon,
                                          std::uint64_t seed = 0);

/// Hausdorff semi-distance from the point set A to the point set B:
/// max over a of min over b of |a - b|.
double hausdorff_semidistance(const std::vector<Vec>& a, const std::vector<Vec>& b);

/// Smallest t0 such that every grid orbit enters the union of eps-balls around
/// the equilibria within t0 steps. Throws ConvergenceError past 10^6 steps.
int birkhoff_number(const SmoothMap& map, const std::vector<Vec>& equilibria,
                    double eps, const std::vector<Vec>& region_grid);

/// Evenly spaced lattice over a box (counts per dimension chosen from `total`).
std::vector<Vec> box_lattice(const Box& box, int total);

}  // namespace shadowlab
