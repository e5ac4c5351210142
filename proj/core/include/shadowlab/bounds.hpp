#pragma once

#include "shadowlab/estimates.hpp"
#include "shadowlab/pseudo_orbit.hpp"
#include "shadowlab/types.hpp"

#include <vector>

namespace shadowlab {

/// Regime trichotomy in the Lipschitz constant of the map on the region.
enum class ShadowingRegime { kLipschitz, kLogarithm, kHolder };

std::string regime_name(ShadowingRegime regime);

struct HolderExponent {
    double beta_star = 0.0;  // gamma / (gamma + ln L1)
    double alpha = 0.0;      // equals beta_star at the maximizer
};

/// min{beta, gamma (1 - beta) / ln L1}, the exponent achieved by window
/// parameter beta. beta_star maximizes it.
double alpha_of_beta(double beta, double gamma, double L1);

/// Requires L1 > 1 and gamma > 0.
HolderExponent holder_exponent(const AttractionProfile& profile);

/// Pseudo-orbit-to-attractor distance bound at defect d.
struct HolderBound {
    ShadowingRegime regime = ShadowingRegime::kHolder;
    double alpha = 1.0;
    double beta_star = 0.0;
    double C2 = 0.0;           // Holder regime prefactor
    double value = 0.0;        // the distance bound itself
    int window_N = 0;          // internal subsampling window
    double K_of_d = 0.0;       // internal window threshold
    double log_prefactor = 0.0;  // L in the L d |ln d| form (logarithm regime)
};

/// Holder regime (L1 > 1): C2 d^alpha with C2 = L1^(1 + ln C / gamma)/(L1 - 1) + 1.
/// Contraction regime (L1 < 1): d / (1 - L1). Boundary regime (L1 = 1, within
/// 1e-9): (N + 1) d with the window N picked by C e^{-gamma N} <= d, reported
/// with the explicit prefactor (1/gamma + 2) of the d |ln d| form. Values of
/// L1 within 1e-9 of 1 but not equal route to the Holder branch with a warning.
HolderBound distance_bound(const AttractionProfile& profile, double d);

/// Exact partial geometric sum 1 + L1 + ... + L1^(N-1) (N when L1 = 1).
double subsample_constants(double L1, int N);

/// L_star = (1 + L1 + ... + L1^N) L, the window-to-full-orbit lift.
double lift_constant(double L1, int N, double L);

struct NeighborhoodConstants {
    double C2 = 0.0;  // L1 C + 1 + C
    double C3 = 0.0;  // (L + 1) C2
    double d0 = 0.0;  // (d0' / C2)^(1/alpha), clamped below 1
};

NeighborhoodConstants neighborhood_shadowing_constants(double C, double L1, double L,
                                                       double alpha, double d0_prime);

struct ContinuityBound {
    int N = 0;                    // smallest admissible window
    double C3 = 0.0;              // sup over the horizon of the prefactor expression
    double bound = 0.0;           // C3 * perturbation^alpha_target
    double running_max = 0.0;     // max over the horizon of n / ln L_n
    std::vector<double> n_over_log_Ln;  // the full scan, 1-based in n
};

/// Attractor-continuity constants from the iterate Lipschitz sequence
/// L_n = Lip(F^n). Verifies the subexponential-growth condition empirically
/// over the horizon (the report says so; asymptotics are not certified),
/// selects the smallest N with beta N gamma / ln L_N > 1 - beta for
/// beta = 1 - alpha_target, and evaluates
/// C3 = sup_n { L_n^(ln C/(n gamma)) L_n/(L_n - 1) + 1 } over indices with
/// L_n > 1. Throws HypothesisError when no window is admissible.
ContinuityBound attractor_continuity_bound(const std::vector<double>& L_n,
                                           const AttractionProfile& profile,
                                           double alpha_target,
                                           double perturbation_norm);

/// Re-targets a true orbit of the perturbed map at the base map: same states,
/// defect recomputed against F0 (bounded by sup |F0 - Feps| over the states,
/// which is checked).
PseudoOrbit perturbation_defect(const SmoothMap& base_map,
                                const SmoothMap& perturbed_map,
                                const PseudoOrbit& orbit_of_perturbed);

}  // namespace shadowlab
