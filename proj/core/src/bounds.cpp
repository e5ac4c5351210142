#include "shadowlab/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace shadowlab {

namespace {
constexpr double kUnitLipschitzTol = 1e-9;
}

std::string regime_name(ShadowingRegime regime) {
    switch (regime) {
        case ShadowingRegime::kLipschitz: return "lipschitz";
        case ShadowingRegime::kLogarithm: return "logarithm";
        case ShadowingRegime::kHolder: return "holder";
    }
    return "?";
}

double alpha_of_beta(double beta, double gamma, double L1) {
    if (L1 <= 1.0) throw ConfigError("alpha_of_beta requires L1 > 1");
    return std::min(beta, gamma * (1.0 - beta) / std::log(L1));
}

HolderExponent holder_exponent(const AttractionProfile& profile) {
    if (profile.L1 <= 1.0) {
        throw ConfigError(
            "holder_exponent requires L1 > 1; use distance_bound for the "
            "contraction and boundary regimes");
    }
    if (profile.gamma <= 0.0) throw ConfigError("holder_exponent requires gamma > 0");
    HolderExponent he;
    he.beta_star = profile.gamma / (profile.gamma + std::log(profile.L1));
    he.alpha = he.beta_star;
    return he;
}

HolderBound distance_bound(const AttractionProfile& profile, double d) {
    if (!(d > 0.0 && d < 1.0)) {
        throw ConfigError("distance_bound requires d in (0,1)");
    }
    if (profile.gamma <= 0.0) throw ConfigError("distance_bound requires gamma > 0");
    const double L1 = profile.L1;
    const double C = std::max(1.0, profile.C);

    HolderBound bound;
    if (L1 < 1.0 - kUnitLipschitzTol) {
        bound.regime = ShadowingRegime::kLipschitz;
        bound.alpha = 1.0;
        bound.value = d / (1.0 - L1);
        return bound;
    }
    if (std::abs(L1 - 1.0) <= kUnitLipschitzTol) {
        if (L1 != 1.0) {
            log_warn("distance_bound: L1 within 1e-9 of 1 treated as the boundary "
                     "regime");
        }
        bound.regime = ShadowingRegime::kLogarithm;
        bound.alpha = 1.0;
        bound.K_of_d = d;
        const int n = std::max(
            1, static_cast<int>(std::ceil(std::log(C / d) / profile.gamma)));
        bound.window_N = n;
        bound.value = (static_cast<double>(n) + 1.0) * d;
        bound.log_prefactor = 1.0 / profile.gamma + 2.0;
        return bound;
    }

    if (L1 < 1.0 + kUnitLipschitzTol * 10.0) {
        log_warn("distance_bound: L1 very close to 1, Holder constants may be "
                 "extreme");
    }
    const HolderExponent he = holder_exponent(profile);
    bound.regime = ShadowingRegime::kHolder;
    bound.beta_star = he.beta_star;
    bound.alpha = he.alpha;
    bound.C2 = std::pow(L1, 1.0 + std::log(C) / profile.gamma) / (L1 - 1.0) + 1.0;
    bound.K_of_d = std::pow(d, profile.gamma * (1.0 - he.beta_star) / std::log(L1));
    bound.window_N = std::max(
        1, static_cast<int>(std::ceil(std::log(C / bound.K_of_d) / profile.gamma)));
    bound.value = bound.C2 * std::pow(d, bound.alpha);
    return bound;
}

double subsample_constants(double L1, int N) {
    if (N < 1) throw ConfigError("subsample_constants requires N >= 1");
    if (L1 < 0.0) throw ConfigError("subsample_constants requires L1 >= 0");
    if (std::abs(L1 - 1.0) <= 1e-15) return static_cast<double>(N);
    // Sum term by term; the closed form loses accuracy near L1 = 1.
    double sum = 0.0;
    double term = 1.0;
    for (int i = 0; i < N; ++i) {
        sum += term;
        term *= L1;
    }
    return sum;
}

double lift_constant(double L1, int N, double L) {
    if (N < 1) throw ConfigError("lift_constant requires N >= 1");
    if (L <= 0.0) throw ConfigError("lift_constant requires L > 0");
    return subsample_constants(L1, N + 1) * L;
}

NeighborhoodConstants neighborhood_shadowing_constants(double C, double L1, double L,
                                                       double alpha, double d0_prime) {
    if (C < 0.0 || L1 <= 0.0 || L <= 0.0 || d0_prime <= 0.0) {
        throw ConfigError("neighborhood_shadowing_constants requires positive inputs");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw ConfigError("neighborhood_shadowing_constants requires alpha in (0,1]");
    }
    NeighborhoodConstants out;
    out.C2 = L1 * C + 1.0 + C;
    out.C3 = (L + 1.0) * out.C2;
    out.d0 = std::min(std::pow(d0_prime / out.C2, 1.0 / alpha), 1.0 - 1e-12);
    return out;
}

ContinuityBound attractor_continuity_bound(const std::vector<double>& L_n,
                                           const AttractionProfile& profile,
                                           double alpha_target,
                                           double perturbation_norm) {
    if (!(alpha_target > 0.0 && alpha_target < 1.0)) {
        throw ConfigError("attractor_continuity_bound requires alpha_target in (0,1)");
    }
    if (perturbation_norm < 0.0) {
        throw ConfigError("attractor_continuity_bound requires a nonnegative "
                          "perturbation norm");
    }
    if (L_n.empty()) throw ConfigError("attractor_continuity_bound: empty L_n");
    if (profile.gamma <= 0.0) {
        throw ConfigError("attractor_continuity_bound requires gamma > 0");
    }
    const double C = std::max(1.0, profile.C);
    const double beta = 1.0 - alpha_target;

    ContinuityBound out;
    double c3 = 0.0;
    for (std::size_t i = 0; i < L_n.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        const double ln = L_n[i];
        const double ratio =
            (ln > 1.0) ? n / std::log(ln) : std::numeric_limits<double>::infinity();
        out.n_over_log_Ln.push_back(ratio);
        out.running_max = std::max(out.running_max, ratio);
        if (ln > 1.0 + kUnitLipschitzTol) {
            const double expr = std::pow(ln, std::log(C) / (n * profile.gamma)) * ln /
                                    (ln - 1.0) +
                                1.0;
            c3 = std::max(c3, expr);
        }
        if (out.N == 0) {
            const double lhs = (ln > 1.0) ? beta * n * profile.gamma / std::log(ln)
                                          : std::numeric_limits<double>::infinity();
            if (lhs > 1.0 - beta) out.N = static_cast<int>(i + 1);
        }
    }
    if (out.N == 0) {
        throw HypothesisError(
            "attractor_continuity_bound: no admissible window within the horizon; "
            "subexponential growth of L_n not evidenced");
    }
    if (c3 == 0.0) c3 = 1.0;  // every iterate contracting
    out.C3 = c3;
    out.bound = out.C3 * std::pow(perturbation_norm, alpha_target);
    return out;
}

PseudoOrbit perturbation_defect(const SmoothMap& base_map,
                                const SmoothMap& perturbed_map,
                                const PseudoOrbit& orbit_of_perturbed) {
    const double own_defect = PseudoOrbit::compute_defect(
        perturbed_map, orbit_of_perturbed.states(), orbit_of_perturbed.boundary_mode());
    if (own_defect > 1e-12) {
        throw HypothesisError(
            "perturbation_defect: input is not a true orbit of the perturbed map "
            "(defect " + std::to_string(own_defect) + ")");
    }
    PseudoOrbit retargeted(base_map, orbit_of_perturbed.states(),
                           orbit_of_perturbed.boundary_mode());
    double sup_map_gap = 0.0;
    for (const Vec& x : orbit_of_perturbed.states()) {
        sup_map_gap = std::max(sup_map_gap, (base_map(x) - perturbed_map(x)).norm());
    }
    if (retargeted.defect() > sup_map_gap + own_defect + 1e-12) {
        throw Error("perturbation_defect: defect exceeds the sampled map distance");
    }
    return retargeted;
}

}  // namespace shadowlab
