#pragma once

#include "shadowlab/pseudo_orbit.hpp"
#include "shadowlab/subspace.hpp"
#include "shadowlab/types.hpp"

#include <vector>

namespace shadowlab {

/// Measured decay/projection constants of a splitting along an orbit window.
struct SplittingReport {
    double C_tilde = 1.0;           // >= 1, smallest prefactor covering all sub-windows
    double lambda1 = 0.0;           // in (0,1), worst long-window per-step rate
    double M = 1.0;                 // >= 1, sup_k |P_su(k)| + |P_us(k)|
    double invariance_defect = 0.0; // worst gap between pushed and stored subspaces
};

/// Per-point stable/unstable subspace pair along a pseudo-orbit with fitted
/// constants. On free windows the first/last `warmup` indices are boundary
/// layers built from truncated filtration windows; measurements trim them.
struct SplittingFrame {
    std::vector<Subspace> stable;
    std::vector<Subspace> unstable;
    BoundaryMode boundary_mode = BoundaryMode::kFree;
    int warmup = 0;
    double C_tilde = 1.0;
    double lambda1 = 0.0;
    double M = 1.0;
    double invariance_defect = 0.0;

    [[nodiscard]] int length() const { return static_cast<int>(stable.size()); }
    [[nodiscard]] int unstable_dim() const {
        return stable.empty() ? 0 : unstable.front().dim();
    }
    /// Oblique projector onto stable[k] along unstable[k].
    [[nodiscard]] Mat stable_projector(int k) const;
};

/// Builds the per-point splitting by finite-time filtration of the Jacobian
/// cocycle: forward QR iteration for the unstable family, the orthogonal
/// complement of the adjoint cocycle's dominant family (run backward over the
/// look-ahead window) for the stable one. Windows are truncated near free
/// boundaries and wrap in periodic mode. The returned frame embeds the
/// constants measured by verify_splitting.
SplittingFrame build_splitting(const SmoothMap& map, const PseudoOrbit& orbit,
                               int unstable_dim, int warmup);

/// Re-measures all constants of a frame against the orbit's Jacobian cocycle.
/// Throws NotUniformlyHyperbolicError when some longest-window stable stretch
/// or inverse unstable stretch reaches 1.
SplittingReport verify_splitting(const SmoothMap& map, const PseudoOrbit& orbit,
                                 const SplittingFrame& frame);

/// Smallest integer N >= 1 with C_tilde * lambda1^(N-1) <= mu.
int choose_power(double C_tilde, double lambda1, double mu);

}  // namespace shadowlab
