#pragma once

#include "shadowlab/types.hpp"

namespace shadowlab {

/// A linear subspace of R^n stored as an orthonormal basis (n x k, 0 <= k <= n).
/// k = 0 is the zero subspace, k = n the full space. Immutable.
class Subspace {
  public:
    /// The zero subspace of the zero-dimensional space; a usable placeholder.
    Subspace() : ambient_dim_(0), basis_(0, 0) {}
    /// Wraps a matrix whose columns are already orthonormal (checked to 1e-12).
    Subspace(int ambient_dim, Mat orthonormal_basis);

    /// Orthonormalizes an arbitrary spanning set; rank decided by the singular
    /// value threshold.
    static Subspace span(const Mat& vectors, double rank_tol = 1e-9);
    static Subspace zero(int ambient_dim);
    static Subspace full(int ambient_dim);
    /// Span of a single vector (must be nonzero).
    static Subspace line(const Vec& v);

    [[nodiscard]] int ambient_dim() const { return ambient_dim_; }
    [[nodiscard]] int dim() const { return static_cast<int>(basis_.cols()); }
    [[nodiscard]] const Mat& basis() const { return basis_; }

    /// Orthogonal projector B B^T.
    [[nodiscard]] Mat orthogonal_projector() const;
    [[nodiscard]] Subspace orthogonal_complement() const;
    [[nodiscard]] bool contains(const Vec& v, double tol = 1e-9) const;

  private:
    int ambient_dim_;
    Mat basis_;
};

/// Distance between subspaces: operator norm of the difference of their
/// orthogonal projectors (equals the sine of the largest principal angle when
/// dimensions agree, and 1 when they differ).
double subspace_gap(const Subspace& a, const Subspace& b);

/// Projection onto `range` along `kernel_space` for a direct sum decomposition.
struct ObliqueProjector {
    Mat matrix;
    Subspace range;
    Subspace kernel_space;
};

struct DirectSumCheck {
    bool is_direct_sum;
    /// Sine of the smallest principal angle between the two subspaces
    /// (1.0 when either subspace is zero-dimensional).
    double gap;
};

/// S (+) U = R^n iff dim S + dim U = n and the smallest principal angle
/// exceeds 1e-8 rad.
DirectSumCheck direct_sum_check(const Subspace& s, const Subspace& u);

Mat orthogonal_projector(const Subspace& s);

/// P_{SU}: range S, kernel U. Throws TransversalityError when S (+) U is not
/// the whole space. Validates idempotence, P_{SU} + P_{US} = I, and the
/// resolvent identity P_{SU} = (I - P_S P_U)^{-1} P_S (I - P_S P_U).
ObliqueProjector oblique_projector(const Subspace& s, const Subspace& u);

/// ||P_S P_U|| for the orthogonal projectors of a transversal nonzero pair.
/// The value is < 1 and bounded by sqrt(1 - 1/||P_{US}||^2).
double projector_composition_norm(const Subspace& s, const Subspace& u);

/// Inclination of V relative to the splitting S (+) U: the supremum over unit
/// v in V of ||P_{SU} v|| / ||P_{US} v||. Returns +infinity iff V meets S
/// nontrivially; 0 when V is contained in U.
double inclination(const Subspace& v, const Subspace& s, const Subspace& u);

enum class MapDirection { kImage, kPreimage };

/// Image T(S) or preimage T^{-1}(S) as a subspace (preimage includes ker T).
/// For images, T must be injective on S: the smallest singular value of
/// T * basis(S) below 1e-10 raises a conditioning error.
Subspace map_subspace(const Mat& t, const Subspace& s, MapDirection direction);

/// E and F meet in a subspace computed from the nullspace of their stacked
/// orthogonal-complement projectors; rank threshold 1e-9.
Subspace subspace_intersection(const Subspace& e, const Subspace& f);

/// A-priori bound 2 (M + 1)^2 on the oblique projector norm of any splitting
/// whose inclination relative to U (+) U^perp is at most M.
double projection_norm_bound(double inclination_bound);

}  // namespace shadowlab
