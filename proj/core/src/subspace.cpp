#include "shadowlab/subspace.hpp"

#include <cmath>
#include <limits>

namespace shadowlab {

namespace {

constexpr double kBasisOrthoTol = 1e-12;
constexpr double kRankTol = 1e-9;
constexpr double kAngleTol = 1e-8;  // radians

Mat orthonormal_columns(const Mat& vectors, double rank_tol) {
    if (vectors.cols() == 0) return Mat(vectors.rows(), 0);
    Eigen::JacobiSVD<Mat> svd(vectors, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double scale = sv.size() > 0 ? sv[0] : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv[i] > rank_tol * std::max(1.0, scale)) ++rank;
    }
    return svd.matrixU().leftCols(rank);
}

}  // namespace

Subspace::Subspace(int ambient_dim, Mat orthonormal_basis)
    : ambient_dim_(ambient_dim), basis_(std::move(orthonormal_basis)) {
    if (basis_.rows() != ambient_dim_ || basis_.cols() > ambient_dim_) {
        throw ConfigError("subspace basis has wrong shape");
    }
    if (basis_.cols() > 0) {
        const Mat gram = basis_.transpose() * basis_;
        const double err = (gram - Mat::Identity(basis_.cols(), basis_.cols()))
                               .cwiseAbs()
                               .maxCoeff();
        if (err > kBasisOrthoTol) {
            throw ConfigError("subspace basis is not orthonormal (deviation " +
                              std::to_string(err) + ")");
        }
    }
}

Subspace Subspace::span(const Mat& vectors, double rank_tol) {
    return Subspace(static_cast<int>(vectors.rows()),
                    orthonormal_columns(vectors, rank_tol));
}

Subspace Subspace::zero(int ambient_dim) {
    return Subspace(ambient_dim, Mat(ambient_dim, 0));
}

Subspace Subspace::full(int ambient_dim) {
    return Subspace(ambient_dim, Mat::Identity(ambient_dim, ambient_dim));
}

Subspace Subspace::line(const Vec& v) {
    if (v.norm() == 0.0) throw ConfigError("cannot span a line by the zero vector");
    Mat m(v.size(), 1);
    m.col(0) = v / v.norm();
    return Subspace(static_cast<int>(v.size()), m);
}

Mat Subspace::orthogonal_projector() const {
    if (dim() == 0) return Mat::Zero(ambient_dim_, ambient_dim_);
    return basis_ * basis_.transpose();
}

Subspace Subspace::orthogonal_complement() const {
    const int n = ambient_dim_;
    if (dim() == 0) return Subspace::full(n);
    if (dim() == n) return Subspace::zero(n);
    // Complete the basis: the trailing left singular vectors of B span B^perp.
    Eigen::JacobiSVD<Mat> svd(basis_, Eigen::ComputeFullU);
    return Subspace(n, svd.matrixU().rightCols(n - dim()));
}

bool Subspace::contains(const Vec& v, double tol) const {
    if (v.size() != ambient_dim_) return false;
    const Vec residual = v - orthogonal_projector() * v;
    return residual.norm() <= tol * std::max(1.0, v.norm());
}

double subspace_gap(const Subspace& a, const Subspace& b) {
    return operator_norm(a.orthogonal_projector() - b.orthogonal_projector());
}

Mat orthogonal_projector(const Subspace& s) { return s.orthogonal_projector(); }

DirectSumCheck direct_sum_check(const Subspace& s, const Subspace& u) {
    const int n = s.ambient_dim();
    if (u.ambient_dim() != n) throw ConfigError("direct_sum_check: mixed ambient dimensions");
    if (s.dim() + u.dim() != n) return {false, 0.0};
    if (s.dim() == 0 || u.dim() == 0) return {true, 1.0};
    // Sine of the smallest principal angle: min distance from a unit vector of
    // U to S. Computing it through residuals keeps full accuracy near
    // degeneracy, where the cosine route loses half the digits.
    const Mat residual =
        (Mat::Identity(n, n) - s.orthogonal_projector()) * u.basis();
    Eigen::JacobiSVD<Mat> svd(residual);
    const double gap = std::min(1.0, svd.singularValues().minCoeff());
    const bool direct = std::asin(gap) > kAngleTol;
    return {direct, gap};
}

ObliqueProjector oblique_projector(const Subspace& s, const Subspace& u) {
    const int n = s.ambient_dim();
    const auto check = direct_sum_check(s, u);
    if (!check.is_direct_sum) {
        throw TransversalityError(
            "oblique_projector: subspaces do not form a direct sum (gap " +
                std::to_string(check.gap) + ")",
            check.gap);
    }
    Mat x(n, n);
    x.leftCols(s.dim()) = s.basis();
    x.rightCols(u.dim()) = u.basis();
    Eigen::PartialPivLU<Mat> lu(x);
    Mat d = Mat::Zero(n, n);
    d.topLeftCorner(s.dim(), s.dim()).setIdentity();
    Mat p = x * d * lu.inverse();

    const double idem = operator_norm(p * p - p);
    if (idem > 1e-10) {
        throw TransversalityError(
            "oblique_projector: projector not idempotent (defect " +
                std::to_string(idem) + "), splitting too degenerate",
            check.gap);
    }
    // Resolvent form of the projector: P_{SU} = (I - Ps Pu)^{-1} Ps (I - Ps Pu).
    if (s.dim() > 0 && u.dim() > 0) {
        const Mat ps = s.orthogonal_projector();
        const Mat pu = u.orthogonal_projector();
        const Mat t = Mat::Identity(n, n) - ps * pu;
        const Mat alt = t.partialPivLu().solve(ps * t);
        if (operator_norm(p - alt) > 1e-8) {
            throw TransversalityError(
                "oblique_projector: resolvent identity violated beyond 1e-8",
                check.gap);
        }
    }
    return ObliqueProjector{std::move(p), s, u};
}

double projector_composition_norm(const Subspace& s, const Subspace& u) {
    const auto check = direct_sum_check(s, u);
    if (!check.is_direct_sum) {
        throw TransversalityError("projector_composition_norm: degenerate sum", check.gap);
    }
    if (s.dim() == 0 || u.dim() == 0) {
        throw ConfigError("projector_composition_norm requires nonzero subspaces");
    }
    const double value =
        operator_norm(s.orthogonal_projector() * u.orthogonal_projector());
    if (value >= 1.0) {
        throw TransversalityError(
            "projector composition norm reached 1, splitting degenerate", check.gap);
    }
    const double p_us = operator_norm(oblique_projector(u, s).matrix);
    const double bound = std::sqrt(std::max(0.0, 1.0 - 1.0 / (p_us * p_us)));
    if (value > bound + 1e-9) {
        throw Error("projector_composition_norm exceeded its structural bound");
    }
    return value;
}

double inclination(const Subspace& v, const Subspace& s, const Subspace& u) {
    const auto check = direct_sum_check(s, u);
    if (!check.is_direct_sum) {
        throw TransversalityError("inclination: S and U do not split the space", check.gap);
    }
    if (v.dim() == 0) return 0.0;
    const int n = v.ambient_dim();
    const Mat p_su =
        (s.dim() == 0) ? Mat::Zero(n, n) : oblique_projector(s, u).matrix;
    const Mat p_us = Mat::Identity(n, n) - p_su;

    const Mat a = p_su * v.basis();  // S-components of V's basis
    const Mat b = p_us * v.basis();  // U-components

    // V meets S exactly when some unit v in V has vanishing U-component.
    Eigen::JacobiSVD<Mat> bsvd(b);
    const double inf_pus =
        bsvd.singularValues().size() > 0 ? bsvd.singularValues().minCoeff() : 0.0;
    if (inf_pus < 1e-12) return std::numeric_limits<double>::infinity();

    // sup ||a c|| / ||b c|| over c != 0: largest eigenvalue of the pencil
    // (a^T a, b^T b), reduced by the Cholesky factor of the SPD right side.
    const Mat ga = a.transpose() * a;
    const Mat gb = b.transpose() * b;
    Eigen::LLT<Mat> llt(gb);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const Mat half = llt.matrixL().solve(ga);
    const Mat reduced = llt.matrixL().solve(half.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(reduced);
    const double alpha = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));

    // Structural upper bound: (inf_{v in V, |v|=1} ||P_{US} v||)^{-1} + 1.
    if (alpha > 1.0 / inf_pus + 1.0 + 1e-8) {
        throw Error("inclination exceeded its structural bound");
    }
    return alpha;
}

Subspace map_subspace(const Mat& t, const Subspace& s, MapDirection direction) {
    const int n = s.ambient_dim();
    if (t.rows() != n || t.cols() != n) {
        throw ConfigError("map_subspace: operator shape does not match ambient space");
    }
    if (direction == MapDirection::kImage) {
        if (s.dim() == 0) return Subspace::zero(n);
        const Mat w = t * s.basis();
        Eigen::JacobiSVD<Mat> svd(w, Eigen::ComputeThinU);
        const double smin = svd.singularValues().minCoeff();
        if (smin < 1e-10) {
            throw HypothesisError(
                "map_subspace: operator nearly rank-deficient on the subspace "
                "(smallest singular value " + std::to_string(smin) + ")");
        }
        return Subspace(n, svd.matrixU());
    }
    // Preimage: x with T x in S, i.e. the nullspace of (I - P_S) T.
    const Mat residual_map =
        (Mat::Identity(n, n) - s.orthogonal_projector()) * t;
    Eigen::JacobiSVD<Mat> svd(residual_map, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double scale = std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv[i] > kRankTol * scale) ++rank;
    }
    return Subspace(n, svd.matrixV().rightCols(n - rank));
}

Subspace subspace_intersection(const Subspace& e, const Subspace& f) {
    const int n = e.ambient_dim();
    if (f.ambient_dim() != n) throw ConfigError("subspace_intersection: mixed dimensions");
    if (e.dim() == 0 || f.dim() == 0) return Subspace::zero(n);
    Mat stacked(2 * n, n);
    stacked.topRows(n) = Mat::Identity(n, n) - e.orthogonal_projector();
    stacked.bottomRows(n) = Mat::Identity(n, n) - f.orthogonal_projector();
    Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv[i] > kRankTol) ++rank;
    }
    return Subspace(n, svd.matrixV().rightCols(n - rank));
}

double projection_norm_bound(double inclination_bound) {
    if (inclination_bound < 0.0) {
        throw ConfigError("projection_norm_bound expects a nonnegative inclination");
    }
    const double m1 = inclination_bound + 1.0;
    return 2.0 * m1 * m1;
}

}  // namespace shadowlab
