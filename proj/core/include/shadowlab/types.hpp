#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace shadowlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Axis-aligned box, the working domain of a system.
struct Box {
    Vec lo;
    Vec hi;

    Box() = default;
    Box(Vec lo_, Vec hi_);

    /// Cube [-r, r]^n.
    static Box cube(int dim, double r);

    [[nodiscard]] int dim() const { return static_cast<int>(lo.size()); }
    [[nodiscard]] bool contains(const Vec& x, double slack = 0.0) const;
    [[nodiscard]] Vec center() const { return 0.5 * (lo + hi); }
    [[nodiscard]] Vec half_widths() const { return 0.5 * (hi - lo); }
    /// Smallest half-width; the largest ball radius that fits around the center.
    [[nodiscard]] double inner_radius() const;
    [[nodiscard]] bool empty() const;
};

/// Deterministic 64-bit generator (splitmix64). All stochastic estimates in the
/// library draw from this so that a seed fully reproduces a run.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform01();
    double uniform(double lo, double hi);
    /// Standard normal (polar method).
    double gaussian();
    Vec gaussian_vector(int n);
    /// Uniform direction on the unit sphere.
    Vec unit_vector(int n);
    /// Uniform point inside a box.
    Vec point_in_box(const Box& box);

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Error taxonomy. ConfigError/IoError map to CLI exit code 1, everything
// derived from HypothesisError to exit code 2.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

/// A mathematical hypothesis of the pipeline failed; the input is outside the
/// certified regime rather than malformed.
struct HypothesisError : Error {
    using Error::Error;
};

struct TransversalityError : HypothesisError {
    TransversalityError(const std::string& what, double gap_);
    double gap;  // sine of the smallest principal angle between the offending pair
};

struct DegenerateSplittingError : HypothesisError {
    DegenerateSplittingError(const std::string& what, int index_);
    int index;
};

struct NotUniformlyHyperbolicError : HypothesisError {
    using HypothesisError::HypothesisError;
};

struct ConvergenceError : HypothesisError {
    ConvergenceError(const std::string& what, double residual_);
    double residual;
};

// ---------------------------------------------------------------------------
// Logging, controlled by the SHADOWLAB_LOG environment variable
// (quiet|info|debug, default info). Messages go to stderr.
// ---------------------------------------------------------------------------

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);
void log_warn(const std::string& msg);

/// Operator (spectral) norm.
double operator_norm(const Mat& a);

/// Relative gap |a-b| / max(1, |a|, |b|).
double rel_diff(double a, double b);

}  // namespace shadowlab
