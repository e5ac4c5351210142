#pragma once

#include "shadowlab/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace shadowlab {

/// A smooth self-map of R^n with an evaluable Jacobian and a declared working
/// region. Immutable after construction and safe to share across threads.
class SmoothMap {
  public:
    using EvalFn = std::function<Vec(const Vec&)>;
    using JacFn = std::function<Mat(const Vec&)>;

    SmoothMap() = default;
    SmoothMap(int dimension, EvalFn evaluate, JacFn jacobian, Box region,
              std::string label);

    [[nodiscard]] int dimension() const { return dimension_; }
    [[nodiscard]] Vec operator()(const Vec& x) const { return evaluate_(x); }
    [[nodiscard]] Vec evaluate(const Vec& x) const { return evaluate_(x); }
    [[nodiscard]] Mat jacobian(const Vec& x) const { return jacobian_(x); }
    [[nodiscard]] const Box& region() const { return region_; }
    [[nodiscard]] const std::string& label() const { return label_; }

    /// N-fold composition with chain-rule Jacobian.
    [[nodiscard]] SmoothMap power(int n) const;
    /// Iterates the map k times.
    [[nodiscard]] Vec iterate(const Vec& x, int k) const;

  private:
    int dimension_ = 0;
    EvalFn evaluate_;
    JacFn jacobian_;
    Box region_;
    std::string label_;
};

/// Continuous-time right-hand side with analytic Jacobian.
struct VectorField {
    int dimension = 0;
    std::function<Vec(const Vec&)> f;
    std::function<Mat(const Vec&)> df;
};

/// Integrates x' = f(x) from each x over [0, t] together with the variational
/// equation J' = Df(x) J, J(0) = I, using adaptive Dormand-Prince RK5(4).
struct FlowIntegration {
    Vec state;
    Mat jacobian;
    int steps = 0;
};
FlowIntegration integrate_flow(const VectorField& field, const Vec& x0, double t,
                               double tolerance, bool with_jacobian = true);

/// Time-h map of an ODE. The Jacobian comes from the jointly integrated
/// variational equation.
class FlowMap : public SmoothMap {
  public:
    FlowMap(VectorField field, double step_h, double integrator_tolerance,
            Box region, std::string label);

    [[nodiscard]] const VectorField& vector_field() const { return *field_; }
    [[nodiscard]] double step_h() const { return step_h_; }
    [[nodiscard]] double integrator_tolerance() const { return tolerance_; }
    /// Flow for an arbitrary time (not restricted to step_h multiples).
    [[nodiscard]] Vec flow(const Vec& x, double t) const;

  private:
    std::shared_ptr<const VectorField> field_;
    double step_h_;
    double tolerance_;
};

// ---------------------------------------------------------------------------
// Declarative polynomial systems (rational coefficients), loadable from JSON.
// ---------------------------------------------------------------------------

struct PolynomialTerm {
    long long num = 0;
    long long den = 1;
    std::vector<int> exponents;  // one per ambient coordinate
};

struct PolynomialSystem {
    int dimension = 0;
    bool is_flow = false;  // false: the components define the map directly
    double step_h = 0.1;
    double integrator_tolerance = 1e-10;
    std::vector<std::vector<PolynomialTerm>> components;
    std::vector<double> region_lo;
    std::vector<double> region_hi;
};

VectorField polynomial_vector_field(const PolynomialSystem& system);

/// u' = -(1 - |u|^2)^3 (2 - |u|) u.
VectorField radial_vector_field(int dimension);
/// Gradient flow of V(x) = (x1^2 - 1)^2 / 4 + sum_{i>=2} x_i^2 / 2.
VectorField double_well_vector_field(int dimension);

// ---------------------------------------------------------------------------
// Built-in presets.
// ---------------------------------------------------------------------------

enum class Preset { kRadial, kDoubleWellGradient, kLinearDiag, kCustom };

Preset preset_from_name(const std::string& name);
std::string preset_name(Preset preset);

struct SystemSpec {
    Preset preset = Preset::kRadial;
    int dimension = 1;
    double step_h = 0.1;
    double integrator_tolerance = 1e-10;
    std::vector<double> diag;  // linear_diag entries
    std::optional<PolynomialSystem> custom;

    /// Parses {"preset": ..., "dimension": ..., "h": ..., ...} from a JSON
    /// document; custom systems carry a nested polynomial spec.
    static SystemSpec from_json_text(const std::string& text);
};

/// Builds a preset system. Radial: time-h flow map of
/// u' = -(1 - |u|^2)^3 (2 - |u|) u on [0,3] (n = 1, the radial variable) or
/// [-3,3]^n. Double-well gradient flow: V(x) = (x1^2-1)^2/4 + sum x_i^2/2 on
/// [-2,2]^n. Linear diag: the map x -> diag(d) x on [-2,2]^n.
SmoothMap make_system(const SystemSpec& spec);
SmoothMap make_system(Preset preset, int dimension, double step_h = 0.1,
                      double integrator_tolerance = 1e-10,
                      const std::vector<double>& diag = {});

/// Samples the region and reports points whose image leaves it (a warning
/// condition, not an error).
std::vector<Vec> region_invariance_violations(const SmoothMap& map, int samples,
                                              Rng& rng, double slack = 1e-9);

/// Max relative deviation between the analytic Jacobian and central finite
/// differences over sampled points.
double jacobian_fd_deviation(const SmoothMap& map, int samples, Rng& rng);

}  // namespace shadowlab
