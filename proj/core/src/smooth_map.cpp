#include "shadowlab/smooth_map.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <utility>

namespace shadowlab {

using nlohmann::json;

SmoothMap::SmoothMap(int dimension, EvalFn evaluate, JacFn jacobian, Box region,
                     std::string label)
    : dimension_(dimension),
      evaluate_(std::move(evaluate)),
      jacobian_(std::move(jacobian)),
      region_(std::move(region)),
      label_(std::move(label)) {
    if (dimension_ < 1) throw ConfigError("system dimension must be >= 1");
    if (region_.dim() != dimension_) {
        throw ConfigError("region dimension does not match system dimension");
    }
}

SmoothMap SmoothMap::power(int n) const {
    if (n < 1) throw ConfigError("power requires n >= 1");
    if (n == 1) return *this;
    const EvalFn base_eval = evaluate_;
    const JacFn base_jac = jacobian_;
    EvalFn eval = [base_eval, n](const Vec& x) {
        Vec y = x;
        for (int i = 0; i < n; ++i) y = base_eval(y);
        return y;
    };
    JacFn jac = [base_eval, base_jac, n](const Vec& x) {
        Vec y = x;
        Mat j = base_jac(y);
        for (int i = 1; i < n; ++i) {
            y = base_eval(y);
            j = base_jac(y) * j;
        }
        return j;
    };
    return SmoothMap(dimension_, std::move(eval), std::move(jac), region_,
                     label_ + "^" + std::to_string(n));
}

Vec SmoothMap::iterate(const Vec& x, int k) const {
    Vec y = x;
    for (int i = 0; i < k; ++i) y = evaluate_(y);
    return y;
}

// ---------------------------------------------------------------------------
// Dormand-Prince RK5(4) with jointly integrated variational equation.
// ---------------------------------------------------------------------------

namespace {

struct Rk45Tableau {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    // Stage coefficients (Dormand-Prince).
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // 4th-order weights for the embedded error estimate.
    static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695,
                            e4 = 393.0 / 640, e5 = -92097.0 / 339200,
                            e6 = 187.0 / 2100, e7 = 1.0 / 40;
};

}  // namespace

FlowIntegration integrate_flow(const VectorField& field, const Vec& x0, double t,
                               double tolerance, bool with_jacobian) {
    const int n = field.dimension;
    if (x0.size() != n) throw ConfigError("integrate_flow: state dimension mismatch");
    if (tolerance <= 0.0) throw ConfigError("integrator tolerance must be positive");

    // Augmented state: x followed by the columns of J.
    const int m = with_jacobian ? n + n * n : n;
    Vec y(m);
    y.head(n) = x0;
    if (with_jacobian) {
        Mat id = Mat::Identity(n, n);
        y.tail(n * n) = Eigen::Map<const Vec>(id.data(), n * n);
    }

    auto rhs = [&](const Vec& z) {
        Vec dz(m);
        const Vec x = z.head(n);
        dz.head(n) = field.f(x);
        if (with_jacobian) {
            const Mat df = field.df(x);
            Eigen::Map<const Mat> j(z.tail(n * n).data(), n, n);
            Mat dj = df * j;
            dz.tail(n * n) = Eigen::Map<const Vec>(dj.data(), n * n);
        }
        return dz;
    };

    using T = Rk45Tableau;
    const double direction = (t >= 0.0) ? 1.0 : -1.0;
    double remaining = std::abs(t);
    double h = std::min(remaining, 0.05);
    if (h == 0.0) {
        FlowIntegration out;
        out.state = x0;
        out.jacobian = Mat::Identity(n, n);
        return out;
    }
    const double hmin = 1e-14 * std::max(1.0, std::abs(t));
    int steps = 0;

    Vec k1 = rhs(y);
    long attempts = 0;
    while (remaining > 0.0) {
        if (++attempts > 100'000'000) {
            throw ConvergenceError("integrate_flow: step acceptance stalled",
                                   remaining);
        }
        h = std::min(h, remaining);
        const double hd = direction * h;
        const Vec k2 = rhs(y + hd * (T::a21 * k1));
        const Vec k3 = rhs(y + hd * (T::a31 * k1 + T::a32 * k2));
        const Vec k4 = rhs(y + hd * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3));
        const Vec k5 =
            rhs(y + hd * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4));
        const Vec k6 = rhs(y + hd * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 +
                                     T::a64 * k4 + T::a65 * k5));
        const Vec y5 = y + hd * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 +
                                 T::b5 * k5 + T::b6 * k6);
        if (!y5.allFinite()) {
            // Overflowing trial step; NaNs must never reach the error test,
            // where comparisons would silently accept them.
            if (h <= hmin) {
                throw ConvergenceError("integrate_flow: solution blew up", h);
            }
            h = std::max(0.2 * h, hmin);
            continue;
        }
        const Vec k7 = rhs(y5);
        const Vec y4 = y + hd * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 +
                                 T::e5 * k5 + T::e6 * k6 + T::e7 * k7);

        double err = 0.0;
        bool finite = k7.allFinite() && y4.allFinite();
        for (int i = 0; finite && i < m; ++i) {
            const double scale =
                tolerance + tolerance * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(y5[i] - y4[i]) / scale);
        }

        if (finite && (err <= 1.0 || h <= hmin)) {
            y = y5;
            k1 = k7;  // FSAL
            remaining -= h;
            ++steps;
        }
        double factor = 0.2;
        if (finite) factor = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::min(5.0, std::max(0.2, factor));
        h = std::max(h, hmin);
    }

    FlowIntegration out;
    out.state = y.head(n);
    if (with_jacobian) {
        out.jacobian = Eigen::Map<const Mat>(y.tail(n * n).data(), n, n);
    } else {
        out.jacobian = Mat();
    }
    out.steps = steps;
    return out;
}

FlowMap::FlowMap(VectorField field, double step_h, double integrator_tolerance,
                 Box region, std::string label)
    : SmoothMap(
          field.dimension,
          [field_ptr = std::make_shared<const VectorField>(field), step_h,
           integrator_tolerance](const Vec& x) {
              return integrate_flow(*field_ptr, x, step_h, integrator_tolerance,
                                    /*with_jacobian=*/false)
                  .state;
          },
          [field_ptr = std::make_shared<const VectorField>(field), step_h,
           integrator_tolerance](const Vec& x) {
              return integrate_flow(*field_ptr, x, step_h, integrator_tolerance)
                  .jacobian;
          },
          std::move(region), std::move(label)),
      field_(std::make_shared<const VectorField>(std::move(field))),
      step_h_(step_h),
      tolerance_(integrator_tolerance) {
    if (step_h_ <= 0.0) throw ConfigError("flow map step h must be positive");
}

Vec FlowMap::flow(const Vec& x, double t) const {
    return integrate_flow(*field_, x, t, tolerance_, /*with_jacobian=*/false).state;
}

// ---------------------------------------------------------------------------
// Polynomial systems.
// ---------------------------------------------------------------------------

VectorField polynomial_vector_field(const PolynomialSystem& system) {
    const int n = system.dimension;
    if (n < 1) throw ConfigError("polynomial system dimension must be >= 1");
    if (static_cast<int>(system.components.size()) != n) {
        throw ConfigError("polynomial system needs one component per coordinate");
    }
    for (const auto& comp : system.components) {
        for (const auto& term : comp) {
            if (term.den == 0) throw ConfigError("polynomial term with zero denominator");
            if (static_cast<int>(term.exponents.size()) != n) {
                throw ConfigError("polynomial term exponent list has wrong length");
            }
            for (int e : term.exponents) {
                if (e < 0) throw ConfigError("polynomial exponents must be nonnegative");
            }
        }
    }

    auto components = system.components;
    VectorField field;
    field.dimension = n;
    field.f = [components, n](const Vec& x) {
        Vec out = Vec::Zero(n);
        for (int i = 0; i < n; ++i) {
            for (const auto& term : components[i]) {
                double v = static_cast<double>(term.num) / static_cast<double>(term.den);
                for (int j = 0; j < n; ++j) {
                    for (int e = 0; e < term.exponents[j]; ++e) v *= x[j];
                }
                out[i] += v;
            }
        }
        return out;
    };
    field.df = [components, n](const Vec& x) {
        Mat out = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            for (const auto& term : components[i]) {
                const double coeff =
                    static_cast<double>(term.num) / static_cast<double>(term.den);
                for (int k = 0; k < n; ++k) {
                    if (term.exponents[k] == 0) continue;
                    double v = coeff * term.exponents[k];
                    for (int j = 0; j < n; ++j) {
                        int e = term.exponents[j] - (j == k ? 1 : 0);
                        for (int q = 0; q < e; ++q) v *= x[j];
                    }
                    out(i, k) += v;
                }
            }
        }
        return out;
    };
    return field;
}

// ---------------------------------------------------------------------------
// Presets.
// ---------------------------------------------------------------------------

Preset preset_from_name(const std::string& name) {
    if (name == "radial") return Preset::kRadial;
    if (name == "double_well_gradient") return Preset::kDoubleWellGradient;
    if (name == "linear_diag") return Preset::kLinearDiag;
    if (name == "custom") return Preset::kCustom;
    throw ConfigError("unknown preset '" + name + "'");
}

std::string preset_name(Preset preset) {
    switch (preset) {
        case Preset::kRadial: return "radial";
        case Preset::kDoubleWellGradient: return "double_well_gradient";
        case Preset::kLinearDiag: return "linear_diag";
        case Preset::kCustom: return "custom";
    }
    return "?";
}

VectorField radial_vector_field(int n) {
    VectorField field;
    field.dimension = n;
    field.f = [](const Vec& u) {
        const double s = u.squaredNorm();
        const double rho = std::sqrt(s);
        return Vec((-(2.0 - rho) * std::pow(1.0 - s, 3)) * u);
    };
    field.df = [n](const Vec& u) {
        const double s = u.squaredNorm();
        const double rho = std::sqrt(s);
        const double a = std::pow(1.0 - s, 3);
        const double da = -6.0 * std::pow(1.0 - s, 2);  // gradient of a is da * u
        Mat out = ((rho - 2.0) * a) * Mat::Identity(n, n);
        if (rho > 0.0) {
            out += ((rho - 2.0) * da) * (u * u.transpose());
            out += (a / rho) * (u * u.transpose());
        }
        return out;
    };
    return field;
}

VectorField double_well_vector_field(int n) {
    // Gradient flow of V(x) = (x1^2 - 1)^2 / 4 + sum_{i>=2} x_i^2 / 2.
    VectorField field;
    field.dimension = n;
    field.f = [n](const Vec& x) {
        Vec out(n);
        out[0] = x[0] - x[0] * x[0] * x[0];
        for (int i = 1; i < n; ++i) out[i] = -x[i];
        return out;
    };
    field.df = [n](const Vec& x) {
        Mat out = -Mat::Identity(n, n);
        out(0, 0) = 1.0 - 3.0 * x[0] * x[0];
        return out;
    };
    return field;
}

SystemSpec SystemSpec::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid system JSON: ") + e.what());
    }
    SystemSpec spec;
    try {
        spec.preset = preset_from_name(doc.value("preset", std::string("radial")));
        spec.dimension = doc.value("dimension", 1);
        spec.step_h = doc.value("h", 0.1);
        spec.integrator_tolerance = doc.value("integrator_tolerance", 1e-10);
        if (doc.contains("diag")) {
            spec.diag = doc["diag"].get<std::vector<double>>();
        }
        if (doc.contains("custom")) {
            const json& c = doc["custom"];
            PolynomialSystem poly;
            poly.dimension = c.value("dimension", spec.dimension);
            poly.is_flow = c.value("kind", std::string("flow")) == "flow";
            poly.step_h = c.value("h", spec.step_h);
            poly.integrator_tolerance =
                c.value("integrator_tolerance", spec.integrator_tolerance);
            if (c.contains("region_lo")) {
                poly.region_lo = c["region_lo"].get<std::vector<double>>();
                poly.region_hi = c["region_hi"].get<std::vector<double>>();
            }
            for (const json& comp : c.at("components")) {
                std::vector<PolynomialTerm> terms;
                for (const json& t : comp) {
                    PolynomialTerm term;
                    term.num = t.at("num").get<long long>();
                    term.den = t.value("den", 1LL);
                    term.exponents = t.at("exponents").get<std::vector<int>>();
                    terms.push_back(std::move(term));
                }
                poly.components.push_back(std::move(terms));
            }
            spec.custom = std::move(poly);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad system spec: ") + e.what());
    }
    return spec;
}

SmoothMap make_system(const SystemSpec& spec) {
    const int n = spec.dimension;
    if (n < 1) throw ConfigError("dimension must be >= 1");

    switch (spec.preset) {
        case Preset::kRadial: {
            if (spec.step_h <= 0.0) throw ConfigError("radial preset needs h > 0");
            Box region = (n == 1) ? Box(Vec::Constant(1, 0.0), Vec::Constant(1, 3.0))
                                  : Box::cube(n, 3.0);
            return FlowMap(radial_vector_field(n), spec.step_h, spec.integrator_tolerance,
                           std::move(region), "radial");
        }
        case Preset::kDoubleWellGradient: {
            if (spec.step_h <= 0.0) throw ConfigError("double well preset needs h > 0");
            return FlowMap(double_well_vector_field(n), spec.step_h,
                           spec.integrator_tolerance, Box::cube(n, 2.0),
                           "double_well_gradient");
        }
        case Preset::kLinearDiag: {
            std::vector<double> diag = spec.diag;
            if (diag.empty()) throw ConfigError("linear_diag needs 'diag' entries");
            if (static_cast<int>(diag.size()) != n) {
                throw ConfigError("linear_diag 'diag' length must equal dimension");
            }
            Vec d(n);
            for (int i = 0; i < n; ++i) d[i] = diag[i];
            Mat m = d.asDiagonal();
            return SmoothMap(
                n, [d](const Vec& x) { return Vec(d.asDiagonal() * x); },
                [m](const Vec&) { return m; }, Box::cube(n, 2.0), "linear_diag");
        }
        case Preset::kCustom: {
            if (!spec.custom.has_value()) {
                throw ConfigError("custom preset requires a polynomial spec");
            }
            const PolynomialSystem& poly = *spec.custom;
            VectorField field = polynomial_vector_field(poly);
            Box region = Box::cube(poly.dimension, 2.0);
            if (!poly.region_lo.empty()) {
                if (static_cast<int>(poly.region_lo.size()) != poly.dimension ||
                    static_cast<int>(poly.region_hi.size()) != poly.dimension) {
                    throw ConfigError("custom region bounds have wrong length");
                }
                Vec lo(poly.dimension), hi(poly.dimension);
                for (int i = 0; i < poly.dimension; ++i) {
                    lo[i] = poly.region_lo[i];
                    hi[i] = poly.region_hi[i];
                }
                region = Box(lo, hi);
            }
            if (poly.is_flow) {
                if (poly.step_h <= 0.0) throw ConfigError("custom flow needs h > 0");
                return FlowMap(std::move(field), poly.step_h,
                               poly.integrator_tolerance, std::move(region),
                               "custom");
            }
            auto f = field.f;
            auto df = field.df;
            return SmoothMap(poly.dimension, std::move(f), std::move(df),
                             std::move(region), "custom");
        }
    }
    throw ConfigError("unknown preset");
}

SmoothMap make_system(Preset preset, int dimension, double step_h,
                      double integrator_tolerance, const std::vector<double>& diag) {
    SystemSpec spec;
    spec.preset = preset;
    spec.dimension = dimension;
    spec.step_h = step_h;
    spec.integrator_tolerance = integrator_tolerance;
    spec.diag = diag;
    return make_system(spec);
}

std::vector<Vec> region_invariance_violations(const SmoothMap& map, int samples,
                                              Rng& rng, double slack) {
    std::vector<Vec> violations;
    for (int i = 0; i < samples; ++i) {
        const Vec x = rng.point_in_box(map.region());
        if (!map.region().contains(map(x), slack)) violations.push_back(x);
    }
    return violations;
}

double jacobian_fd_deviation(const SmoothMap& map, int samples, Rng& rng) {
    const int n = map.dimension();
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        // Keep the stencil inside the region.
        Vec x = map.region().center() +
                0.5 * (rng.point_in_box(map.region()) - map.region().center());
        Mat fd(n, n);
        for (int j = 0; j < n; ++j) {
            const double hj = 1e-6 * std::max(1.0, std::abs(x[j]));
            Vec xp = x, xm = x;
            xp[j] += hj;
            xm[j] -= hj;
            fd.col(j) = (map(xp) - map(xm)) / (2.0 * hj);
        }
        const Mat an = map.jacobian(x);
        const double scale = std::max(1.0, operator_norm(an));
        worst = std::max(worst, operator_norm(an - fd) / scale);
    }
    return worst;
}

}  // namespace shadowlab
