#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

#include "shadowlab/equilibrium.hpp"
#include "shadowlab/estimates.hpp"
#include "shadowlab/smooth_map.hpp"

#include <cmath>

using namespace shadowlab;

TEST_CASE("preset construction and fixed points") {
    SUBCASE("radial n=1 has fixed points at 0, 1, 2") {
        SmoothMap map = make_system(Preset::kRadial, 1, 0.1, 1e-12);
        for (double rho : {0.0, 1.0, 2.0}) {
            const Vec x = Vec::Constant(1, rho);
            CHECK((map(x) - x).norm() < 1e-10);
        }
        CHECK(map.region().lo[0] == 0.0);
        CHECK(map.region().hi[0] == 3.0);
    }

    SUBCASE("linear_diag evaluates as the diagonal map") {
        SmoothMap map = make_system(Preset::kLinearDiag, 2, 0.1, 1e-10, {0.5, 2.0});
        Vec x(2);
        x << 1.0, 1.0;
        const Vec y = map(x);
        CHECK(y[0] == 0.5);
        CHECK(y[1] == 2.0);
    }

    SUBCASE("double-well fixed points at -1, 0, 1") {
        SmoothMap map = make_system(Preset::kDoubleWellGradient, 1, 0.1, 1e-12);
        for (double x0 : {-1.0, 0.0, 1.0}) {
            const Vec x = Vec::Constant(1, x0);
            CHECK((map(x) - x).norm() < 1e-11);
        }
        // And Newton refines a nearby seed onto the sink.
        const Vec sink = find_fixed_point(map, Vec::Constant(1, 0.9));
        CHECK(std::abs(sink[0] - 1.0) < 1e-10);
    }

    SUBCASE("errors on bad parameters") {
        CHECK_THROWS_AS(make_system(Preset::kRadial, 0, 0.1), ConfigError);
        CHECK_THROWS_AS(make_system(Preset::kRadial, 1, -0.1), ConfigError);
        CHECK_THROWS_AS(make_system(Preset::kLinearDiag, 2, 0.1, 1e-10, {0.5}),
                        ConfigError);
        CHECK_THROWS_AS(preset_from_name("not_a_preset"), ConfigError);
    }
}

TEST_CASE("jacobians agree with central finite differences") {
    Rng rng(11);
    for (Preset preset :
         {Preset::kRadial, Preset::kDoubleWellGradient, Preset::kLinearDiag}) {
        const int n = 2;
        SmoothMap map = (preset == Preset::kLinearDiag)
                            ? make_system(preset, n, 0.1, 1e-10, {0.5, 2.0})
                            : make_system(preset, n, 0.1, 1e-12);
        CHECK(jacobian_fd_deviation(map, 20, rng) <= 1e-5);
    }
}

TEST_CASE("flow map semigroup property") {
    const double tol = 1e-11;
    FlowMap map(double_well_vector_field(2), 0.1, tol, Box::cube(2, 2.0), "dw");
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        const Vec x = rng.point_in_box(map.region());
        const Vec two_steps = map(map(x));
        const Vec one_double = map.flow(x, 0.2);
        CHECK((two_steps - one_double).norm() <= 10.0 * tol);
    }
}

TEST_CASE("region invariance sampling") {
    SmoothMap radial = make_system(Preset::kRadial, 1, 0.1, 1e-12);
    Rng rng(5);
    CHECK(region_invariance_violations(radial, 64, rng).empty());
}

TEST_CASE("hyperbolicity check") {
    SUBCASE("diagonal saddle at the origin") {
        SmoothMap map = make_system(Preset::kLinearDiag, 2, 0.1, 1e-10, {0.5, 2.0});
        const EquilibriumReport report = hyperbolicity_check(map, Vec::Zero(2));
        REQUIRE(report.hyperbolic);
        CHECK(report.unstable_basis.dim() == 1);
        CHECK(subspace_gap(report.stable_basis, Subspace::line(Vec::Unit(2, 0))) <
              1e-12);
        CHECK(subspace_gap(report.unstable_basis, Subspace::line(Vec::Unit(2, 1))) <
              1e-12);
        REQUIRE(report.constants.has_value());
        CHECK(report.constants->lambda == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(report.constants->C == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("normal maps get C = 1") {
        Rng rng(17);
        for (int trial = 0; trial < 10; ++trial) {
            const int n = 3;
            Mat g(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) g(i, j) = rng.gaussian();
            Eigen::HouseholderQR<Mat> qr(g);
            const Mat q = qr.householderQ() * Mat::Identity(n, n);
            Vec d(n);
            d << 0.4, 0.7, 1.9;
            const Mat a = q * d.asDiagonal() * q.transpose();
            SmoothMap map(
                n, [a](const Vec& x) { return Vec(a * x); },
                [a](const Vec&) { return a; }, Box::cube(n, 2.0), "normal");
            const EquilibriumReport report = hyperbolicity_check(map, Vec::Zero(n));
            REQUIRE(report.hyperbolic);
            REQUIRE(report.constants.has_value());
            CHECK(report.constants->C == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(report.constants->lambda == doctest::Approx(0.7).epsilon(1e-9));
        }
    }

    SUBCASE("radial equilibrium at 1 is not hyperbolic") {
        SmoothMap map = make_system(Preset::kRadial, 1, 0.1, 1e-12);
        const EquilibriumReport report =
            hyperbolicity_check(map, Vec::Constant(1, 1.0));
        CHECK_FALSE(report.hyperbolic);
    }

    SUBCASE("radial equilibrium at 2 has multiplier e^{-54 h}") {
        const double h = 0.1;
        SmoothMap map = make_system(Preset::kRadial, 1, h, 1e-13);
        const EquilibriumReport report =
            hyperbolicity_check(map, Vec::Constant(1, 2.0));
        REQUIRE(report.hyperbolic);
        REQUIRE(report.jacobian_spectrum.size() == 1);
        CHECK(std::abs(report.jacobian_spectrum[0]) ==
              doctest::Approx(std::exp(-54.0 * h)).epsilon(1e-8));
    }

    SUBCASE("rejects non-fixed points") {
        SmoothMap map = make_system(Preset::kRadial, 1, 0.1, 1e-12);
        CHECK_THROWS_AS(hyperbolicity_check(map, Vec::Constant(1, 1.5)),
                        HypothesisError);
    }
}

TEST_CASE("lipschitz estimate") {
    SUBCASE("constant-Jacobian maps give 1.05 |A|") {
        SmoothMap map = make_system(Preset::kLinearDiag, 2, 0.1, 1e-10, {0.5, 2.0});
        CHECK(lipschitz_estimate(map, map.region(), 64, 1) ==
              doctest::Approx(1.05 * 2.0).epsilon(1e-12));

        SmoothMap half = make_system(Preset::kLinearDiag, 1, 0.1, 1e-10, {0.5});
        CHECK(lipschitz_estimate(half, half.region(), 16, 1) ==
              doctest::Approx(0.525).epsilon(1e-12));
    }

    SUBCASE("radial flow map against a dense 1e5-point sweep") {
        SmoothMap map = make_system(Preset::kRadial, 1, 0.1, 1e-10);
        double sweep_max = 0.0;
        const int samples = 100000;
        for (int i = 0; i <= samples; ++i) {
            const Vec x = Vec::Constant(1, 3.0 * i / samples);
            sweep_max = std::max(sweep_max, std::abs(map.jacobian(x)(0, 0)));
        }
        const double estimate = lipschitz_estimate(map, map.region(), 2048, 7);
        CHECK(estimate <= 1.05 * sweep_max * (1.0 + 1e-9));
        CHECK(estimate >= sweep_max * 0.999);  // dense 1D sampling nearly saturates
    }

    SUBCASE("deterministic in the seed and rejects bad input") {
        SmoothMap map = make_system(Preset::kRadial, 1, 0.1, 1e-10);
        CHECK(lipschitz_estimate(map, map.region(), 128, 42) ==
              lipschitz_estimate(map, map.region(), 128, 42));
        CHECK_THROWS_AS(lipschitz_estimate(map, map.region(), 1, 0), ConfigError);
        CHECK_THROWS_AS(
            lipschitz_estimate(map, Box(Vec::Constant(1, 1.0), Vec::Constant(1, 0.0)),
                               16, 0),
            ConfigError);
    }
}

TEST_CASE("exponential attraction estimate") {
    SUBCASE("exact geometric decay of x -> x/2") {
        SmoothMap map = make_system(Preset::kLinearDiag, 1, 0.1, 1e-10, {0.5});
        const Box unit(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
        const AttractionProfile profile =
            exp_attraction_estimate(map, {Vec::Zero(1)}, unit, 20);
        CHECK(profile.gamma == doctest::Approx(std::log(2.0)).epsilon(1e-6));
        CHECK(profile.C >= 1.0);
        CHECK(profile.C <= 1.01);
    }

    SUBCASE("radial decay rate beats 54 in time units outside the attractor") {
        const double h = 0.05;
        SmoothMap map = make_system(Preset::kRadial, 1, h, 1e-13);
        std::vector<Vec> attractor;
        for (int i = 0; i <= 200; ++i) attractor.push_back(Vec::Constant(1, 2.0 * i / 200));
        // Track the segment rho > 2 directly: fitted gamma per unit time.
        Vec x = Vec::Constant(1, 3.0);
        std::vector<double> log_dist, times;
        for (int step = 0; step < 20 && x[0] - 2.0 > 1e-12; ++step) {
            log_dist.push_back(std::log(x[0] - 2.0));
            times.push_back(step * h);
            x = map(x);
        }
        const double rate = -shadowlab::testing::fitted_slope(times, log_dist);
        CHECK(rate >= 54.0);
    }

    SUBCASE("no attraction is an explicit failure") {
        SmoothMap expanding = make_system(Preset::kLinearDiag, 1, 0.1, 1e-10, {2.0});
        const Box unit(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
        CHECK_THROWS_AS(exp_attraction_estimate(expanding, {Vec::Zero(1)}, unit, 10),
                        HypothesisError);
    }

    SUBCASE("double-well profile is in the Holder regime") {
        SmoothMap map = make_system(Preset::kDoubleWellGradient, 1, 0.1, 1e-10);
        std::vector<Vec> attractor;
        for (int i = 0; i <= 200; ++i) {
            attractor.push_back(Vec::Constant(1, -1.0 + 2.0 * i / 200));
        }
        const AttractionProfile profile =
            exp_attraction_estimate(map, attractor, map.region(), 40);
        CHECK(profile.gamma > 0.0);
        CHECK(profile.L1 > 1.0);
    }
}

TEST_CASE("birkhoff number") {
    SmoothMap map = make_system(Preset::kDoubleWellGradient, 1, 0.1, 1e-10);
    const std::vector<Vec> equilibria = {Vec::Constant(1, -1.0), Vec::Zero(1),
                                         Vec::Constant(1, 1.0)};

    SUBCASE("grid already inside the neighborhoods") {
        const std::vector<Vec> grid = {Vec::Constant(1, 0.95), Vec::Constant(1, -1.02)};
        CHECK(birkhoff_number(map, equilibria, 0.1, grid) == 0);
    }

    SUBCASE("matches direct iteration on a 101-point grid") {
        std::vector<Vec> grid;
        for (int i = 0; i <= 100; ++i) grid.push_back(Vec::Constant(1, -2.0 + 4.0 * i / 100));
        const double eps = 0.1;
        const int t0 = birkhoff_number(map, equilibria, eps, grid);
        // Independent direct iteration.
        int expected = 0;
        for (const Vec& start : grid) {
            Vec x = start;
            int t = 0;
            auto near = [&](const Vec& y) {
                for (const Vec& e : equilibria) {
                    if ((y - e).norm() <= eps) return true;
                }
                return false;
            };
            while (!near(x)) {
                x = map(x);
                ++t;
            }
            expected = std::max(expected, t);
        }
        CHECK(t0 == expected);
        CHECK(t0 > 0);

        // Monotone non-increasing in eps.
        const int looser = birkhoff_number(map, equilibria, 0.2, grid);
        const int tighter = birkhoff_number(map, equilibria, 0.05, grid);
        CHECK(looser <= t0);
        CHECK(t0 <= tighter);
    }

    SUBCASE("radial grid on [0,3]") {
        SmoothMap radial = make_system(Preset::kRadial, 1, 0.1, 1e-10);
        const std::vector<Vec> eq = {Vec::Zero(1), Vec::Constant(1, 1.0),
                                     Vec::Constant(1, 2.0)};
        std::vector<Vec> grid;
        for (int i = 0; i <= 60; ++i) grid.push_back(Vec::Constant(1, 3.0 * i / 60));
        const int t0 = birkhoff_number(radial, eq, 0.05, grid);
        CHECK(t0 >= 0);
        // Direct iteration oracle.
        int expected = 0;
        for (const Vec& start : grid) {
            Vec x = start;
            int t = 0;
            auto near = [&](const Vec& y) {
                for (const Vec& e : eq) {
                    if ((y - e).norm() <= 0.05) return true;
                }
                return false;
            };
            while (!near(x)) {
                x = radial(x);
                ++t;
            }
            expected = std::max(expected, t);
        }
        CHECK(t0 == expected);
    }

    SUBCASE("rejects non-equilibria") {
        CHECK_THROWS_AS(
            birkhoff_number(map, {Vec::Constant(1, 0.5)}, 0.1, {Vec::Zero(1)}),
            HypothesisError);
    }
}

TEST_CASE("radial iterates obey the e^{-54 t} envelope") {
    for (double h : {0.05, 0.1}) {
        SmoothMap map = make_system(Preset::kRadial, 1, h, 1e-14);
        Rng rng(23);
        for (int trial = 0; trial < 5; ++trial) {
            const double rho0 = rng.uniform(2.0 + 1e-6, 3.0);
            Vec x = Vec::Constant(1, rho0);
            for (int k = 1; k * h <= 0.5 + 1e-12; ++k) {
                x = map(x);
                CHECK(x[0] - 2.0 <= (rho0 - 2.0) * std::exp(-54.0 * k * h) + 1e-13);
            }
        }
    }
}

TEST_CASE("custom polynomial systems load from JSON") {
    // Map kind: the planar quadratic map (x, y) -> (x/2 + y^2/4, y/3).
    const std::string map_doc = R"({
        "preset": "custom",
        "custom": {
            "dimension": 2,
            "kind": "map",
            "components": [
                [{"num": 1, "den": 2, "exponents": [1, 0]},
                 {"num": 1, "den": 4, "exponents": [0, 2]}],
                [{"num": 1, "den": 3, "exponents": [0, 1]}]
            ]
        }
    })";
    SystemSpec spec = SystemSpec::from_json_text(map_doc);
    SmoothMap map = make_system(spec);
    Vec x(2);
    x << 1.0, 2.0;
    const Vec y = map(x);
    CHECK(y[0] == doctest::Approx(0.5 + 1.0).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    Rng rng(2);
    CHECK(jacobian_fd_deviation(map, 20, rng) <= 1e-5);

    // Flow kind: scalar ODE x' = x - x^3 is the double-well gradient field.
    const std::string flow_doc = R"({
        "preset": "custom",
        "custom": {
            "dimension": 1,
            "kind": "flow",
            "h": 0.1,
            "integrator_tolerance": 1e-12,
            "components": [
                [{"num": 1, "exponents": [1]}, {"num": -1, "exponents": [3]}]
            ]
        }
    })";
    SmoothMap flow = make_system(SystemSpec::from_json_text(flow_doc));
    SmoothMap reference = make_system(Preset::kDoubleWellGradient, 1, 0.1, 1e-12);
    const Vec probe = Vec::Constant(1, 0.37);
    CHECK((flow(probe) - reference(probe)).norm() < 1e-11);

    CHECK_THROWS_AS(SystemSpec::from_json_text("{not json"), ConfigError);
    CHECK_THROWS_AS(
        make_system(SystemSpec::from_json_text(R"({"preset": "custom"})")),
        ConfigError);
}
