#include <benchmark/benchmark.h>

#include "shadowlab/solver.hpp"
#include "shadowlab/splitting.hpp"

using namespace shadowlab;

namespace {

SmoothMap saddle_map() {
    return make_system(Preset::kLinearDiag, 2, 0.1, 1e-10, {0.5, 2.0});
}

PseudoOrbit zero_cloud(const SmoothMap& map, int window, double scale) {
    Rng rng(7);
    std::vector<Vec> states;
    states.reserve(window);
    for (int k = 0; k < window; ++k) {
        states.push_back(scale * rng.unit_vector(map.dimension()));
    }
    return PseudoOrbit(map, states, BoundaryMode::kFree);
}

void FlowMapStep(benchmark::State& state) {
    SmoothMap map = make_system(Preset::kDoubleWellGradient, 2, 0.1, 1e-10);
    Vec x(2);
    x << 0.4, 0.2;
    for (auto _ : state) {
        x = map(x);
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(FlowMapStep);

void FlowMapJacobian(benchmark::State& state) {
    SmoothMap map = make_system(Preset::kDoubleWellGradient, 2, 0.1, 1e-10);
    Vec x(2);
    x << 0.4, 0.2;
    for (auto _ : state) {
        Mat j = map.jacobian(x);
        benchmark::DoNotOptimize(j);
    }
}
BENCHMARK(FlowMapJacobian);

void ObliqueProjectorBench(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(42);
    Mat ms(n, n / 2), mu(n, n - n / 2);
    for (int j = 0; j < ms.cols(); ++j) ms.col(j) = rng.gaussian_vector(n);
    for (int j = 0; j < mu.cols(); ++j) mu.col(j) = rng.gaussian_vector(n);
    const Subspace s = Subspace::span(ms);
    const Subspace u = Subspace::span(mu);
    for (auto _ : state) {
        ObliqueProjector p = oblique_projector(s, u);
        benchmark::DoNotOptimize(p.matrix);
    }
}
BENCHMARK(ObliqueProjectorBench)->Arg(4)->Arg(8)->Arg(16);

void BuildSplitting(benchmark::State& state) {
    const int window = static_cast<int>(state.range(0));
    SmoothMap map = saddle_map();
    PseudoOrbit orbit = zero_cloud(map, window, 1e-5);
    for (auto _ : state) {
        SplittingFrame frame = build_splitting(map, orbit, 1, 20);
        benchmark::DoNotOptimize(frame.M);
    }
    state.SetComplexityN(window);
}
BENCHMARK(BuildSplitting)->Arg(100)->Arg(200)->Arg(400)->Complexity();

void GreenSolve(benchmark::State& state) {
    const int window = static_cast<int>(state.range(0));
    SmoothMap map = saddle_map();
    PseudoOrbit orbit = zero_cloud(map, window, 1e-5);
    SplittingFrame frame = build_splitting(map, orbit, 1, 20);
    std::vector<Mat> as;
    std::vector<Vec> g;
    Rng rng(11);
    for (int k = 0; k + 1 < window; ++k) {
        as.push_back(map.jacobian(orbit.state(k)));
        g.push_back(1e-4 * rng.unit_vector(2));
    }
    for (auto _ : state) {
        auto v = linear_green_solve(as, frame, g, BoundaryMode::kFree);
        benchmark::DoNotOptimize(v);
    }
    state.SetComplexityN(window);
}
BENCHMARK(GreenSolve)->Arg(100)->Arg(200)->Arg(400)->Complexity();

void ShadowPipeline(benchmark::State& state) {
    SmoothMap map = saddle_map();
    PseudoOrbit orbit = zero_cloud(map, 200, 1e-5);
    for (auto _ : state) {
        ShadowingCertificate cert = shadow_pseudo_orbit(map, orbit, 1, 0.2);
        benchmark::DoNotOptimize(cert.measured_sup_error);
    }
}
BENCHMARK(ShadowPipeline);

}  // namespace

BENCHMARK_MAIN();
