#include "shadowlab/estimates.hpp"

#include <algorithm>
#include <cmath>

namespace shadowlab {

double lipschitz_estimate(const SmoothMap& map, const Box& region,
                          int sample_count, std::uint64_t seed) {
    if (region.empty()) throw ConfigError("lipschitz_estimate: empty region");
    if (sample_count < 2) throw ConfigError("lipschitz_estimate: need >= 2 samples");
    Rng rng(seed ^ 0x5eed11f5ULL);
    double worst = 0.0;
    for (int i = 0; i < sample_count; ++i) {
        const Vec x = (i == 0) ? region.center() : rng.point_in_box(region);
        worst = std::max(worst, operator_norm(map.jacobian(x)));
    }
    return kLipschitzSafetyFactor * worst;
}

double hausdorff_semidistance(const std::vector<Vec>& a, const std::vector<Vec>& b) {
    if (a.empty() || b.empty()) {
        throw ConfigError("hausdorff_semidistance: empty point set");
    }
    double worst = 0.0;
    for (const Vec& p : a) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec& q : b) best = std::min(best, (p - q).norm());
        worst = std::max(worst, best);
    }
    return worst;
}

std::vector<Vec> box_lattice(const Box& box, int total) {
    const int n = box.dim();
    int per_dim = std::max(2, static_cast<int>(std::round(std::pow(
                                  static_cast<double>(total), 1.0 / n))));
    std::vector<Vec> points;
    std::vector<int> idx(n, 0);
    while (true) {
        Vec x(n);
        for (int i = 0; i < n; ++i) {
            x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * idx[i] / (per_dim - 1);
        }
        points.push_back(std::move(x));
        int d = 0;
        while (d < n && ++idx[d] == per_dim) idx[d++] = 0;
        if (d == n) break;
    }
    return points;
}

AttractionProfile exp_attraction_estimate(const SmoothMap& map,
                                          const std::vector<Vec>& attractor_sample,
                                          const Box& region, int horizon,
                                          std::uint64_t seed) {
    if (attractor_sample.empty()) {
        throw ConfigError("exp_attraction_estimate: empty attractor sample");
    }
    if (horizon < 3) throw ConfigError("exp_attraction_estimate: horizon must be >= 3");
    if (region.empty()) throw ConfigError("exp_attraction_estimate: empty region");

    const int n = region.dim();
    std::vector<Vec> cloud = box_lattice(region, n == 1 ? 129 : (n == 2 ? 289 : 343));

    std::vector<double> log_dist;
    std::vector<double> ns;
    for (int step = 0; step <= horizon; ++step) {
        const double dist = hausdorff_semidistance(cloud, attractor_sample);
        if (dist < 1e-15) break;  // cloud effectively on the sample
        log_dist.push_back(std::log(dist));
        ns.push_back(static_cast<double>(step));
        if (step < horizon) {
            for (Vec& x : cloud) x = map(x);
        }
    }
    if (log_dist.size() < 3) {
        throw HypothesisError(
            "exp_attraction_estimate: cloud collapsed onto the sample too fast "
            "to fit a rate");
    }
    if (log_dist.back() >= log_dist.front()) {
        throw HypothesisError(
            "exp_attraction_estimate: distances non-decreasing, no attraction "
            "detected");
    }

    // Least squares: log dist = log C - gamma n.
    const int m = static_cast<int>(ns.size());
    double sn = 0, sd = 0, snn = 0, snd = 0;
    for (int i = 0; i < m; ++i) {
        sn += ns[i];
        sd += log_dist[i];
        snn += ns[i] * ns[i];
        snd += ns[i] * log_dist[i];
    }
    const double slope = (m * snd - sn * sd) / (m * snn - sn * sn);
    const double intercept = (sd - slope * sn) / m;

    AttractionProfile profile;
    profile.gamma = -slope;
    profile.C = std::max(1.0, std::exp(intercept));
    profile.region = region;
    if (profile.gamma <= 0.0) {
        throw HypothesisError(
            "exp_attraction_estimate: fitted rate nonpositive, no attraction "
            "detected");
    }
    double residual = 0.0;
    for (int i = 0; i < m; ++i) {
        residual = std::max(residual,
                            std::abs(log_dist[i] - (intercept + slope * ns[i])));
    }
    profile.fit_residual = residual;
    if (residual > kAttractionFitTolerance) {
        log_warn("exp_attraction_estimate: fit residual " +
                 std::to_string(residual) + " exceeds the declared tolerance " +
                 std::to_string(kAttractionFitTolerance));
    }
    profile.L1 = lipschitz_estimate(map, region, 512, seed);
    return profile;
}

int birkhoff_number(const SmoothMap& map, const std::vector<Vec>& equilibria,
                    double eps, const std::vector<Vec>& region_grid) {
    if (eps <= 0.0) throw ConfigError("birkhoff_number: eps must be positive");
    if (equilibria.empty()) throw ConfigError("birkhoff_number: no equilibria");
    for (const Vec& e : equilibria) {
        const double res = (map(e) - e).norm();
        if (res > 1e-8) {
            throw HypothesisError("birkhoff_number: supplied point is not a fixed "
                                  "point (residual " + std::to_string(res) + ")");
        }
    }
    constexpr int kCap = 1'000'000;
    auto near_equilibrium = [&](const Vec& x) {
        for (const Vec& e : equilibria) {
            if ((x - e).norm() <= eps) return true;
        }
        return false;
    };
    int t0 = 0;
    for (const Vec& start : region_grid) {
        Vec x = start;
        int t = 0;
        while (!near_equilibrium(x)) {
            x = map(x);
            if (++t > kCap) {
                throw ConvergenceError(
                    "birkhoff_number: orbit did not reach an eps-neighborhood "
                    "within the step cap",
                    static_cast<double>(kCap));
            }
        }
        t0 = std::max(t0, t);
    }
    return t0;
}

}  // namespace shadowlab
