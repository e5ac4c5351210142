#include "shadowlab/types.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>

namespace shadowlab {

Box::Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size()) {
        throw ConfigError("box bounds have mismatched dimensions");
    }
}

Box Box::cube(int dim, double r) {
    return Box(Vec::Constant(dim, -r), Vec::Constant(dim, r));
}

bool Box::contains(const Vec& x, double slack) const {
    if (x.size() != lo.size()) return false;
    for (int i = 0; i < x.size(); ++i) {
        if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
    }
    return true;
}

double Box::inner_radius() const {
    if (lo.size() == 0) return 0.0;
    return half_widths().minCoeff();
}

bool Box::empty() const {
    if (lo.size() == 0) return true;
    return ((hi - lo).array() <= 0.0).any();
}

std::uint64_t Rng::next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

double Rng::gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
}

Vec Rng::gaussian_vector(int n) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = gaussian();
    return x;
}

Vec Rng::unit_vector(int n) {
    Vec x = gaussian_vector(n);
    double norm = x.norm();
    while (norm < 1e-12) {
        x = gaussian_vector(n);
        norm = x.norm();
    }
    return x / norm;
}

Vec Rng::point_in_box(const Box& box) {
    Vec x(box.dim());
    for (int i = 0; i < box.dim(); ++i) x[i] = uniform(box.lo[i], box.hi[i]);
    return x;
}

TransversalityError::TransversalityError(const std::string& what, double gap_)
    : HypothesisError(what), gap(gap_) {}

DegenerateSplittingError::DegenerateSplittingError(const std::string& what, int index_)
    : HypothesisError(what), index(index_) {}

ConvergenceError::ConvergenceError(const std::string& what, double residual_)
    : HypothesisError(what), residual(residual_) {}

LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("SHADOWLAB_LOG");
        if (env == nullptr) return LogLevel::kInfo;
        const std::string s(env);
        if (s == "quiet" || s == "0") return LogLevel::kQuiet;
        if (s == "debug" || s == "2") return LogLevel::kDebug;
        return LogLevel::kInfo;
    }();
    return level;
}

namespace {
std::mutex log_mutex;
void emit(const char* tag, const std::string& msg) {
    std::lock_guard<std::mutex> lock(log_mutex);
    std::fprintf(stderr, "[shadowlab:%s] %s\n", tag, msg.c_str());
}
}  // namespace

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::kInfo) emit("info", msg);
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::kDebug) emit("debug", msg);
}

void log_warn(const std::string& msg) {
    if (log_level() >= LogLevel::kQuiet) emit("warn", msg);
}

double operator_norm(const Mat& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
}

double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace shadowlab
