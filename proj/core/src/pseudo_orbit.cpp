#include "shadowlab/pseudo_orbit.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace shadowlab {

BoundaryMode boundary_mode_from_name(const std::string& name) {
    if (name == "free") return BoundaryMode::kFree;
    if (name == "periodic") return BoundaryMode::kPeriodic;
    throw ConfigError("unknown boundary mode '" + name + "'");
}

std::string boundary_mode_name(BoundaryMode mode) {
    return mode == BoundaryMode::kFree ? "free" : "periodic";
}

PseudoOrbit::PseudoOrbit(const SmoothMap& map, std::vector<Vec> states,
                         BoundaryMode mode)
    : states_(std::move(states)), mode_(mode) {
    if (states_.size() < 2) throw ConfigError("pseudo-orbit needs at least 2 states");
    for (const Vec& x : states_) {
        if (x.size() != map.dimension()) {
            throw ConfigError("pseudo-orbit state dimension mismatch");
        }
    }
    defect_ = compute_defect(map, states_, mode_);
}

double PseudoOrbit::compute_defect(const SmoothMap& map,
                                   const std::vector<Vec>& states,
                                   BoundaryMode mode) {
    double defect = 0.0;
    const int len = static_cast<int>(states.size());
    const int transitions = mode == BoundaryMode::kPeriodic ? len : len - 1;
    for (int k = 0; k < transitions; ++k) {
        const Vec& next = states[(k + 1) % len];
        defect = std::max(defect, (map(states[k]) - next).norm());
    }
    return defect;
}

PseudoOrbit generate_noisy_orbit(const SmoothMap& map, const Vec& x0, int window,
                                 double noise_level, BoundaryMode mode, Rng& rng,
                                 int settle_steps) {
    if (window < 2) throw ConfigError("generate_noisy_orbit: window must be >= 2");
    if (noise_level < 0.0) throw ConfigError("generate_noisy_orbit: negative noise");
    Vec x = map.iterate(x0, settle_steps);
    std::vector<Vec> states;
    states.reserve(window);
    states.push_back(x);
    for (int k = 1; k < window; ++k) {
        Vec next = map(states.back());
        if (noise_level > 0.0) {
            next += noise_level * rng.unit_vector(map.dimension());
        }
        states.push_back(std::move(next));
    }
    return PseudoOrbit(map, std::move(states), mode);
}

void write_orbit_csv(const std::filesystem::path& path,
                     const std::vector<Vec>& states, bool decimal_mirror) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    const int n = states.empty() ? 0 : static_cast<int>(states[0].size());
    out << "k";
    for (int i = 0; i < n; ++i) out << ",x" << i;
    out << "\n";
    char buf[64];
    for (std::size_t k = 0; k < states.size(); ++k) {
        out << k;
        for (int i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof(buf), "%a", states[k][i]);
            out << ',' << buf;
        }
        out << "\n";
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
    out.close();

    if (decimal_mirror) {
        std::filesystem::path mirror = path;
        mirror.replace_extension();
        mirror += "_decimal.csv";
        std::ofstream dec(mirror);
        if (!dec) throw IoError("cannot open '" + mirror.string() + "' for writing");
        dec << "k";
        for (int i = 0; i < n; ++i) dec << ",x" << i;
        dec << "\n";
        for (std::size_t k = 0; k < states.size(); ++k) {
            dec << k;
            for (int i = 0; i < n; ++i) {
                std::snprintf(buf, sizeof(buf), "%.17g", states[k][i]);
                dec << ',' << buf;
            }
            dec << "\n";
        }
    }
}

std::vector<Vec> read_orbit_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    std::vector<Vec> states;
    int expected_cols = -1;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) continue;  // header
        if (line.empty()) continue;
        std::vector<double> values;
        std::stringstream ss(line);
        std::string cell;
        bool first = true;
        while (std::getline(ss, cell, ',')) {
            if (first) {  // index column
                first = false;
                continue;
            }
            const char* begin = cell.c_str();
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin || (end != nullptr && *end != '\0')) {
                throw IoError("malformed orbit CSV at line " +
                              std::to_string(line_no) + ": '" + cell + "'");
            }
            values.push_back(v);
        }
        if (values.empty() || first) {
            throw IoError("malformed orbit CSV at line " + std::to_string(line_no) +
                          ": no state columns");
        }
        if (expected_cols < 0) expected_cols = static_cast<int>(values.size());
        if (static_cast<int>(values.size()) != expected_cols) {
            throw IoError("malformed orbit CSV at line " + std::to_string(line_no) +
                          ": inconsistent column count");
        }
        Vec x(expected_cols);
        for (int i = 0; i < expected_cols; ++i) x[i] = values[i];
        states.push_back(std::move(x));
    }
    if (states.size() < 2) {
        throw IoError("orbit CSV '" + path.string() + "' holds fewer than 2 states");
    }
    return states;
}

}  // namespace shadowlab
