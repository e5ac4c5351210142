#pragma once

#include "shadowlab/smooth_map.hpp"
#include "shadowlab/types.hpp"

#include <filesystem>
#include <vector>

namespace shadowlab {

enum class BoundaryMode { kFree, kPeriodic };

BoundaryMode boundary_mode_from_name(const std::string& name);
std::string boundary_mode_name(BoundaryMode mode);

/// A finite window of states with its measured defect
/// max_k |F(x_k) - x_{k+1}| (periodic mode includes the wrap transition).
class PseudoOrbit {
  public:
    PseudoOrbit(const SmoothMap& map, std::vector<Vec> states, BoundaryMode mode);

    [[nodiscard]] const std::vector<Vec>& states() const { return states_; }
    [[nodiscard]] int length() const { return static_cast<int>(states_.size()); }
    /// Number of map transitions covered by the window.
    [[nodiscard]] int transitions() const {
        return mode_ == BoundaryMode::kPeriodic ? length() : length() - 1;
    }
    [[nodiscard]] double defect() const { return defect_; }
    [[nodiscard]] BoundaryMode boundary_mode() const { return mode_; }
    [[nodiscard]] const Vec& state(int k) const { return states_[k]; }
    /// Successor index of k (wraps in periodic mode).
    [[nodiscard]] int next_index(int k) const {
        return mode_ == BoundaryMode::kPeriodic ? (k + 1) % length() : k + 1;
    }

    static double compute_defect(const SmoothMap& map, const std::vector<Vec>& states,
                                 BoundaryMode mode);

  private:
    std::vector<Vec> states_;
    BoundaryMode mode_;
    double defect_;
};

/// Iterates F from x0 (after `settle_steps` noiseless iterations) adding a
/// per-step perturbation of exact norm `noise_level` in a seeded direction.
PseudoOrbit generate_noisy_orbit(const SmoothMap& map, const Vec& x0, int window,
                                 double noise_level, BoundaryMode mode, Rng& rng,
                                 int settle_steps = 0);

/// CSV columns: k, x[0..n-1] as hexadecimal floats (bit-exact round trip).
/// A decimal mirror with the same rows is written next to it when
/// `decimal_mirror` is set.
void write_orbit_csv(const std::filesystem::path& path,
                     const std::vector<Vec>& states, bool decimal_mirror = true);
std::vector<Vec> read_orbit_csv(const std::filesystem::path& path);

}  // namespace shadowlab
