#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "hdlab/vec2.hpp"

namespace hdlab {

struct StructureFactorCurve {
  std::vector<double> q;
  std::vector<double> s_mean;
  std::vector<double> s_sigma;  // zero for a single snapshot

  /// CSV with header q,S_mean,S_sigma.
  void write_csv(std::ostream& out) const;
};

inline constexpr std::size_t kDefaultQPoints = 64;
inline constexpr std::size_t kMinDirections = 64;

/// n log-spaced points in [2 pi / R, 2 pi / l].
std::vector<double> probe_q_grid(double enclosure_radius, double mean_separation, std::size_t n = kDefaultQPoints);

/// S(q) = |sum_j exp(i q.r_j)|^2 / N averaged over `directions` evenly spaced
/// angles on a half circle.
StructureFactorCurve structure_factor(const std::vector<Vec2>& positions, const std::vector<double>& q_grid,
                                      std::size_t directions = kMinDirections);

/// Monte-Carlo mean and standard deviation of S(q) for N independent uniform
/// points in a circle of the given radius.
StructureFactorCurve smeared_reference(std::size_t n_points, double radius, const std::vector<double>& q_grid,
                                       std::size_t n_samples, std::uint64_t seed,
                                       std::size_t directions = kMinDirections);

/// Uniform independent points in a circle.
std::vector<Vec2> uniform_snapshot(std::size_t n_points, double radius, std::uint64_t seed);

inline constexpr double kDistinguishableZ = 3.0;

struct SnapshotVerdict {
  bool distinguishable = false;
  double max_z = 0.0;
  double q_at_max = 0.0;
};

SnapshotVerdict classify_snapshot(const StructureFactorCurve& snapshot, const StructureFactorCurve& reference);

}  // namespace hdlab
