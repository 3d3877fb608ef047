#include "hdlab/diffraction_probe.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "hdlab/errors.hpp"
#include "hdlab/model_core.hpp"
#include "hdlab/parallel.hpp"

namespace hdlab {

void StructureFactorCurve::write_csv(std::ostream& out) const {
  out << "q,S_mean,S_sigma\n";
  char buf[128];
  for (std::size_t i = 0; i < q.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", q[i], s_mean[i], s_sigma[i]);
    out << buf;
  }
}

std::vector<double> probe_q_grid(double enclosure_radius, double mean_separation, std::size_t n) {
  if (!(mean_separation > 0.0 && enclosure_radius > mean_separation)) {
    throw ContractViolation("probe_q_grid: need 0 < l < R");
  }
  if (n < 2) throw ContractViolation("probe_q_grid: need at least two points");
  const double lo = std::log(2.0 * units::pi / enclosure_radius);
  const double hi = std::log(2.0 * units::pi / mean_separation);
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  q.front() = 2.0 * units::pi / enclosure_radius;
  q.back() = 2.0 * units::pi / mean_separation;
  return q;
}

StructureFactorCurve structure_factor(const std::vector<Vec2>& positions, const std::vector<double>& q_grid,
                                      std::size_t directions) {
  if (positions.empty()) throw ContractViolation("structure_factor: no positions");
  if (directions < 1) throw ContractViolation("structure_factor: need at least one direction");
  StructureFactorCurve c;
  c.q = q_grid;
  c.s_mean.assign(q_grid.size(), 0.0);
  c.s_sigma.assign(q_grid.size(), 0.0);
  const double n = static_cast<double>(positions.size());
  for (std::size_t iq = 0; iq < q_grid.size(); ++iq) {
    double acc = 0.0;
    for (std::size_t k = 0; k < directions; ++k) {
      const Vec2 qv = q_grid[iq] * from_angle(units::pi * static_cast<double>(k) / static_cast<double>(directions));
      double re = 0.0, im = 0.0;
      for (const Vec2& r : positions) {
        const double phase = dot(qv, r);
        re += std::cos(phase);
        im += std::sin(phase);
      }
      acc += (re * re + im * im) / n;
    }
    c.s_mean[iq] = acc / static_cast<double>(directions);
  }
  return c;
}

std::vector<Vec2> uniform_snapshot(std::size_t n_points, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<Vec2> out;
  out.reserve(n_points);
  while (out.size() < n_points) {
    const Vec2 p{u(rng), u(rng)};
    if (norm2(p) <= radius * radius) out.push_back(p);
  }
  return out;
}

StructureFactorCurve smeared_reference(std::size_t n_points, double radius, const std::vector<double>& q_grid,
                                       std::size_t n_samples, std::uint64_t seed, std::size_t directions) {
  if (n_samples < 2) throw ContractViolation("smeared_reference: need at least two samples");
  const auto curves = parallel_map(n_samples, [&](std::size_t i) {
    return structure_factor(uniform_snapshot(n_points, radius, member_seed(seed, i)), q_grid, directions).s_mean;
  });
  StructureFactorCurve ref;
  ref.q = q_grid;
  ref.s_mean.assign(q_grid.size(), 0.0);
  ref.s_sigma.assign(q_grid.size(), 0.0);
  const double m = static_cast<double>(n_samples);
  for (std::size_t iq = 0; iq < q_grid.size(); ++iq) {
    double sum = 0.0;
    for (const auto& c : curves) sum += c[iq];
    const double mean = sum / m;
    double var = 0.0;
    for (const auto& c : curves) var += (c[iq] - mean) * (c[iq] - mean);
    ref.s_mean[iq] = mean;
    ref.s_sigma[iq] = std::sqrt(var / (m - 1.0));
  }
  return ref;
}

SnapshotVerdict classify_snapshot(const StructureFactorCurve& snapshot, const StructureFactorCurve& reference) {
  if (snapshot.q != reference.q || snapshot.s_mean.size() != reference.s_mean.size()) {
    throw ContractViolation("classify_snapshot: q grids differ");
  }
  SnapshotVerdict v;
  for (std::size_t i = 0; i < snapshot.q.size(); ++i) {
    const double diff = std::abs(snapshot.s_mean[i] - reference.s_mean[i]);
    double z = 0.0;
    if (reference.s_sigma[i] > 0.0) {
      z = diff / reference.s_sigma[i];
    } else if (diff > 0.0) {
      z = std::numeric_limits<double>::infinity();
    }
    if (z > v.max_z) {
      v.max_z = z;
      v.q_at_max = snapshot.q[i];
    }
  }
  v.distinguishable = v.max_z >= kDistinguishableZ;
  return v;
}

}  // namespace hdlab
