#include "hdlab/reference_stepper.hpp"

#include <cmath>
#include <vector>

#include "hdlab/errors.hpp"

namespace hdlab {

namespace {

struct Contact {
  int a = -1;
  int b = kWallId;
  double depth = 0.0;  // positive when overlapping
};

// Deepest approaching overlap after moving every disc by h; a < 0 if none.
Contact deepest_overlap(const SystemState& s, const EnclosureGeometry& g, double h) {
  Contact worst;
  const double sigma = g.contact_distance();
  const double wall = g.wall_radius();
  const std::size_t n = s.discs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 ri = s.discs[i].position + h * s.discs[i].velocity;
    const double over_wall = norm(ri) - wall;
    if (over_wall > 0.0 && dot(ri, s.discs[i].velocity) > 0.0 && over_wall > worst.depth) {
      worst = {static_cast<int>(i), kWallId, over_wall};
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2 rj = s.discs[j].position + h * s.discs[j].velocity;
      const Vec2 dr = rj - ri;
      const double over = sigma - norm(dr);
      const bool approaching = dot(dr, s.discs[j].velocity - s.discs[i].velocity) < 0.0;
      if (over > 0.0 && approaching && over > worst.depth) {
        worst = {static_cast<int>(i), static_cast<int>(j), over};
      }
    }
  }
  return worst;
}

void drift(SystemState& s, double h) {
  for (auto& d : s.discs) d.position += h * d.velocity;
  s.time += h;
}

}  // namespace

SteppedRun step_naively(const SystemState& initial, const EnclosureGeometry& geometry, double t_end, double dt) {
  if (!(dt > 0.0)) throw ContractViolation("step_naively: dt must be positive");
  SteppedRun run{initial, 0, 0};
  SystemState& s = run.state;
  while (s.time < t_end) {
    const double h = std::min(dt, t_end - s.time);
    if (deepest_overlap(s, geometry, h).a < 0) {
      drift(s, h);
      continue;
    }
    double lo = 0.0, hi = h;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (deepest_overlap(s, geometry, mid).a < 0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const Contact c = deepest_overlap(s, geometry, hi);
    drift(s, hi);
    auto& da = s.discs[c.a];
    if (c.b == kWallId) {
      const Vec2 n = normalized(da.position);
      da.velocity -= 2.0 * dot(da.velocity, n) * n;
      ++run.wall_events;
    } else {
      auto& db = s.discs[c.b];
      const Vec2 n = normalized(db.position - da.position);
      const double exchange = dot(db.velocity - da.velocity, n);
      da.velocity += exchange * n;
      db.velocity -= exchange * n;
      ++run.disc_disc_events;
    }
  }
  return run;
}

}  // namespace hdlab
