#include "hdlab/event_dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <tuple>

#include "hdlab/errors.hpp"

namespace hdlab {

namespace {

// Roots closer to zero than this (in units of contact_distance / |dv|) are
// treated as the contact that was just resolved.
constexpr double kRootFloor = 1e-12;

// Overlapping pairs still approaching faster than this fraction of |dv| collide at once.
constexpr double kGrazingApproach = 1e-9;

std::string describe(double t, int a, int b) {
  std::ostringstream os;
  os.precision(17);
  os << "t=" << t << " discs " << a << (b == kWallId ? std::string(" and wall") : " and " + std::to_string(b));
  return os.str();
}

}  // namespace

std::size_t EventLog::disc_disc_count() const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.is_wall() ? 0 : 1;
  return n;
}

void EventLog::append(const EventLog& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
  if (collision_counts.size() < other.collision_counts.size()) {
    collision_counts.resize(other.collision_counts.size(), 0);
  }
  for (std::size_t i = 0; i < other.collision_counts.size(); ++i) collision_counts[i] += other.collision_counts[i];
}

void EventLog::write_csv(std::ostream& out) const {
  out << "time,id_a,id_b,bx_impact,free_path,nx,ny\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g\n", r.time, r.id_a, r.id_b,
                  r.impact_parameter, r.free_path, r.normal.x, r.normal.y);
    out << buf;
  }
}

std::optional<double> predict_disc_disc(const Kinematics& a, const Kinematics& b, double contact_distance) {
  const Vec2 dr = b.position - a.position;
  const Vec2 dv = b.velocity - a.velocity;
  const double bdot = dot(dr, dv);
  if (bdot >= 0.0) return std::nullopt;
  const double dv2 = norm2(dv);
  const double c = norm2(dr) - contact_distance * contact_distance;
  const double disc = bdot * bdot - dv2 * c;
  if (disc < 0.0) return std::nullopt;
  if (c < 0.0) {
    // Already touching within rounding and still closing in.
    if (-bdot > kGrazingApproach * std::sqrt(dv2) * contact_distance) return 0.0;
    return std::nullopt;
  }
  // Cancellation-free form of (-b - sqrt(disc)) / dv2.
  const double t = c / (-bdot + std::sqrt(disc));
  if (t < kRootFloor * contact_distance / std::sqrt(dv2)) return std::nullopt;
  return t;
}

double predict_disc_wall(const Kinematics& s, double enclosure_radius, double disc_radius) {
  const double rho = enclosure_radius - disc_radius;
  const double v2 = norm2(s.velocity);
  if (!(v2 > 0.0)) throw ContractViolation("predict_disc_wall: zero velocity");
  const double rv = dot(s.position, s.velocity);
  const double c = norm2(s.position) - rho * rho;
  if (c > 2.0 * kPenetrationTolerance * disc_radius * rho) {
    throw ContractViolation("predict_disc_wall: disc lies outside the wall radius");
  }
  const double disc = std::sqrt(std::max(0.0, rv * rv - v2 * c));
  if (rv < 0.0) return (-rv + disc) / v2;
  // Moving outwards: -c / (rv + disc) avoids cancellation.
  return std::max(0.0, -c / (rv + disc));
}

std::pair<Vec2, Vec2> resolve_disc_disc(const Kinematics& a, const Kinematics& b, double contact_distance) {
  const Vec2 dr = b.position - a.position;
  const double dist = norm(dr);
  if (std::abs(dist - contact_distance) > kPenetrationTolerance * contact_distance) {
    std::ostringstream os;
    os.precision(17);
    os << "resolve_disc_disc: centres " << dist << " apart, contact distance " << contact_distance;
    throw ContractViolation(os.str());
  }
  const Vec2 n = dr / dist;
  const double dvn = dot(b.velocity - a.velocity, n);
  return {a.velocity + dvn * n, b.velocity - dvn * n};
}

Vec2 resolve_disc_wall(const Kinematics& s, double enclosure_radius, double disc_radius) {
  const double rho = enclosure_radius - disc_radius;
  const double r = norm(s.position);
  if (std::abs(r - rho) > kPenetrationTolerance * disc_radius) {
    throw ContractViolation("resolve_disc_wall: disc is not touching the wall");
  }
  const Vec2 n = s.position / r;
  return s.velocity - 2.0 * dot(s.velocity, n) * n;
}

// ---------------------------------------------------------------------------

EventEngine::EventEngine(SystemState state, EnclosureGeometry geometry)
    : state_(std::move(state)), geometry_(geometry), path_since_collision_(state_.discs.size(), 0.0) {
  log_.collision_counts.assign(state_.discs.size(), 0);
}

std::optional<CollisionEvent> EventEngine::next_event() const {
  const auto& discs = state_.discs;
  const int n = static_cast<int>(discs.size());
  const double sigma = geometry_.contact_distance();
  const double min_dist = sigma - kPenetrationTolerance * geometry_.disc_radius;
  const double max_rad = geometry_.wall_radius() + kPenetrationTolerance * geometry_.disc_radius;

  std::optional<CollisionEvent> best;
  auto key = [&](const CollisionEvent& e) {
    const int ida = discs[e.index_a].id;
    const int idb = e.index_b == kWallId ? kWallId : discs[e.index_b].id;
    return std::make_tuple(e.time, std::min(ida, idb), std::max(ida, idb));
  };
  auto consider = [&](CollisionEvent e) {
    if (!best || key(e) < key(*best)) best = e;
  };

  for (int i = 0; i < n; ++i) {
    const Kinematics ki{discs[i].position, discs[i].velocity};
    if (norm2(ki.position) > max_rad * max_rad) {
      throw EngineAbort("penetration of the wall beyond tolerance at " + describe(state_.time, discs[i].id, kWallId));
    }
    for (int j = i + 1; j < n; ++j) {
      const Kinematics kj{discs[j].position, discs[j].velocity};
      if (norm2(kj.position - ki.position) < min_dist * min_dist) {
        throw EngineAbort("disc penetration beyond tolerance at " + describe(state_.time, discs[i].id, discs[j].id));
      }
      if (auto t = predict_disc_disc(ki, kj, sigma)) consider({state_.time + *t, i, j});
    }
    if (norm2(ki.velocity) > 0.0) {
      consider({state_.time + predict_disc_wall(ki, geometry_.enclosure_radius, geometry_.disc_radius), i, kWallId});
    }
  }
  return best;
}

void EventEngine::drift(double dt) {
  if (dt == 0.0) return;
  for (std::size_t i = 0; i < state_.discs.size(); ++i) {
    auto& d = state_.discs[i];
    d.position += dt * d.velocity;
    path_since_collision_[i] += dt * norm(d.velocity);
  }
  state_.time += dt;
}

CollisionRecord EventEngine::execute(const CollisionEvent& ev) {
  drift(ev.time - state_.time);
  state_.time = ev.time;
  auto& a = state_.discs[ev.index_a];
  CollisionRecord rec;
  rec.time = ev.time;
  rec.id_a = a.id;
  const Kinematics ka{a.position, a.velocity};
  if (ev.index_b == kWallId) {
    try {
      a.velocity = resolve_disc_wall(ka, geometry_.enclosure_radius, geometry_.disc_radius);
    } catch (const ContractViolation& e) {
      throw EngineAbort(std::string(e.what()) + " at " + describe(ev.time, a.id, kWallId));
    }
    rec.id_b = kWallId;
    rec.normal = normalized(a.position);
    rec.impact_parameter = cross(rec.normal, normalized(ka.velocity)) * geometry_.wall_radius();
    rec.free_path = path_since_collision_[ev.index_a];
    ++log_.collision_counts[ev.index_a];
  } else {
    auto& b = state_.discs[ev.index_b];
    const Kinematics kb{b.position, b.velocity};
    std::pair<Vec2, Vec2> out;
    try {
      out = resolve_disc_disc(ka, kb, geometry_.contact_distance());
    } catch (const ContractViolation& e) {
      throw EngineAbort(std::string(e.what()) + " at " + describe(ev.time, a.id, b.id));
    }
    const Vec2 dr = kb.position - ka.position;
    const Vec2 dv = kb.velocity - ka.velocity;
    a.velocity = out.first;
    b.velocity = out.second;
    rec.id_b = b.id;
    rec.normal = normalized(dr);
    rec.impact_parameter = cross(dr, dv) / norm(dv);
    rec.free_path = path_since_collision_[ev.index_a];
    rec.free_path_b = path_since_collision_[ev.index_b];
    path_since_collision_[ev.index_a] = 0.0;
    path_since_collision_[ev.index_b] = 0.0;
    ++log_.collision_counts[ev.index_a];
    ++log_.collision_counts[ev.index_b];
  }
  log_.records.push_back(rec);
  return rec;
}

std::optional<CollisionRecord> EventEngine::step(double t_end) {
  if (t_end < state_.time) throw ContractViolation("EventEngine::step: t_end precedes the current time");
  const auto ev = next_event();
  if (!ev || ev->time > t_end) {
    if (!std::isfinite(t_end)) return std::nullopt;
    drift(t_end - state_.time);
    state_.time = t_end;
    return std::nullopt;
  }
  return execute(*ev);
}

void EventEngine::advance_to(double t_end) {
  while (step(t_end)) {
  }
}

std::size_t EventEngine::advance_events(std::size_t count, double t_limit) {
  std::size_t done = 0;
  while (done < count && step(t_limit)) ++done;
  return done;
}

AdvanceResult advance(const SystemState& state, const EnclosureGeometry& geometry, double t_end) {
  EventEngine engine(state, geometry);
  engine.advance_to(t_end);
  return {engine.state(), engine.log()};
}

SystemState reverse_velocities(SystemState state) {
  for (auto& d : state.discs) d.velocity = -d.velocity;
  return state;
}

}  // namespace hdlab
