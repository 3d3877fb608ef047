#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "hdlab/model_core.hpp"
#include "hdlab/vec2.hpp"

namespace hdlab {

/// Partner id used for the enclosure wall.
inline constexpr int kWallId = -1;

/// Penetration beyond this fraction of a aborts the engine.
inline constexpr double kPenetrationTolerance = 1e-6;

struct Kinematics {
  Vec2 position;
  Vec2 velocity;
};

struct EnclosureGeometry {
  double enclosure_radius = 10.0;
  double disc_radius = 1.0;

  double contact_distance() const { return 2.0 * disc_radius; }
  double wall_radius() const { return enclosure_radius - disc_radius; }
  static EnclosureGeometry of(const SystemConfig& c) { return {c.enclosure_radius, c.disc_radius}; }
};

/// One executed collision. id_b == kWallId for wall reflections.
struct CollisionRecord {
  double time = 0.0;
  int id_a = 0;
  int id_b = kWallId;
  double impact_parameter = 0.0;  // signed, relative motion at contact
  double free_path = 0.0;         // path of id_a since its previous disc-disc collision
  double free_path_b = 0.0;       // same for id_b (0 for walls)
  Vec2 normal;                    // from a towards b, or outward radial for walls

  bool is_wall() const { return id_b == kWallId; }
};

struct EventLog {
  std::vector<CollisionRecord> records;
  std::vector<std::size_t> collision_counts;  // per disc index, disc-disc and wall
  bool partners_frozen = false;               // partners are immobile scatterers

  std::size_t disc_disc_count() const;
  std::size_t wall_count() const { return records.size() - disc_disc_count(); }
  void append(const EventLog& other);

  /// CSV with header time,id_a,id_b,bx_impact,free_path,nx,ny.
  void write_csv(std::ostream& out) const;
};

struct CollisionEvent {
  double time = 0.0;
  int index_a = 0;       // state index
  int index_b = kWallId;  // state index or kWallId
};

/// Earliest t > 0 at which |dr + dv t| = contact_distance while approaching; nullopt if none.
std::optional<double> predict_disc_disc(const Kinematics& a, const Kinematics& b, double contact_distance);

/// Earliest t >= 0 at which |r + v t| = R - a.
double predict_disc_wall(const Kinematics& s, double enclosure_radius, double disc_radius);

/// Equal-mass elastic collision: normal components exchanged, tangential untouched.
std::pair<Vec2, Vec2> resolve_disc_disc(const Kinematics& a, const Kinematics& b, double contact_distance);

/// Specular reflection about the radial normal.
Vec2 resolve_disc_wall(const Kinematics& s, double enclosure_radius, double disc_radius);

/// Event-driven evolution of N equal hard discs inside a circular reflecting wall.
///
/// Every event synchronises all discs to the event time and the next event is
/// re-predicted from that synchronised state, so the trajectory is a pure
/// function of the state at any event boundary.
class EventEngine {
 public:
  EventEngine(SystemState state, EnclosureGeometry geometry);

  /// Next event from the current state, nullopt if nothing will ever happen.
  std::optional<CollisionEvent> next_event() const;

  /// Executes the next event if it occurs at or before t_end; otherwise drifts
  /// every disc to t_end and returns nullopt.
  std::optional<CollisionRecord> step(double t_end);

  void advance_to(double t_end);

  /// Executes up to `count` events (stopping early at t_limit). Returns events executed.
  std::size_t advance_events(std::size_t count, double t_limit);

  const SystemState& state() const { return state_; }
  const EventLog& log() const { return log_; }
  const EnclosureGeometry& geometry() const { return geometry_; }

 private:
  void drift(double dt);
  CollisionRecord execute(const CollisionEvent& ev);

  SystemState state_;
  EnclosureGeometry geometry_;
  EventLog log_;
  std::vector<double> path_since_collision_;
};

struct AdvanceResult {
  SystemState state;
  EventLog log;
};

AdvanceResult advance(const SystemState& state, const EnclosureGeometry& geometry, double t_end);

/// v -> -v for every disc; positions and time untouched.
SystemState reverse_velocities(SystemState state);

}  // namespace hdlab
