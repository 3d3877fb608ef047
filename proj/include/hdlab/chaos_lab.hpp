#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "hdlab/event_dynamics.hpp"
#include "hdlab/model_core.hpp"
#include "hdlab/vec2.hpp"

namespace hdlab {

// ---------------------------------------------------------------------------
// Velocity-reversal echo

struct ReversalReport {
  double t_rev = 0.0;
  std::size_t collisions_forward = 0;  // disc-disc events before reversal
  double collisions_per_disc = 0.0;    // disc-disc participations per disc before reversal
  std::vector<double> return_errors;   // |r_i(2T) - r_i(0)| by disc index
  double max_error = 0.0;
  double rms_error = 0.0;
};

/// Forward to t_rev, negate every velocity except those in `exclude`, evolve to 2 t_rev.
ReversalReport run_reversal(const SystemConfig& config, double t_rev, const std::set<int>& exclude = {});

// ---------------------------------------------------------------------------
// Frozen-scatterer model: one point particle among immobile contact circles.

struct FrozenScene {
  std::vector<Vec2> scatterers;    // centres of the N-1 immobile discs
  double contact_radius = 1.0;     // a_eff = 2a for a point standing in for a disc of radius a
  double enclosure_radius = 100.0;
  double mean_separation = 10.0;
  Vec2 start;
  Vec2 direction{1.0, 0.0};

  int active_id() const { return static_cast<int>(scatterers.size()); }
  double nominal_mean_free_path() const { return mean_free_path_nominal(mean_separation, contact_radius); }
};

struct FrozenSceneSpec {
  std::size_t n_scatterers = 1600;
  double contact_radius = 1.0;
  double mean_separation = 10.0;
  std::uint64_t seed = 1;
  double start_fraction = 0.25;  // active particle starts within this fraction of R
};

/// Scatterers placed by rejection (centres at least contact_radius apart) in a
/// circle of radius sqrt(N) l; start point outside every contact circle.
FrozenScene make_frozen_scene(const FrozenSceneSpec& spec);

struct FrozenCollision {
  double path_length = 0.0;  // cumulative, unit speed so also the time
  int partner = kWallId;
  Vec2 point;
  Vec2 incoming;
  Vec2 outgoing;
  double impact_parameter = 0.0;  // signed, relative to the partner centre
  double free_path = 0.0;
};

struct RayHit {
  double distance = 0.0;
  int partner = kWallId;
  Vec2 point;
  Vec2 normal;  // outward from the scatterer, or inward from the wall
};

/// Nearest contact-circle or wall intersection along a unit-direction ray.
std::optional<RayHit> first_hit(const FrozenScene& scene, Vec2 origin, Vec2 direction, bool include_wall = true);

/// Specular trajectory of the active particle; stops after max_disc_collisions
/// disc hits or max_events events (wall hits included).
std::vector<FrozenCollision> trace_frozen(const FrozenScene& scene, Vec2 start, Vec2 direction,
                                          std::size_t max_disc_collisions, std::size_t max_events);

/// EventLog view of a frozen trace (id_a is the active particle).
EventLog to_event_log(const FrozenScene& scene, const std::vector<FrozenCollision>& trace);

struct DivergenceSeries {
  std::vector<std::size_t> n;        // 1-based reference collision index
  std::vector<double> separation;    // transverse separation delta b_n
  std::vector<double> ratios;        // delta b_{n+1} / delta b_n, pre-saturation
  std::optional<double> slope;       // least-squares d ln(delta b) / dn
  std::optional<std::size_t> n_miss; // first collision with a different partner
  std::size_t fit_points = 0;
};

/// Saturation cut for slope fitting, as a fraction of a_eff.
inline constexpr double kSaturationFraction = 0.1;

/// Reference and perturbed (transverse offset delta_b0) trajectories compared
/// collision by collision.
DivergenceSeries measure_divergence(const FrozenScene& scene, double delta_b0, std::size_t n_max);

/// Smallest 1-based index at which the partner sequences differ.
std::optional<std::size_t> detect_missing_partner(const EventLog& reference, const EventLog& perturbed);

/// Mean free path between disc-disc collisions.
double measure_mean_free_path(const EventLog& log, std::size_t min_records = 100);

// ---------------------------------------------------------------------------
// Expansion from the inner circle

struct ExpansionReport {
  double t_end = 0.0;
  double enclosure_radius = 0.0;
  double mean_collisions_per_disc = 0.0;  // k-bar, disc-disc participations
  std::size_t disc_disc_collisions = 0;
  std::optional<double> measured_mean_free_path;
  double nominal_mean_free_path = 0.0;
  std::vector<double> times;
  std::vector<double> outer_fraction;  // fraction of discs beyond R/2
};

ExpansionReport run_expansion(const SystemConfig& config, double t_end, std::size_t n_samples = 50);

/// log10(delta_b0 / a) needed so that c^k delta_b0 stays below a.
double required_initial_precision(double k, double c);

// ---------------------------------------------------------------------------
// Ensembles (members are independent; reductions are keyed by member index)

double median(std::vector<double> values);

/// Ordinary least-squares slope of y against x; nullopt for fewer than two points.
std::optional<double> least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

struct DivergenceEnsemble {
  std::vector<DivergenceSeries> members;
  std::vector<double> slopes;
  std::vector<double> ratios;
  std::vector<double> n_miss;
  std::optional<double> median_slope;
  std::optional<double> median_ratio;
  std::optional<double> median_n_miss;
};

DivergenceEnsemble divergence_ensemble(const FrozenSceneSpec& base, double delta_b0, std::size_t n_max,
                                       std::size_t members);

}  // namespace hdlab
