#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hdlab/vec2.hpp"

namespace hdlab {

// Units: hbar = 1, disc mass M = 1 and disc radius a = 1 unless configured otherwise.
namespace units {
inline constexpr double hbar = 1.0;
inline constexpr double pi = 3.14159265358979323846;

/// de Broglie wavelength 2*pi*hbar / (M |v|).
double de_broglie(double mass, double speed);
}  // namespace units

enum class Placement { PoissonRejection, JitteredLattice };
enum class SpeedDistribution { Fixed, Maxwellian };

/// Where initial disc centres may be placed.
struct Region {
  enum class Kind { Full, InnerCircle };
  Kind kind = Kind::Full;
  double fraction = 1.0;  // radius fraction of R for InnerCircle

  static Region full() { return {}; }
  static Region inner_circle(double f) { return {Kind::InnerCircle, f}; }
};

struct SystemConfig {
  std::size_t n_discs = 1;
  double disc_radius = 1.0;
  double mean_separation = 10.0;
  double enclosure_radius = 10.0;
  double disc_mass = 1.0;
  double speed = 1.0;
  std::uint64_t seed = 1;
  Placement placement = Placement::PoissonRejection;
  SpeedDistribution speeds = SpeedDistribution::Fixed;
  Region region;
  // R must lie within [sqrt(N) l / f, f sqrt(N) l].
  double radius_tolerance_factor = 2.0;

  /// Config with R = sqrt(N) l.
  static SystemConfig with_derived_radius(std::size_t n, double a, double l, std::uint64_t seed);

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  double packing_fraction() const;
};

struct DiscState {
  int id = 0;
  Vec2 position;
  Vec2 velocity;
};

struct SystemState {
  double time = 0.0;
  std::vector<DiscState> discs;

  double kinetic_energy(double mass = 1.0) const;
  Vec2 momentum(double mass = 1.0) const;
};

/// Penetration slack used by state validation: 1e-9 a.
inline constexpr double kStateTolerance = 1e-9;

/// Throws ContractViolation if discs overlap or leave the enclosure beyond kStateTolerance * a.
void check_state(const SystemState& state, double enclosure_radius, double disc_radius,
                 double tolerance = kStateTolerance);

/// Deterministic initial positions and velocities for the given config.
SystemState sample_initial_configuration(const SystemConfig& config, const Region& region);
inline SystemState sample_initial_configuration(const SystemConfig& config) {
  return sample_initial_configuration(config, config.region);
}

/// Nominal 2D mean free path l^2 / a (order-of-magnitude).
double mean_free_path_nominal(const SystemConfig& config);
double mean_free_path_nominal(double mean_separation, double disc_radius);

/// Parsed flat key=value file. Remembers the line each key came from.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text);
  static KeyValueFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::size_t line_of(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;

  void set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }

  /// Keys not in `known`, in file order of appearance.
  std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

  const std::map<std::string, std::pair<std::string, std::size_t>>& entries() const { return entries_; }

 private:
  friend struct SystemConfig config_from_keys(const KeyValueFile& kv);
  std::map<std::string, std::pair<std::string, std::size_t>> entries_;
};

/// Keys read by config_from_keys.
const std::vector<std::string>& system_config_keys();

/// Builds and validates a SystemConfig. enclosure_radius defaults to sqrt(N) l.
SystemConfig config_from_keys(const KeyValueFile& kv);

}  // namespace hdlab
