#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hdlab/chaos_lab.hpp"
#include "hdlab/model_core.hpp"
#include "hdlab/vec2.hpp"

namespace hdlab {

struct Ray {
  Vec2 origin;
  Vec2 direction{1.0, 0.0};  // unit
};

/// Gaussian packet tracked by its central ray and two edge rays at +/- width.
struct RayPacket {
  Ray central;
  Ray edge_plus;   // on the perp(direction) side
  Ray edge_minus;
  double width = 1e-6;           // Delta
  double angular_spread = 0.0;   // Delta phi, full opening between edge rays
  double wavelength = 0.0;       // 2 pi / p0
  double central_momentum = 1.0; // p0 (hbar = 1, M = 1 so also the speed scale)
  bool quantum_diffusion = false;

  /// Edge rays offset by +/- width and tilted by +/- angular_spread / 2.
  static RayPacket make(Vec2 origin, Vec2 direction, double width, double angular_spread, double momentum,
                        bool quantum_diffusion);
};

struct WkbCheck {
  std::string constraint;
  bool satisfied = false;
  double margin = 0.0;  // lhs / rhs of the unscaled inequality; satisfied iff margin <= strictness
};

/// lambda << Delta, Delta << a, l_mfp / p0 << Delta^2, each tested at the given strictness.
std::vector<WkbCheck> validate_wkb(const RayPacket& packet, double disc_radius, double mean_free_path,
                                   double strictness = 0.1);
std::vector<WkbCheck> validate_wkb(const RayPacket& packet, const SystemConfig& config, double strictness = 0.1);
bool wkb_satisfied(const std::vector<WkbCheck>& checks);

/// Moves the ray to its intersection with the contact circle and reflects it
/// specularly; nullopt if the ray misses.
std::optional<Ray> reflect_ray_off_disc(const Ray& ray, Vec2 center, double contact_radius);

/// Classical deflection angle of a specular hit at impact parameter b.
double classical_deflection(double b, double contact_radius);

struct EntryGeometry {
  double phi0 = 0.0;  // angular location of the hit on the circle
  double dphi = 0.0;  // angular width of the packet footprint
};

/// Throws GrazingBreakdown when |b| + Delta >= a_eff.
EntryGeometry collision_entry_geometry(double b, double width, double contact_radius);

/// Threshold beyond which amplification_factor reports grazing breakdown.
inline constexpr double kGrazingFraction = 0.95;

/// 2 r0 / sqrt(a_eff^2 - b^2).
double amplification_factor(double b, double r0, double contact_radius);

/// Two parallel rays at impact parameters b and b + db reflected off one
/// contact circle; their separation a distance r0 past the reference hit, over db.
double two_ray_amplification(double b, double r0, double contact_radius, double db);

enum class HaltReason { MaxCollisions, Delocalized, PacketSplit, Grazing, Escaped };
std::string to_string(HaltReason reason);

struct SpreadEntry {
  std::size_t n = 0;
  double delta = 0.0;
  double dphi = 0.0;
  double b = 0.0;
  int disc_id = kWallId;  // kWallId when the packet escaped
  double free_path = 0.0;
};

struct SpreadLog {
  std::vector<SpreadEntry> entries;
  HaltReason halt = HaltReason::MaxCollisions;
  std::size_t collisions_completed = 0;  // reflections executed before the halt

  /// Least-squares slope of ln Delta_n against n; nullopt for fewer than two entries.
  std::optional<double> log_width_slope() const;

  /// CSV with header n,delta,dphi,b,disc_id,free_path,halt_reason.
  void write_csv(std::ostream& out) const;
};

struct PropagationOptions {
  std::size_t n_max = 50;
  bool include_wall = true;     // wall bounces are followed but not counted as collisions
  std::size_t max_wall_bounces = 1000;
  double escape_length = 0.0;   // final flight without the wall when nothing is hit; 0 means 2 R
};

/// Traces the packet through the frozen scene. Entries are recorded at disc hits only.
SpreadLog propagate_packet(const RayPacket& packet, const FrozenScene& scene, const PropagationOptions& options);
SpreadLog propagate_packet(const RayPacket& packet, const FrozenScene& scene, std::size_t n_max);

/// ceil(ln(a_eff / Delta0) / ln c); 0 once Delta0 >= a_eff.
std::size_t predict_n_crit(double width, double contact_radius, double c);

}  // namespace hdlab
