#include "hdlab/semiclassics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "hdlab/errors.hpp"

namespace hdlab {

namespace {

Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Signed offset of the ray's line from point p, positive on the perp(direction) side.
double line_offset(const Ray& ray, Vec2 p) { return cross(ray.direction, ray.origin - p); }

double half_separation(const Ray& plus, const Ray& minus, Vec2 p) {
  return 0.5 * std::abs(line_offset(plus, p) - line_offset(minus, p));
}

double opening_angle(const Ray& plus, const Ray& minus) {
  return std::abs(std::atan2(cross(minus.direction, plus.direction), dot(minus.direction, plus.direction)));
}

// Pushes both edge rays outward so the width at p becomes sqrt(width^2 + extra2).
void diffuse(Ray& plus, Ray& minus, Vec2 p, double extra2) {
  const double wp = line_offset(plus, p);
  const double wm = line_offset(minus, p);
  const double width = 0.5 * std::abs(wp - wm);
  const double shift = std::sqrt(width * width + extra2) - width;
  const double side = wp >= wm ? 1.0 : -1.0;
  plus.origin += side * shift * perp(plus.direction);
  minus.origin -= side * shift * perp(minus.direction);
}

Ray reflect_off_wall(const Ray& ray, const RayHit& hit) {
  return {hit.point, normalized(ray.direction - 2.0 * dot(ray.direction, hit.normal) * hit.normal)};
}

}  // namespace

RayPacket RayPacket::make(Vec2 origin, Vec2 direction, double width, double angular_spread, double momentum,
                          bool quantum_diffusion) {
  if (!(width > 0.0)) throw ContractViolation("RayPacket: width must be positive");
  if (!(angular_spread >= 0.0)) throw ContractViolation("RayPacket: angular spread must be non-negative");
  if (!(momentum > 0.0)) throw ContractViolation("RayPacket: momentum must be positive");
  const Vec2 d = normalized(direction);
  RayPacket p;
  p.central = {origin, d};
  p.edge_plus = {origin + width * perp(d), rotate(d, 0.5 * angular_spread)};
  p.edge_minus = {origin - width * perp(d), rotate(d, -0.5 * angular_spread)};
  p.width = width;
  p.angular_spread = angular_spread;
  p.central_momentum = momentum;
  p.wavelength = 2.0 * units::pi / momentum;
  p.quantum_diffusion = quantum_diffusion;
  return p;
}

std::vector<WkbCheck> validate_wkb(const RayPacket& packet, double disc_radius, double mean_free_path,
                                   double strictness) {
  const double d = packet.width;
  const double m1 = packet.wavelength / d;
  const double m2 = d / disc_radius;
  const double m3 = (mean_free_path / packet.central_momentum) / (d * d);
  return {
      {"wavelength_below_width", m1 <= strictness, m1},
      {"width_below_radius", m2 <= strictness, m2},
      {"diffusion_below_width_squared", m3 <= strictness, m3},
  };
}

std::vector<WkbCheck> validate_wkb(const RayPacket& packet, const SystemConfig& config, double strictness) {
  return validate_wkb(packet, config.disc_radius, mean_free_path_nominal(config), strictness);
}

bool wkb_satisfied(const std::vector<WkbCheck>& checks) {
  for (const auto& c : checks) {
    if (!c.satisfied) return false;
  }
  return true;
}

std::optional<Ray> reflect_ray_off_disc(const Ray& ray, Vec2 center, double contact_radius) {
  const Vec2 d = normalized(ray.direction);
  const Vec2 oc = center - ray.origin;
  const double along = dot(oc, d);
  const double a2 = contact_radius * contact_radius;
  const double miss2 = norm2(oc) - along * along;
  if (along <= 0.0 || miss2 > a2) return std::nullopt;
  const double t = (norm2(oc) - a2) / (along + std::sqrt(a2 - miss2));
  const Vec2 p = ray.origin + t * d;
  const Vec2 n = (p - center) / contact_radius;
  return Ray{p, normalized(d - 2.0 * dot(d, n) * n)};
}

double classical_deflection(double b, double contact_radius) {
  return units::pi - 2.0 * std::asin(b / contact_radius);
}

EntryGeometry collision_entry_geometry(double b, double width, double contact_radius) {
  if (std::abs(b) + width >= contact_radius) {
    throw GrazingBreakdown("packet straddles the contact circle (|b| + width >= a_eff)");
  }
  return {std::asin(b / contact_radius), width / contact_radius};
}

double amplification_factor(double b, double r0, double contact_radius) {
  if (!(r0 > 0.0)) throw ContractViolation("amplification_factor: r0 must be positive");
  if (std::abs(b) > kGrazingFraction * contact_radius) {
    throw GrazingBreakdown("amplification_factor: |b| beyond the grazing cut");
  }
  return 2.0 * r0 / std::sqrt(contact_radius * contact_radius - b * b);
}

double two_ray_amplification(double b, double r0, double contact_radius, double db) {
  if (!(db > 0.0)) throw ContractViolation("two_ray_amplification: db must be positive");
  const Vec2 center{0.0, 0.0};
  const double x0 = -2.0 * contact_radius;
  const auto ref = reflect_ray_off_disc({{x0, b}, {1.0, 0.0}}, center, contact_radius);
  const auto pert = reflect_ray_off_disc({{x0, b + db}, {1.0, 0.0}}, center, contact_radius);
  if (!ref || !pert) throw GrazingBreakdown("two_ray_amplification: a ray misses the disc");
  const Vec2 q = ref->origin + r0 * ref->direction;
  return std::abs(line_offset(*pert, q)) / db;
}

std::string to_string(HaltReason reason) {
  switch (reason) {
    case HaltReason::MaxCollisions: return "max_collisions";
    case HaltReason::Delocalized: return "delocalized";
    case HaltReason::PacketSplit: return "packet_split";
    case HaltReason::Grazing: return "grazing";
    case HaltReason::Escaped: return "escaped";
  }
  return "unknown";
}

std::optional<double> SpreadLog::log_width_slope() const {
  std::vector<double> xs, ys;
  for (const auto& e : entries) {
    if (e.delta > 0.0) {
      xs.push_back(static_cast<double>(e.n));
      ys.push_back(std::log(e.delta));
    }
  }
  return least_squares_slope(xs, ys);
}

void SpreadLog::write_csv(std::ostream& out) const {
  out << "n,delta,dphi,b,disc_id,free_path,halt_reason\n";
  char buf[256];
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const std::string reason = i + 1 == entries.size() ? to_string(halt) : "";
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%d,%.17g,", e.n, e.delta, e.dphi, e.b, e.disc_id,
                  e.free_path);
    out << buf << reason << '\n';
  }
}

SpreadLog propagate_packet(const RayPacket& packet, const FrozenScene& scene, const PropagationOptions& options) {
  const double a = scene.contact_radius;
  const double escape = options.escape_length > 0.0 ? options.escape_length : 2.0 * scene.enclosure_radius;
  Ray c = packet.central, plus = packet.edge_plus, minus = packet.edge_minus;
  c.direction = normalized(c.direction);
  plus.direction = normalized(plus.direction);
  minus.direction = normalized(minus.direction);

  SpreadLog log;
  std::size_t wall_bounces = 0;
  double since_disc = 0.0;
  for (std::size_t n = 1;;) {
    if (n > options.n_max) {
      log.halt = HaltReason::MaxCollisions;
      break;
    }
    const auto hc = first_hit(scene, c.origin, c.direction, options.include_wall);
    const double flight = hc ? hc->distance : escape;
    const Vec2 pc = hc ? hc->point : c.origin + escape * c.direction;
    if (packet.quantum_diffusion) diffuse(plus, minus, pc, flight / packet.central_momentum);
    since_disc += flight;

    SpreadEntry e;
    e.n = n;
    e.delta = half_separation(plus, minus, pc);
    e.dphi = opening_angle(plus, minus);
    e.free_path = since_disc;
    if (!hc) {
      log.entries.push_back(e);
      log.halt = HaltReason::Escaped;
      break;
    }

    const auto hp = first_hit(scene, plus.origin, plus.direction, options.include_wall);
    const auto hm = first_hit(scene, minus.origin, minus.direction, options.include_wall);
    const bool together = hp && hm && hp->partner == hc->partner && hm->partner == hc->partner;
    if (hc->partner == kWallId) {
      if (!together) {
        log.entries.push_back(e);
        log.halt = HaltReason::PacketSplit;
        break;
      }
      if (++wall_bounces > options.max_wall_bounces) {
        log.halt = HaltReason::MaxCollisions;
        break;
      }
      c = reflect_off_wall(c, *hc);
      plus = reflect_off_wall(plus, *hp);
      minus = reflect_off_wall(minus, *hm);
      continue;
    }

    const Vec2 center = scene.scatterers[hc->partner];
    e.b = cross(c.direction, center - c.origin);
    e.disc_id = hc->partner;
    log.entries.push_back(e);
    if (!together) {
      log.halt = HaltReason::PacketSplit;
      break;
    }
    if (e.delta >= a) {
      log.halt = HaltReason::Delocalized;
      break;
    }
    if (std::abs(e.b) + e.delta >= a) {
      log.halt = HaltReason::Grazing;
      break;
    }
    c = reflect_ray_off_disc(c, center, a).value();
    plus = reflect_ray_off_disc(plus, center, a).value();
    minus = reflect_ray_off_disc(minus, center, a).value();
    since_disc = 0.0;
    log.collisions_completed = n;
    ++n;
  }
  return log;
}

SpreadLog propagate_packet(const RayPacket& packet, const FrozenScene& scene, std::size_t n_max) {
  PropagationOptions options;
  options.n_max = n_max;
  return propagate_packet(packet, scene, options);
}

std::size_t predict_n_crit(double width, double contact_radius, double c) {
  if (!(c > 1.0)) throw ContractViolation("predict_n_crit: amplification must exceed 1");
  if (!(width > 0.0)) throw ContractViolation("predict_n_crit: width must be positive");
  if (width >= contact_radius) return 0;
  return static_cast<std::size_t>(std::ceil(std::log(contact_radius / width) / std::log(c)));
}

}  // namespace hdlab
