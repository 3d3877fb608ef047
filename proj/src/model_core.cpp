#include "hdlab/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "hdlab/errors.hpp"

namespace hdlab {

double units::de_broglie(double mass, double speed) {
  if (!(mass > 0.0) || !(std::abs(speed) > 0.0)) {
    throw ContractViolation("de_broglie: mass and speed must be nonzero");
  }
  return 2.0 * pi * hbar / (mass * std::abs(speed));
}

SystemConfig SystemConfig::with_derived_radius(std::size_t n, double a, double l, std::uint64_t seed) {
  SystemConfig c;
  c.n_discs = n;
  c.disc_radius = a;
  c.mean_separation = l;
  c.enclosure_radius = std::sqrt(static_cast<double>(n)) * l;
  c.seed = seed;
  return c;
}

double SystemConfig::packing_fraction() const {
  return static_cast<double>(n_discs) * disc_radius * disc_radius / (enclosure_radius * enclosure_radius);
}

void SystemConfig::validate() const {
  if (n_discs < 1) throw ConfigError("n_discs must be >= 1");
  if (!(disc_radius > 0.0)) throw ConfigError("disc_radius must be positive");
  if (!(mean_separation > 0.0)) throw ConfigError("mean_separation must be positive");
  if (!(enclosure_radius > disc_radius)) throw ConfigError("enclosure_radius must exceed disc_radius");
  if (!(disc_mass > 0.0)) throw ConfigError("disc_mass must be positive");
  if (!(speed > 0.0)) throw ConfigError("speed must be positive");
  if (!(disc_radius < mean_separation / 2.0)) throw ConfigError("disc_radius must be below mean_separation/2");
  const double nominal = std::sqrt(static_cast<double>(n_discs)) * mean_separation;
  if (enclosure_radius < nominal / radius_tolerance_factor ||
      enclosure_radius > nominal * radius_tolerance_factor) {
    std::ostringstream os;
    os << "enclosure_radius " << enclosure_radius << " is not within a factor " << radius_tolerance_factor
       << " of sqrt(N) l = " << nominal;
    throw ConfigError(os.str());
  }
  if (!(packing_fraction() < 0.5)) throw ConfigError("packing fraction must be below 0.5");
  if (region.kind == Region::Kind::InnerCircle && !(region.fraction > 0.0 && region.fraction <= 1.0)) {
    throw ConfigError("region fraction must lie in (0, 1]");
  }
}

double SystemState::kinetic_energy(double mass) const {
  double e = 0.0;
  for (const auto& d : discs) e += norm2(d.velocity);
  return 0.5 * mass * e;
}

Vec2 SystemState::momentum(double mass) const {
  Vec2 p;
  for (const auto& d : discs) p += d.velocity;
  return mass * p;
}

void check_state(const SystemState& state, double enclosure_radius, double disc_radius, double tolerance) {
  const double eps = tolerance * disc_radius;
  const double rmax = enclosure_radius - disc_radius + eps;
  const double dmin = 2.0 * disc_radius - eps;
  for (std::size_t i = 0; i < state.discs.size(); ++i) {
    const Vec2 ri = state.discs[i].position;
    if (!(norm(ri) <= rmax)) {
      throw ContractViolation("disc " + std::to_string(state.discs[i].id) + " lies outside the enclosure");
    }
    for (std::size_t j = i + 1; j < state.discs.size(); ++j) {
      if (norm(state.discs[j].position - ri) < dmin) {
        throw ContractViolation("discs " + std::to_string(state.discs[i].id) + " and " +
                                std::to_string(state.discs[j].id) + " overlap");
      }
    }
  }
}

namespace {

// Uniform cell grid for O(1) overlap queries during placement.
class PlacementGrid {
 public:
  PlacementGrid(double extent, double cell) : cell_(cell), extent_(extent) {
    dim_ = static_cast<long>(std::ceil(2.0 * extent / cell)) + 1;
  }

  bool fits(Vec2 p, double min_dist) const {
    const long cx = index(p.x), cy = index(p.y);
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = cells_.find(key(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (Vec2 q : it->second) {
          if (norm2(q - p) < min_dist * min_dist) return false;
        }
      }
    }
    return true;
  }

  void insert(Vec2 p) { cells_[key(index(p.x), index(p.y))].push_back(p); }

 private:
  long index(double v) const { return static_cast<long>(std::floor((v + extent_) / cell_)); }
  long key(long ix, long iy) const { return ix * (dim_ + 2) + iy; }

  double cell_;
  double extent_;
  long dim_;
  std::unordered_map<long, std::vector<Vec2>> cells_;
};

constexpr std::size_t kMaxAttemptsPerDisc = 1'000'000;

std::vector<Vec2> place_poisson(const SystemConfig& c, double rho_max, std::mt19937_64& rng) {
  const double a = c.disc_radius;
  std::uniform_real_distribution<double> u(-rho_max, rho_max);
  PlacementGrid grid(rho_max + a, 2.0 * a);
  std::vector<Vec2> out;
  out.reserve(c.n_discs);
  for (std::size_t i = 0; i < c.n_discs; ++i) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < kMaxAttemptsPerDisc; ++attempt) {
      const Vec2 p{u(rng), u(rng)};
      if (norm2(p) > rho_max * rho_max) continue;
      if (!grid.fits(p, 2.0 * a)) continue;
      grid.insert(p);
      out.push_back(p);
      placed = true;
      break;
    }
    if (!placed) throw PlacementError("rejection placement exhausted its attempt budget", out.size());
  }
  return out;
}

std::vector<Vec2> place_lattice(const SystemConfig& c, double rho_max, std::mt19937_64& rng) {
  const double a = c.disc_radius;
  const double l = c.mean_separation;
  const double jitter = 0.5 * (l - 2.0 * a);
  const double reach = rho_max - jitter * std::sqrt(2.0);
  std::vector<Vec2> sites;
  if (reach >= 0.0) {
    const long span = static_cast<long>(std::floor(reach / l));
    for (long ix = -span; ix <= span; ++ix) {
      for (long iy = -span; iy <= span; ++iy) {
        const Vec2 p{ix * l, iy * l};
        if (norm(p) <= reach) sites.push_back(p);
      }
    }
  }
  if (sites.size() < c.n_discs) {
    throw PlacementError("jittered lattice has too few sites inside the region", sites.size());
  }
  std::shuffle(sites.begin(), sites.end(), rng);
  sites.resize(c.n_discs);
  std::uniform_real_distribution<double> u(-jitter, jitter);
  for (auto& p : sites) p += Vec2{u(rng), u(rng)};
  return sites;
}

}  // namespace

SystemState sample_initial_configuration(const SystemConfig& config, const Region& region) {
  config.validate();
  const double a = config.disc_radius;
  const double region_radius =
      region.kind == Region::Kind::Full ? config.enclosure_radius : region.fraction * config.enclosure_radius;
  const double rho_max = region_radius - a;
  if (!(rho_max > 0.0)) throw ConfigError("region is smaller than one disc");
  const double region_packing =
      static_cast<double>(config.n_discs) * a * a / (region_radius * region_radius);
  if (!(region_packing < 0.5)) {
    throw PlacementError("requested packing is infeasible in the region", 0);
  }

  std::mt19937_64 rng(config.seed);
  std::vector<Vec2> positions = config.placement == Placement::PoissonRejection
                                    ? place_poisson(config, rho_max, rng)
                                    : place_lattice(config, rho_max, rng);

  SystemState state;
  state.discs.reserve(config.n_discs);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * units::pi);
  std::normal_distribution<double> gauss(0.0, config.speed / std::sqrt(2.0));
  for (std::size_t i = 0; i < positions.size(); ++i) {
    Vec2 v = config.speeds == SpeedDistribution::Fixed ? config.speed * from_angle(angle(rng))
                                                       : Vec2{gauss(rng), gauss(rng)};
    state.discs.push_back({static_cast<int>(i), positions[i], v});
  }
  return state;
}

double mean_free_path_nominal(double mean_separation, double disc_radius) {
  if (!(mean_separation > 0.0) || !(disc_radius > 0.0)) {
    throw ContractViolation("mean_free_path_nominal: lengths must be positive");
  }
  return mean_separation * mean_separation / disc_radius;
}

double mean_free_path_nominal(const SystemConfig& config) {
  return mean_free_path_nominal(config.mean_separation, config.disc_radius);
}

// ---------------------------------------------------------------------------

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + trim(raw) + "'", line_no);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (value.empty()) throw ConfigError("empty value for key '" + key + "'", line_no);
    if (kv.entries_.count(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
    kv.entries_[key] = {value, line_no};
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::size_t KeyValueFile::line_of(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.second;
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second.first;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& s = it->second.first;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' is not a number: " + s, it->second.second);
  }
  if (used != s.size() || !std::isfinite(v)) {
    throw ConfigError("'" + key + "' is not a finite number: " + s, it->second.second);
  }
  return v;
}

std::uint64_t KeyValueFile::get_uint(const std::string& key, std::uint64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& s = it->second.first;
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' is not a non-negative integer: " + s, it->second.second);
  }
  if (used != s.size()) throw ConfigError("'" + key + "' is not a non-negative integer: " + s, it->second.second);
  return v;
}

std::vector<double> KeyValueFile::get_doubles(const std::string& key, std::vector<double> fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  std::string item;
  std::istringstream in(it->second.first);
  while (std::getline(in, item, ',')) {
    KeyValueFile one;
    one.entries_[key] = {trim(item), it->second.second};
    out.push_back(one.get_double(key, 0.0));
  }
  return out;
}

std::vector<std::string> KeyValueFile::unknown_keys(const std::vector<std::string>& known) const {
  std::vector<std::pair<std::size_t, std::string>> found;
  for (const auto& [k, v] : entries_) {
    if (std::find(known.begin(), known.end(), k) == known.end()) found.emplace_back(v.second, k);
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& f : found) out.push_back(f.second);
  return out;
}

const std::vector<std::string>& system_config_keys() {
  static const std::vector<std::string> keys{"n_discs", "disc_radius", "mean_separation", "enclosure_radius",
                                             "seed",    "placement",   "region",          "speed",
                                             "speed_distribution"};
  return keys;
}

SystemConfig config_from_keys(const KeyValueFile& kv) {
  SystemConfig c;
  c.n_discs = kv.get_uint("n_discs", 1);
  c.disc_radius = kv.get_double("disc_radius", 1.0);
  c.mean_separation = kv.get_double("mean_separation", 10.0);
  c.enclosure_radius =
      kv.get_double("enclosure_radius", std::sqrt(static_cast<double>(c.n_discs)) * c.mean_separation);
  c.seed = kv.get_uint("seed", 1);
  c.speed = kv.get_double("speed", 1.0);

  const std::string placement = kv.get_string("placement", "poisson-rejection");
  if (placement == "poisson-rejection") {
    c.placement = Placement::PoissonRejection;
  } else if (placement == "jittered-lattice") {
    c.placement = Placement::JitteredLattice;
  } else {
    throw ConfigError("unknown placement '" + placement + "'", kv.line_of("placement"));
  }

  const std::string speeds = kv.get_string("speed_distribution", "fixed");
  if (speeds == "fixed") {
    c.speeds = SpeedDistribution::Fixed;
  } else if (speeds == "maxwellian") {
    c.speeds = SpeedDistribution::Maxwellian;
  } else {
    throw ConfigError("unknown speed_distribution '" + speeds + "'", kv.line_of("speed_distribution"));
  }

  // region = full | inner-circle(<fraction>)
  const std::string region = kv.get_string("region", "full");
  if (region == "full") {
    c.region = Region::full();
  } else if (region.rfind("inner-circle(", 0) == 0 && region.back() == ')') {
    const std::string inner = region.substr(13, region.size() - 14);
    KeyValueFile one;
    one.entries_["region"] = {inner, kv.line_of("region")};
    c.region = Region::inner_circle(one.get_double("region", 1.0));
  } else {
    throw ConfigError("unknown region '" + region + "'", kv.line_of("region"));
  }

  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return c;
}

}  // namespace hdlab
