#include "hdlab/chaos_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hdlab/errors.hpp"
#include "hdlab/parallel.hpp"

namespace hdlab {

ReversalReport run_reversal(const SystemConfig& config, double t_rev, const std::set<int>& exclude) {
  if (!(t_rev > 0.0)) throw ContractViolation("run_reversal: t_rev must be positive");
  const SystemState initial = sample_initial_configuration(config);
  const auto geometry = EnclosureGeometry::of(config);

  AdvanceResult forward;
  AdvanceResult backward;
  try {
    forward = advance(initial, geometry, t_rev);
    SystemState turned = forward.state;
    for (auto& d : turned.discs) {
      if (!exclude.count(d.id)) d.velocity = -d.velocity;
    }
    backward = advance(turned, geometry, 2.0 * t_rev);
  } catch (const EngineAbort& e) {
    throw EngineAbort(std::string("run_reversal (seed ") + std::to_string(config.seed) + "): " + e.what());
  }

  ReversalReport report;
  report.t_rev = t_rev;
  report.collisions_forward = forward.log.disc_disc_count();
  report.collisions_per_disc = 2.0 * static_cast<double>(report.collisions_forward) /
                               static_cast<double>(initial.discs.size());
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < initial.discs.size(); ++i) {
    const double e = norm(backward.state.discs[i].position - initial.discs[i].position);
    report.return_errors.push_back(e);
    report.max_error = std::max(report.max_error, e);
    sum_sq += e * e;
  }
  report.rms_error = std::sqrt(sum_sq / static_cast<double>(initial.discs.size()));
  return report;
}

// ---------------------------------------------------------------------------

FrozenScene make_frozen_scene(const FrozenSceneSpec& spec) {
  if (spec.n_scatterers < 1) throw ContractViolation("make_frozen_scene: need at least one scatterer");
  // Scatterers are non-overlapping discs of radius a = a_eff / 2.
  SystemConfig placement = SystemConfig::with_derived_radius(spec.n_scatterers, 0.5 * spec.contact_radius,
                                                             spec.mean_separation, spec.seed);
  const SystemState discs = sample_initial_configuration(placement);

  FrozenScene scene;
  scene.contact_radius = spec.contact_radius;
  scene.enclosure_radius = placement.enclosure_radius;
  scene.mean_separation = spec.mean_separation;
  scene.scatterers.reserve(discs.discs.size());
  for (const auto& d : discs.discs) scene.scatterers.push_back(d.position);

  std::mt19937_64 rng(member_seed(spec.seed, 0x5CA77E7ULL));
  const double reach = spec.start_fraction * scene.enclosure_radius;
  std::uniform_real_distribution<double> u(-reach, reach);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * units::pi);
  for (std::size_t attempt = 0; attempt < 1'000'000; ++attempt) {
    const Vec2 p{u(rng), u(rng)};
    if (norm(p) > reach) continue;
    const bool clear = std::all_of(scene.scatterers.begin(), scene.scatterers.end(), [&](Vec2 c) {
      return norm(p - c) > scene.contact_radius * (1.0 + 1e-9);
    });
    if (!clear) continue;
    scene.start = p;
    scene.direction = from_angle(angle(rng));
    return scene;
  }
  throw PlacementError("no free start point for the active particle", 0);
}

std::optional<RayHit> first_hit(const FrozenScene& scene, Vec2 origin, Vec2 direction, bool include_wall) {
  std::optional<RayHit> best;
  const double a = scene.contact_radius;
  for (std::size_t k = 0; k < scene.scatterers.size(); ++k) {
    const Vec2 oc = scene.scatterers[k] - origin;
    const double along = dot(oc, direction);
    if (along <= 0.0) continue;
    const double oc2 = norm2(oc);
    const double miss2 = oc2 - along * along;
    if (miss2 >= a * a) continue;
    const double t = (oc2 - a * a) / (along + std::sqrt(a * a - miss2));
    if (t < 0.0) continue;
    if (!best || t < best->distance) {
      const Vec2 p = origin + t * direction;
      best = RayHit{t, static_cast<int>(k), p, (p - scene.scatterers[k]) / a};
    }
  }
  if (include_wall) {
    const double r = scene.enclosure_radius;
    const double od = dot(origin, direction);
    const double c = norm2(origin) - r * r;
    const double root = std::sqrt(std::max(0.0, od * od - c));
    const double t = od < 0.0 ? (-od + root) : std::max(0.0, -c / (od + root));
    if (!best || t < best->distance) {
      const Vec2 p = origin + t * direction;
      best = RayHit{t, kWallId, p, -normalized(p)};
    }
  }
  return best;
}

std::vector<FrozenCollision> trace_frozen(const FrozenScene& scene, Vec2 start, Vec2 direction,
                                          std::size_t max_disc_collisions, std::size_t max_events) {
  std::vector<FrozenCollision> out;
  Vec2 pos = start;
  Vec2 dir = normalized(direction);
  double travelled = 0.0;
  double since_disc = 0.0;
  std::size_t disc_hits = 0;
  while (disc_hits < max_disc_collisions && out.size() < max_events) {
    const auto hit = first_hit(scene, pos, dir);
    if (!hit) break;
    FrozenCollision c;
    travelled += hit->distance;
    since_disc += hit->distance;
    c.path_length = travelled;
    c.partner = hit->partner;
    c.point = hit->point;
    c.incoming = dir;
    c.outgoing = normalized(dir - 2.0 * dot(dir, hit->normal) * hit->normal);
    c.free_path = since_disc;
    if (hit->partner != kWallId) {
      c.impact_parameter = cross(dir, scene.scatterers[hit->partner] - pos);
      since_disc = 0.0;
      ++disc_hits;
    }
    out.push_back(c);
    pos = c.point;
    dir = c.outgoing;
  }
  return out;
}

EventLog to_event_log(const FrozenScene& scene, const std::vector<FrozenCollision>& trace) {
  EventLog log;
  log.partners_frozen = true;
  log.collision_counts.assign(1, trace.size());
  for (const auto& c : trace) {
    CollisionRecord r;
    r.time = c.path_length;
    r.id_a = scene.active_id();
    r.id_b = c.partner;
    r.impact_parameter = c.impact_parameter;
    r.free_path = c.free_path;
    r.normal = c.partner == kWallId ? normalized(c.point) : (scene.scatterers[c.partner] - c.point) / scene.contact_radius;
    log.records.push_back(r);
  }
  return log;
}

namespace {

std::size_t disc_count(const std::vector<FrozenCollision>& trace) {
  return static_cast<std::size_t>(
      std::count_if(trace.begin(), trace.end(), [](const auto& c) { return c.partner != kWallId; }));
}


}  // namespace

DivergenceSeries measure_divergence(const FrozenScene& scene, double delta_b0, std::size_t n_max) {
  if (delta_b0 < 0.0) throw ContractViolation("measure_divergence: delta_b0 must be non-negative");
  const std::size_t max_events = 4 * n_max + 16;
  const auto ref = trace_frozen(scene, scene.start, scene.direction, n_max, max_events);
  if (disc_count(ref) < n_max) {
    throw ContractViolation("measure_divergence: reference trajectory has fewer than n_max collisions");
  }
  const Vec2 start_p = scene.start + delta_b0 * perp(scene.direction);
  const auto pert = trace_frozen(scene, start_p, scene.direction, n_max, max_events);

  DivergenceSeries series;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    if (k >= pert.size()) break;
    if (ref[k].partner != pert[k].partner) {
      series.n_miss = k + 1;
      break;
    }
    // Perturbed incoming line, evaluated at the reference collision time.
    const Vec2 origin = k == 0 ? start_p : pert[k - 1].point;
    const double s0 = k == 0 ? 0.0 : pert[k - 1].path_length;
    const Vec2 p = origin + (ref[k].path_length - s0) * pert[k].incoming;
    const Vec2 ref_origin = k == 0 ? scene.start : ref[k - 1].point;
    const double ref_s0 = k == 0 ? 0.0 : ref[k - 1].path_length;
    const Vec2 q = ref_origin + (ref[k].path_length - ref_s0) * ref[k].incoming;
    series.n.push_back(k + 1);
    series.separation.push_back(std::abs(cross(p - q, ref[k].incoming)));
  }

  const double cut = kSaturationFraction * scene.contact_radius;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < series.separation.size(); ++i) {
    const double s = series.separation[i];
    if (!(s > 0.0) || s >= cut) break;
    xs.push_back(static_cast<double>(series.n[i]));
    ys.push_back(std::log(s));
    if (i > 0) series.ratios.push_back(s / series.separation[i - 1]);
  }
  series.fit_points = xs.size();
  const bool early_miss = series.n_miss && *series.n_miss < 3;
  if (!early_miss) series.slope = least_squares_slope(xs, ys);
  return series;
}

std::optional<std::size_t> detect_missing_partner(const EventLog& reference, const EventLog& perturbed) {
  const std::size_t n = std::min(reference.records.size(), perturbed.records.size());
  for (std::size_t k = 0; k < n; ++k) {
    const auto& r = reference.records[k];
    const auto& p = perturbed.records[k];
    if (std::minmax(r.id_a, r.id_b) != std::minmax(p.id_a, p.id_b)) return k + 1;
  }
  return std::nullopt;
}

double measure_mean_free_path(const EventLog& log, std::size_t min_records) {
  double total = 0.0;
  std::size_t samples = 0;
  std::size_t records = 0;
  for (const auto& r : log.records) {
    if (r.is_wall()) continue;
    ++records;
    total += r.free_path;
    ++samples;
    if (!log.partners_frozen) {
      total += r.free_path_b;
      ++samples;
    }
  }
  if (records < std::max<std::size_t>(min_records, 1)) {
    throw InsufficientStatistics("measure_mean_free_path: " + std::to_string(records) +
                                 " disc-disc records, need " + std::to_string(min_records));
  }
  return total / static_cast<double>(samples);
}

// ---------------------------------------------------------------------------

ExpansionReport run_expansion(const SystemConfig& config, double t_end, std::size_t n_samples) {
  const SystemState initial = sample_initial_configuration(config, Region::inner_circle(0.5));
  const double half = 0.5 * config.enclosure_radius;
  for (const auto& d : initial.discs) {
    if (norm(d.position) > half) throw ContractViolation("run_expansion: disc starts outside R/2");
  }
  EventEngine engine(initial, EnclosureGeometry::of(config));

  ExpansionReport report;
  report.t_end = t_end;
  report.enclosure_radius = config.enclosure_radius;
  report.nominal_mean_free_path = mean_free_path_nominal(config);
  const double n = static_cast<double>(initial.discs.size());
  auto outer = [&] {
    std::size_t count = 0;
    for (const auto& d : engine.state().discs) count += norm(d.position) > half ? 1 : 0;
    return static_cast<double>(count) / n;
  };
  report.times.push_back(0.0);
  report.outer_fraction.push_back(outer());
  const std::size_t steps = std::max<std::size_t>(n_samples, 1);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = t_end * static_cast<double>(k) / static_cast<double>(steps);
    try {
      engine.advance_to(t);
    } catch (const EngineAbort& e) {
      throw EngineAbort(std::string("run_expansion: ") + e.what());
    }
    report.times.push_back(t);
    report.outer_fraction.push_back(outer());
  }
  report.disc_disc_collisions = engine.log().disc_disc_count();
  report.mean_collisions_per_disc = 2.0 * static_cast<double>(report.disc_disc_collisions) / n;
  if (report.disc_disc_collisions > 0) report.measured_mean_free_path = measure_mean_free_path(engine.log(), 1);
  return report;
}

double required_initial_precision(double k, double c) {
  if (k < 0.0) throw ContractViolation("required_initial_precision: k must be non-negative");
  if (!(c > 1.0)) throw ContractViolation("required_initial_precision: c must exceed 1");
  return -k * std::log10(c);
}

// ---------------------------------------------------------------------------

std::optional<double> least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InsufficientStatistics("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

DivergenceEnsemble divergence_ensemble(const FrozenSceneSpec& base, double delta_b0, std::size_t n_max,
                                       std::size_t members) {
  DivergenceEnsemble out;
  out.members = parallel_map(members, [&](std::size_t i) {
    FrozenSceneSpec spec = base;
    spec.seed = member_seed(base.seed, i);
    return measure_divergence(make_frozen_scene(spec), delta_b0, n_max);
  });
  for (const auto& m : out.members) {
    if (m.slope) out.slopes.push_back(*m.slope);
    out.ratios.insert(out.ratios.end(), m.ratios.begin(), m.ratios.end());
    if (m.n_miss) out.n_miss.push_back(static_cast<double>(*m.n_miss));
  }
  if (!out.slopes.empty()) out.median_slope = median(out.slopes);
  if (!out.ratios.empty()) out.median_ratio = median(out.ratios);
  if (!out.n_miss.empty()) out.median_n_miss = median(out.n_miss);
  return out;
}

}  // namespace hdlab
