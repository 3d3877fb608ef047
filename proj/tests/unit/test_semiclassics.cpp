#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hdlab/errors.hpp"
#include "hdlab/semiclassics.hpp"

using namespace hdlab;

namespace {

constexpr double kPi = units::pi;

double angle_between(Vec2 a, Vec2 b) { return std::acos(std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0)); }

FrozenScene empty_scene(double radius) {
  FrozenScene s;
  s.contact_radius = 1.0;
  s.enclosure_radius = radius;
  s.start = {0, 0};
  s.direction = {1, 0};
  return s;
}

FrozenScene tracer_scene(std::uint64_t seed) {
  FrozenSceneSpec spec;
  spec.n_scatterers = 1600;
  spec.contact_radius = 1.0;
  spec.mean_separation = 10.0;
  spec.seed = seed;
  return make_frozen_scene(spec);
}

}  // namespace

TEST(Wkb, BoundaryCasesViolate) {
  const auto at_radius = RayPacket::make({0, 0}, {1, 0}, 1.0, 0.0, 1e9, false);
  EXPECT_FALSE(validate_wkb(at_radius, 1.0, 100.0)[1].satisfied);
  const auto at_wavelength = RayPacket::make({0, 0}, {1, 0}, 1e-3, 0.0, 2.0 * kPi / 1e-3, false);
  EXPECT_DOUBLE_EQ(at_wavelength.wavelength, 1e-3);
  EXPECT_FALSE(validate_wkb(at_wavelength, 1.0, 100.0)[0].satisfied);
}

TEST(Wkb, DiffusionMarginArithmetic) {
  const auto packet = RayPacket::make({0, 0}, {1, 0}, 1e-2, 0.0, 2.0 * kPi * 1e4, false);
  const auto checks = validate_wkb(packet, 1.0, 100.0);
  ASSERT_EQ(checks.size(), 3u);
  EXPECT_EQ(checks[2].constraint, "diffusion_below_width_squared");
  EXPECT_NEAR(checks[2].margin, 100.0 / (2.0 * kPi * 1e4) / 1e-4, 1e-12);
  EXPECT_NEAR(checks[2].margin, 15.9, 0.05);
  EXPECT_FALSE(checks[2].satisfied);
  const auto fast = RayPacket::make({0, 0}, {1, 0}, 1e-2, 0.0, 1e7, false);
  EXPECT_TRUE(validate_wkb(fast, 1.0, 100.0)[2].satisfied);
  EXPECT_TRUE(validate_wkb(fast, SystemConfig::with_derived_radius(4, 1.0, 10.0, 1))[2].satisfied);
}

TEST(Reflection, NormalIncidenceReverses) {
  const auto r = reflect_ray_off_disc({{-5, 0}, {1, 0}}, {0, 0}, 1.0);
  ASSERT_TRUE(r);
  EXPECT_NEAR(r->origin.x, -1.0, 1e-15);
  EXPECT_NEAR(r->direction.x, -1.0, 1e-15);
  EXPECT_NEAR(r->direction.y, 0.0, 1e-15);
}

TEST(Reflection, ThirtyDegreeImpactDeflects) {
  const double b = std::sin(kPi / 6.0);
  const auto r = reflect_ray_off_disc({{-5, b}, {1, 0}}, {0, 0}, 1.0);
  ASSERT_TRUE(r);
  EXPECT_NEAR(angle_between({1, 0}, r->direction), 2.0 * kPi / 3.0, 1e-12);
  EXPECT_NEAR(classical_deflection(b, 1.0), 2.0 * kPi / 3.0, 1e-12);
}

TEST(Reflection, SpecularLawAndUnitSpeed) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.999, 0.999);
  for (int i = 0; i < 500; ++i) {
    const double b = 2.0 * u(rng);
    const auto r = reflect_ray_off_disc({{-10, b}, {1, 0}}, {0, 0}, 2.0);
    ASSERT_TRUE(r);
    const Vec2 n = r->origin / 2.0;
    EXPECT_NEAR(norm(r->direction), 1.0, 1e-12);
    EXPECT_NEAR(angle_between({-1, 0}, n), angle_between(r->direction, n), 1e-9);
  }
  EXPECT_FALSE(reflect_ray_off_disc({{-10, 2.5}, {1, 0}}, {0, 0}, 2.0));
  EXPECT_FALSE(reflect_ray_off_disc({{10, 0}, {1, 0}}, {0, 0}, 2.0));
}

TEST(EntryGeometry, CentralAndHalfImpact) {
  EXPECT_EQ(collision_entry_geometry(0.0, 1e-3, 1.0).phi0, 0.0);
  const auto g = collision_entry_geometry(0.5, 0.01, 1.0);
  EXPECT_NEAR(g.phi0, kPi / 6.0, 1e-15);
  EXPECT_NEAR(g.dphi, 1e-2, 1e-15);
  EXPECT_THROW(collision_entry_geometry(0.999, 0.01, 1.0), GrazingBreakdown);
}

TEST(Amplification, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(amplification_factor(0.0, 50.0, 1.0), 100.0);
  EXPECT_NEAR(amplification_factor(0.6, 50.0, 1.0), 125.0, 1e-12);
  EXPECT_THROW(amplification_factor(0.0, 0.0, 1.0), ContractViolation);
  EXPECT_THROW(amplification_factor(0.97, 10.0, 1.0), GrazingBreakdown);
}

TEST(Amplification, MatchesTwoRayOracle) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ub(-0.9, 0.9);
  std::uniform_real_distribution<double> ur(20.0, 200.0);
  for (int i = 0; i < 100; ++i) {
    const double b = ub(rng), r0 = ur(rng);
    const double rays = two_ray_amplification(b, r0, 1.0, 1e-6);
    EXPECT_NEAR(amplification_factor(b, r0, 1.0), rays, 0.05 * rays) << "b=" << b << " r0=" << r0;
  }
}

TEST(Propagation, EmptySceneWithoutDiffusionKeepsWidth) {
  const auto packet = RayPacket::make({0, 0}, {1, 0}, 1e-3, 0.0, 1e6, false);
  PropagationOptions opt;
  opt.include_wall = false;
  const SpreadLog log = propagate_packet(packet, empty_scene(50.0), opt);
  EXPECT_EQ(log.halt, HaltReason::Escaped);
  EXPECT_EQ(log.collisions_completed, 0u);
  ASSERT_EQ(log.entries.size(), 1u);
  EXPECT_NEAR(log.entries[0].delta, 1e-3, 1e-15);
  EXPECT_NEAR(log.entries[0].dphi, 0.0, 1e-15);
}

TEST(Propagation, EmptySceneDiffusionOnly) {
  const double p0 = 1e6, w0 = 1e-3;
  const auto packet = RayPacket::make({0, 0}, {1, 0}, w0, 0.0, p0, true);
  PropagationOptions opt;
  opt.include_wall = false;
  const SpreadLog log = propagate_packet(packet, empty_scene(50.0), opt);
  ASSERT_EQ(log.entries.size(), 1u);
  EXPECT_NEAR(log.entries[0].delta, std::sqrt(w0 * w0 + 100.0 / p0), 1e-12);
}

TEST(Propagation, AngularSpreadPreservedInFreeFlight) {
  const auto packet = RayPacket::make({0, 0}, {1, 0}, 1e-4, 1e-3, 1e8, false);
  PropagationOptions opt;
  opt.include_wall = false;
  const SpreadLog log = propagate_packet(packet, empty_scene(50.0), opt);
  ASSERT_EQ(log.entries.size(), 1u);
  EXPECT_NEAR(log.entries[0].dphi, 1e-3, 1e-9);
  EXPECT_GT(log.entries[0].delta, 1e-4);
}

TEST(Propagation, WidthGrowsAcrossCollisions) {
  const auto s = tracer_scene(4);
  const auto packet = RayPacket::make(s.start, s.direction, 1e-9, 0.0, 1e16, false);
  const SpreadLog log = propagate_packet(packet, s, 50);
  ASSERT_GE(log.entries.size(), 2u);
  for (std::size_t i = 1; i < log.entries.size(); ++i) {
    if (log.entries[i - 1].free_path > 0.5) EXPECT_GT(log.entries[i].delta, log.entries[i - 1].delta);
  }
  for (std::size_t i = 0; i < log.entries.size(); ++i) EXPECT_EQ(log.entries[i].n, i + 1);
}

TEST(Propagation, HaltNearPredictedCollision) {
  const std::size_t predicted = predict_n_crit(1e-6, 1.0, 100.0);
  std::size_t hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = tracer_scene(seed);
    const auto packet = RayPacket::make(s.start, s.direction, 1e-6, 0.0, 1e16, true);
    const SpreadLog log = propagate_packet(packet, s, 50);
    const double diff = std::abs(static_cast<double>(log.collisions_completed) - static_cast<double>(predicted));
    if (log.halt != HaltReason::MaxCollisions && log.halt != HaltReason::Escaped && diff <= 1.0) ++hits;
  }
  EXPECT_GE(hits, 8u);
}

TEST(Propagation, CsvCarriesHaltReasonOnLastRow) {
  const auto s = tracer_scene(2);
  const SpreadLog log = propagate_packet(RayPacket::make(s.start, s.direction, 1e-6, 0.0, 1e16, true), s, 50);
  std::ostringstream os;
  log.write_csv(os);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("n,delta,dphi,b,disc_id,free_path,halt_reason\n", 0), 0u);
  EXPECT_NE(text.find(to_string(log.halt) + "\n"), std::string::npos);
}

TEST(NCrit, Prediction) {
  EXPECT_EQ(predict_n_crit(1.0, 1.0, 100.0), 0u);
  EXPECT_EQ(predict_n_crit(1e-6, 1.0, 100.0), 3u);
  EXPECT_EQ(predict_n_crit(1e-4, 1.0, 100.0), 2u);
  EXPECT_EQ(predict_n_crit(1e-8, 1.0, 100.0), 4u);
  EXPECT_THROW(predict_n_crit(1e-6, 1.0, 1.0), ContractViolation);
}
