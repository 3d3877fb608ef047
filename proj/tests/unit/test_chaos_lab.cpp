#include <gtest/gtest.h>

#include <cmath>

#include "hdlab/chaos_lab.hpp"
#include "hdlab/errors.hpp"
#include "hdlab/parallel.hpp"

using namespace hdlab;

namespace {

FrozenScene scene(double contact_radius, double l, std::uint64_t seed, std::size_t n = 1600) {
  FrozenSceneSpec s;
  s.n_scatterers = n;
  s.contact_radius = contact_radius;
  s.mean_separation = l;
  s.seed = seed;
  return make_frozen_scene(s);
}

EventLog partner_log(std::initializer_list<int> partners) {
  EventLog log;
  double t = 0.0;
  for (int p : partners) log.records.push_back({t += 1.0, 99, p, 0.0, 1.0, 0.0, {1, 0}});
  return log;
}

}  // namespace

TEST(Reversal, BallisticHorizonReturnsExactly) {
  auto cfg = SystemConfig::with_derived_radius(4, 1.0, 30.0, 5);
  const ReversalReport r = run_reversal(cfg, 0.5);
  EXPECT_EQ(r.collisions_forward, 0u);
  EXPECT_LE(r.max_error, 1e-12);
}

TEST(Reversal, FewCollisionsStillEcho) {
  std::vector<double> errors, per_disc;
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto cfg = SystemConfig::with_derived_radius(10, 1.0, 10.0, member_seed(7, i));
    const ReversalReport r = run_reversal(cfg, 200.0);
    errors.push_back(r.max_error);
    per_disc.push_back(r.collisions_per_disc);
  }
  EXPECT_LE(median(per_disc), 5.0);
  EXPECT_LE(median(errors), 1e-6);
}

TEST(Reversal, UnreversedDiscPreventsRegathering) {
  auto cfg = SystemConfig::with_derived_radius(50, 1.0, 10.0, 13);
  const ReversalReport r = run_reversal(cfg, 700.0, {0});
  EXPECT_GE(r.collisions_per_disc, 10.0);
  EXPECT_GE(r.rms_error, 0.1 * cfg.enclosure_radius);
  EXPECT_EQ(r.return_errors.size(), 50u);
}

TEST(Divergence, ZeroOffsetStaysOnTrack) {
  const DivergenceSeries s = measure_divergence(scene(2.0, 10.0, 3), 0.0, 15);
  EXPECT_FALSE(s.n_miss);
  ASSERT_EQ(s.separation.size(), 15u);
  for (double d : s.separation) EXPECT_EQ(d, 0.0);
}

TEST(Divergence, SlopeIsScaleInvariant) {
  const auto a = measure_divergence(scene(2.0, 10.0, 4), 1e-12 * 2.0, 15);
  const auto b = measure_divergence(scene(8.0, 40.0, 4), 1e-12 * 8.0, 15);
  ASSERT_TRUE(a.slope);
  ASSERT_TRUE(b.slope);
  EXPECT_NEAR(*a.slope, *b.slope, 1e-6 * std::abs(*a.slope));
}

TEST(Divergence, LargeOffsetMissesFirstPartner) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = measure_divergence(scene(2.0, 10.0, seed), 4.5, 5);
    ASSERT_TRUE(s.n_miss);
    EXPECT_LE(*s.n_miss, 1u);
  }
}

TEST(Divergence, EnsembleSlopeWithinLogBand) {
  FrozenSceneSpec spec;
  spec.n_scatterers = 1600;
  spec.contact_radius = 2.0;
  spec.mean_separation = 10.0;
  spec.seed = 17;
  const auto ens = divergence_ensemble(spec, 1e-12, 20, 40);
  ASSERT_TRUE(ens.median_slope);
  EXPECT_GE(*ens.median_slope, 1.5 * std::log(10.0));
  EXPECT_LE(*ens.median_slope, 3.0 * std::log(10.0));
}

TEST(MissingPartner, IdenticalLogsHaveNone) {
  const auto log = partner_log({3, 7, kWallId, 2});
  EXPECT_FALSE(detect_missing_partner(log, log));
  EXPECT_FALSE(detect_missing_partner(EventLog{}, EventLog{}));
}

TEST(MissingPartner, FirstDifferenceIsOneBased) {
  EXPECT_EQ(detect_missing_partner(partner_log({3, 7, 2}), partner_log({3, 8, 2})), 2u);
  EXPECT_EQ(detect_missing_partner(partner_log({3}), partner_log({4})), 1u);
}

TEST(MeanFreePath, SingleFlight) {
  EventLog log;
  log.partners_frozen = true;
  log.records.push_back({5.0, 0, 1, 0.0, 5.0, 0.0, {1, 0}});
  EXPECT_DOUBLE_EQ(measure_mean_free_path(log, 1), 5.0);
  EXPECT_THROW(measure_mean_free_path(log, 100), InsufficientStatistics);
}

TEST(MeanFreePath, ScalesWithInverseDensity) {
  auto measure = [](double l) {
    const FrozenScene s = scene(1.0, l, 2, 2500);
    const auto trace = trace_frozen(s, s.start, s.direction, 400, 4000);
    return measure_mean_free_path(to_event_log(s, trace));
  };
  const double m10 = measure(10.0);
  // Doubling the density (l -> l / sqrt 2) halves the free path.
  EXPECT_NEAR(measure(10.0 / std::sqrt(2.0)) / m10, 0.5, 0.15 * 0.5);
  for (double l : {5.0, 20.0}) {
    const double expected = (l * l) / 100.0;
    EXPECT_NEAR(measure(l) / m10, expected, 0.2 * expected) << "l=" << l;
  }
}

TEST(Expansion, SingleDiscNeverCollides) {
  const auto cfg = SystemConfig::with_derived_radius(1, 1.0, 10.0, 1);
  const ExpansionReport r = run_expansion(cfg, 100.0, 10);
  EXPECT_EQ(r.disc_disc_collisions, 0u);
  EXPECT_FALSE(r.measured_mean_free_path);
}

TEST(Expansion, OuterAnnulusFillsUp) {
  const auto cfg = SystemConfig::with_derived_radius(100, 1.0, 10.0, 29);
  const ExpansionReport r = run_expansion(cfg, 10.0 * cfg.enclosure_radius, 20);
  EXPECT_EQ(r.outer_fraction.front(), 0.0);
  EXPECT_NEAR(r.outer_fraction.back(), 0.75, 0.1);
}

TEST(Precision, RequiredInitialPrecision) {
  EXPECT_EQ(required_initial_precision(100, 100), -200.0);
  EXPECT_EQ(required_initial_precision(0, 100), 0.0);
  EXPECT_EQ(required_initial_precision(1, 10), -1.0);
  for (double k : {1.0, 3.0, 17.0}) {
    EXPECT_DOUBLE_EQ(required_initial_precision(2 * k, 37.0), 2.0 * required_initial_precision(k, 37.0));
  }
  EXPECT_THROW(required_initial_precision(1, 1.0), ContractViolation);
}

TEST(Statistics, MedianAndSlope) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_THROW(median({}), InsufficientStatistics);
  EXPECT_DOUBLE_EQ(*least_squares_slope({1, 2, 3}, {2, 4, 6}), 2.0);
  EXPECT_FALSE(least_squares_slope({1}, {1}));
}

TEST(Parallel, ResultsIndependentOfWorkerCount) {
  auto run = [] {
    return parallel_map(64, [](std::size_t i) { return static_cast<double>(member_seed(11, i) % 1000); });
  };
  const auto a = run();
  setenv("LAB_THREADS", "1", 1);
  const auto b = run();
  unsetenv("LAB_THREADS");
  EXPECT_EQ(a, b);
  EXPECT_NE(member_seed(1, 0), member_seed(1, 1));
}

TEST(Parallel, LowestIndexErrorPropagates) {
  EXPECT_THROW(parallel_map(8,
                            [](std::size_t i) -> int {
                              if (i == 5) throw ContractViolation("five");
                              return 0;
                            }),
               ContractViolation);
}
