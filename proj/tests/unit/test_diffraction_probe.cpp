#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hdlab/diffraction_probe.hpp"
#include "hdlab/errors.hpp"

using namespace hdlab;

TEST(StructureFactor, SingleScattererIsOne) {
  const auto q = probe_q_grid(20.0, 2.0, 16);
  const auto c = structure_factor({{3.0, -1.0}}, q);
  for (double s : c.s_mean) EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(StructureFactor, ForwardLimitIsN) {
  const auto pts = uniform_snapshot(50, 10.0, 3);
  EXPECT_NEAR(structure_factor(pts, {1e-9}).s_mean[0], 50.0, 1e-9);
  EXPECT_DOUBLE_EQ(structure_factor(pts, {0.0}).s_mean[0], 50.0);
}

TEST(StructureFactor, TwoPointsAlongQ) {
  const double d = 1.7;
  for (double q : {0.1, 0.9, 2.5}) {
    const auto c = structure_factor({{0.0, 0.0}, {d, 0.0}}, {q}, 1);
    EXPECT_NEAR(c.s_mean[0], 1.0 + std::cos(q * d), 1e-12);
  }
}

TEST(StructureFactor, TranslationAndRelabelingInvariant) {
  auto pts = uniform_snapshot(40, 10.0, 8);
  const auto q = probe_q_grid(30.0, 2.0, 12);
  const auto base = structure_factor(pts, q);
  auto shifted = pts;
  for (auto& p : shifted) p += Vec2{123.4, -56.7};
  auto shuffled = pts;
  std::reverse(shuffled.begin(), shuffled.end());
  const auto a = structure_factor(shifted, q);
  const auto b = structure_factor(shuffled, q);
  for (std::size_t i = 0; i < q.size(); ++i) {
    EXPECT_NEAR(a.s_mean[i], base.s_mean[i], 1e-10);
    EXPECT_NEAR(b.s_mean[i], base.s_mean[i], 1e-10);
    EXPECT_GE(base.s_mean[i], 0.0);
  }
  EXPECT_THROW(structure_factor({}, q), ContractViolation);
}

TEST(QGrid, SpansProbeWindow) {
  const auto q = probe_q_grid(44.7, 2.236);
  ASSERT_EQ(q.size(), kDefaultQPoints);
  EXPECT_DOUBLE_EQ(q.front(), 2.0 * 3.14159265358979323846 / 44.7);
  EXPECT_DOUBLE_EQ(q.back(), 2.0 * 3.14159265358979323846 / 2.236);
  for (std::size_t i = 1; i < q.size(); ++i) EXPECT_GT(q[i], q[i - 1]);
}

TEST(SmearedReference, SingleDiscAndDeterminism) {
  const auto q = probe_q_grid(20.0, 2.0, 8);
  const auto one = smeared_reference(1, 20.0, q, 100, 4);
  for (std::size_t i = 0; i < q.size(); ++i) {
    EXPECT_EQ(one.s_mean[i], 1.0);
    EXPECT_EQ(one.s_sigma[i], 0.0);
  }
  const auto a = smeared_reference(30, 20.0, q, 100, 4);
  const auto b = smeared_reference(30, 20.0, q, 100, 4);
  EXPECT_EQ(a.s_mean, b.s_mean);
  EXPECT_EQ(a.s_sigma, b.s_sigma);
  EXPECT_THROW(smeared_reference(30, 20.0, q, 1, 4), ContractViolation);
}

TEST(SmearedReference, MeanApproachesOneAtLargeQ) {
  const auto q = probe_q_grid(20.0, 2.0, 8);
  const auto r = smeared_reference(100, 20.0, q, 200, 6);
  EXPECT_NEAR(r.s_mean.back(), 1.0, 3.0 * r.s_sigma.back() / std::sqrt(200.0) + 0.05);
}

TEST(Classify, IdenticalCurvesAreIndistinguishable) {
  const auto q = probe_q_grid(20.0, 2.0, 8);
  const auto r = smeared_reference(30, 20.0, q, 100, 4);
  StructureFactorCurve same = r;
  const SnapshotVerdict v = classify_snapshot(same, r);
  EXPECT_FALSE(v.distinguishable);
  EXPECT_EQ(v.max_z, 0.0);
  StructureFactorCurve other = r;
  other.q.pop_back();
  EXPECT_THROW(classify_snapshot(other, r), ContractViolation);
}

TEST(Classify, LatticeIsDistinguishable) {
  std::vector<Vec2> lattice;
  for (int i = -8; i <= 8; ++i) {
    for (int j = -8; j <= 8; ++j) {
      if (i * i + j * j <= 64) lattice.push_back({2.0 * i, 2.0 * j});
    }
  }
  const auto q = probe_q_grid(18.0, 2.0, 32);
  const auto r = smeared_reference(lattice.size(), 17.0, q, 100, 2);
  EXPECT_TRUE(classify_snapshot(structure_factor(lattice, q), r).distinguishable);
}

TEST(StructureFactor, CsvHeader) {
  std::ostringstream os;
  structure_factor({{0, 0}}, {1.0}).write_csv(os);
  EXPECT_EQ(os.str(), "q,S_mean,S_sigma\n1,1,0\n");
}
