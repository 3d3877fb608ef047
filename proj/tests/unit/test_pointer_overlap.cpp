#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hdlab/errors.hpp"
#include "hdlab/pointer_overlap.hpp"

using namespace hdlab;

TEST(GaussianOverlap, Values) {
  EXPECT_EQ(gaussian_overlap(0.0, 1.0), 1.0);
  EXPECT_LT(gaussian_overlap(1e3, 1.0), 1e-300);
  EXPECT_NEAR(gaussian_overlap(1.0, 1.0), 0.88249690258459540286, 1e-15);
  EXPECT_THROW(gaussian_overlap(1.0, 0.0), ContractViolation);
}

TEST(GaussianOverlap, Monotonicity) {
  double prev = 1.0;
  for (double d = 0.1; d < 10.0; d += 0.1) {
    const double g = gaussian_overlap(d, 1.0);
    EXPECT_LT(g, prev);
    prev = g;
  }
  EXPECT_LT(gaussian_overlap(1.0, 0.5), gaussian_overlap(1.0, 1.0));
  EXPECT_NEAR(gaussian_overlap(displacement_for_overlap(0.99, 2.0), 2.0), 0.99, 1e-15);
}

TEST(PointerOverlap, UniformHundredDiscs) {
  PointerPair p;
  p.displacements.assign(100, displacement_for_overlap(0.99, 1.0));
  const OverlapResult r = pointer_overlap(p);
  EXPECT_NEAR(r.approx, 0.36787944117144232, 1e-12);
  EXPECT_NEAR(r.exact, std::exp(-1.0), 0.01 * std::exp(-1.0));
}

TEST(PointerOverlap, IdenticalStates) {
  PointerPair p;
  p.displacements.assign(10, 0.0);
  const OverlapResult r = pointer_overlap(p);
  EXPECT_EQ(r.exact, 1.0);
  EXPECT_EQ(r.approx, 1.0);
}

TEST(PointerOverlap, RandomDrawsAgreeToFirstOrder) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> un(1, 100);
  std::uniform_real_distribution<double> ud(0.0, 0.01);
  for (int i = 0; i < 1000; ++i) {
    PointerPair p;
    double sum_sq = 0.0;
    for (int k = un(rng); k > 0; --k) {
      const double d = ud(rng);
      sum_sq += d * d;
      p.displacements.push_back(displacement_for_overlap(1.0 - d, 1.0));
    }
    const OverlapResult r = pointer_overlap(p);
    EXPECT_LE(r.exact, 1.0);
    EXPECT_LE(r.relative_difference, 0.01);
    EXPECT_LE(std::abs(r.exact - r.approx), sum_sq);
  }
}

TEST(InterferencePrecision, Values) {
  EXPECT_EQ(interference_precision(1, 0.3), 0.3);
  EXPECT_NEAR(interference_precision(100, 1e-3), 1e-5, 1e-20);
  EXPECT_EQ(interference_precision(100, 8e-3), 8.0 * interference_precision(100, 1e-3));
  EXPECT_EQ(interference_precision_delta(0.01, 1e-3), interference_precision(100, 1e-3));
  EXPECT_THROW(interference_precision(0, 1.0), ContractViolation);
}

TEST(InterferencePrecision, SuperBallScaling) {
  for (std::size_t k : {2u, 5u, 10u, 50u}) {
    const double lambda = 1e-3;
    EXPECT_DOUBLE_EQ(interference_precision(100 / k, lambda / static_cast<double>(k)),
                     interference_precision(100, lambda));
  }
}

TEST(InterferenceVerdict, Cases) {
  const auto perfect = interference_verdict({0.0, 0.0, 0.0}, 3, 0.3);
  EXPECT_TRUE(perfect.interferes);
  EXPECT_EQ(perfect.margin, kMarginSentinel);
  const auto boundary = interference_verdict({0.25, -0.125}, 2, 0.5);
  EXPECT_TRUE(boundary.interferes);
  const auto off = interference_verdict({1e-6, 30.0}, 2, 1e-3);
  EXPECT_FALSE(off.interferes);
  EXPECT_LT(off.margin, 1e-4);
}
