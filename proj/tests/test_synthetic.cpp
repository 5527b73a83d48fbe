#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "auxbo/tasks/synthetic.hpp"

using namespace auxbo;
using namespace auxbo::synthetic;

namespace {

// Independent textbook forms used as oracles.
double branin_ref(double x1, double x2) {
  const double pi = std::numbers::pi;
  const double t = x2 - 5.1 / (4 * pi * pi) * x1 * x1 + 5 / pi * x1 - 6;
  return t * t + 10 * (1 - 1 / (8 * pi)) * std::cos(x1) + 10;
}

double hartmann6_ref(const double* x) {
  static const double A[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                 {0.05, 10, 17, 0.1, 8, 14},
                                 {3, 3.5, 1.7, 10, 17, 8},
                                 {17, 8, 0.05, 10, 0.1, 14}};
  static const double P[4][6] = {{1312, 1696, 5569, 124, 8283, 5886},
                                 {2329, 4135, 8307, 3736, 1004, 9991},
                                 {2348, 1451, 3522, 2883, 3047, 6650},
                                 {4047, 8828, 8732, 5743, 1091, 381}};
  static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
  double outer = 0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0;
    for (int j = 0; j < 6; ++j) inner += A[i][j] * std::pow(x[j] - 1e-4 * P[i][j], 2);
    outer += alpha[i] * std::exp(-inner);
  }
  return -outer;
}

}  // namespace

TEST(Branin, KnownMinimizers) {
  const double pi = std::numbers::pi;
  for (auto [a, b] : {std::pair{-pi, 12.275}, {pi, 2.275}, {9.42478, 2.475}}) {
    const Vector x{a, b};
    EXPECT_NEAR(branin(x), 0.397887, 1e-5);
  }
}

TEST(Branin, GridLowerBound) {
  // 2000x2000 grid over the domain; nothing below the known minimum.
  double lo = INFINITY;
  for (int i = 0; i < 2000; ++i)
    for (int j = 0; j < 2000; ++j) {
      const Vector x{-5.0 + 15.0 * i / 1999.0, 15.0 * j / 1999.0};
      const double v = branin(x);
      lo = std::min(lo, v);
      ASSERT_GE(v, 0.397887 - 1e-6);
    }
  EXPECT_LT(lo, 0.3979 + 1e-3);
}

TEST(Branin, MatchesReference) {
  SeedStream rng(4, "branin");
  for (int k = 0; k < 200; ++k) {
    const Vector x{rng.uniform(-5, 10), rng.uniform(0, 15)};
    EXPECT_NEAR(branin(x), branin_ref(x[0], x[1]), 1e-10 * std::max(1.0, branin_ref(x[0], x[1])));
  }
}

TEST(Branin, OutOfDomain) {
  const Vector a{-5.1, 1.0}, b{0.0, 15.5}, c{1.0};
  EXPECT_THROW(branin(a), std::domain_error);
  EXPECT_THROW(branin(b), std::domain_error);
  EXPECT_ANY_THROW(branin(c));
}

TEST(Hartmann6, CanonicalOptimum) {
  EXPECT_NEAR(hartmann6(kHartmannArgmin), -3.32237, 1e-4);
}

TEST(Hartmann6, ZerosMatchSecondImplementation) {
  const Vector z(6, 0.0);
  EXPECT_NEAR(hartmann6(z), hartmann6_ref(z.data()), 1e-14);
}

TEST(Hartmann6, RandomPointsMatchAndBound) {
  SeedStream rng(5, "hartmann");
  for (int k = 0; k < 20000; ++k) {
    Vector x(6);
    for (auto& v : x) v = rng.uniform();
    const double f = hartmann6(x);
    ASSERT_NEAR(f, hartmann6_ref(x.data()), 1e-12);
    ASSERT_GE(f, -3.32237 - 1e-4);
  }
}

TEST(Hartmann6, LocalRefinementFindsNothingBelowOptimum) {
  // Multi-start coordinate descent from random points.
  SeedStream rng(6, "hartmann-ms");
  double best = 0;
  for (int s = 0; s < 200; ++s) {
    Vector x(6);
    for (auto& v : x) v = rng.uniform();
    double f = hartmann6(x), step = 0.1;
    while (step > 1e-7) {
      bool improved = false;
      for (int d = 0; d < 6; ++d)
        for (double dir : {-1.0, 1.0}) {
          Vector y = x;
          y[d] = std::clamp(y[d] + dir * step, 0.0, 1.0);
          const double fy = hartmann6(y);
          if (fy < f) f = fy, x = y, improved = true;
        }
      if (!improved) step /= 2;
    }
    best = std::min(best, f);
  }
  EXPECT_GE(best, -3.32237 - 1e-4);
  EXPECT_NEAR(best, -3.32237, 1e-3);
}

TEST(Hartmann6, OutOfDomain) {
  Vector x(6, 0.5);
  x[3] = 1.01;
  EXPECT_THROW(hartmann6(x), std::domain_error);
}

TEST(SyntheticTask, NegatesAndPipesThroughIdentity) {
  SyntheticTask t(SyntheticTask::Kind::branin);
  const Vector x{std::numbers::pi, 2.275};
  const auto r = t.label(x);
  ASSERT_EQ(r.z.size(), 1u);
  EXPECT_EQ(r.y, r.z[0]);
  EXPECT_NEAR(r.y, -0.397887, 1e-5);
  EXPECT_TRUE(t.identity_h());
  EXPECT_EQ(t.x_dim(), 2u);
  EXPECT_EQ(SyntheticTask(SyntheticTask::Kind::hartmann6).x_dim(), 6u);
}
