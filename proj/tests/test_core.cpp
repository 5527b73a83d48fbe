#include <gtest/gtest.h>

#include <cmath>

#include "auxbo/core.hpp"

using namespace auxbo;

namespace {

Dataset unit_square() { return Dataset({{0.0, 1.0}, {0.0, 1.0}}, 1); }

EvalRecord rec(double y, Vector x = {0.5, 0.5}) { return {std::move(x), {y}, y}; }

}  // namespace

TEST(Dataset, FirstAppendSetsBest) {
  auto ds = unit_square();
  ds.append(rec(2.0));
  EXPECT_EQ(ds.y_best(), 2.0);
  EXPECT_EQ(ds.size(), 1u);
}

TEST(Dataset, BestIsMonotone) {
  auto ds = unit_square();
  ds.append(rec(3.0));
  ds.append(rec(1.0));
  EXPECT_EQ(ds.y_best(), 3.0);
  ds.append(rec(5.0));
  EXPECT_EQ(ds.y_best(), 5.0);
}

TEST(Dataset, AppendedLeavesOriginalUntouched) {
  auto ds = unit_square();
  ds.append(rec(1.0));
  const Dataset next = ds.appended(rec(4.0));
  EXPECT_EQ(ds.size(), 1u);
  EXPECT_EQ(next.size(), 2u);
  EXPECT_EQ(next.y_best(), 4.0);
}

TEST(Dataset, PreservesInsertionOrder) {
  auto ds = unit_square();
  for (double y : {3.0, 1.0, 2.0}) ds.append(rec(y));
  EXPECT_EQ(ds[0].y, 3.0);
  EXPECT_EQ(ds[1].y, 1.0);
  EXPECT_EQ(ds[2].y, 2.0);
}

TEST(Dataset, RejectsDimensionMismatch) {
  auto ds = unit_square();
  EXPECT_THROW(ds.append(rec(1.0, {0.5})), std::invalid_argument);
  EXPECT_THROW(ds.append({{0.5, 0.5}, {1.0, 2.0}, 1.0}), std::invalid_argument);
  EXPECT_EQ(ds.size(), 0u);
}

TEST(Dataset, RejectsOutOfBounds) {
  auto ds = unit_square();
  EXPECT_THROW(ds.append(rec(1.0, {1.5, 0.5})), std::out_of_range);
  EXPECT_NO_THROW(ds.append(rec(1.0, {1.0, 0.0})));
}

TEST(Dataset, EmptyHasNoBest) { EXPECT_THROW(unit_square().y_best(), std::logic_error); }

TEST(NormalizeInputs, EndpointsAndMidpoint) {
  Dataset ds({{-5.0, 10.0}, {0.0, 15.0}}, 1);
  ds.append(rec(0.0, {-5.0, 15.0}));
  ds.append(rec(0.0, {2.5, 7.5}));
  const auto n = normalize_inputs(ds);
  EXPECT_DOUBLE_EQ(n.inputs[0][0], -1.0);
  EXPECT_DOUBLE_EQ(n.inputs[0][1], 1.0);
  EXPECT_DOUBLE_EQ(n.inputs[1][0], 0.0);
  EXPECT_DOUBLE_EQ(n.inputs[1][1], 0.0);
}

TEST(NormalizeInputs, RoundTrip) {
  const BoxScaler s({{-5.0, 10.0}, {30.0, 70.0}});
  SeedStream rng(3, "roundtrip");
  for (int k = 0; k < 100; ++k) {
    const Vector x{rng.uniform(-5, 10), rng.uniform(30, 70)};
    const Vector back = s.inverse(s.forward(x));
    EXPECT_NEAR(back[0], x[0], 1e-12);
    EXPECT_NEAR(back[1], x[1], 1e-12);
  }
}

TEST(NormalizeInputs, RejectsDegenerateBound) {
  EXPECT_THROW(BoxScaler({{1.0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(BoxScaler({{0.0, INFINITY}}), std::invalid_argument);
}

TEST(StandardizeTargets, ThreeValues) {
  const Vector v{1, 2, 3};
  const auto s = standardize_targets(v);
  EXPECT_NEAR(s.mean, 2.0, 1e-12);
  EXPECT_NEAR(s.std, std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_NEAR(s.values[0], -1.224744871391589, 1e-12);
  EXPECT_NEAR(s.values[1], 0.0, 1e-12);
  EXPECT_NEAR(s.values[2], 1.224744871391589, 1e-12);
  EXPECT_FALSE(s.clamped);
}

TEST(StandardizeTargets, ConstantClamps) {
  const Vector v{5, 5, 5};
  const auto s = standardize_targets(v);
  EXPECT_TRUE(s.clamped);
  EXPECT_EQ(s.std, 1.0);
  for (double x : s.values) EXPECT_EQ(x, 0.0);
}

TEST(StandardizeTargets, MeanZeroUnitStd) {
  SeedStream rng(9, "std");
  for (int trial = 0; trial < 20; ++trial) {
    Vector v(2 + rng.index(50));
    for (auto& x : v) x = rng.uniform(-1e3, 1e3);
    const auto s = standardize_targets(v);
    double m = 0, ss = 0;
    for (double x : s.values) m += x;
    m /= v.size();
    for (double x : s.values) ss += (x - m) * (x - m);
    EXPECT_NEAR(m, 0.0, 1e-10);
    EXPECT_NEAR(std::sqrt(ss / v.size()), 1.0, 1e-10);
  }
}

TEST(StandardizeTargets, NeedsTwoValues) {
  const Vector one{1.0};
  EXPECT_THROW(standardize_targets(one), std::invalid_argument);
}

TEST(SeedStream, SameIdSameDraws) {
  SeedStream a(42, "pool"), b(42, "pool");
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(SeedStream, DifferentIdsDiffer) {
  SeedStream a(42, "pool"), b(42, "init-design"), c(43, "pool");
  EXPECT_NE(a.uniform(), b.uniform());
  SeedStream a2(42, "pool");
  EXPECT_NE(a2.uniform(), c.uniform());
}

TEST(SeedStream, StreamsAreIndependent) {
  SeedStream a(1, "a");
  std::vector<double> ref;
  for (int i = 0; i < 10; ++i) ref.push_back(a.normal());
  SeedStream a2(1, "a"), b(1, "b");
  for (int i = 0; i < 1000; ++i) b.normal();
  for (int i = 0; i < 10; ++i) {
    b.uniform();
    EXPECT_EQ(a2.normal(), ref[i]);
  }
}

TEST(SeedStream, ChildIsKeyedBySlashPath) {
  SeedStream root(5, "trial:0");
  SeedStream c1 = root.child("pool"), c2(5, "trial:0/pool");
  EXPECT_EQ(c1.id(), "trial:0/pool");
  EXPECT_EQ(c1.uniform(), c2.uniform());
}

TEST(SeedStream, UniformInRespectsBounds) {
  SeedStream rng(2, "box");
  const Bounds b{{-5, 10}, {0, 15}};
  for (int i = 0; i < 1000; ++i) EXPECT_TRUE(within(b, rng.uniform_in(b)));
}
