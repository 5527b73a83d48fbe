#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <set>

#include "auxbo/bo.hpp"

using namespace auxbo;

namespace {

RunConfig quick(const std::string& task, const std::string& surrogate, std::size_t n_max) {
  RunConfig c;
  c.task = task;
  c.surrogate = surrogate;
  c.n_max = n_max;
  c.seed = 3;
  c.pool_size = 200;
  c.n_mc = 10;
  c.timing = false;
  c.model.arch = "mlp:16x2";
  c.model.ensemble_size = 3;
  c.model.epochs_scratch = 60;
  c.model.epochs_cont = 10;
  return c;
}

void expect_valid_trace(const RunTrace& t, const RunConfig& c, const Task& task) {
  ASSERT_EQ(t.initial.size(), c.n_start);
  EXPECT_EQ(t.size(), c.n_max);
  double best = -INFINITY;
  for (std::size_t n = 1; n <= t.size(); ++n) {
    const auto& r = t.at_n(n);
    EXPECT_EQ(r.N, n);
    best = std::max(best, r.y);
    EXPECT_EQ(r.y_best, best);
    EXPECT_TRUE(within(task.bounds(), r.x));
    EXPECT_EQ(task.label(r.x).y, r.y);
  }
}

/// Counts calls to g on a wrapped task.
class CountingTask final : public Task {
 public:
  explicit CountingTask(const Task& inner) : inner_(inner) {}
  std::string name() const override { return inner_.name(); }
  const Bounds& bounds() const override { return inner_.bounds(); }
  std::size_t z_dim() const override { return inner_.z_dim(); }
  Vector g(std::span<const double> x) const override {
    ++calls;
    return inner_.g(x);
  }
  double h(std::span<const double> z) const override { return inner_.h(z); }
  bool identity_h() const override { return inner_.identity_h(); }
  mutable std::atomic<int> calls{0};

 private:
  const Task& inner_;
};

/// Identity objective on the unit square.
class UnitSquareTask final : public Task {
 public:
  std::string name() const override { return "unit-square"; }
  const Bounds& bounds() const override { return bounds_; }
  std::size_t z_dim() const override { return 1; }
  Vector g(std::span<const double> x) const override { return {x[0] + x[1]}; }
  double h(std::span<const double> z) const override { return z[0]; }

 private:
  Bounds bounds_{{0, 1}, {0, 1}};
};

}  // namespace

TEST(RunBo, NMaxEqualsNStartIsInitialDesignOnly) {
  auto c = quick("branin", "ensemble", 5);
  const auto task = make_task(c.task);
  const auto t = run_trial(*task, c, 0);
  EXPECT_EQ(t.rows.size(), 0u);
  double best = -INFINITY;
  for (const auto& r : t.initial) best = std::max(best, r.y);
  EXPECT_EQ(t.y_best(), best);
}

TEST(RunBo, SameSeedSameTrace) {
  const auto c = quick("branin", "ensemble", 9);
  const auto task = make_task(c.task);
  const auto a = run_trial(*task, c, 0), b = run_trial(*task, c, 0);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t n = 1; n <= a.size(); ++n) {
    EXPECT_EQ(a.at_n(n).x, b.at_n(n).x);
    EXPECT_EQ(a.at_n(n).y, b.at_n(n).y);
  }
  expect_valid_trace(a, c, *task);
}

TEST(RunBo, TrialsIndependentOfScheduling) {
  auto c = quick("branin", "ensemble", 8);
  c.trials = 3;
  const auto task = make_task(c.task);
  const auto serial = run_bo(*task, c);
  c.jobs = 3;
  const auto parallel = run_bo(*task, c);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t n = 1; n <= serial[t].size(); ++n) EXPECT_EQ(serial[t].at_n(n).x, parallel[t].at_n(n).x);
  EXPECT_NE(serial[0].at_n(1).x, serial[1].at_n(1).x);
}

TEST(RunBo, ColdStartProducesValidTrace) {
  auto c = quick("branin", "ensemble", 8);
  c.warm_start = false;
  const auto task = make_task(c.task);
  expect_valid_trace(run_trial(*task, c, 0), c, *task);
}

TEST(RunBo, EverySurrogateRuns) {
  const auto task = make_task("branin");
  for (const char* s : {"ensemble", "ensemble-aux", "bbb", "bbb-aux", "bbb-anneal", "neural-linear", "gp", "random"}) {
    const auto c = quick("branin", s, 8);
    const auto t = run_trial(*task, c, 0);
    EXPECT_FALSE(t.aborted) << s << ": " << t.abort_reason;
    expect_valid_trace(t, c, *task);
    if (std::string(s) != "random") {
      for (const auto& r : t.rows) EXPECT_TRUE(std::isfinite(r.acq_value)) << s;
    }
  }
}

TEST(RunBo, AuxOnNanoparticle) {
  auto c = quick("np-narrowband", "ensemble-aux", 7);
  const auto task = make_task(c.task);
  const auto t = run_trial(*task, c, 0);
  expect_valid_trace(t, c, *task);
}

TEST(RunBo, OneLabelPerIteration) {
  const auto inner = make_task("branin");
  CountingTask task(*inner);
  auto c = quick("branin", "ensemble", 10);
  run_trial(task, c, 0);
  EXPECT_EQ(task.calls.load(), 10);
}

TEST(RunBo, DivergenceRetriesThenAborts) {
  auto c = quick("branin", "ensemble", 10);
  c.model.base_lr = 1e300;
  const auto task = make_task(c.task);
  const auto t = run_trial(*task, c, 0);
  EXPECT_TRUE(t.aborted);
  EXPECT_NE(t.abort_reason.find("diverged twice"), std::string::npos) << t.abort_reason;
  EXPECT_EQ(t.initial.size(), 5u);
  EXPECT_TRUE(t.rows.empty());
}

TEST(RunBo, TimingRecorded) {
  auto c = quick("branin", "ensemble", 7);
  c.timing = true;
  const auto task = make_task(c.task);
  const auto t = run_trial(*task, c, 0);
  for (const auto& r : t.rows) {
    EXPECT_GT(r.train_s, 0.0);
    EXPECT_GT(r.acq_s, 0.0);
  }
}

TEST(RunBo, DiscretePoolNeverRepeats) {
  SeedStream rng(8, "pool");
  CandidatePool pool;
  for (int r = 0; r < 12; ++r) {
    Vector x(photonic::kParams);
    for (auto& v : x) v = rng.uniform(0, 1);
    pool.x.push_back(x);
    Vector z(photonic::kDosSize);
    for (auto& v : z) v = rng.uniform(0, 2);
    pool.z.push_back(z);
  }
  photonic::PhotonicTask task(photonic::PhotonicTask::Distribution::pc_b, pool);
  for (const char* s : {"random", "ensemble"}) {
    auto c = quick("pc-b", s, 20);
    const auto t = run_trial(task, c, 0);
    EXPECT_TRUE(t.aborted);
    EXPECT_EQ(t.abort_reason, "pool exhausted");
    EXPECT_EQ(t.size(), 12u);
    std::set<Vector> seen;
    for (std::size_t n = 1; n <= t.size(); ++n) EXPECT_TRUE(seen.insert(t.at_n(n).x).second);
  }
}

TEST(RunBo, SyntheticPhotonicConvAux) {
  auto c = quick("pc-a", "ensemble-aux", 7);
  c.task_options.dos_synthetic = true;
  c.model.arch = "conv-ti";
  c.model.ensemble_size = 2;
  c.model.epochs_scratch = 3;
  c.model.epochs_cont = 1;
  c.augment = true;
  c.pool_size = 20;
  const auto task = make_task(c.task, c.task_options);
  const auto t = run_trial(*task, c, 0);
  EXPECT_EQ(t.label_source, "synthetic-fixture");
  expect_valid_trace(t, c, *task);
}

TEST(RandomBaseline, UniformOnUnitSquare) {
  UnitSquareTask task;
  auto c = quick("branin", "random", 10005);
  const auto t = random_baseline(task, c, 0);
  ASSERT_EQ(t.rows.size(), 10000u);
  std::vector<int> cells(16, 0);
  for (const auto& r : t.rows) ++cells[static_cast<int>(r.x[0] * 4) * 4 + static_cast<int>(r.x[1] * 4)];
  const double n = 10000, expected = n / 16.0, sd = std::sqrt(n * (1.0 / 16) * (15.0 / 16));
  for (int k : cells) EXPECT_LT(std::abs(k - expected), 5 * sd);
}

TEST(RandomBaseline, UsesSameLoggingPath) {
  auto c = quick("hartmann6", "ensemble", 40);
  const auto task = make_task(c.task);
  const auto t = random_baseline(*task, c, 0);
  EXPECT_EQ(t.surrogate, "random");
  expect_valid_trace(t, c, *task);
  for (const auto& r : t.rows) EXPECT_TRUE(std::isnan(r.acq_value));
}

TEST(CheckConfig, Rejections) {
  auto ok = quick("branin", "ensemble", 10);
  EXPECT_NO_THROW(check_config(ok));
  auto bad = ok;
  bad.task = "rosenbrock";
  EXPECT_THROW(check_config(bad), ConfigError);
  bad = ok;
  bad.surrogate = "gp-aux";
  EXPECT_THROW(check_config(bad), ConfigError);
  bad = ok;
  bad.acq = AcqKind::ei;
  EXPECT_THROW(check_config(bad), ConfigError);
  bad = ok;
  bad.acq = AcqKind::ei_mc_aux;
  EXPECT_THROW(check_config(bad), ConfigError);
  bad = ok;
  bad.surrogate = "ensemble-aux";
  bad.acq = AcqKind::ei_mc;
  EXPECT_THROW(check_config(bad), ConfigError);
  bad = ok;
  bad.n_start = 1;
  EXPECT_THROW(check_config(bad), ConfigError);
  bad = ok;
  bad.n_max = 4;
  EXPECT_THROW(check_config(bad), ConfigError);
  bad = ok;
  bad.model.arch = "conv-ti";
  EXPECT_THROW(check_config(bad), ConfigError);
  bad = ok;
  bad.augment = true;
  EXPECT_THROW(check_config(bad), ConfigError);
  bad = ok;
  bad.model.arch = "mlp:12";
  EXPECT_THROW(check_config(bad), ConfigError);
  EXPECT_THROW(make_task("pc-a"), ConfigError);
  auto gp = quick("branin", "gp", 10);
  EXPECT_EQ(gp.acquisition(), AcqKind::ei);
}

TEST(CheckpointSummary, Examples) {
  auto make = [](std::vector<double> ys) {
    RunTrace t;
    double best = -INFINITY;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      best = std::max(best, ys[i]);
      t.rows.push_back({i + 1, {}, ys[i], best});
    }
    return t;
  };
  const std::vector<RunTrace> three{make({1}), make({2}), make({3})};
  const auto s = checkpoint_summary(three, {1});
  EXPECT_DOUBLE_EQ(s[0].mean, 2.0);
  EXPECT_NEAR(s[0].se, 0.5773502691896258, 1e-12);
  EXPECT_FALSE(s[0].single_trial);

  const auto one = checkpoint_summary({make({1, 5})}, {2});
  EXPECT_EQ(one[0].se, 0.0);
  EXPECT_TRUE(one[0].single_trial);

  std::vector<double> ys(1000);
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = std::sin(0.1 * i);
  const auto long_trace = make(ys);
  const auto at = checkpoint_summary({long_trace}, {250, 2000});
  EXPECT_EQ(at[0].mean, long_trace.at_n(250).y_best);
  EXPECT_TRUE(at[1].missing);
  EXPECT_TRUE(std::isnan(at[1].mean));
  EXPECT_THROW(checkpoint_summary({}, {1}), std::invalid_argument);
}
