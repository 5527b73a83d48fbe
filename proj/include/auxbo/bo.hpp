#pragma once

// The outer Bayesian-optimization loop: initial design, (re)training,
// pool-based EI maximization, labeling, and per-iteration logging.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "auxbo/acquisition.hpp"
#include "auxbo/parallel.hpp"
#include "auxbo/registry.hpp"

namespace auxbo {

inline const std::vector<std::size_t>& default_checkpoints() {
  static const std::vector<std::size_t> c{50, 100, 250, 500, 1000};
  return c;
}

struct RunConfig {
  std::string task;
  std::string surrogate;
  std::optional<AcqKind> acq;  // default depends on the surrogate
  std::size_t n_start = 5;
  std::size_t n_max = 1000;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  bool warm_start = true;
  bool augment = false;
  bool timing = true;  // false writes zero timings so traces compare bit-for-bit
  std::size_t pool_size = 100000;
  int n_mc = 30;
  std::size_t jobs = 1;
  TaskOptions task_options;
  SurrogateConfig model;  // arch empty -> task default
  std::vector<std::size_t> checkpoints = default_checkpoints();

  AcqKind acquisition() const { return acq ? *acq : default_acquisition(parse_surrogate(surrogate)); }
};

struct TraceRow {
  std::size_t N = 0;
  Vector x;
  double y = 0.0;
  double y_best = 0.0;
  double train_s = 0.0;
  double acq_s = 0.0;
  double acq_value = std::nan("");
  double acq_runner_up = std::nan("");
};

struct RunTrace {
  std::string task;
  std::string surrogate;
  std::string label_source;
  std::size_t trial = 0;
  std::size_t x_dim = 0;
  std::vector<TraceRow> initial;  // the N_start design points
  std::vector<TraceRow> rows;     // one per BO iteration
  bool aborted = false;
  std::string abort_reason;

  std::size_t size() const { return initial.size() + rows.size(); }
  const TraceRow& at_n(std::size_t n) const { return n <= initial.size() ? initial[n - 1] : rows[n - initial.size() - 1]; }
  double y_best() const { return size() == 0 ? std::nan("") : at_n(size()).y_best; }
};

/// Validates the combination of names and options without doing any work.
inline void check_config(const RunConfig& cfg) {
  const auto spec = parse_surrogate(cfg.surrogate);
  bool known_task = false;
  for (const auto& t : task_names()) known_task = known_task || t == cfg.task;
  if (!known_task) throw ConfigError("unknown task '" + cfg.task + "'");
  check_acquisition(spec, cfg.acquisition());
  if (cfg.n_start < 2) throw ConfigError("N_start must be at least 2");
  if (cfg.n_max < cfg.n_start) throw ConfigError("--iters must be at least N_start (" + std::to_string(cfg.n_start) + ")");
  if (cfg.trials < 1) throw ConfigError("--trials must be at least 1");
  if (cfg.pool_size < 1) throw ConfigError("--pool-size must be at least 1");
  if (cfg.n_mc < 1) throw ConfigError("--n-mc must be at least 1");
  const std::string arch = cfg.model.arch.empty() ? default_architecture(cfg.task) : cfg.model.arch;
  try {
    nn::validate_architecture(arch);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const bool image_task = cfg.task == "pc-a" || cfg.task == "pc-b";
  if (nn::is_conv_architecture(arch) && !image_task && is_neural(spec))
    throw ConfigError("architecture " + arch + " needs an image task (pc-a, pc-b)");
  if (cfg.augment && !(image_task && nn::is_conv_architecture(arch) && is_neural(spec)))
    throw ConfigError("--augment applies only to convolutional surrogates on pc-a / pc-b");
}

/// Maps task inputs to surrogate inputs: box-normalized x, or the unit-cell
/// image for convolutional architectures.
class InputEncoder {
 public:
  InputEncoder(const Task& task, bool image) : task_(&task), scaler_(task.bounds()), image_(image) {
    if (image_ && !task.image_side()) throw ConfigError(task.name() + " has no image representation");
  }

  nn::Shape shape() const {
    if (image_) return {1, *task_->image_side(), *task_->image_side()};
    return {task_->x_dim(), 1, 1};
  }

  void encode_into(std::span<const double> x, Eigen::Ref<Eigen::VectorXd> col) const {
    const Vector v = image_ ? task_->image(x) : scaler_.forward(x);
    for (std::size_t i = 0; i < v.size(); ++i) col[static_cast<Eigen::Index>(i)] = v[i];
  }

  template <class Get>
  Matrix encode(std::size_t n, Get&& get) const {
    Matrix X(static_cast<Eigen::Index>(shape().size()), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) encode_into(get(j), X.col(static_cast<Eigen::Index>(j)));
    return X;
  }

 private:
  const Task* task_;
  BoxScaler scaler_;
  bool image_;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Draws k distinct entries of `items` (partial Fisher-Yates) in draw order.
inline std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> items, std::size_t k,
                                                           SeedStream& rng) {
  k = std::min(k, items.size());
  for (std::size_t i = 0; i < k; ++i) std::swap(items[i], items[i + rng.index(items.size() - i)]);
  items.resize(k);
  return items;
}

}  // namespace detail

/// One BO trial. Streams are keyed by "trial:<t>" under the master seed, so
/// results do not depend on how trials are scheduled.
inline RunTrace run_trial(const Task& task, const RunConfig& cfg, std::size_t trial) {
  check_config(cfg);
  const SurrogateSpec spec = parse_surrogate(cfg.surrogate);
  const AcqKind kind = cfg.acquisition();
  const SeedStream root(cfg.seed, "trial:" + std::to_string(trial));
  SeedStream init_rng = root.child("init-design");
  SeedStream pool_rng = root.child("pool");

  SurrogateConfig mcfg = cfg.model;
  if (mcfg.arch.empty()) mcfg.arch = default_architecture(cfg.task);
  const bool image = is_neural(spec) && nn::is_conv_architecture(mcfg.arch);
  if (cfg.augment) {
    const std::size_t side = *task.image_side();
    mcfg.augment = [side](Matrix& xb, SeedStream& rng) {
      for (Eigen::Index j = 0; j < xb.cols(); ++j)
        photonic::augment_pixels(std::span<double>(xb.col(j).data(), side * side), rng);
    };
  }
  const InputEncoder enc(task, image);
  std::unique_ptr<Surrogate> model = make_surrogate(spec, mcfg, enc.shape(), task.z_dim());
  const Objective h = [&task](std::span<const double> z) { return task.h(z); };

  RunTrace trace;
  trace.task = task.name();
  trace.surrogate = spec.name;
  trace.label_source = task.label_source();
  trace.trial = trial;
  trace.x_dim = task.x_dim();

  const CandidatePool* discrete = task.pool();
  std::vector<char> labeled(discrete ? discrete->size() : 0, 0);
  auto unlabeled = [&] {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labeled.size(); ++i)
      if (!labeled[i]) idx.push_back(i);
    return idx;
  };

  Dataset ds(task.bounds(), task.z_dim());
  auto label_and_append = [&](const Vector& x) -> TraceRow {
    EvalRecord rec = task.label(x);
    if (rec.y != task.h(rec.z)) throw std::logic_error("label: y != h(z)");
    ds.append(rec);
    TraceRow row;
    row.N = ds.size();
    row.x = rec.x;
    row.y = rec.y;
    row.y_best = ds.y_best();
    return row;
  };

  // Initial design.
  if (discrete) {
    if (discrete->size() < cfg.n_start) throw PoolExhausted("pool smaller than N_start");
    std::vector<std::size_t> all(discrete->size());
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t i : detail::sample_without_replacement(all, cfg.n_start, init_rng)) {
      labeled[i] = 1;
      trace.initial.push_back(label_and_append(discrete->x[i]));
    }
  } else {
    for (std::size_t i = 0; i < cfg.n_start; ++i) trace.initial.push_back(label_and_append(init_rng.uniform_in(task.bounds())));
  }

  AcquisitionConfig acfg{kind, cfg.pool_size, cfg.n_mc};
  bool fitted = false;
  for (std::size_t n = cfg.n_start; n < cfg.n_max; ++n) {
    const std::string it = std::to_string(n);
    double train_s = 0.0, acq_s = 0.0;
    PoolChoice choice;
    Vector next;
    std::optional<std::size_t> next_index;

    // Candidate pool for this iteration.
    std::vector<std::size_t> cand_idx;
    std::vector<Vector> cand_x;
    if (discrete) {
      cand_idx = unlabeled();
      if (cand_idx.empty()) {
        trace.aborted = true;
        trace.abort_reason = "pool exhausted";
        break;
      }
      if (cand_idx.size() > cfg.pool_size) cand_idx = detail::sample_without_replacement(cand_idx, cfg.pool_size, pool_rng);
    }

    if (spec.random) {
      if (discrete) {
        next_index = cand_idx[pool_rng.index(cand_idx.size())];
        next = discrete->x[*next_index];
      } else {
        next = pool_rng.uniform_in(task.bounds());
      }
    } else {
      auto t0 = std::chrono::steady_clock::now();
      const auto& recs = ds.records();
      const Matrix X = enc.encode(recs.size(), [&](std::size_t j) { return std::span<const double>(recs[j].x); });
      Matrix T(static_cast<Eigen::Index>(spec.aux ? task.z_dim() : 1), static_cast<Eigen::Index>(recs.size()));
      for (std::size_t j = 0; j < recs.size(); ++j) {
        if (spec.aux)
          for (std::size_t d = 0; d < task.z_dim(); ++d) T(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j)) = recs[j].z[d];
        else
          T(0, static_cast<Eigen::Index>(j)) = recs[j].y;
      }
      try {
        SeedStream train_rng = root.child("train:" + it);
        if (fitted && cfg.warm_start)
          model->continue_training(X, T, train_rng);
        else
          model->train_from_scratch(X, T, train_rng);
      } catch (const DivergenceError&) {
        try {
          SeedStream retry_rng = root.child("retry:" + it);
          model->train_from_scratch(X, T, retry_rng);
        } catch (const DivergenceError& second) {
          trace.aborted = true;
          trace.abort_reason = std::string("surrogate diverged twice at N=") + it + ": " + second.what();
          break;
        }
      }
      fitted = true;
      train_s = detail::seconds_since(t0);

      t0 = std::chrono::steady_clock::now();
      if (!discrete) {
        cand_x.resize(cfg.pool_size);
        for (auto& x : cand_x) x = pool_rng.uniform_in(task.bounds());
      }
      const std::size_t count = discrete ? cand_idx.size() : cand_x.size();
      const CandidateEncoder encode = [&](std::size_t start, std::size_t k) {
        return enc.encode(k, [&](std::size_t j) -> std::span<const double> {
          return discrete ? std::span<const double>(discrete->x[cand_idx[start + j]]) : std::span<const double>(cand_x[start + j]);
        });
      };
      choice = maximize_over_pool(*model, count, encode, acfg, h, ds.y_best(), root.child("acq:" + it));
      if (discrete) {
        next_index = cand_idx[choice.index];
        next = discrete->x[*next_index];
      } else {
        next = cand_x[choice.index];
      }
      acq_s = detail::seconds_since(t0);
    }

    if (next_index) labeled[*next_index] = 1;
    TraceRow row = label_and_append(next);
    if (cfg.timing) {
      row.train_s = train_s;
      row.acq_s = acq_s;
    }
    if (!spec.random) {
      row.acq_value = choice.value;
      row.acq_runner_up = choice.runner_up;
    }
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

/// Uniform proposals through the same loop and logging path.
inline RunTrace random_baseline(const Task& task, RunConfig cfg, std::size_t trial) {
  cfg.surrogate = "random";
  cfg.acq.reset();
  return run_trial(task, cfg, trial);
}

/// Runs all trials, up to `cfg.jobs` concurrently.
inline std::vector<RunTrace> run_bo(const Task& task, const RunConfig& cfg) {
  check_config(cfg);
  std::vector<RunTrace> traces(cfg.trials);
  parallel_for(cfg.trials, cfg.jobs, [&](std::size_t t) { traces[t] = run_trial(task, cfg, t); });
  return traces;
}

struct CheckpointStat {
  std::size_t N = 0;
  std::size_t trials = 0;  // trials that reached N
  double mean = std::nan("");
  double se = std::nan("");
  bool missing = false;       // some trial ended before N
  bool single_trial = false;  // se reported as 0
};

inline CheckpointStat summarize_values(std::size_t N, const std::vector<double>& v, std::size_t expected) {
  CheckpointStat s;
  s.N = N;
  s.trials = v.size();
  s.missing = v.size() < expected;
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() == 1) {
    s.se = 0.0;
    s.single_trial = true;
    return s;
  }
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.se = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
  return s;
}

/// Mean and standard error of y_best across trials at each checkpoint.
inline std::vector<CheckpointStat> checkpoint_summary(const std::vector<RunTrace>& traces,
                                                      const std::vector<std::size_t>& checkpoints) {
  if (traces.empty()) throw std::invalid_argument("checkpoint_summary: no trials");
  std::vector<CheckpointStat> out;
  for (std::size_t N : checkpoints) {
    std::vector<double> v;
    for (const auto& t : traces)
      if (N >= 1 && N <= t.size()) v.push_back(t.at_n(N).y_best);
    out.push_back(summarize_values(N, v, traces.size()));
  }
  return out;
}

}  // namespace auxbo
