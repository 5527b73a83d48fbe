#pragma once

// Trace CSVs, per-N aggregate CSV, and the run summary JSON.

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "auxbo/bo.hpp"

#ifndef AUXBO_VERSION
#define AUXBO_VERSION "0.1.0"
#endif

namespace auxbo::io {

using nlohmann::json;

/// Shortest text that reads back to the same double.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_trace_csv(std::ostream& os, const RunTrace& t) {
  os << "N,y,y_best,train_s,acq_s";
  for (std::size_t d = 0; d < t.x_dim; ++d) os << ",x_" << d;
  os << '\n';
  auto row = [&](const TraceRow& r) {
    os << r.N << ',' << fmt(r.y) << ',' << fmt(r.y_best) << ',' << fmt(r.train_s) << ',' << fmt(r.acq_s);
    for (double v : r.x) os << ',' << fmt(v);
    os << '\n';
  };
  for (const auto& r : t.initial) row(r);
  for (const auto& r : t.rows) row(r);
}

/// Winning and runner-up acquisition values per BO iteration.
inline void write_acquisition_csv(std::ostream& os, const RunTrace& t) {
  os << "N,acq_best,acq_runner_up\n";
  for (const auto& r : t.rows) os << r.N << ',' << fmt(r.acq_value) << ',' << fmt(r.acq_runner_up) << '\n';
}

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw FormatError("line " + std::to_string(line) + ": malformed number '" + s + "'");
  }
  if (used != s.size()) throw FormatError("line " + std::to_string(line) + ": malformed number '" + s + "'");
  return v;
}

/// Reads a trace CSV. All rows land in `rows` unless `n_start` > 0, in which
/// case the first n_start rows become the initial design.
inline RunTrace read_trace_csv(std::istream& is, std::size_t n_start = 0) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty trace file");
  const auto head = split_csv(line);
  if (head.size() < 5 || head[0] != "N" || head[1] != "y" || head[2] != "y_best" || head[3] != "train_s" ||
      head[4] != "acq_s")
    throw FormatError("unexpected trace header: " + line);
  RunTrace t;
  t.x_dim = head.size() - 5;
  for (std::size_t d = 0; d < t.x_dim; ++d)
    if (head[5 + d] != "x_" + std::to_string(d)) throw FormatError("unexpected trace header: " + line);
  std::size_t ln = 1;
  while (std::getline(is, line)) {
    ++ln;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != head.size())
      throw FormatError("line " + std::to_string(ln) + ": expected " + std::to_string(head.size()) + " columns");
    TraceRow r;
    r.N = static_cast<std::size_t>(parse_double(cells[0], ln));
    r.y = parse_double(cells[1], ln);
    r.y_best = parse_double(cells[2], ln);
    r.train_s = parse_double(cells[3], ln);
    r.acq_s = parse_double(cells[4], ln);
    for (std::size_t d = 0; d < t.x_dim; ++d) r.x.push_back(parse_double(cells[5 + d], ln));
    (t.initial.size() < n_start ? t.initial : t.rows).push_back(std::move(r));
  }
  return t;
}

/// Mean and standard error of y_best at every N reached by any trial.
inline void write_ybest_csv(std::ostream& os, const std::vector<RunTrace>& traces) {
  std::size_t longest = 0;
  for (const auto& t : traces) longest = std::max(longest, t.size());
  std::vector<std::size_t> ns(longest);
  for (std::size_t i = 0; i < longest; ++i) ns[i] = i + 1;
  os << "N,mean,se\n";
  for (const auto& s : checkpoint_summary(traces, ns)) os << s.N << ',' << fmt(s.mean) << ',' << fmt(s.se) << '\n';
}

inline json config_to_json(const RunConfig& c) {
  json j;
  j["task"] = c.task;
  j["surrogate"] = c.surrogate;
  j["acq"] = to_string(c.acquisition());
  j["n_start"] = c.n_start;
  j["iters"] = c.n_max;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["warm_start"] = c.warm_start;
  j["augment"] = c.augment;
  j["timing"] = c.timing;
  j["pool_size"] = c.pool_size;
  j["n_mc"] = c.n_mc;
  j["jobs"] = c.jobs;
  j["dos_pool"] = c.task_options.dos_pool;
  j["dos_synthetic"] = c.task_options.dos_synthetic;
  j["arch"] = c.model.arch.empty() ? default_architecture(c.task) : c.model.arch;
  j["epochs_scratch"] = c.model.epochs_scratch;
  j["epochs_cont"] = c.model.epochs_cont;
  j["base_lr"] = c.model.base_lr;
  j["batch_size"] = c.model.batch_size;
  j["ensemble_size"] = c.model.ensemble_size;
  j["bbb_prior_sd"] = c.model.bbb_prior_sd;
  j["bbb_init_rho"] = c.model.bbb_init_rho;
  j["nl_alpha"] = c.model.nl_alpha;
  j["nl_beta"] = c.model.nl_beta;
  j["checkpoints"] = c.checkpoints;
  return j;
}

/// Inverse of config_to_json; unknown keys are rejected.
inline RunConfig config_from_json(const json& j) {
  static const std::vector<std::string> keys{
      "task",     "surrogate",     "acq",   "n_start",  "iters",          "trials",       "seed",
      "warm_start", "augment",     "timing", "pool_size", "n_mc",          "jobs",         "dos_pool",
      "dos_synthetic", "arch",     "epochs_scratch", "epochs_cont", "base_lr", "batch_size", "ensemble_size",
      "bbb_prior_sd", "bbb_init_rho", "nl_alpha", "nl_beta", "checkpoints"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError("unknown config key '" + k + "'");
  RunConfig c;
  try {
    c.task = j.at("task").get<std::string>();
    c.surrogate = j.at("surrogate").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("acq")) c.acq = parse_acq(j["acq"].get<std::string>());
    c.n_start = j.value("n_start", c.n_start);
    c.n_max = j.value("iters", c.n_max);
    c.trials = j.value("trials", c.trials);
    c.warm_start = j.value("warm_start", c.warm_start);
    c.augment = j.value("augment", c.augment);
    c.timing = j.value("timing", c.timing);
    c.pool_size = j.value("pool_size", c.pool_size);
    c.n_mc = j.value("n_mc", c.n_mc);
    c.jobs = j.value("jobs", c.jobs);
    c.task_options.dos_pool = j.value("dos_pool", std::string());
    c.task_options.dos_synthetic = j.value("dos_synthetic", false);
    c.model.arch = j.value("arch", std::string());
    c.model.epochs_scratch = j.value("epochs_scratch", c.model.epochs_scratch);
    c.model.epochs_cont = j.value("epochs_cont", c.model.epochs_cont);
    c.model.base_lr = j.value("base_lr", c.model.base_lr);
    c.model.batch_size = j.value("batch_size", c.model.batch_size);
    c.model.ensemble_size = j.value("ensemble_size", c.model.ensemble_size);
    c.model.bbb_prior_sd = j.value("bbb_prior_sd", c.model.bbb_prior_sd);
    c.model.bbb_init_rho = j.value("bbb_init_rho", c.model.bbb_init_rho);
    c.model.nl_alpha = j.value("nl_alpha", c.model.nl_alpha);
    c.model.nl_beta = j.value("nl_beta", c.model.nl_beta);
    if (j.contains("checkpoints")) c.checkpoints = j["checkpoints"].get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  return c;
}

inline json stats_to_json(const std::vector<CheckpointStat>& stats) {
  json arr = json::array();
  for (const auto& s : stats) {
    json e{{"N", s.N}, {"trials", s.trials}, {"missing", s.missing}, {"single_trial", s.single_trial}};
    e["mean"] = std::isfinite(s.mean) ? json(s.mean) : json(nullptr);
    e["se"] = std::isfinite(s.se) ? json(s.se) : json(nullptr);
    arr.push_back(e);
  }
  return arr;
}

inline json summary_json(const RunConfig& cfg, const std::vector<RunTrace>& traces) {
  json j;
  j["version"] = AUXBO_VERSION;
  j["config"] = config_to_json(cfg);
  j["label_source"] = traces.empty() ? "" : traces.front().label_source;
  j["checkpoints"] = stats_to_json(checkpoint_summary(traces, cfg.checkpoints));
  json trials = json::array();
  for (const auto& t : traces) {
    json e{{"trial", t.trial}, {"N", t.size()}, {"y_best", t.y_best()}, {"aborted", t.aborted}};
    if (t.aborted) e["abort_reason"] = t.abort_reason;
    trials.push_back(e);
  }
  j["trials"] = trials;
  return j;
}

}  // namespace auxbo::io
