// auxbo: run BO experiments, self-validate against oracles, query oracles.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "auxbo/bo.hpp"
#include "auxbo/io.hpp"
#include "auxbo/validation.hpp"

namespace fs = std::filesystem;
using namespace auxbo;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

struct RunArgs {
  std::string task, surrogate, acq, out, dos_pool, dos, arch, replay;
  std::size_t iters = 1000, trials = 1, pool_size = 100000, jobs = 0, ensemble_size = 10;
  int n_mc = 30, epochs_scratch = 1000, epochs_cont = 100, batch_size = 0;
  double base_lr = 1e-3;
  std::optional<std::uint64_t> seed;
  bool augment = false, no_warm_start = false, force = false, no_timing = false;
  std::vector<std::size_t> checkpoints;
};

std::size_t default_jobs() {
  if (const char* env = std::getenv("AUXBO_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("AUXBO_JOBS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RunConfig build_config(const RunArgs& a, const CLI::App& cmd) {
  RunConfig c;
  if (!a.replay.empty()) {
    std::ifstream in(a.replay);
    if (!in) throw ConfigError("cannot read " + a.replay);
    io::json j;
    try {
      in >> j;
    } catch (const io::json::exception& e) {
      throw ConfigError(a.replay + ": " + e.what());
    }
    c = io::config_from_json(j.contains("config") ? j["config"] : j);
  } else {
    if (a.task.empty()) throw ConfigError("--task is required");
    if (a.surrogate.empty()) throw ConfigError("--surrogate is required");
    if (!a.seed) throw ConfigError("--seed is required (runs are never seeded from the clock)");
    c.task = a.task;
    c.surrogate = a.surrogate;
    c.seed = *a.seed;
  }
  auto given = [&](const char* name) { return cmd.count(name) > 0; };
  if (given("--acq")) c.acq = parse_acq(a.acq);
  if (given("--iters")) c.n_max = a.iters;
  if (given("--trials")) c.trials = a.trials;
  if (given("--pool-size")) c.pool_size = a.pool_size;
  if (given("--n-mc")) c.n_mc = a.n_mc;
  if (given("--augment")) c.augment = true;
  if (given("--no-warm-start")) c.warm_start = false;
  if (given("--no-timing")) c.timing = false;
  if (given("--dos-pool")) c.task_options.dos_pool = a.dos_pool;
  if (given("--dos")) {
    if (a.dos != "synthetic") throw ConfigError("--dos accepts only 'synthetic'");
    c.task_options.dos_synthetic = true;
  }
  if (given("--arch")) c.model.arch = a.arch;
  if (given("--epochs-scratch")) c.model.epochs_scratch = a.epochs_scratch;
  if (given("--epochs-cont")) c.model.epochs_cont = a.epochs_cont;
  if (given("--batch-size")) c.model.batch_size = a.batch_size;
  if (given("--lr")) c.model.base_lr = a.base_lr;
  if (given("--ensemble-size")) c.model.ensemble_size = a.ensemble_size;
  if (given("--checkpoints")) c.checkpoints = a.checkpoints;
  c.jobs = given("--jobs") ? a.jobs : default_jobs();
  if (c.jobs < 1) throw ConfigError("--jobs must be at least 1");
  if (c.model.epochs_scratch < 0 || c.model.epochs_cont < 0) throw ConfigError("epoch budgets must be >= 0");
  if (c.model.ensemble_size < 1) throw ConfigError("--ensemble-size must be >= 1");
  check_config(c);
  return c;
}

void prepare_output(const std::string& out, bool force) {
  if (out.empty()) throw ConfigError("--out is required");
  if (fs::exists(out)) {
    if (!fs::is_directory(out)) throw ConfigError(out + " exists and is not a directory");
    if (!fs::is_empty(out) && !force) throw ConfigError(out + " is not empty (use --force to overwrite)");
  } else {
    fs::create_directories(out);
  }
}

std::string trial_name(std::size_t t, const char* suffix) {
  std::ostringstream os;
  os << "trial_" << std::setw(3) << std::setfill('0') << t << suffix;
  return os.str();
}

template <class Fn>
void write_file(const fs::path& p, Fn&& fn) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  fn(os);
  if (!os) throw std::runtime_error("write failed: " + p.string());
}

// Subcommand config files are not read by CLI11 itself, so keys are applied
// here. Options given on the command line take precedence.
void apply_config_file(CLI::App& cmd, const std::string& path) {
  for (const auto& item : CLI::ConfigTOML().from_file(path)) {
    if (!item.parents.empty() || item.name == "config")
      throw CLI::ConversionError("unsupported key '" + item.fullname() + "'");
    std::string flag = "--" + item.name;
    std::replace(flag.begin(), flag.end(), '_', '-');
    CLI::Option* opt = cmd.get_option_no_throw(flag);
    if (opt == nullptr) throw CLI::ConversionError("unknown key '" + item.name + "'");
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

int cmd_run(const RunArgs& a, const CLI::App& cmd) {
  RunConfig cfg;
  std::unique_ptr<Task> task;
  try {
    cfg = build_config(a, cmd);
    prepare_output(a.out, a.force);
  } catch (const std::invalid_argument& e) {
    std::cerr << "auxbo run: " << e.what() << "\n\n" << cmd.help();
    return kUsage;
  }
  try {
    task = make_task(cfg.task, cfg.task_options);
  } catch (const ConfigError& e) {
    std::cerr << "auxbo run: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "auxbo run: " << e.what() << "\n";
    return kRuntime;
  }

  const fs::path out(a.out);
  std::vector<RunTrace> traces(cfg.trials);
  std::vector<char> done(cfg.trials, 0);
  std::vector<std::string> errors(cfg.trials);
  std::mutex io_mutex;
  parallel_for(cfg.trials, cfg.jobs, [&](std::size_t t) {
    try {
      traces[t] = run_trial(*task, cfg, t);
      done[t] = 1;
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
    std::lock_guard lock(io_mutex);
    if (done[t]) {
      write_file(out / trial_name(t, ".csv"), [&](std::ostream& os) { io::write_trace_csv(os, traces[t]); });
      write_file(out / trial_name(t, "_acq.csv"), [&](std::ostream& os) { io::write_acquisition_csv(os, traces[t]); });
      std::cerr << "trial " << t << ": N=" << traces[t].size() << " y_best=" << io::fmt(traces[t].y_best())
                << (traces[t].aborted ? " (aborted: " + traces[t].abort_reason + ")" : "") << "\n";
    } else {
      std::cerr << "trial " << t << " failed: " << errors[t] << "\n";
    }
  });

  std::vector<RunTrace> completed;
  bool failed = false;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    if (done[t]) completed.push_back(traces[t]);
    failed = failed || !done[t] || traces[t].aborted;
  }
  try {
    if (!completed.empty()) {
      auto summary = io::summary_json(cfg, completed);
      for (std::size_t t = 0; t < cfg.trials; ++t)
        if (!done[t]) summary["failed_trials"].push_back({{"trial", t}, {"error", errors[t]}});
      write_file(out / "summary.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
      write_file(out / "ybest_vs_N.csv", [&](std::ostream& os) { io::write_ybest_csv(os, completed); });
      for (const auto& s : checkpoint_summary(completed, cfg.checkpoints)) {
        std::cout << "N=" << s.N << ": ";
        if (s.trials == 0)
          std::cout << "missing\n";
        else
          std::cout << "mean " << io::fmt(s.mean) << " se " << io::fmt(s.se) << " (" << s.trials << " trials"
                    << (s.single_trial ? ", single trial" : "") << (s.missing ? ", some trials missing" : "") << ")\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "auxbo run: " << e.what() << "\n";
    return kRuntime;
  }
  return failed ? kRuntime : kOk;
}

int cmd_validate(const std::string& suite) {
  std::vector<std::string> suites;
  if (suite.empty()) {
    suites = validation::suite_names();
  } else {
    const auto& known = validation::suite_names();
    if (std::find(known.begin(), known.end(), suite) == known.end()) {
      std::cerr << "auxbo validate: unknown suite '" << suite << "' (expected mie, gradients, gp, acquisition)\n";
      return kUsage;
    }
    suites = {suite};
  }
  std::vector<std::string> failing;
  for (const auto& s : suites) {
    std::vector<validation::Check> checks;
    try {
      checks = validation::run_suite(s);
    } catch (const std::exception& e) {
      checks.push_back({s, "suite", false, std::string("error: ") + e.what()});
    }
    for (const auto& c : checks) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.suite << ": " << c.name << ": " << c.detail << "\n";
      if (!c.pass) failing.push_back(c.suite + ": " + c.name);
    }
  }
  if (!failing.empty()) {
    std::cout << failing.size() << " check(s) failed:\n";
    for (const auto& f : failing) std::cout << "  " << f << "\n";
    return kRuntime;
  }
  std::cout << "all checks passed\n";
  return kOk;
}

std::vector<double> parse_point(const std::string& s) {
  std::vector<double> x;
  std::string cell;
  std::istringstream ss(s);
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      throw ConfigError("--x: malformed value '" + cell + "'");
    }
    if (used != cell.size()) throw ConfigError("--x: malformed value '" + cell + "'");
    x.push_back(v);
  }
  return x;
}

int cmd_oracle(const std::string& task_name, const std::string& xs, const std::string& dump, const std::string& dos,
               const std::string& dos_pool) {
  std::unique_ptr<Task> task;
  Vector x;
  try {
    if (!dos.empty() && dos != "synthetic") throw ConfigError("--dos accepts only 'synthetic'");
    task = make_task(task_name, {dos_pool, dos == "synthetic"});
    x = parse_point(xs);
    if (x.size() != task->x_dim())
      throw ConfigError(task_name + " expects " + std::to_string(task->x_dim()) + " values, got " + std::to_string(x.size()));
    if (!within(task->bounds(), x)) throw ConfigError("x lies outside the " + task_name + " domain");
  } catch (const ConfigError& e) {
    std::cerr << "auxbo oracle: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "auxbo oracle: " << e.what() << "\n";
    return kRuntime;
  }
  try {
    const EvalRecord r = task->label(x);
    if (!task->identity_h()) {
      double lo = r.z.front(), hi = r.z.front(), sum = 0.0;
      for (double v : r.z) lo = std::min(lo, v), hi = std::max(hi, v), sum += v;
      std::cout << "z: " << r.z.size() << " values, min " << io::fmt(lo) << " max " << io::fmt(hi) << " mean "
                << io::fmt(sum / static_cast<double>(r.z.size())) << " (source " << task->label_source() << ")\n";
    }
    std::cout << "y = " << io::fmt(r.y) << "\n";
    if (!dump.empty()) {
      write_file(dump, [&](std::ostream& os) {
        if (task_name.starts_with("np-")) {
          nanoparticle::write_spectrum_csv(os, r.z);
        } else if (task_name.starts_with("pc-")) {
          os << "j,dos,source\n";
          for (std::size_t j = 0; j < r.z.size(); ++j) os << j + 1 << ',' << io::fmt(r.z[j]) << ',' << task->label_source() << '\n';
        } else {
          os << "z\n" << io::fmt(r.z.front()) << '\n';
        }
      });
    }
  } catch (const std::exception& e) {
    std::cerr << "auxbo oracle: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian optimization with auxiliary information"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "run BO trials and write traces");
  run->add_option("--task", ra.task, "task name");
  run->add_option("--surrogate", ra.surrogate, "surrogate name");
  run->add_option("--acq", ra.acq, "ei | ei-mc | ei-mc-aux (default depends on surrogate)");
  run->add_option("--iters", ra.iters, "N_max, total labeled points per trial")->capture_default_str();
  run->add_option("--trials", ra.trials, "independent trials")->capture_default_str();
  run->add_option("--seed", ra.seed, "master seed (required)");
  run->add_option("--out", ra.out, "output directory (must be empty unless --force)");
  run->add_option("--pool-size", ra.pool_size, "candidate pool size per iteration")->capture_default_str();
  run->add_option("--n-mc", ra.n_mc, "posterior samples for MC acquisitions")->capture_default_str();
  run->add_option("--dos-pool", ra.dos_pool, "pcpool file for pc-a / pc-b");
  run->add_option("--dos", ra.dos, "'synthetic' to label pc-a / pc-b with the synthetic DOS fixture");
  run->add_option("--arch", ra.arch, "mlp:<units>x<layers> | conv-ti | conv-td");
  run->add_option("--epochs-scratch", ra.epochs_scratch, "epochs for training from scratch")->capture_default_str();
  run->add_option("--epochs-cont", ra.epochs_cont, "epochs for continued training")->capture_default_str();
  run->add_option("--batch-size", ra.batch_size, "minibatch size (0 = min(32, N))")->capture_default_str();
  run->add_option("--lr", ra.base_lr, "base learning rate")->capture_default_str();
  run->add_option("--ensemble-size", ra.ensemble_size, "ensemble members")->capture_default_str();
  run->add_option("--checkpoints", ra.checkpoints, "N values summarized in summary.json")->delimiter(',');
  run->add_option("--jobs", ra.jobs, "concurrent trials (default AUXBO_JOBS, else logical cores)");
  run->add_option("--replay", ra.replay, "rerun the configuration echoed in a summary.json");
  run->add_flag("--augment", ra.augment, "augment training images (convolutional surrogates)");
  run->add_flag("--no-warm-start", ra.no_warm_start, "retrain from scratch every iteration");
  run->add_flag("--no-timing", ra.no_timing, "write zero timings (bit-comparable traces)");
  run->add_flag("--force", ra.force, "allow a non-empty output directory");
  std::string config_file;
  run->add_option("--config", config_file, "experiment file (INI/TOML keys = option names)");

  std::string suite;
  auto* validate = app.add_subcommand("validate", "run oracle self-checks");
  validate->add_option("--suite", suite, "mie | gradients | gp | acquisition");

  std::string otask, ox, odump, odos, opool;
  auto* oracle = app.add_subcommand("oracle", "evaluate a task oracle at one point");
  oracle->add_option("--task", otask, "task name")->required();
  oracle->add_option("--x", ox, "comma-separated task-native input")->required();
  oracle->add_option("--dump", odump, "write z to this CSV");
  oracle->add_option("--dos", odos, "'synthetic' for pc-a / pc-b");
  oracle->add_option("--dos-pool", opool, "pcpool file for pc-a / pc-b");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  if (*run && !config_file.empty()) {
    try {
      apply_config_file(*run, config_file);
    } catch (const CLI::Error& e) {
      std::cerr << "auxbo run: " << config_file << ": " << e.what() << "\n";
      return kUsage;
    }
  }

  try {
    if (*run) return cmd_run(ra, *run);
    if (*validate) return cmd_validate(suite);
    if (*oracle) return cmd_oracle(otask, ox, odump, odos, opool);
  } catch (const ConfigError& e) {
    std::cerr << "auxbo: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "auxbo: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
