#pragma once

// Name-based construction of tasks and surrogates.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "auxbo/acquisition.hpp"
#include "auxbo/gp.hpp"
#include "auxbo/nn/arch.hpp"
#include "auxbo/surrogates/bbb.hpp"
#include "auxbo/surrogates/ensemble.hpp"
#include "auxbo/surrogates/neural_linear.hpp"
#include "auxbo/tasks/nanoparticle.hpp"
#include "auxbo/tasks/photonic.hpp"
#include "auxbo/tasks/synthetic.hpp"

namespace auxbo {

/// Configuration problem detected before any work starts (CLI exit 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"branin", "hartmann6", "np-narrowband", "np-highpass", "pc-a", "pc-b"};
  return names;
}

inline const std::vector<std::string>& surrogate_names() {
  static const std::vector<std::string> names{"ensemble", "ensemble-aux", "bbb",    "bbb-aux",
                                              "bbb-anneal", "neural-linear", "gp", "random"};
  return names;
}

struct TaskOptions {
  std::string dos_pool;        // pcpool file for pc-a / pc-b
  bool dos_synthetic = false;  // synthetic DOS fixture for pc-a / pc-b
};

inline std::unique_ptr<Task> make_task(const std::string& name, const TaskOptions& opt = {}) {
  using namespace std::string_literals;
  if (name == "branin") return std::make_unique<synthetic::SyntheticTask>(synthetic::SyntheticTask::Kind::branin);
  if (name == "hartmann6") return std::make_unique<synthetic::SyntheticTask>(synthetic::SyntheticTask::Kind::hartmann6);
  if (name == "np-narrowband")
    return std::make_unique<nanoparticle::NanoparticleTask>(nanoparticle::NanoparticleTask::Objective::narrowband);
  if (name == "np-highpass")
    return std::make_unique<nanoparticle::NanoparticleTask>(nanoparticle::NanoparticleTask::Objective::highpass);
  if (name == "pc-a" || name == "pc-b") {
    const auto dist = name == "pc-a" ? photonic::PhotonicTask::Distribution::pc_a : photonic::PhotonicTask::Distribution::pc_b;
    if (!opt.dos_pool.empty() && opt.dos_synthetic) throw ConfigError(name + ": give either --dos-pool or --dos synthetic, not both");
    if (!opt.dos_pool.empty()) return std::make_unique<photonic::PhotonicTask>(dist, photonic::ingest_dos_pool(opt.dos_pool));
    if (opt.dos_synthetic) return std::make_unique<photonic::PhotonicTask>(dist);
    throw ConfigError(name + " needs DOS labels: pass --dos-pool <file> or --dos synthetic");
  }
  throw ConfigError("unknown task '" + name + "'");
}

/// What a surrogate name means for the BO loop.
struct SurrogateSpec {
  std::string name;
  bool random = false;  // no model; uniform proposals
  bool aux = false;     // trained on z instead of y
};

inline SurrogateSpec parse_surrogate(const std::string& name) {
  if (name == "gp-aux" || name == "neural-linear-aux")
    throw ConfigError(name +
                      " is not supported: exact Bayesian inference in this model scales cubically with the output "
                      "dimension, so only the scalar-objective variant is provided");
  for (const auto& n : surrogate_names()) {
    if (n == name) {
      SurrogateSpec s{name};
      s.random = name == "random";
      s.aux = name.ends_with("-aux");
      return s;
    }
  }
  throw ConfigError("unknown surrogate '" + name + "'");
}

inline bool is_neural(const SurrogateSpec& s) { return !s.random && s.name != "gp"; }

inline AcqKind default_acquisition(const SurrogateSpec& s) {
  if (s.name == "gp" || s.name == "neural-linear") return AcqKind::ei;
  return s.aux ? AcqKind::ei_mc_aux : AcqKind::ei_mc;
}

/// Rejects surrogate/acquisition pairs that cannot be evaluated.
inline void check_acquisition(const SurrogateSpec& s, AcqKind kind) {
  if (s.random) return;
  if (kind == AcqKind::ei && s.name != "gp" && s.name != "neural-linear")
    throw ConfigError("--acq ei needs a closed-form predictive; " + s.name + " supports ei-mc" + (s.aux ? "-aux" : ""));
  if (kind == AcqKind::ei_mc_aux && !s.aux)
    throw ConfigError("--acq ei-mc-aux needs an auxiliary surrogate (e.g. ensemble-aux); " + s.name + " predicts y directly");
  if (kind != AcqKind::ei_mc_aux && s.aux)
    throw ConfigError(s.name + " predicts the auxiliary vector z; use --acq ei-mc-aux");
}

inline std::string default_architecture(const std::string& task) {
  if (task == "branin" || task == "hartmann6") return "mlp:256x4";
  if (task == "pc-a" || task == "pc-b") return "mlp:256x5";
  return "mlp:256x8";
}

inline std::unique_ptr<Surrogate> make_surrogate(const SurrogateSpec& s, SurrogateConfig cfg, nn::Shape input,
                                                 std::size_t z_dim) {
  const std::size_t outputs = s.aux ? z_dim : 1;
  if (s.random) return nullptr;
  if (s.name == "gp") return std::make_unique<GpSurrogate>();
  if (s.name == "ensemble" || s.name == "ensemble-aux")
    return std::make_unique<EnsembleSurrogate>(std::move(cfg), input, outputs, s.name);
  if (s.name == "bbb" || s.name == "bbb-aux") {
    cfg.bbb_kl_anneal = false;
    return std::make_unique<BbbSurrogate>(std::move(cfg), input, outputs, s.name);
  }
  if (s.name == "bbb-anneal") {
    cfg.bbb_kl_anneal = true;
    return std::make_unique<BbbSurrogate>(std::move(cfg), input, outputs, s.name);
  }
  if (s.name == "neural-linear") return std::make_unique<NeuralLinearSurrogate>(std::move(cfg), input);
  throw ConfigError("unknown surrogate '" + s.name + "'");
}

}  // namespace auxbo
