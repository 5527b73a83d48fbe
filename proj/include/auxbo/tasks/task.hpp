#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "auxbo/core.hpp"

namespace auxbo {

/// Finite set of candidate inputs with precomputed labels.
struct CandidatePool {
  std::vector<Vector> x;
  std::vector<Vector> z;
  std::size_t size() const { return x.size(); }
};

/// An optimization task f = h o g over a box domain. The engine maximizes.
class Task {
 public:
  virtual ~Task() = default;

  virtual std::string name() const = 0;
  virtual const Bounds& bounds() const = 0;
  std::size_t x_dim() const { return bounds().size(); }
  virtual std::size_t z_dim() const = 0;

  /// Expensive labeling process.
  virtual Vector g(std::span<const double> x) const = 0;
  /// Cheap known objective on auxiliary outputs.
  virtual double h(std::span<const double> z) const = 0;

  /// True when z = [y] and h is the identity.
  virtual bool identity_h() const { return false; }

  /// Pool of precomputed candidates, when the task is discrete.
  virtual const CandidatePool* pool() const { return nullptr; }

  /// Side length of the square image representation fed to convolutional
  /// surrogates, when the task has one.
  virtual std::optional<std::size_t> image_side() const { return std::nullopt; }
  /// Image representation of x (row-major, side*side values in [0, 1]).
  virtual Vector image(std::span<const double>) const { return {}; }

  /// Provenance of auxiliary labels recorded in traces.
  virtual std::string label_source() const { return "oracle"; }

  EvalRecord label(std::span<const double> x) const {
    EvalRecord r;
    r.x.assign(x.begin(), x.end());
    r.z = g(x);
    r.y = h(r.z);
    return r;
  }
};

}  // namespace auxbo
