#pragma once

// Shared domain types: observations, datasets, input/target scaling and
// deterministic random streams.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace auxbo {

using Vector = std::vector<double>;

/// Thrown when training produces a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a discrete candidate pool has no unlabeled entries left.
class PoolExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
  double width() const { return hi - lo; }
};

using Bounds = std::vector<Interval>;

inline bool within(const Bounds& b, std::span<const double> x) {
  if (x.size() != b.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!b[i].contains(x[i])) return false;
  return true;
}

/// One labeled observation: input x, auxiliary vector z and objective y = h(z).
struct EvalRecord {
  Vector x;
  Vector z;
  double y = 0.0;
};

/// Append-only collection of observations over a box domain.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Bounds bounds, std::size_t z_dim) : bounds_(std::move(bounds)), z_dim_(z_dim) {
    if (bounds_.empty()) throw std::invalid_argument("dataset: empty bounds");
    if (z_dim_ == 0) throw std::invalid_argument("dataset: z_dim must be >= 1");
  }

  /// Returns the next version of the dataset with `rec` appended.
  [[nodiscard]] Dataset appended(EvalRecord rec) const {
    Dataset next = *this;
    next.append(std::move(rec));
    return next;
  }

  void append(EvalRecord rec) {
    if (rec.x.size() != x_dim()) {
      std::ostringstream os;
      os << "dataset_append: x has dimension " << rec.x.size() << ", expected " << x_dim();
      throw std::invalid_argument(os.str());
    }
    if (rec.z.size() != z_dim_) {
      std::ostringstream os;
      os << "dataset_append: z has dimension " << rec.z.size() << ", expected " << z_dim_;
      throw std::invalid_argument(os.str());
    }
    for (std::size_t i = 0; i < rec.x.size(); ++i) {
      if (!bounds_[i].contains(rec.x[i])) {
        std::ostringstream os;
        os << "dataset_append: x[" << i << "] = " << rec.x[i] << " outside [" << bounds_[i].lo << ", "
           << bounds_[i].hi << "]";
        throw std::out_of_range(os.str());
      }
    }
    if (!std::isfinite(rec.y)) throw std::invalid_argument("dataset_append: non-finite y");
    y_best_ = records_.empty() ? rec.y : std::max(y_best_, rec.y);
    records_.push_back(std::move(rec));
  }

  const std::vector<EvalRecord>& records() const { return records_; }
  const EvalRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const Bounds& bounds() const { return bounds_; }
  std::size_t x_dim() const { return bounds_.size(); }
  std::size_t z_dim() const { return z_dim_; }

  double y_best() const {
    if (records_.empty()) throw std::logic_error("y_best of empty dataset");
    return y_best_;
  }

 private:
  Bounds bounds_;
  std::size_t z_dim_ = 1;
  std::vector<EvalRecord> records_;
  double y_best_ = -std::numeric_limits<double>::infinity();
};

/// Affine map of a box onto [-1, 1]^d.
class BoxScaler {
 public:
  BoxScaler() = default;
  explicit BoxScaler(const Bounds& b) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (!std::isfinite(b[i].lo) || !std::isfinite(b[i].hi))
        throw std::invalid_argument("normalize_inputs: non-finite bound in dimension " + std::to_string(i));
      if (!(b[i].lo < b[i].hi))
        throw std::invalid_argument("normalize_inputs: degenerate bound in dimension " + std::to_string(i));
      center_.push_back(0.5 * (b[i].lo + b[i].hi));
      half_.push_back(0.5 * (b[i].hi - b[i].lo));
    }
  }

  std::size_t dim() const { return center_.size(); }

  Vector forward(std::span<const double> x) const {
    Vector u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = (x[i] - center_[i]) / half_[i];
    return u;
  }

  Vector inverse(std::span<const double> u) const {
    Vector x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) x[i] = center_[i] + half_[i] * u[i];
    return x;
  }

 private:
  Vector center_;
  Vector half_;
};

/// Scaled inputs of a dataset plus the transform that produced them.
struct NormalizedInputs {
  std::vector<Vector> inputs;
  BoxScaler transform;
};

inline NormalizedInputs normalize_inputs(const Dataset& ds) {
  NormalizedInputs out{{}, BoxScaler(ds.bounds())};
  out.inputs.reserve(ds.size());
  for (const auto& r : ds.records()) out.inputs.push_back(out.transform.forward(r.x));
  return out;
}

struct Standardized {
  Vector values;
  double mean = 0.0;
  double std = 1.0;
  bool clamped = false;
};

/// z-scores `values` with the population standard deviation.
inline Standardized standardize_targets(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("standardize_targets: need at least 2 values");
  Standardized s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  if (s.std < 1e-12) {
    s.std = 1.0;
    s.clamped = true;
  }
  s.values.reserve(values.size());
  for (double v : values) s.values.push_back((v - s.mean) / s.std);
  return s;
}

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Derives the 64-bit seed of stream `id` under `master_seed`.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view id) {
  return detail::splitmix64(detail::splitmix64(master_seed) ^ detail::fnv1a(id));
}

/// A named random stream. Draws depend only on (master_seed, stream_id).
class SeedStream {
 public:
  SeedStream(std::uint64_t master_seed, std::string stream_id)
      : master_(master_seed), id_(std::move(stream_id)), engine_(derive_seed(master_, id_)) {}

  /// Sub-stream keyed by "<id>/<label>".
  SeedStream child(std::string_view label) const { return SeedStream(master_, id_ + "/" + std::string(label)); }

  std::uint64_t master_seed() const { return master_; }
  const std::string& id() const { return id_; }
  std::mt19937_64& engine() { return engine_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }
  bool coin() { return index(2) == 1; }

  Vector uniform_in(const Bounds& b) {
    Vector x(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) x[i] = uniform(b[i].lo, b[i].hi);
    return x;
  }

 private:
  std::uint64_t master_;
  std::string id_;
  std::mt19937_64 engine_;
};

}  // namespace auxbo
