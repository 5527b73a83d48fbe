#pragma once

// Level-set photonic-crystal unit cells: a 51-d parameter vector
// [c_1..c_50, delta] renders to a 32x32 two-tone permittivity image through
// the super-level set of a truncated Fourier sum.

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "auxbo/core.hpp"
#include "auxbo/tasks/task.hpp"

namespace auxbo::photonic {

inline constexpr std::size_t kSide = 32;
inline constexpr std::size_t kPixels = kSide * kSide;
inline constexpr std::size_t kCoefficients = 50;
inline constexpr std::size_t kParams = kCoefficients + 1;
inline constexpr std::size_t kDosSize = 500;
inline constexpr double kEpsVacuum = 1.0;
inline constexpr double kEpsSilicon = 11.4;
inline constexpr double kPeriod = 1.0;  // um

/// (n_x, n_y) of Fourier term k, row-major over n_x then n_y in -2..2.
inline constexpr std::array<int, 2> frequency_pair(std::size_t k) {
  return {static_cast<int>(k / 5) - 2, static_cast<int>(k % 5) - 2};
}

inline double phi_eval(std::span<const double> c, double x, double y, double a = kPeriod) {
  if (c.size() != kCoefficients) throw std::invalid_argument("phi_eval: expected 50 coefficients");
  double phi = 0.0;
  for (std::size_t k = 0; k < 25; ++k) {
    const auto [nx, ny] = frequency_pair(k);
    const double theta = 2.0 * std::numbers::pi * (nx * x + ny * y) / a;
    phi += c[k] * std::cos(theta) - c[k + 25] * std::sin(theta);
  }
  return phi;
}

/// Pixel (i, j) at index i * 32 + j; i runs along x.
struct UnitCellImage {
  std::array<double, kPixels> eps{};

  double& at(std::size_t i, std::size_t j) { return eps[i * kSide + j]; }
  double at(std::size_t i, std::size_t j) const { return eps[i * kSide + j]; }
  bool operator==(const UnitCellImage&) const = default;
};

inline double pixel_center(std::size_t i) { return (static_cast<double>(i) + 0.5) * kPeriod / kSide; }

/// Values of phi at the pixel centers.
inline std::array<double, kPixels> sample_phi(std::span<const double> c) {
  std::array<double, kPixels> out{};
  for (std::size_t i = 0; i < kSide; ++i)
    for (std::size_t j = 0; j < kSide; ++j) out[i * kSide + j] = phi_eval(c, pixel_center(i), pixel_center(j));
  return out;
}

/// Silicon where phi > delta, vacuum where phi <= delta.
inline UnitCellImage render_unit_cell(std::span<const double> params) {
  if (params.size() != kParams) throw std::invalid_argument("render_unit_cell: expected 51 parameters");
  const auto phi = sample_phi(params.first(kCoefficients));
  const double delta = params[kCoefficients];
  UnitCellImage img;
  for (std::size_t p = 0; p < kPixels; ++p) img.eps[p] = phi[p] > delta ? kEpsSilicon : kEpsVacuum;
  return img;
}

inline double eps_avg(const UnitCellImage& img) {
  double s = 0.0;
  for (double v : img.eps) s += v;
  return s / static_cast<double>(kPixels);
}

/// out(i, j) = in(i - p, j - q), indices mod 32.
inline UnitCellImage roll(const UnitCellImage& img, int p, int q) {
  UnitCellImage out;
  const int n = static_cast<int>(kSide);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.at(i, j) = img.at(static_cast<std::size_t>(((i - p) % n + n) % n), static_cast<std::size_t>(((j - q) % n + n) % n));
  return out;
}

inline double h_dos(std::span<const double> z) {
  if (z.size() != kDosSize) throw std::invalid_argument("h_dos: expected 500 values");
  double num = 0.0, gap = 0.0;
  for (std::size_t i = 1; i <= kDosSize; ++i) {
    if (i >= 301 && i <= 350)
      gap += z[i - 1];
    else
      num += z[i - 1];
  }
  return num / (1.0 + gap);
}

/// Deterministic stand-in for a DOS spectrum. Not physics: it only exercises
/// 500-dimensional auxiliary training end to end.
inline Vector synthetic_dos(const UnitCellImage& img) {
  const double fill = (eps_avg(img) - kEpsVacuum) / (kEpsSilicon - kEpsVacuum);
  Vector z(kDosSize);
  for (std::size_t j = 1; j <= kDosSize; ++j)
    z[j - 1] = 1.0 + std::sin(2.0 * std::numbers::pi * (static_cast<double>(j) / 500.0) * (1.0 + 10.0 * fill)) + 1.0;
  return z;
}

// ---------------------------------------------------------------------------
// Augmentation
// ---------------------------------------------------------------------------

struct Augmentation {
  int shift_x = 0;
  int shift_y = 0;
  bool flip_x = false;
  bool flip_y = false;
  int quarter_turns = 0;
};

inline Augmentation draw_augmentation(SeedStream& rng) {
  Augmentation a;
  a.shift_x = static_cast<int>(rng.index(kSide));
  a.shift_y = static_cast<int>(rng.index(kSide));
  a.flip_x = rng.coin();
  a.flip_y = rng.coin();
  a.quarter_turns = static_cast<int>(rng.index(4));
  return a;
}

/// Periodic translation, then flips, then rotation by quarter_turns * 90 deg.
inline UnitCellImage apply_augmentation(const UnitCellImage& img, const Augmentation& a) {
  UnitCellImage cur = roll(img, a.shift_x, a.shift_y);
  constexpr std::size_t n = kSide;
  if (a.flip_x || a.flip_y) {
    UnitCellImage f;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) f.at(i, j) = cur.at(a.flip_x ? n - 1 - i : i, a.flip_y ? n - 1 - j : j);
    cur = f;
  }
  for (int t = 0; t < ((a.quarter_turns % 4) + 4) % 4; ++t) {
    UnitCellImage r;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) r.at(i, j) = cur.at(n - 1 - j, i);
    cur = r;
  }
  return cur;
}

inline UnitCellImage augment_image(const UnitCellImage& img, SeedStream& rng) {
  return apply_augmentation(img, draw_augmentation(rng));
}

/// The same transforms on an image stored as 1024 normalized pixel values.
inline void augment_pixels(std::span<double> pixels, SeedStream& rng) {
  UnitCellImage img;
  std::copy(pixels.begin(), pixels.end(), img.eps.begin());
  img = augment_image(img, rng);
  std::copy(img.eps.begin(), img.eps.end(), pixels.begin());
}

// ---------------------------------------------------------------------------
// pcpool files: CSV rows of 51 parameters followed by 500 DOS values.
// ---------------------------------------------------------------------------

class PoolFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline CandidatePool parse_dos_pool(std::istream& in) {
  CandidatePool pool;
  std::string line;
  std::size_t row = 0;
  auto fail = [&](const std::string& what) {
    std::ostringstream os;
    os << "pcpool row " << row << ": " << what;
    throw PoolFormatError(os.str());
  };
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Vector vals;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        fail("malformed value '" + cell + "'");
      }
      if (cell.find_first_not_of(" \t", used) != std::string::npos) fail("malformed value '" + cell + "'");
      if (!std::isfinite(v)) fail("non-finite value");
      vals.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (vals.size() != kParams + kDosSize)
      fail("expected " + std::to_string(kParams + kDosSize) + " columns, got " + std::to_string(vals.size()));
    for (std::size_t k = kParams; k < vals.size(); ++k)
      if (vals[k] < 0.0) fail("negative DOS value in column " + std::to_string(k + 1));
    pool.x.emplace_back(vals.begin(), vals.begin() + kParams);
    pool.z.emplace_back(vals.begin() + kParams, vals.end());
  }
  if (pool.size() == 0) throw PoolFormatError("empty pool");
  return pool;
}

inline CandidatePool ingest_dos_pool(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pcpool file '" + path + "'");
  return parse_dos_pool(in);
}

inline void write_dos_pool(std::ostream& os, const CandidatePool& pool) {
  os.precision(17);
  for (std::size_t r = 0; r < pool.size(); ++r) {
    for (std::size_t k = 0; k < pool.x[r].size(); ++k) os << (k ? "," : "") << pool.x[r][k];
    for (double v : pool.z[r]) os << ',' << v;
    os << '\n';
  }
}

// ---------------------------------------------------------------------------

class PhotonicTask final : public Task {
 public:
  enum class Distribution { pc_a, pc_b };

  /// Continuous-domain task labeled by the synthetic DOS fixture.
  explicit PhotonicTask(Distribution d) : dist_(d) { init_bounds(); }

  /// Discrete task over an ingested pool.
  PhotonicTask(Distribution d, CandidatePool pool) : dist_(d), pool_(std::make_shared<CandidatePool>(std::move(pool))) {
    init_bounds();
    for (std::size_t r = 0; r < pool_->size(); ++r) {
      if (!within(bounds_, pool_->x[r]))
        throw PoolFormatError("pcpool row " + std::to_string(r + 1) + ": parameters outside the " + name() + " box");
      index_.emplace(pool_->x[r], r);
    }
  }

  std::string name() const override { return dist_ == Distribution::pc_a ? "pc-a" : "pc-b"; }
  const Bounds& bounds() const override { return bounds_; }
  std::size_t z_dim() const override { return kDosSize; }
  const CandidatePool* pool() const override { return pool_.get(); }
  std::optional<std::size_t> image_side() const override { return kSide; }
  std::string label_source() const override { return pool_ ? "pcpool" : "synthetic-fixture"; }

  Vector image(std::span<const double> x) const override {
    const auto img = render_unit_cell(x);
    Vector px(kPixels);
    for (std::size_t p = 0; p < kPixels; ++p) px[p] = (img.eps[p] - kEpsVacuum) / (kEpsSilicon - kEpsVacuum);
    return px;
  }

  Vector g(std::span<const double> x) const override {
    if (x.size() != kParams) throw std::invalid_argument("pc task: expected 51 parameters");
    if (pool_) {
      auto it = index_.find(Vector(x.begin(), x.end()));
      if (it == index_.end()) throw std::invalid_argument("pc task: x is not a pool entry");
      return pool_->z[it->second];
    }
    return synthetic_dos(render_unit_cell(x));
  }

  double h(std::span<const double> z) const override { return h_dos(z); }

 private:
  void init_bounds() {
    const Interval coeff = dist_ == Distribution::pc_a ? Interval{-1.0, 1.0} : Interval{0.0, 1.0};
    bounds_.assign(kCoefficients, coeff);
    bounds_.push_back({-3.0, 3.0});
  }

  Distribution dist_;
  Bounds bounds_;
  std::shared_ptr<const CandidatePool> pool_;
  std::map<Vector, std::size_t> index_;
};

}  // namespace auxbo::photonic
