#pragma once

// Small reverse-mode network engine. Activations are stored as column-major
// matrices with one column per sample; image features are laid out as
// channel * H * W + row * W + col. All parameters of a network live in a
// single flat vector so that optimizers and variational wrappers can treat
// them uniformly.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "auxbo/core.hpp"

namespace auxbo::nn {

using Matrix = Eigen::MatrixXd;
using ParamVector = Eigen::VectorXd;

struct Shape {
  std::size_t c = 1, h = 1, w = 1;
  std::size_t size() const { return c * h * w; }
  bool operator==(const Shape&) const = default;
};

inline std::string to_string(const Shape& s) {
  std::ostringstream os;
  os << s.c << "x" << s.h << "x" << s.w;
  return os.str();
}

struct Dense {
  std::size_t in = 0, out = 0;
  std::size_t offset = 0;  // weights (out x in, column-major) then bias (out)
  std::size_t param_count() const { return out * in + out; }
};

/// 3x3 convolution, stride 1, wrap-around padding.
struct ConvPeriodic {
  Shape in;
  std::size_t out_channels = 0;
  std::size_t offset = 0;  // weights (out x in*9, column-major) then bias
  std::size_t param_count() const { return out_channels * in.c * 9 + out_channels; }
};

/// 2x2 max pooling, stride 2.
struct MaxPool {
  Shape in;
};

/// 2x2 average pooling, stride 1, wrap-around (size preserving).
struct AvgPool {
  Shape in;
};

struct GlobalAvgPool {
  Shape in;
};

struct Relu {
  Shape in;
};

using Layer = std::variant<Dense, ConvPeriodic, MaxPool, AvgPool, GlobalAvgPool, Relu>;

inline Shape output_shape(const Layer& layer) {
  struct V {
    Shape operator()(const Dense& l) const { return {l.out, 1, 1}; }
    Shape operator()(const ConvPeriodic& l) const { return {l.out_channels, l.in.h, l.in.w}; }
    Shape operator()(const MaxPool& l) const { return {l.in.c, l.in.h / 2, l.in.w / 2}; }
    Shape operator()(const AvgPool& l) const { return l.in; }
    Shape operator()(const GlobalAvgPool& l) const { return {l.in.c, 1, 1}; }
    Shape operator()(const Relu& l) const { return l.in; }
  };
  return std::visit(V{}, layer);
}

/// Per-layer state kept between a training forward pass and its backward pass.
struct LayerCache {
  Matrix input;
  Matrix columns;                 // im2col buffer for convolutions
  std::vector<Eigen::Index> argmax;  // max-pool winners
};

namespace detail {

// Column buffer of a periodic 3x3 convolution: rows (ci*9 + tap),
// columns (sample*H*W + pixel).
inline Matrix im2col(const ConvPeriodic& l, const Matrix& x) {
  const auto H = static_cast<Eigen::Index>(l.in.h), W = static_cast<Eigen::Index>(l.in.w);
  const auto C = static_cast<Eigen::Index>(l.in.c), B = x.cols();
  Matrix col(C * 9, H * W * B);
  for (Eigen::Index b = 0; b < B; ++b)
    for (Eigen::Index c = 0; c < C; ++c)
      for (Eigen::Index di = -1; di <= 1; ++di)
        for (Eigen::Index dj = -1; dj <= 1; ++dj) {
          const Eigen::Index row = c * 9 + (di + 1) * 3 + (dj + 1);
          for (Eigen::Index i = 0; i < H; ++i) {
            const Eigen::Index si = (i + di + H) % H;
            for (Eigen::Index j = 0; j < W; ++j) {
              const Eigen::Index sj = (j + dj + W) % W;
              col(row, b * H * W + i * W + j) = x(c * H * W + si * W + sj, b);
            }
          }
        }
  return col;
}

inline Matrix col2im(const ConvPeriodic& l, const Matrix& col, Eigen::Index B) {
  const auto H = static_cast<Eigen::Index>(l.in.h), W = static_cast<Eigen::Index>(l.in.w);
  const auto C = static_cast<Eigen::Index>(l.in.c);
  Matrix dx = Matrix::Zero(C * H * W, B);
  for (Eigen::Index b = 0; b < B; ++b)
    for (Eigen::Index c = 0; c < C; ++c)
      for (Eigen::Index di = -1; di <= 1; ++di)
        for (Eigen::Index dj = -1; dj <= 1; ++dj) {
          const Eigen::Index row = c * 9 + (di + 1) * 3 + (dj + 1);
          for (Eigen::Index i = 0; i < H; ++i) {
            const Eigen::Index si = (i + di + H) % H;
            for (Eigen::Index j = 0; j < W; ++j) {
              const Eigen::Index sj = (j + dj + W) % W;
              dx(c * H * W + si * W + sj, b) += col(row, b * H * W + i * W + j);
            }
          }
        }
  return dx;
}

struct Forward {
  const ParamVector& p;
  const Matrix& x;
  LayerCache* cache;

  Matrix operator()(const Dense& l) const {
    const auto out = static_cast<Eigen::Index>(l.out), in = static_cast<Eigen::Index>(l.in);
    Eigen::Map<const Matrix> Wt(p.data() + l.offset, out, in);
    Eigen::Map<const Eigen::VectorXd> b(p.data() + l.offset + out * in, out);
    Matrix y = Wt * x;
    y.colwise() += b;
    if (cache) cache->input = x;
    return y;
  }

  Matrix operator()(const ConvPeriodic& l) const {
    const auto co = static_cast<Eigen::Index>(l.out_channels);
    const auto HW = static_cast<Eigen::Index>(l.in.h * l.in.w);
    const Eigen::Index B = x.cols();
    Eigen::Map<const Matrix> Wt(p.data() + l.offset, co, static_cast<Eigen::Index>(l.in.c * 9));
    Eigen::Map<const Eigen::VectorXd> b(p.data() + l.offset + Wt.size(), co);
    Matrix col = im2col(l, x);
    Matrix big = Wt * col;  // co x (B*HW)
    Matrix y(co * HW, B);
    for (Eigen::Index s = 0; s < B; ++s)
      for (Eigen::Index c = 0; c < co; ++c)
        for (Eigen::Index q = 0; q < HW; ++q) y(c * HW + q, s) = big(c, s * HW + q) + b(c);
    if (cache) cache->columns = std::move(col);
    return y;
  }

  Matrix operator()(const MaxPool& l) const {
    const auto C = static_cast<Eigen::Index>(l.in.c), H = static_cast<Eigen::Index>(l.in.h),
               W = static_cast<Eigen::Index>(l.in.w);
    const Eigen::Index Ho = H / 2, Wo = W / 2, B = x.cols();
    Matrix y(C * Ho * Wo, B);
    if (cache) cache->argmax.assign(static_cast<std::size_t>(y.size()), 0);
    for (Eigen::Index b = 0; b < B; ++b)
      for (Eigen::Index c = 0; c < C; ++c)
        for (Eigen::Index i = 0; i < Ho; ++i)
          for (Eigen::Index j = 0; j < Wo; ++j) {
            Eigen::Index best = c * H * W + (2 * i) * W + 2 * j;
            for (Eigen::Index di = 0; di < 2; ++di)
              for (Eigen::Index dj = 0; dj < 2; ++dj) {
                const Eigen::Index idx = c * H * W + (2 * i + di) * W + (2 * j + dj);
                if (x(idx, b) > x(best, b)) best = idx;
              }
            const Eigen::Index o = c * Ho * Wo + i * Wo + j;
            y(o, b) = x(best, b);
            if (cache) cache->argmax[static_cast<std::size_t>(b * y.rows() + o)] = best;
          }
    return y;
  }

  Matrix operator()(const AvgPool& l) const {
    const auto C = static_cast<Eigen::Index>(l.in.c), H = static_cast<Eigen::Index>(l.in.h),
               W = static_cast<Eigen::Index>(l.in.w);
    Matrix y(x.rows(), x.cols());
    for (Eigen::Index b = 0; b < x.cols(); ++b)
      for (Eigen::Index c = 0; c < C; ++c)
        for (Eigen::Index i = 0; i < H; ++i)
          for (Eigen::Index j = 0; j < W; ++j) {
            const Eigen::Index i1 = (i + 1) % H, j1 = (j + 1) % W, base = c * H * W;
            y(base + i * W + j, b) =
                0.25 * (x(base + i * W + j, b) + x(base + i * W + j1, b) + x(base + i1 * W + j, b) + x(base + i1 * W + j1, b));
          }
    return y;
  }

  Matrix operator()(const GlobalAvgPool& l) const {
    const auto C = static_cast<Eigen::Index>(l.in.c), HW = static_cast<Eigen::Index>(l.in.h * l.in.w);
    Matrix y(C, x.cols());
    for (Eigen::Index b = 0; b < x.cols(); ++b)
      for (Eigen::Index c = 0; c < C; ++c) y(c, b) = x.col(b).segment(c * HW, HW).mean();
    return y;
  }

  Matrix operator()(const Relu&) const {
    if (cache) cache->input = x;
    return x.cwiseMax(0.0);
  }
};

struct Backward {
  const ParamVector& p;
  const LayerCache& cache;
  const Matrix& dy;
  ParamVector& grad;

  Matrix operator()(const Dense& l) const {
    const auto out = static_cast<Eigen::Index>(l.out), in = static_cast<Eigen::Index>(l.in);
    Eigen::Map<const Matrix> Wt(p.data() + l.offset, out, in);
    Eigen::Map<Matrix> dW(grad.data() + l.offset, out, in);
    Eigen::Map<Eigen::VectorXd> db(grad.data() + l.offset + out * in, out);
    dW.noalias() += dy * cache.input.transpose();
    db += dy.rowwise().sum();
    return Wt.transpose() * dy;
  }

  Matrix operator()(const ConvPeriodic& l) const {
    const auto co = static_cast<Eigen::Index>(l.out_channels);
    const auto HW = static_cast<Eigen::Index>(l.in.h * l.in.w);
    const Eigen::Index B = dy.cols();
    Eigen::Map<const Matrix> Wt(p.data() + l.offset, co, static_cast<Eigen::Index>(l.in.c * 9));
    Eigen::Map<Matrix> dW(grad.data() + l.offset, co, Wt.cols());
    Eigen::Map<Eigen::VectorXd> db(grad.data() + l.offset + Wt.size(), co);
    Matrix big(co, B * HW);
    for (Eigen::Index s = 0; s < B; ++s)
      for (Eigen::Index c = 0; c < co; ++c)
        for (Eigen::Index q = 0; q < HW; ++q) big(c, s * HW + q) = dy(c * HW + q, s);
    dW.noalias() += big * cache.columns.transpose();
    db += big.rowwise().sum();
    Matrix dcol = Wt.transpose() * big;
    return col2im(l, dcol, B);
  }

  Matrix operator()(const MaxPool& l) const {
    Matrix dx = Matrix::Zero(static_cast<Eigen::Index>(l.in.size()), dy.cols());
    for (Eigen::Index b = 0; b < dy.cols(); ++b)
      for (Eigen::Index o = 0; o < dy.rows(); ++o)
        dx(cache.argmax[static_cast<std::size_t>(b * dy.rows() + o)], b) += dy(o, b);
    return dx;
  }

  Matrix operator()(const AvgPool& l) const {
    const auto C = static_cast<Eigen::Index>(l.in.c), H = static_cast<Eigen::Index>(l.in.h),
               W = static_cast<Eigen::Index>(l.in.w);
    Matrix dx = Matrix::Zero(dy.rows(), dy.cols());
    for (Eigen::Index b = 0; b < dy.cols(); ++b)
      for (Eigen::Index c = 0; c < C; ++c)
        for (Eigen::Index i = 0; i < H; ++i)
          for (Eigen::Index j = 0; j < W; ++j) {
            const Eigen::Index i1 = (i + 1) % H, j1 = (j + 1) % W, base = c * H * W;
            const double g = 0.25 * dy(base + i * W + j, b);
            dx(base + i * W + j, b) += g;
            dx(base + i * W + j1, b) += g;
            dx(base + i1 * W + j, b) += g;
            dx(base + i1 * W + j1, b) += g;
          }
    return dx;
  }

  Matrix operator()(const GlobalAvgPool& l) const {
    const auto C = static_cast<Eigen::Index>(l.in.c), HW = static_cast<Eigen::Index>(l.in.h * l.in.w);
    Matrix dx(C * HW, dy.cols());
    for (Eigen::Index b = 0; b < dy.cols(); ++b)
      for (Eigen::Index c = 0; c < C; ++c) dx.col(b).segment(c * HW, HW).setConstant(dy(c, b) / static_cast<double>(HW));
    return dx;
  }

  Matrix operator()(const Relu&) const { return (cache.input.array() > 0.0).select(dy, 0.0); }
};

}  // namespace detail

/// Scratch state for one training forward/backward pass.
struct Workspace {
  std::vector<LayerCache> caches;
};

/// A feed-forward stack of layers with one flat parameter vector.
class Network {
 public:
  Network() = default;
  explicit Network(Shape input) : input_(input), current_(input) {}

  Network& dense(std::size_t units) {
    Dense l{current_.size(), units, param_count_};
    push(l, l.param_count());
    return *this;
  }
  Network& conv(std::size_t channels) {
    check_image("conv");
    ConvPeriodic l{current_, channels, param_count_};
    push(l, l.param_count());
    return *this;
  }
  Network& maxpool() {
    check_image("maxpool");
    if (current_.h % 2 || current_.w % 2) throw std::invalid_argument("maxpool: odd spatial size " + to_string(current_));
    push(MaxPool{current_}, 0);
    return *this;
  }
  Network& avgpool() {
    check_image("avgpool");
    push(AvgPool{current_}, 0);
    return *this;
  }
  Network& global_avg_pool() {
    push(GlobalAvgPool{current_}, 0);
    return *this;
  }
  Network& relu() {
    push(Relu{current_}, 0);
    return *this;
  }
  /// Reinterprets the current image as a flat feature vector.
  Network& flatten() {
    current_ = {current_.size(), 1, 1};
    return *this;
  }

  Shape input_shape() const { return input_; }
  Shape output_shape() const { return current_; }
  std::size_t param_count() const { return param_count_; }
  const std::vector<Layer>& layers() const { return layers_; }

  /// He-uniform weights, zero biases.
  void init(SeedStream& rng) {
    params = ParamVector::Zero(static_cast<Eigen::Index>(param_count_));
    for (const auto& layer : layers_) {
      std::size_t fan_in = 0, nw = 0, off = 0;
      if (auto* d = std::get_if<Dense>(&layer)) {
        fan_in = d->in;
        nw = d->in * d->out;
        off = d->offset;
      } else if (auto* c = std::get_if<ConvPeriodic>(&layer)) {
        fan_in = c->in.c * 9;
        nw = fan_in * c->out_channels;
        off = c->offset;
      } else {
        continue;
      }
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
      for (std::size_t k = 0; k < nw; ++k) params[static_cast<Eigen::Index>(off + k)] = rng.uniform(-limit, limit);
    }
  }

  /// Inference with an explicit parameter vector (read-only, thread-safe).
  Matrix forward_with(const ParamVector& p, const Matrix& x) const {
    check_input(x);
    Matrix a = x;
    for (const auto& layer : layers_) a = std::visit(detail::Forward{p, a, nullptr}, layer);
    return a;
  }

  Matrix forward(const Matrix& x) const { return forward_with(params, x); }

  /// Training forward pass that records what backward needs.
  Matrix forward(const ParamVector& p, const Matrix& x, Workspace& ws) const {
    check_input(x);
    ws.caches.resize(layers_.size());
    Matrix a = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) a = std::visit(detail::Forward{p, a, &ws.caches[i]}, layers_[i]);
    return a;
  }

  /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
  Matrix backward(const ParamVector& p, const Workspace& ws, const Matrix& dout, ParamVector& grad) const {
    Matrix d = dout;
    for (std::size_t i = layers_.size(); i-- > 0;) d = std::visit(detail::Backward{p, ws.caches[i], d, grad}, layers_[i]);
    return d;
  }

  ParamVector params;

 private:
  void push(Layer l, std::size_t n) {
    layers_.push_back(l);
    param_count_ += n;
    current_ = nn::output_shape(layers_.back());
  }
  void check_image(const char* what) const {
    if (current_.h < 2 || current_.w < 2) throw std::invalid_argument(std::string(what) + ": needs an image input, have " + to_string(current_));
  }
  void check_input(const Matrix& x) const {
    if (static_cast<std::size_t>(x.rows()) != input_.size()) {
      std::ostringstream os;
      os << "network: input has " << x.rows() << " features, expected " << input_.size();
      throw std::invalid_argument(os.str());
    }
  }

  Shape input_;
  Shape current_;
  std::vector<Layer> layers_;
  std::size_t param_count_ = 0;
};

/// Mean squared error over all entries and its gradient w.r.t. the prediction.
inline double mse(const Matrix& pred, const Matrix& target, Matrix* dpred = nullptr) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw std::invalid_argument("mse: prediction/target shape mismatch");
  const Matrix diff = pred - target;
  const double n = static_cast<double>(diff.size());
  if (dpred) *dpred = (2.0 / n) * diff;
  return diff.squaredNorm() / n;
}

}  // namespace auxbo::nn
