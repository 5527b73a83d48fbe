#include <gtest/gtest.h>

#include <cmath>

#include "auxbo/nn/arch.hpp"
#include "auxbo/nn/network.hpp"
#include "auxbo/nn/train.hpp"
#include "auxbo/oracle/finite_diff.hpp"
#include "auxbo/tasks/nanoparticle.hpp"
#include "auxbo/validation.hpp"

using namespace auxbo;
using namespace auxbo::nn;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, SeedStream& rng) {
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.normal();
  return m;
}

// Rolls every channel of column-stacked C x H x W images by (p, q).
Matrix roll_images(const Matrix& x, Shape s, int p, int q) {
  Matrix out(x.rows(), x.cols());
  const int H = static_cast<int>(s.h), W = static_cast<int>(s.w);
  for (Eigen::Index b = 0; b < x.cols(); ++b)
    for (std::size_t c = 0; c < s.c; ++c)
      for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j) {
          const int si = ((i - p) % H + H) % H, sj = ((j - q) % W + W) % W;
          out(c * H * W + i * W + j, b) = x(c * H * W + si * W + sj, b);
        }
  return out;
}

}  // namespace

TEST(Forward, ZeroParamsGiveZero) {
  auto net = build_network("mlp:16x3", {5, 1, 1}, 2);
  net.params = ParamVector::Zero(net.param_count());
  SeedStream rng(1, "zero");
  EXPECT_EQ(net.forward(random_matrix(5, 4, rng)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Forward, IdentityDense) {
  Network net({4, 1, 1});
  net.dense(2);
  net.params = ParamVector::Zero(net.param_count());
  // Column-major 2x4 weight: rows select inputs 1 and 3.
  net.params[1 * 2 + 0] = 1.0;
  net.params[3 * 2 + 1] = 1.0;
  SeedStream rng(2, "id");
  const Matrix x = random_matrix(4, 3, rng);
  const Matrix y = net.forward(x);
  EXPECT_EQ(y.row(0), x.row(1));
  EXPECT_EQ(y.row(1), x.row(3));
}

TEST(Forward, PeriodicConvOnConstantImage) {
  Network net({1, 6, 6});
  net.conv(1);
  net.params = ParamVector::Zero(net.param_count());
  for (int k = 0; k < 9; ++k) net.params[k] = 1.0;
  const Matrix x = Matrix::Constant(36, 1, 2.5);
  const Matrix y = net.forward(x);
  for (Eigen::Index k = 0; k < y.size(); ++k) EXPECT_DOUBLE_EQ(y(k), 9 * 2.5);
}

TEST(Forward, InputShapeMismatch) {
  auto net = build_network("mlp:8x2", {3, 1, 1}, 1);
  SeedStream rng(3, "shape");
  net.init(rng);
  EXPECT_THROW(net.forward(Matrix::Zero(4, 2)), std::invalid_argument);
}

TEST(Forward, ShapeChainChecks) {
  Network net({1, 3, 3});
  EXPECT_THROW(net.maxpool(), std::invalid_argument);
  Network flat({7, 1, 1});
  EXPECT_THROW(flat.conv(2), std::invalid_argument);
}

TEST(Backward, DenseFiniteDifference) {
  const auto c = validation::gradient_check("dense", validation::gradient_net_dense);
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(Backward, ConvMaxpoolFiniteDifference) {
  const auto c = validation::gradient_check("conv", validation::gradient_net_conv);
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(Backward, AvgPoolFiniteDifference) {
  auto make = [] {
    Network net({2, 4, 4});
    net.conv(2).relu().avgpool().flatten().dense(2);
    return net;
  };
  const auto c = validation::gradient_check("avgpool", +make);
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(Backward, ZeroTargetsZeroOutputNet) {
  auto net = build_network("mlp:8x2", {3, 1, 1}, 2);
  net.params = ParamVector::Zero(net.param_count());
  SeedStream rng(4, "zero-grad");
  const Matrix x = random_matrix(3, 5, rng);
  Workspace ws;
  Matrix dout;
  const Matrix y = net.forward(net.params, x, ws);
  mse(y, Matrix::Zero(2, 5), &dout);
  ParamVector g = ParamVector::Zero(net.param_count());
  net.backward(net.params, ws, dout, g);
  EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mse, ShapeMismatch) { EXPECT_THROW(mse(Matrix::Zero(2, 2), Matrix::Zero(2, 3)), std::invalid_argument); }

TEST(Adam, ZeroGradientLeavesParams) {
  ParamVector p = ParamVector::LinSpaced(5, -1, 1), g = ParamVector::Ones(5);
  AdamState s;
  adam_step(p, g, s, 1e-3);
  const ParamVector m = s.m, v = s.v;
  adam_step(p, ParamVector::Zero(5), s, 1e-3);
  // Bias-corrected first moment is still non-zero, so the update is not zero;
  // the raw moments decay by their betas.
  EXPECT_TRUE(s.m.isApprox(0.9 * m));
  EXPECT_TRUE(s.v.isApprox(0.999 * v));
  ParamVector q = ParamVector::LinSpaced(5, -1, 1);
  AdamState fresh;
  adam_step(q, ParamVector::Zero(5), fresh, 1e-3);
  EXPECT_EQ(q, ParamVector::LinSpaced(5, -1, 1));
}

TEST(Adam, FirstStepIsSignedLr) {
  ParamVector p = ParamVector::Zero(3), g(3);
  g << 2.0, -0.5, 1e-3;
  AdamState s;
  adam_step(p, g, s, 0.01);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], -0.01 * g[i] / (std::abs(g[i]) + 1e-8), 1e-12);
}

TEST(Adam, RejectsNonFinite) {
  ParamVector p = ParamVector::Zero(2), g(2);
  g << 1.0, NAN;
  AdamState s;
  EXPECT_THROW(adam_step(p, g, s, 1e-3), DivergenceError);
}

TEST(Adam, DeterministicTraining) {
  SeedStream d(5, "data");
  const Matrix X = random_matrix(3, 12, d), T = random_matrix(1, 12, d);
  auto run = [&] {
    auto net = build_network("mlp:16x2", {3, 1, 1}, 1);
    SeedStream rng(6, "train");
    net.init(rng);
    fit_network(net, X, T, {1e-3, 50, 4}, rng);
    return net.params;
  };
  EXPECT_EQ(run(), run());
}

TEST(CosineLr, Examples) {
  EXPECT_EQ(cosine_lr(0, 100, 1e-3), 1e-3);
  EXPECT_NEAR(cosine_lr(50, 100, 1e-3), 5e-4, 1e-15);
  for (int total : {100, 250, 1000}) EXPECT_LT(cosine_lr(total - 1, total, 1e-3), 0.01 * 1e-3);
  EXPECT_THROW(cosine_lr(0, 0, 1e-3), std::invalid_argument);
  EXPECT_THROW(cosine_lr(100, 100, 1e-3), std::out_of_range);
}

TEST(Conv, TranslationEquivariance) {
  Network net({2, 8, 8});
  net.conv(4).relu().conv(3).relu().avgpool();
  SeedStream rng(7, "equiv");
  net.init(rng);
  const Matrix x = random_matrix(2 * 64, 3, rng);
  const Matrix y = net.forward(x);
  for (auto [p, q] : {std::pair{1, 0}, {0, 3}, {5, 7}}) {
    const Matrix lhs = net.forward(roll_images(x, net.input_shape(), p, q));
    const Matrix rhs = roll_images(y, net.output_shape(), p, q);
    EXPECT_EQ((lhs - rhs).cwiseAbs().maxCoeff(), 0.0) << p << "," << q;
  }
}

TEST(Conv, TiInvariantToRollsBy16) {
  auto net = build_network("conv-ti", {1, 32, 32}, 3);
  SeedStream rng(8, "conv-ti");
  net.init(rng);
  for (Eigen::Index k = 0; k < net.params.size(); ++k) net.params[k] += 0.01 * rng.normal();
  Matrix x(1024, 2);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = rng.coin() ? 1.0 : 0.0;
  const Matrix y = net.forward(x);
  for (auto [p, q] : {std::pair{16, 0}, {0, 16}, {16, 16}}) {
    const Matrix r = net.forward(roll_images(x, {1, 32, 32}, p, q));
    EXPECT_LT((r - y).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(Arch, ParseAndBuild) {
  const auto m = parse_mlp("mlp:256x8");
  EXPECT_EQ(m.units, 256u);
  EXPECT_EQ(m.layers, 8u);
  for (const char* bad : {"mlp:", "mlp:256", "mlp:x4", "mlp:256x", "mlp:0x4", "mlp:256x4x", "cnn", "mlp:-1x3"})
    EXPECT_THROW(validate_architecture(bad), std::invalid_argument) << bad;
  EXPECT_NO_THROW(validate_architecture("conv-ti"));
  EXPECT_NO_THROW(validate_architecture("conv-td"));
  const auto net = build_network("mlp:4x2", {3, 1, 1}, 2);
  EXPECT_EQ(net.param_count(), (3 * 4 + 4) + (4 * 4 + 4) + (4 * 2 + 2));
  EXPECT_EQ(build_network("conv-td", {1, 32, 32}, 5).output_shape(), (Shape{5, 1, 1}));
  EXPECT_EQ(build_network("conv-ti", {1, 32, 32}, 500).output_shape(), (Shape{500, 1, 1}));
}

TEST(Training, LossDecreasesOverFirstTenEpochs) {
  using namespace auxbo::nanoparticle;
  SeedStream data(9, "np-data");
  Matrix X(6, 20), T(kSpectrumSize, 20);
  NanoparticleTask task(NanoparticleTask::Objective::narrowband);
  const BoxScaler scaler(task.bounds());
  for (int n = 0; n < 20; ++n) {
    const Vector x = data.uniform_in(task.bounds());
    const Vector u = scaler.forward(x), z = task.g(x);
    for (int d = 0; d < 6; ++d) X(d, n) = u[d];
    for (std::size_t d = 0; d < kSpectrumSize; ++d) T(d, n) = z[d];
  }
  for (Eigen::Index r = 0; r < T.rows(); ++r) {
    const double mean = T.row(r).mean();
    const double sd = std::sqrt((T.row(r).array() - mean).square().mean());
    T.row(r) = (T.row(r).array() - mean) / (sd > 1e-12 ? sd : 1.0);
  }
  int monotone = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto net = build_network("mlp:256x8", {6, 1, 1}, kSpectrumSize);
    SeedStream rng(seed, "train");
    net.init(rng);
    const auto stats = fit_network(net, X, T, {1e-3, 1000, 0}, rng);
    bool ok = true;
    for (int e = 1; e < 10; ++e) ok = ok && stats.epoch_loss[e] < stats.epoch_loss[e - 1];
    monotone += ok;
  }
  EXPECT_GE(monotone, 9);
}

TEST(Training, EmptyAndMismatchedData) {
  auto net = build_network("mlp:4x1", {2, 1, 1}, 1);
  SeedStream rng(10, "bad");
  net.init(rng);
  EXPECT_THROW(fit_network(net, Matrix(2, 0), Matrix(1, 0), {}, rng), std::invalid_argument);
  EXPECT_THROW(fit_network(net, Matrix::Zero(2, 3), Matrix::Zero(1, 2), {}, rng), std::invalid_argument);
}
