#pragma once

// Architecture strings:
//   mlp:<units>x<layers>   fully connected, ReLU hidden layers
//   conv-ti                16-MP-32-MP-64-MP-128-MP-256, global average pool, FC 256x4
//   conv-td                8-AP-8-MP-16-AP-32-MP-32-AP, flatten, FC 256x4
// The output layer is linear in every case.

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>

#include "auxbo/nn/network.hpp"

namespace auxbo::nn {

struct MlpSpec {
  std::size_t units = 0;
  std::size_t layers = 0;
};

inline MlpSpec parse_mlp(std::string_view spec) {
  const auto bad = [&] { return std::invalid_argument("bad architecture '" + std::string(spec) + "' (expected mlp:<units>x<layers>)"); };
  if (spec.substr(0, 4) != "mlp:") throw bad();
  const auto body = spec.substr(4);
  const auto x = body.find('x');
  if (x == std::string_view::npos) throw bad();
  MlpSpec m;
  auto p1 = std::from_chars(body.data(), body.data() + x, m.units);
  auto p2 = std::from_chars(body.data() + x + 1, body.data() + body.size(), m.layers);
  if (p1.ec != std::errc{} || p1.ptr != body.data() + x || p2.ec != std::errc{} || p2.ptr != body.data() + body.size() ||
      m.units == 0)
    throw bad();
  return m;
}

inline bool is_conv_architecture(std::string_view spec) { return spec == "conv-ti" || spec == "conv-td"; }

inline void validate_architecture(std::string_view spec) {
  if (!is_conv_architecture(spec)) parse_mlp(spec);
}

/// Feature stack: everything except the final linear output layer.
inline Network build_body(std::string_view spec, Shape input) {
  Network net(input);
  if (spec == "conv-ti") {
    for (std::size_t ch : {16u, 32u, 64u, 128u}) net.conv(ch).relu().maxpool();
    net.conv(256).relu().global_avg_pool();
    for (int i = 0; i < 4; ++i) net.dense(256).relu();
  } else if (spec == "conv-td") {
    net.conv(8).relu().avgpool();
    net.conv(8).relu().maxpool();
    net.conv(16).relu().avgpool();
    net.conv(32).relu().maxpool();
    net.conv(32).relu().avgpool();
    net.flatten();
    for (int i = 0; i < 4; ++i) net.dense(256).relu();
  } else {
    const auto m = parse_mlp(spec);
    net.flatten();
    for (std::size_t i = 0; i < m.layers; ++i) net.dense(m.units).relu();
  }
  return net;
}

inline Network build_network(std::string_view spec, Shape input, std::size_t outputs) {
  Network net = build_body(spec, input);
  net.dense(outputs);
  return net;
}

}  // namespace auxbo::nn
