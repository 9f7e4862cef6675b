#include "nightatlas/neuralnet/network.hpp"

#include <cmath>

#include "nightatlas/core/rng.hpp"

namespace nightatlas::neuralnet {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv: return "conv";
    case LayerKind::kDense: return "dense";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kDropout: return "dropout";
    case LayerKind::kFlatten: return "flatten";
  }
  return "relu";
}

LayerKind layer_kind_from_string(const std::string& name) {
  if (name == "conv") return LayerKind::kConv;
  if (name == "dense") return LayerKind::kDense;
  if (name == "relu") return LayerKind::kRelu;
  if (name == "dropout") return LayerKind::kDropout;
  if (name == "flatten") return LayerKind::kFlatten;
  throw core::ConfigError("unknown layer kind: " + name);
}

NetConfig default_net_config(int input_size, int map_divisor, int class_count) {
  if (map_divisor < 1) throw core::ConfigError("map_divisor must be >= 1");
  const auto maps = [map_divisor](int full) { return std::max(1, full / map_divisor); };
  NetConfig cfg;
  cfg.class_count = class_count;
  cfg.input_size = input_size;
  cfg.input_channels = 1;
  auto add = [&cfg](LayerSpec s) { cfg.layers.push_back(s); };
  add(LayerSpec::conv(7, 2, 3, maps(96)));
  add(LayerSpec::relu());
  add(LayerSpec::conv(3, 2, 1, maps(96)));
  add(LayerSpec::relu());
  add(LayerSpec::conv(5, 2, 2, maps(256)));
  add(LayerSpec::relu());
  add(LayerSpec::conv(3, 2, 1, maps(256)));
  add(LayerSpec::relu());
  add(LayerSpec::conv(3, 1, 1, maps(384)));
  add(LayerSpec::relu());
  add(LayerSpec::conv(3, 1, 1, maps(384)));
  add(LayerSpec::relu());
  add(LayerSpec::conv(3, 1, 1, maps(256)));
  add(LayerSpec::relu());
  add(LayerSpec::conv(3, 2, 1, maps(256)));
  add(LayerSpec::relu());
  add(LayerSpec::flat());
  add(LayerSpec::dense(maps(256)));
  add(LayerSpec::relu());
  add(LayerSpec::dropout(0.4));
  add(LayerSpec::dense(maps(256)));
  add(LayerSpec::relu());
  add(LayerSpec::dropout(0.4));
  add(LayerSpec::dense(class_count));
  return cfg;
}

std::vector<std::vector<int>> trace_shapes(const NetConfig& cfg) {
  std::vector<std::vector<int>> shapes;
  // (channels, height, width); flat activations use (units).
  std::vector<int> cur{cfg.input_channels, cfg.input_size, cfg.input_size};
  shapes.push_back(cur);
  for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
    const LayerSpec& layer = cfg.layers[i];
    const std::string where = "layer " + std::to_string(i) + " (" + to_string(layer.kind) + ")";
    switch (layer.kind) {
      case LayerKind::kConv: {
        if (cur.size() != 3) throw core::ConfigError(where + ": conv needs spatial input");
        const int oh = conv_out_dim(cur[1], layer.kernel, layer.stride, layer.pad);
        const int ow = conv_out_dim(cur[2], layer.kernel, layer.stride, layer.pad);
        if (layer.kernel < 1 || layer.out_maps < 1 || oh < 1 || ow < 1) {
          throw core::ConfigError(where + ": invalid geometry");
        }
        cur = {layer.out_maps, oh, ow};
        break;
      }
      case LayerKind::kDense: {
        if (cur.size() != 1) {
          throw core::ConfigError(where + ": dense needs flattened input");
        }
        if (layer.units < 1) throw core::ConfigError(where + ": units must be >= 1");
        cur = {layer.units};
        break;
      }
      case LayerKind::kRelu:
      case LayerKind::kDropout:
        if (layer.kind == LayerKind::kDropout && (layer.rate < 0.0 || layer.rate >= 1.0)) {
          throw core::ConfigError(where + ": rate must be in [0,1)");
        }
        break;
      case LayerKind::kFlatten: {
        if (cur.size() != 3) throw core::ConfigError(where + ": flatten needs spatial input");
        cur = {cur[0] * cur[1] * cur[2]};
        break;
      }
    }
    shapes.push_back(cur);
  }
  if (cfg.layers.empty() || cfg.layers.back().kind != LayerKind::kDense ||
      cfg.layers.back().units != cfg.class_count) {
    throw core::ConfigError("network must end in a dense layer with class_count units");
  }
  return shapes;
}

template <typename T>
NetworkT<T> build_network_t(const NetConfig& cfg, std::uint64_t seed) {
  const auto shapes = trace_shapes(cfg);
  NetworkT<T> net;
  net.cfg = cfg;
  net.init_seed = seed;
  net.weights.resize(cfg.layers.size());
  net.biases.resize(cfg.layers.size());
  for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
    const LayerSpec& layer = cfg.layers[i];
    core::Rng rng(core::derive_seed(seed, i));
    if (layer.kind == LayerKind::kConv) {
      const int in_c = shapes[i][0];
      const int fan_in = in_c * layer.kernel * layer.kernel;
      const double std_dev = std::sqrt(2.0 / fan_in);
      net.weights[i] = TensorT<T>({layer.out_maps, in_c, layer.kernel, layer.kernel});
      for (auto& w : net.weights[i].data) w = static_cast<T>(rng.normal() * std_dev);
      net.biases[i].assign(layer.out_maps, T(0));
    } else if (layer.kind == LayerKind::kDense) {
      const int fan_in = shapes[i][0];
      const double std_dev = std::sqrt(2.0 / fan_in);
      net.weights[i] = TensorT<T>({layer.units, fan_in});
      for (auto& w : net.weights[i].data) w = static_cast<T>(rng.normal() * std_dev);
      net.biases[i].assign(layer.units, T(0));
    }
  }
  return net;
}

Network build_network(const NetConfig& cfg, std::uint64_t seed) {
  return build_network_t<float>(cfg, seed);
}

template <typename T>
ForwardResult<T> forward(const NetworkT<T>& net, const TensorT<T>& batch, RunMode mode,
                         std::uint64_t seed) {
  ForwardResult<T> result;
  result.activations.reserve(net.cfg.layers.size());
  TensorT<T> cur = batch;
  for (std::size_t i = 0; i < net.cfg.layers.size(); ++i) {
    const LayerSpec& layer = net.cfg.layers[i];
    result.activations.push_back(cur);
    switch (layer.kind) {
      case LayerKind::kConv:
        cur = conv2d_forward(cur, net.weights[i], net.biases[i], layer.stride, layer.pad);
        break;
      case LayerKind::kDense:
        cur = dense_forward(cur, net.weights[i], net.biases[i]);
        break;
      case LayerKind::kRelu:
        cur = relu_forward(cur);
        break;
      case LayerKind::kDropout:
        if (net.cfg.dropout_active) {
          cur = dropout_forward(cur, layer.rate, mode, core::derive_seed(seed, i));
        }
        break;
      case LayerKind::kFlatten:
        cur = flatten(cur);
        break;
    }
  }
  result.logits = cur;
  result.probabilities = softmax(cur);
  return result;
}

template <typename T>
Gradients<T> backward(const NetworkT<T>& net, const ForwardResult<T>& cache,
                      const TensorT<T>& grad_logits, RunMode mode, std::uint64_t seed) {
  Gradients<T> grads;
  grads.weights.resize(net.cfg.layers.size());
  grads.biases.resize(net.cfg.layers.size());
  TensorT<T> grad = grad_logits;
  for (std::size_t idx = net.cfg.layers.size(); idx-- > 0;) {
    const LayerSpec& layer = net.cfg.layers[idx];
    const TensorT<T>& input = cache.activations[idx];
    switch (layer.kind) {
      case LayerKind::kConv: {
        auto [gx, gw, gb] = conv2d_backward(input, net.weights[idx], grad, layer.stride,
                                            layer.pad);
        grads.weights[idx] = std::move(gw);
        grads.biases[idx] = std::move(gb);
        grad = std::move(gx);
        break;
      }
      case LayerKind::kDense: {
        auto [gx, gw, gb] = dense_backward(input, net.weights[idx], grad);
        grads.weights[idx] = std::move(gw);
        grads.biases[idx] = std::move(gb);
        grad = std::move(gx);
        break;
      }
      case LayerKind::kRelu:
        grad = relu_backward(input, grad);
        break;
      case LayerKind::kDropout:
        if (net.cfg.dropout_active && mode == RunMode::kTrain && layer.rate > 0.0) {
          const auto mask = dropout_mask<T>(grad.size(), layer.rate,
                                            core::derive_seed(seed, idx));
          for (std::size_t j = 0; j < grad.data.size(); ++j) grad.data[j] *= mask[j];
        }
        break;
      case LayerKind::kFlatten:
        grad = grad.reshaped(input.shape);
        break;
    }
  }
  return grads;
}

template <typename T>
double l2_penalty(const NetworkT<T>& net, double lambda, Gradients<T>* grads) {
  if (lambda < 0.0) throw core::ConfigError("l2_penalty: lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    const auto& w = net.weights[i];
    if (w.empty()) continue;
    for (const T v : w.data) sum_sq += static_cast<double>(v) * static_cast<double>(v);
    if (grads) {
      auto& gw = grads->weights[i];
      for (std::size_t j = 0; j < w.data.size(); ++j) {
        gw.data[j] += static_cast<T>(lambda) * w.data[j];
      }
    }
  }
  return 0.5 * lambda * sum_sq;
}

long count_dense_connections(const std::vector<long>& sizes) {
  long total = 0;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) total += sizes[i] * sizes[i + 1];
  return total;
}

std::vector<long> dense_chain_sizes(const NetConfig& cfg) {
  std::vector<long> sizes;
  for (const auto& layer : cfg.layers) {
    if (layer.kind == LayerKind::kDense) sizes.push_back(layer.units);
  }
  return sizes;
}

template NetworkT<float> build_network_t<float>(const NetConfig&, std::uint64_t);
template NetworkT<double> build_network_t<double>(const NetConfig&, std::uint64_t);
template ForwardResult<float> forward<float>(const NetworkT<float>&, const TensorT<float>&,
                                             RunMode, std::uint64_t);
template ForwardResult<double> forward<double>(const NetworkT<double>&, const TensorT<double>&,
                                               RunMode, std::uint64_t);
template Gradients<float> backward<float>(const NetworkT<float>&, const ForwardResult<float>&,
                                          const TensorT<float>&, RunMode, std::uint64_t);
template Gradients<double> backward<double>(const NetworkT<double>&,
                                            const ForwardResult<double>&,
                                            const TensorT<double>&, RunMode, std::uint64_t);
template double l2_penalty<float>(const NetworkT<float>&, double, Gradients<float>*);
template double l2_penalty<double>(const NetworkT<double>&, double, Gradients<double>*);

}  // namespace nightatlas::neuralnet
