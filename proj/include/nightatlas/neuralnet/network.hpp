#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nightatlas/neuralnet/layers.hpp"
#include "nightatlas/neuralnet/tensor.hpp"

namespace nightatlas::neuralnet {

enum class LayerKind { kConv, kDense, kRelu, kDropout, kFlatten };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  // conv
  int kernel = 0;
  int stride = 1;
  int pad = 0;
  int out_maps = 0;
  // dense
  int units = 0;
  // dropout
  double rate = 0.0;

  static LayerSpec conv(int kernel, int stride, int pad, int out_maps) {
    LayerSpec s;
    s.kind = LayerKind::kConv;
    s.kernel = kernel;
    s.stride = stride;
    s.pad = pad;
    s.out_maps = out_maps;
    return s;
  }
  static LayerSpec dense(int units) {
    LayerSpec s;
    s.kind = LayerKind::kDense;
    s.units = units;
    return s;
  }
  static LayerSpec relu() { return LayerSpec{}; }
  static LayerSpec dropout(double rate) {
    LayerSpec s;
    s.kind = LayerKind::kDropout;
    s.rate = rate;
    return s;
  }
  static LayerSpec flat() {
    LayerSpec s;
    s.kind = LayerKind::kFlatten;
    return s;
  }
};

struct NetConfig {
  std::vector<LayerSpec> layers;
  bool dropout_active = false;
  double l2_lambda = 0.0;
  int class_count = 4;
  int input_size = 224;
  int input_channels = 1;
};

// The canonical all-convolutional stack: eight conv layers (the three
// stride-2 3x3 convs stand where pooling would be), flatten, two dense
// layers with optional dropout 0.4 after each, and the class output.
// map_divisor shrinks every map/unit count for desk-scale runs
// (input_size 64, map_divisor 4 in CI).
NetConfig default_net_config(int input_size = 224, int map_divisor = 1, int class_count = 4);

template <typename T>
struct NetworkT {
  NetConfig cfg;
  // Parallel to cfg.layers; empty tensors for parameterless layers.
  std::vector<TensorT<T>> weights;
  std::vector<std::vector<T>> biases;
  std::uint64_t init_seed = 0;
};

using Network = NetworkT<float>;
using Network64 = NetworkT<double>;

// Walks the layer chain from (input_channels, input_size, input_size),
// validating shapes; throws ConfigError naming the offending layer index.
// Returns the flat feature count entering each layer (activation shapes).
std::vector<std::vector<int>> trace_shapes(const NetConfig& cfg);

// He-normal weights (std sqrt(2/fan_in)), zero biases, deterministic from
// the seed.
template <typename T>
NetworkT<T> build_network_t(const NetConfig& cfg, std::uint64_t seed);

Network build_network(const NetConfig& cfg, std::uint64_t seed);

template <typename T>
struct ForwardResult {
  TensorT<T> probabilities;            // softmax output, rows sum to 1
  TensorT<T> logits;
  std::vector<TensorT<T>> activations; // activations[i] = input of layer i; back = logits input
};

// mode kTrain applies dropout masks (when cfg.dropout_active) keyed by
// (seed, layer index); kEval is deterministic and mask-free.
template <typename T>
ForwardResult<T> forward(const NetworkT<T>& net, const TensorT<T>& batch, RunMode mode,
                         std::uint64_t seed);

template <typename T>
struct Gradients {
  std::vector<TensorT<T>> weights;
  std::vector<std::vector<T>> biases;
};

// Backpropagates grad_logits through the cached forward pass. Dropout masks
// are regenerated from the same (seed, layer index) keys used by forward.
template <typename T>
Gradients<T> backward(const NetworkT<T>& net, const ForwardResult<T>& cache,
                      const TensorT<T>& grad_logits, RunMode mode, std::uint64_t seed);

// (lambda/2) * sum of squared conv/dense weights, biases excluded. When
// grads is non-null, lambda * W is added in place.
template <typename T>
double l2_penalty(const NetworkT<T>& net, double lambda, Gradients<T>* grads = nullptr);

// Sum of adjacent products over a fully-connected chain; the flatten ->
// first-dense edge is excluded by construction because only the dense sizes
// are listed.
long count_dense_connections(const std::vector<long>& sizes);

// Dense/output unit sizes of a config, for connection accounting.
std::vector<long> dense_chain_sizes(const NetConfig& cfg);

}  // namespace nightatlas::neuralnet
