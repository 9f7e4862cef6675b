#pragma once

#include <cmath>

#include "nightatlas/neuralnet/network.hpp"

namespace nightatlas::neuralnet {

// First/second moment state mirroring the network parameters.
template <typename T>
struct AdamStateT {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long t = 0;
  std::vector<TensorT<T>> m_weights, v_weights;
  std::vector<std::vector<T>> m_biases, v_biases;

  static AdamStateT for_network(const NetworkT<T>& net, double lr = 1e-4) {
    AdamStateT state;
    state.learning_rate = lr;
    state.m_weights.resize(net.weights.size());
    state.v_weights.resize(net.weights.size());
    state.m_biases.resize(net.biases.size());
    state.v_biases.resize(net.biases.size());
    for (std::size_t i = 0; i < net.weights.size(); ++i) {
      if (net.weights[i].empty()) continue;
      state.m_weights[i] = TensorT<T>(net.weights[i].shape);
      state.v_weights[i] = TensorT<T>(net.weights[i].shape);
      state.m_biases[i].assign(net.biases[i].size(), T(0));
      state.v_biases[i].assign(net.biases[i].size(), T(0));
    }
    return state;
  }
};

using AdamState = AdamStateT<float>;

namespace detail {
template <typename T>
void adam_update_span(T* params, const T* grads, T* m, T* v, std::size_t n, double lr,
                      double beta1, double beta2, double eps, double bias1, double bias2) {
  for (std::size_t i = 0; i < n; ++i) {
    const double g = static_cast<double>(grads[i]);
    const double mi = beta1 * static_cast<double>(m[i]) + (1.0 - beta1) * g;
    const double vi = beta2 * static_cast<double>(v[i]) + (1.0 - beta2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double m_hat = mi / bias1;
    const double v_hat = vi / bias2;
    params[i] -= static_cast<T>(lr * m_hat / (std::sqrt(v_hat) + eps));
  }
}
}  // namespace detail

// One bias-corrected Adam step over every parameter tensor.
template <typename T>
void adam_step(AdamStateT<T>& state, NetworkT<T>& net, const Gradients<T>& grads) {
  ++state.t;
  const double bias1 = 1.0 - std::pow(state.beta1, state.t);
  const double bias2 = 1.0 - std::pow(state.beta2, state.t);
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    if (net.weights[i].empty()) continue;
    if (grads.weights[i].size() != net.weights[i].size() ||
        grads.biases[i].size() != net.biases[i].size()) {
      throw core::DimensionError("adam_step: gradient shape mismatch at layer " +
                                 std::to_string(i));
    }
    detail::adam_update_span(net.weights[i].data.data(), grads.weights[i].data.data(),
                             state.m_weights[i].data.data(), state.v_weights[i].data.data(),
                             net.weights[i].size(), state.learning_rate, state.beta1,
                             state.beta2, state.eps, bias1, bias2);
    detail::adam_update_span(net.biases[i].data(), grads.biases[i].data(),
                             state.m_biases[i].data(), state.v_biases[i].data(),
                             net.biases[i].size(), state.learning_rate, state.beta1, state.beta2,
                             state.eps, bias1, bias2);
  }
}

}  // namespace nightatlas::neuralnet
