#pragma once

#include <algorithm>
#include <cmath>
#include <tuple>

#include "nightatlas/core/parallel.hpp"
#include "nightatlas/core/rng.hpp"
#include "nightatlas/neuralnet/tensor.hpp"

namespace nightatlas::neuralnet {

inline int conv_out_dim(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

// Cross-correlation with zero padding. x (B,C,H,W), weights (OC,C,K,K),
// bias length OC.
template <typename T>
TensorT<T> conv2d_forward(const TensorT<T>& x, const TensorT<T>& weights,
                          const std::vector<T>& bias, int stride, int pad) {
  const int batch = x.dim(0), in_c = x.dim(1), in_h = x.dim(2), in_w = x.dim(3);
  const int out_c = weights.dim(0), k = weights.dim(2);
  if (weights.dim(1) != in_c) {
    throw core::DimensionError("conv2d_forward: channel mismatch, input " +
                               shape_string(x.shape) + " vs weights " +
                               shape_string(weights.shape));
  }
  const int out_h = conv_out_dim(in_h, k, stride, pad);
  const int out_w = conv_out_dim(in_w, k, stride, pad);
  if (out_h < 1 || out_w < 1) {
    throw core::DimensionError("conv2d_forward: empty output for input " +
                               shape_string(x.shape));
  }

  TensorT<T> y({batch, out_c, out_h, out_w});
  core::parallel_for(static_cast<std::size_t>(batch) * out_c, [&](std::size_t job) {
    const int b = static_cast<int>(job) / out_c;
    const int oc = static_cast<int>(job) % out_c;
    for (int oy = 0; oy < out_h; ++oy) {
      T* out_row = &y.at(b, oc, oy, 0);
      for (int ox = 0; ox < out_w; ++ox) out_row[ox] = bias[oc];
      for (int c = 0; c < in_c; ++c) {
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= in_h) continue;
          const T* in_row = &x.at(b, c, iy, 0);
          for (int kx = 0; kx < k; ++kx) {
            const T w = weights.at(oc, c, ky, kx);
            if (w == T(0)) continue;
            const int ix0 = -pad + kx;
            for (int ox = 0; ox < out_w; ++ox) {
              const int ix = ix0 + ox * stride;
              if (ix >= 0 && ix < in_w) out_row[ox] += w * in_row[ix];
            }
          }
        }
      }
    }
  });
  return y;
}

// Exact gradients of conv2d_forward. Returns (grad_x, grad_w, grad_b).
template <typename T>
std::tuple<TensorT<T>, TensorT<T>, std::vector<T>> conv2d_backward(const TensorT<T>& x,
                                                                   const TensorT<T>& weights,
                                                                   const TensorT<T>& grad_out,
                                                                   int stride, int pad) {
  const int batch = x.dim(0), in_c = x.dim(1), in_h = x.dim(2), in_w = x.dim(3);
  const int out_c = weights.dim(0), k = weights.dim(2);
  const int out_h = grad_out.dim(2), out_w = grad_out.dim(3);
  if (grad_out.dim(0) != batch || grad_out.dim(1) != out_c) {
    throw core::DimensionError("conv2d_backward: grad shape mismatch");
  }

  TensorT<T> grad_x({batch, in_c, in_h, in_w});
  TensorT<T> grad_w(weights.shape);
  std::vector<T> grad_b(out_c, T(0));

  // grad_w / grad_b: each job owns one output map, so no write conflicts and
  // a fixed within-job accumulation order.
  core::parallel_for(static_cast<std::size_t>(out_c), [&](std::size_t job) {
    const int oc = static_cast<int>(job);
    for (int b = 0; b < batch; ++b) {
      for (int oy = 0; oy < out_h; ++oy) {
        const T* g_row = &grad_out.at(b, oc, oy, 0);
        for (int ox = 0; ox < out_w; ++ox) {
          const T g = g_row[ox];
          grad_b[oc] += g;
          if (g == T(0)) continue;
          for (int c = 0; c < in_c; ++c) {
            for (int ky = 0; ky < k; ++ky) {
              const int iy = oy * stride - pad + ky;
              if (iy < 0 || iy >= in_h) continue;
              const T* in_row = &x.at(b, c, iy, 0);
              for (int kx = 0; kx < k; ++kx) {
                const int ix = ox * stride - pad + kx;
                if (ix >= 0 && ix < in_w) grad_w.at(oc, c, ky, kx) += g * in_row[ix];
              }
            }
          }
        }
      }
    }
  });

  // grad_x: each job owns one batch item.
  core::parallel_for(static_cast<std::size_t>(batch), [&](std::size_t job) {
    const int b = static_cast<int>(job);
    for (int oc = 0; oc < out_c; ++oc) {
      for (int oy = 0; oy < out_h; ++oy) {
        const T* g_row = &grad_out.at(b, oc, oy, 0);
        for (int ox = 0; ox < out_w; ++ox) {
          const T g = g_row[ox];
          if (g == T(0)) continue;
          for (int c = 0; c < in_c; ++c) {
            for (int ky = 0; ky < k; ++ky) {
              const int iy = oy * stride - pad + ky;
              if (iy < 0 || iy >= in_h) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int ix = ox * stride - pad + kx;
                if (ix >= 0 && ix < in_w) grad_x.at(b, c, iy, ix) += g * weights.at(oc, c, ky, kx);
              }
            }
          }
        }
      }
    }
  });

  return {std::move(grad_x), std::move(grad_w), std::move(grad_b)};
}

// y = x W^T + b with x (B,IN), weights (OUT,IN).
template <typename T>
TensorT<T> dense_forward(const TensorT<T>& x, const TensorT<T>& weights,
                         const std::vector<T>& bias) {
  const int batch = x.dim(0), in_units = x.dim(1);
  const int out_units = weights.dim(0);
  if (weights.dim(1) != in_units) {
    throw core::DimensionError("dense_forward: input " + shape_string(x.shape) +
                               " vs weights " + shape_string(weights.shape));
  }
  TensorT<T> y({batch, out_units});
  for (int b = 0; b < batch; ++b) {
    const T* xin = &x.at(b, 0);
    for (int o = 0; o < out_units; ++o) {
      const T* w = &weights.at(o, 0);
      T acc = bias[o];
      for (int i = 0; i < in_units; ++i) acc += w[i] * xin[i];
      y.at(b, o) = acc;
    }
  }
  return y;
}

template <typename T>
std::tuple<TensorT<T>, TensorT<T>, std::vector<T>> dense_backward(const TensorT<T>& x,
                                                                  const TensorT<T>& weights,
                                                                  const TensorT<T>& grad_out) {
  const int batch = x.dim(0), in_units = x.dim(1);
  const int out_units = weights.dim(0);
  TensorT<T> grad_x({batch, in_units});
  TensorT<T> grad_w(weights.shape);
  std::vector<T> grad_b(out_units, T(0));
  for (int b = 0; b < batch; ++b) {
    const T* xin = &x.at(b, 0);
    T* gx = &grad_x.at(b, 0);
    for (int o = 0; o < out_units; ++o) {
      const T g = grad_out.at(b, o);
      grad_b[o] += g;
      if (g == T(0)) continue;
      const T* w = &weights.at(o, 0);
      T* gw = &grad_w.at(o, 0);
      for (int i = 0; i < in_units; ++i) {
        gx[i] += g * w[i];
        gw[i] += g * xin[i];
      }
    }
  }
  return {std::move(grad_x), std::move(grad_w), std::move(grad_b)};
}

template <typename T>
TensorT<T> relu_forward(const TensorT<T>& x) {
  TensorT<T> y = x;
  for (auto& v : y.data) v = std::max(v, T(0));
  return y;
}

template <typename T>
TensorT<T> relu_backward(const TensorT<T>& x, const TensorT<T>& grad_out) {
  TensorT<T> grad_x = grad_out;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    if (x.data[i] <= T(0)) grad_x.data[i] = T(0);
  }
  return grad_x;
}

template <typename T>
TensorT<T> flatten(const TensorT<T>& x) {
  const int batch = x.dim(0);
  return x.reshaped({batch, static_cast<int>(x.size()) / batch});
}

enum class RunMode { kTrain, kEval };

// Inverted-dropout multipliers: 0 with probability rate, 1/(1-rate)
// otherwise, deterministic from the seed.
template <typename T>
std::vector<T> dropout_mask(std::size_t count, double rate, std::uint64_t seed) {
  std::vector<T> mask(count);
  core::Rng rng(seed);
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  for (auto& m : mask) m = rng.next_unit() < rate ? T(0) : keep_scale;
  return mask;
}

// Eval mode and rate 0 return the input bitwise unchanged.
template <typename T>
TensorT<T> dropout_forward(const TensorT<T>& x, double rate, RunMode mode, std::uint64_t seed) {
  if (mode == RunMode::kEval || rate == 0.0) return x;
  TensorT<T> y = x;
  const auto mask = dropout_mask<T>(x.size(), rate, seed);
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] *= mask[i];
  return y;
}

// Row-wise softmax with max-subtraction.
template <typename T>
TensorT<T> softmax(const TensorT<T>& logits) {
  const int batch = logits.dim(0), classes = logits.dim(1);
  TensorT<T> probs(logits.shape);
  for (int b = 0; b < batch; ++b) {
    const T* in = &logits.at(b, 0);
    T* out = &probs.at(b, 0);
    T max_v = in[0];
    for (int c = 1; c < classes; ++c) max_v = std::max(max_v, in[c]);
    T sum = T(0);
    for (int c = 0; c < classes; ++c) {
      out[c] = std::exp(in[c] - max_v);
      sum += out[c];
    }
    const T inv = T(1) / sum;
    for (int c = 0; c < classes; ++c) out[c] *= inv;
  }
  return probs;
}

// Mean over the batch of -log softmax(logits)[label]; gradient is
// (softmax - onehot) / batch.
template <typename T>
std::pair<double, TensorT<T>> softmax_cross_entropy(const TensorT<T>& logits,
                                                    const std::vector<int>& labels) {
  const int batch = logits.dim(0), classes = logits.dim(1);
  if (static_cast<int>(labels.size()) != batch) {
    throw core::DimensionError("softmax_cross_entropy: labels size mismatch");
  }
  TensorT<T> grad = softmax(logits);
  double loss = 0.0;
  const T inv_batch = T(1) / static_cast<T>(batch);
  for (int b = 0; b < batch; ++b) {
    const int label = labels[b];
    if (label < 0 || label >= classes) {
      throw core::ConfigError("softmax_cross_entropy: label " + std::to_string(label) +
                              " out of range");
    }
    const double p = std::max(static_cast<double>(grad.at(b, label)), 1e-300);
    loss -= std::log(p);
    grad.at(b, label) -= T(1);
  }
  for (auto& g : grad.data) g *= inv_batch;
  return {loss / batch, std::move(grad)};
}

}  // namespace nightatlas::neuralnet
