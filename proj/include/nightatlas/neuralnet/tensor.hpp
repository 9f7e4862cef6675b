#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "nightatlas/core/error.hpp"

namespace nightatlas::neuralnet {

// Dense row-major tensor. Activations are (batch, channels, height, width);
// dense activations are (batch, units). T is float for training and double
// for gradient verification.
template <typename T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> data;

  TensorT() = default;
  explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
    data.assign(element_count(shape), T(0));
  }

  static std::size_t element_count(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return s.empty() ? 0 : n;
  }

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  // 4D accessor (b, c, y, x).
  T& at(int b, int c, int y, int x) {
    return data[((static_cast<std::size_t>(b) * shape[1] + c) * shape[2] + y) * shape[3] + x];
  }
  const T& at(int b, int c, int y, int x) const {
    return data[((static_cast<std::size_t>(b) * shape[1] + c) * shape[2] + y) * shape[3] + x];
  }

  // 2D accessor (b, i).
  T& at(int b, int i) { return data[static_cast<std::size_t>(b) * shape[1] + i]; }
  const T& at(int b, int i) const { return data[static_cast<std::size_t>(b) * shape[1] + i]; }

  TensorT reshaped(std::vector<int> new_shape) const {
    if (element_count(new_shape) != size()) {
      throw core::DimensionError("reshape: element count mismatch");
    }
    TensorT out;
    out.shape = std::move(new_shape);
    out.data = data;
    return out;
  }

  template <typename U>
  TensorT<U> cast() const {
    TensorT<U> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

inline std::string shape_string(const std::vector<int>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

}  // namespace nightatlas::neuralnet
