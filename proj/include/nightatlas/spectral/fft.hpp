#pragma once

#include <complex>
#include <vector>

#include "nightatlas/imgproc/image.hpp"

namespace nightatlas::spectral {

struct ComplexGrid {
  int width = 0;
  int height = 0;
  std::vector<std::complex<double>> data;  // row-major, width * height

  ComplexGrid() = default;
  ComplexGrid(int w, int h)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h) {}

  std::complex<double>& at(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  const std::complex<double>& at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
};

// Same shape as GrayImage but without the [0,1] intensity invariant;
// magnitude spectra routinely exceed 1.
struct RealGrid {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  RealGrid() = default;
  RealGrid(int w, int h)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0.0) {}
};

// Smallest power of two >= n.
int next_pow2(int n);

// Forward 2D DFT, negative exponent convention, no normalization. Inputs
// whose dimensions are not powers of two are zero-padded up to the next
// power of two (224x224 becomes 256x256); the padding is part of the feature
// definition and is applied identically at train and test time. Row
// transforms run first, then column transforms, radix-2 Cooley-Tukey.
ComplexGrid fft2d(const imgproc::GrayImage& img);

// Inverse 2D DFT with 1/(W*H) normalization. Dimensions must be powers of
// two.
ComplexGrid ifft2d(const ComplexGrid& g);

// Per-bin modulus sqrt(re^2 + im^2); no log scaling, no quadrant shift.
RealGrid magnitude_spectrum(const ComplexGrid& g);

// Moves the DC bin to the grid center (half-size circular shift per axis).
RealGrid quadrant_shift(const RealGrid& g);

// log(1 + v) per bin, for compressed spectra behind the experiment flags.
RealGrid log_compress(const RealGrid& g);

// Unrolls a grid row-major into a feature vector.
std::vector<double> unroll(const RealGrid& g);

}  // namespace nightatlas::spectral
