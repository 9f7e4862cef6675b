#include "nightatlas/spectral/fft.hpp"

#include <cmath>

#include "nightatlas/core/error.hpp"

namespace nightatlas::spectral {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place radix-2 Cooley-Tukey on a length-n power-of-two span.
// sign = -1 forward, +1 inverse (no normalization here).
void fft_inplace(std::complex<double>* a, int n, int sign) {
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j |= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * kPi / len;
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (int j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = w * a[i + j + len / 2];
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

void transform_2d(ComplexGrid& g, int sign) {
  std::vector<std::complex<double>> column(g.height);
  for (int y = 0; y < g.height; ++y) {
    fft_inplace(&g.data[static_cast<std::size_t>(y) * g.width], g.width, sign);
  }
  for (int x = 0; x < g.width; ++x) {
    for (int y = 0; y < g.height; ++y) column[y] = g.at(x, y);
    fft_inplace(column.data(), g.height, sign);
    for (int y = 0; y < g.height; ++y) g.at(x, y) = column[y];
  }
}

}  // namespace

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

ComplexGrid fft2d(const imgproc::GrayImage& img) {
  if (img.width < 1 || img.height < 1) throw core::DimensionError("fft2d: empty image");
  const int w = next_pow2(img.width);
  const int h = next_pow2(img.height);
  ComplexGrid g(w, h);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      g.at(x, y) = std::complex<double>(img.at(x, y), 0.0);
    }
  }
  transform_2d(g, -1);
  return g;
}

ComplexGrid ifft2d(const ComplexGrid& g) {
  if (!is_pow2(g.width) || !is_pow2(g.height)) {
    throw core::DimensionError("ifft2d: dimensions must be powers of two");
  }
  ComplexGrid out = g;
  transform_2d(out, +1);
  const double norm = 1.0 / (static_cast<double>(g.width) * g.height);
  for (auto& v : out.data) v *= norm;
  return out;
}

RealGrid magnitude_spectrum(const ComplexGrid& g) {
  RealGrid out(g.width, g.height);
  for (std::size_t i = 0; i < g.data.size(); ++i) out.data[i] = std::abs(g.data[i]);
  return out;
}

RealGrid quadrant_shift(const RealGrid& g) {
  RealGrid out(g.width, g.height);
  const int hx = g.width / 2;
  const int hy = g.height / 2;
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      out.data[static_cast<std::size_t>((y + hy) % g.height) * g.width +
               (x + hx) % g.width] = g.data[static_cast<std::size_t>(y) * g.width + x];
    }
  }
  return out;
}

RealGrid log_compress(const RealGrid& g) {
  RealGrid out = g;
  for (auto& v : out.data) v = std::log1p(v);
  return out;
}

std::vector<double> unroll(const RealGrid& g) { return g.data; }

}  // namespace nightatlas::spectral
