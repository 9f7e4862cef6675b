#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace nightatlas::imgproc {

// Row-major grayscale image with intensities in [0,1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // width * height

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// Row-major RGB image, each channel in [0,1].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // 3 * width * height, interleaved r,g,b

  RgbImage() = default;
  RgbImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(3 * static_cast<std::size_t>(w) * h, fill) {}

  double* pixel(int x, int y) { return &data[3 * (static_cast<std::size_t>(y) * width + x)]; }
  const double* pixel(int x, int y) const {
    return &data[3 * (static_cast<std::size_t>(y) * width + x)];
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// One sampled transformation. Identity: all zeros, zoom 1, flips off.
struct AffineParams {
  double rotation_deg = 0.0;   // [-180, 180]
  double shift_x_frac = 0.0;   // fraction of width, [-0.2, 0.2]
  double shift_y_frac = 0.0;   // fraction of height, [-0.2, 0.2]
  double shear = 0.0;          // shear angle in radians, [-0.2, 0.2]
  double zoom = 1.0;           // [0.8, 1.2]
  bool flip_h = false;
  bool flip_v = false;

  bool is_identity() const {
    return rotation_deg == 0.0 && shift_x_frac == 0.0 && shift_y_frac == 0.0 &&
           shear == 0.0 && zoom == 1.0 && !flip_h && !flip_v;
  }
};

enum class ThresholdMethod { kMean, kMedian, kP25, kNone };

ThresholdMethod threshold_method_from_string(const std::string& name);
std::string to_string(ThresholdMethod m);

struct ThresholdReport {
  int threshold_value = 0;  // round(T * 255), 8-bit scale
  long zeros_before = 0;
  long zeros_added = 0;
  long total_zeros = 0;
  double sparsity = 0.0;  // total_zeros / (width * height)
};

struct EnhanceConfig {
  double q_low = 0.2;
  double q_high = 0.998;
  ThresholdMethod threshold_method = ThresholdMethod::kMean;
};

// Fraction of zero pixels; the definition behind ThresholdReport::sparsity.
double sparsity(long total_zeros, long pixel_count);

// Sort-based quantile with linear interpolation between order statistics.
// q in [0,1]; values is copied and sorted internally.
double quantile(std::vector<double> values, double q);

// ITU-R BT.601 luminance: 0.299 r + 0.587 g + 0.114 b.
GrayImage to_grayscale(const RgbImage& img);

// Linear contrast stretch between the q_low and q_high quantiles of the
// image's own intensities, clamped to [0,1]. Degenerate hi == lo gives an
// all-zero image.
GrayImage rescale_intensity(const GrayImage& img, double q_low, double q_high);

// Zeroes every pixel strictly below the per-image threshold statistic and
// reports the zero accounting. kNone leaves the image unchanged.
std::pair<GrayImage, ThresholdReport> threshold_image(const GrayImage& img,
                                                      ThresholdMethod method);

// Inverse-mapped affine warp about the image center with bilinear sampling;
// source coordinates outside the image contribute 0. Composition order of
// the forward map: flip, rotation, shear, zoom, shift.
GrayImage affine_transform(const GrayImage& img, const AffineParams& p);

// Centered crop; odd margins leave the extra pixel on the right/bottom.
GrayImage center_crop(const GrayImage& img, int out_w, int out_h);

// Bilinear resize, half-pixel-center convention with edge clamping.
GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h);

// to_grayscale -> rescale_intensity -> threshold (report discarded).
GrayImage enhance(const RgbImage& img, const EnhanceConfig& cfg);

// 640x426 -> center_crop 426x426 -> resize 256x256 -> center_crop 224x224.
GrayImage geometry_pipeline(const GrayImage& img);

inline constexpr int kSourceWidth = 640;
inline constexpr int kSourceHeight = 426;
inline constexpr int kOutputSize = 224;

}  // namespace nightatlas::imgproc
