#include "nightatlas/imgproc/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nightatlas/core/error.hpp"

namespace nightatlas::imgproc {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

ThresholdMethod threshold_method_from_string(const std::string& name) {
  if (name == "mean") return ThresholdMethod::kMean;
  if (name == "median") return ThresholdMethod::kMedian;
  if (name == "p25") return ThresholdMethod::kP25;
  if (name == "none") return ThresholdMethod::kNone;
  throw core::ConfigError("unknown threshold method: " + name);
}

std::string to_string(ThresholdMethod m) {
  switch (m) {
    case ThresholdMethod::kMean: return "mean";
    case ThresholdMethod::kMedian: return "median";
    case ThresholdMethod::kP25: return "p25";
    case ThresholdMethod::kNone: return "none";
  }
  return "mean";
}

double sparsity(long total_zeros, long pixel_count) {
  if (pixel_count <= 0) return 0.0;
  return static_cast<double>(total_zeros) / static_cast<double>(pixel_count);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw core::InsufficientDataError("quantile of empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

GrayImage to_grayscale(const RgbImage& img) {
  GrayImage out(img.width, img.height);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double* p = &img.data[3 * i];
    out.data[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  }
  return out;
}

GrayImage rescale_intensity(const GrayImage& img, double q_low, double q_high) {
  if (!(q_low < q_high)) throw core::ConfigError("rescale_intensity: q_low must be < q_high");
  std::vector<double> sorted(img.data);
  std::sort(sorted.begin(), sorted.end());
  const auto pick = [&sorted](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
  };
  const double lo = pick(q_low);
  const double hi = pick(q_high);

  GrayImage out(img.width, img.height);
  if (hi <= lo) return out;  // constant image maps to all zeros
  const double scale = 1.0 / (hi - lo);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = std::clamp((img.data[i] - lo) * scale, 0.0, 1.0);
  }
  return out;
}

std::pair<GrayImage, ThresholdReport> threshold_image(const GrayImage& img,
                                                      ThresholdMethod method) {
  double t = 0.0;
  switch (method) {
    case ThresholdMethod::kMean:
      t = img.data.empty()
              ? 0.0
              : std::accumulate(img.data.begin(), img.data.end(), 0.0) /
                    static_cast<double>(img.data.size());
      break;
    case ThresholdMethod::kMedian:
      t = quantile(img.data, 0.5);
      break;
    case ThresholdMethod::kP25:
      t = quantile(img.data, 0.25);
      break;
    case ThresholdMethod::kNone:
      t = 0.0;  // nothing lies strictly below zero
      break;
  }

  GrayImage out(img.width, img.height);
  ThresholdReport report;
  report.threshold_value = static_cast<int>(std::llround(t * 255.0));
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double v = img.data[i];
    if (v == 0.0) {
      ++report.zeros_before;
    } else if (v < t) {
      ++report.zeros_added;
    } else {
      out.data[i] = v;
    }
  }
  report.total_zeros = report.zeros_before + report.zeros_added;
  report.sparsity = sparsity(report.total_zeros, static_cast<long>(img.pixel_count()));
  return {std::move(out), report};
}

GrayImage affine_transform(const GrayImage& img, const AffineParams& p) {
  // Forward map on coordinates centered at ((w-1)/2, (h-1)/2):
  //   p' = Z * Sh * R * F * p + t
  const double fx = p.flip_h ? -1.0 : 1.0;
  const double fy = p.flip_v ? -1.0 : 1.0;
  const double theta = p.rotation_deg * kPi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double sh = std::tan(p.shear);
  const double z = p.zoom;

  // R * F
  double a00 = c * fx, a01 = -s * fy;
  double a10 = s * fx, a11 = c * fy;
  // Sh * (R*F) with Sh = [1 sh; 0 1]
  const double b00 = a00 + sh * a10, b01 = a01 + sh * a11;
  const double b10 = a10, b11 = a11;
  // Z * ...
  a00 = z * b00;
  a01 = z * b01;
  a10 = z * b10;
  a11 = z * b11;
  const double tx = p.shift_x_frac * img.width;
  const double ty = p.shift_y_frac * img.height;

  const double det = a00 * a11 - a01 * a10;
  const double i00 = a11 / det, i01 = -a01 / det;
  const double i10 = -a10 / det, i11 = a00 / det;

  const double cx = (img.width - 1) / 2.0;
  const double cy = (img.height - 1) / 2.0;

  GrayImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double dx = (x - cx) - tx;
      const double dy = (y - cy) - ty;
      const double sx = i00 * dx + i01 * dy + cx;
      const double sy = i10 * dx + i11 * dy + cy;

      const double fx0 = std::floor(sx);
      const double fy0 = std::floor(sy);
      const int x0 = static_cast<int>(fx0);
      const int y0 = static_cast<int>(fy0);
      const double wx = sx - fx0;
      const double wy = sy - fy0;

      const auto sample = [&img](int px, int py) {
        if (px < 0 || px >= img.width || py < 0 || py >= img.height) return 0.0;
        return img.at(px, py);
      };
      double v = 0.0;
      if (wx < 1.0 && wy < 1.0) v += (1.0 - wx) * (1.0 - wy) * sample(x0, y0);
      if (wx > 0.0 && wy < 1.0) v += wx * (1.0 - wy) * sample(x0 + 1, y0);
      if (wx < 1.0 && wy > 0.0) v += (1.0 - wx) * wy * sample(x0, y0 + 1);
      if (wx > 0.0 && wy > 0.0) v += wx * wy * sample(x0 + 1, y0 + 1);
      out.at(x, y) = v;
    }
  }
  return out;
}

GrayImage center_crop(const GrayImage& img, int out_w, int out_h) {
  if (out_w > img.width || out_h > img.height || out_w < 1 || out_h < 1) {
    throw core::DimensionError("center_crop: requested " + std::to_string(out_w) + "x" +
                               std::to_string(out_h) + " from " + std::to_string(img.width) +
                               "x" + std::to_string(img.height));
  }
  const int off_x = (img.width - out_w) / 2;
  const int off_y = (img.height - out_h) / 2;
  GrayImage out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      out.at(x, y) = img.at(x + off_x, y + off_y);
    }
  }
  return out;
}

GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw core::DimensionError("resize_bilinear: empty target");
  GrayImage out(out_w, out_h);
  const double sx = static_cast<double>(img.width) / out_w;
  const double sy = static_cast<double>(img.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    double src_y = (y + 0.5) * sy - 0.5;
    src_y = std::clamp(src_y, 0.0, static_cast<double>(img.height - 1));
    const int y0 = static_cast<int>(std::floor(src_y));
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = src_y - y0;
    for (int x = 0; x < out_w; ++x) {
      double src_x = (x + 0.5) * sx - 0.5;
      src_x = std::clamp(src_x, 0.0, static_cast<double>(img.width - 1));
      const int x0 = static_cast<int>(std::floor(src_x));
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = src_x - x0;
      out.at(x, y) = (1.0 - wx) * (1.0 - wy) * img.at(x0, y0) +
                     wx * (1.0 - wy) * img.at(x1, y0) +
                     (1.0 - wx) * wy * img.at(x0, y1) + wx * wy * img.at(x1, y1);
    }
  }
  return out;
}

GrayImage enhance(const RgbImage& img, const EnhanceConfig& cfg) {
  GrayImage gray = rescale_intensity(to_grayscale(img), cfg.q_low, cfg.q_high);
  if (cfg.threshold_method == ThresholdMethod::kNone) return gray;
  return threshold_image(gray, cfg.threshold_method).first;
}

GrayImage geometry_pipeline(const GrayImage& img) {
  if (img.width != kSourceWidth || img.height != kSourceHeight) {
    throw core::DimensionError("geometry_pipeline expects 640x426 input, got " +
                               std::to_string(img.width) + "x" + std::to_string(img.height));
  }
  GrayImage cropped = center_crop(img, 426, 426);
  GrayImage resized = resize_bilinear(cropped, 256, 256);
  return center_crop(resized, kOutputSize, kOutputSize);
}

}  // namespace nightatlas::imgproc
