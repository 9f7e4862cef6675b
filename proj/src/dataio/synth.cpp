#include "nightatlas/dataio/synth.hpp"

#include <algorithm>
#include <cmath>

#include "nightatlas/core/error.hpp"
#include "nightatlas/core/rng.hpp"

namespace nightatlas::dataio {

namespace {

void stamp_blob(std::vector<double>& lum, int w, int h, double cx, double cy, double sigma,
                double amplitude) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int x0 = std::max(0, static_cast<int>(cx) - radius);
  const int x1 = std::min(w - 1, static_cast<int>(cx) + radius);
  const int y0 = std::max(0, static_cast<int>(cy) - radius);
  const int y1 = std::min(h - 1, static_cast<int>(cy) + radius);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      lum[static_cast<std::size_t>(y) * w + x] += amplitude * std::exp(-(dx * dx + dy * dy) * inv);
    }
  }
}

}  // namespace

imgproc::RgbImage synth_city(const SynthSpec& spec) {
  if (spec.blob_count < 0 || spec.road_count < 0) {
    throw core::ConfigError("synth_city: counts must be >= 0");
  }
  if (spec.noise_level < 0.0 || spec.noise_level >= 1.0) {
    throw core::ConfigError("synth_city: noise_level must be in [0,1)");
  }
  const int w = spec.width;
  const int h = spec.height;
  std::vector<double> lum(static_cast<std::size_t>(w) * h, 0.02);

  core::Rng structure(core::derive_seed(spec.class_seed, 0x5749, 0));
  for (int i = 0; i < spec.blob_count; ++i) {
    const double cx = structure.uniform(0.1 * w, 0.9 * w);
    const double cy = structure.uniform(0.1 * h, 0.9 * h);
    const double sigma = structure.uniform(4.0, 16.0);
    const double amplitude = structure.uniform(0.5, 1.0);
    stamp_blob(lum, w, h, cx, cy, sigma, amplitude);
  }
  for (int i = 0; i < spec.road_count; ++i) {
    double x = structure.uniform(0.05 * w, 0.95 * w);
    double y = structure.uniform(0.05 * h, 0.95 * h);
    double heading = structure.uniform(0.0, 2.0 * 3.14159265358979323846);
    const double brightness = structure.uniform(0.35, 0.9);
    const int segments = 4 + static_cast<int>(structure.below(4));
    for (int s = 0; s < segments; ++s) {
      const double length = structure.uniform(0.05, 0.18) * w;
      const int steps = std::max(2, static_cast<int>(length));
      const double dx = std::cos(heading);
      const double dy = std::sin(heading);
      for (int t = 0; t < steps; ++t) {
        stamp_blob(lum, w, h, x + dx * t, y + dy * t, 1.8, brightness / 4.0);
      }
      x += dx * steps;
      y += dy * steps;
      heading += structure.uniform(-0.7, 0.7);
    }
  }

  core::Rng noise(core::derive_seed(spec.noise_seed, 0x4e4f, 1));
  const double gain = 1.0 + (spec.noise_level > 0.0
                                 ? noise.uniform(-0.1, 0.1) * spec.noise_level * 10.0
                                 : 0.0);
  imgproc::RgbImage img(w, h);
  for (std::size_t i = 0; i < lum.size(); ++i) {
    double v = lum[i] * gain;
    if (spec.noise_level > 0.0) v += spec.noise_level * 0.08 * noise.normal();
    v = std::clamp(v, 0.0, 1.0);
    // warm night-light tint
    img.data[3 * i + 0] = v;
    img.data[3 * i + 1] = std::clamp(v * 0.88, 0.0, 1.0);
    img.data[3 * i + 2] = std::clamp(v * 0.62, 0.0, 1.0);
  }
  return img;
}

std::vector<LabeledImage> synth_dataset(int class_count, int per_class, std::uint64_t seed) {
  if (class_count < 1 || per_class < 1) {
    throw core::ConfigError("synth_dataset: counts must be >= 1");
  }
  std::vector<LabeledImage> out;
  out.reserve(static_cast<std::size_t>(class_count) * per_class);
  for (int c = 0; c < class_count; ++c) {
    SynthSpec spec;
    spec.class_seed = core::derive_seed(seed, static_cast<std::uint64_t>(c) + 1);
    for (int j = 0; j < per_class; ++j) {
      spec.noise_seed = core::derive_seed(seed, static_cast<std::uint64_t>(c) + 1,
                                          static_cast<std::uint64_t>(j) + 1);
      out.push_back({"city_" + std::to_string(c), synth_city(spec), j});
    }
  }
  return out;
}

}  // namespace nightatlas::dataio
