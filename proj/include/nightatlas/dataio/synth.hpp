#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nightatlas/imgproc/image.hpp"

namespace nightatlas::dataio {

// Deterministic night-city-like fixture: dark background, Gaussian light
// blobs and bright polyline roads drawn from class_seed, plus additive noise
// drawn from noise_seed. Same class_seed gives the same structure; varying
// noise_seed stands in for repeat shots of the same city.
struct SynthSpec {
  std::uint64_t class_seed = 0;
  int blob_count = 12;
  int road_count = 6;
  double noise_level = 0.05;  // [0,1)
  int width = 640;
  int height = 426;
  std::uint64_t noise_seed = 0;
};

imgproc::RgbImage synth_city(const SynthSpec& spec);

struct LabeledImage {
  std::string label;
  imgproc::RgbImage image;
  int instance = 0;  // 0 is the class reference rendering
};

// class_count classes with per_class noisy re-renders each; instance 0 of a
// class is the single-reference analogue.
std::vector<LabeledImage> synth_dataset(int class_count, int per_class, std::uint64_t seed);

}  // namespace nightatlas::dataio
