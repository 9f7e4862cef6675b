#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>

#include "nightatlas/core/rng.hpp"
#include "nightatlas/imgproc/image.hpp"

namespace testutil {

// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "nightatlas_test") {
    static std::atomic<std::uint64_t> counter{0};
    const auto stamp = std::to_string(
        std::chrono::steady_clock::now().time_since_epoch().count());
    path_ = std::filesystem::temp_directory_path() /
            (prefix + "_" + stamp + "_" + std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline nightatlas::imgproc::GrayImage random_gray(int w, int h, std::uint64_t seed) {
  nightatlas::core::Rng rng(seed);
  nightatlas::imgproc::GrayImage img(w, h);
  for (auto& v : img.data) v = rng.next_unit();
  return img;
}

inline nightatlas::imgproc::RgbImage random_rgb(int w, int h, std::uint64_t seed) {
  nightatlas::core::Rng rng(seed);
  nightatlas::imgproc::RgbImage img(w, h);
  for (auto& v : img.data) v = rng.next_unit();
  return img;
}

}  // namespace testutil
