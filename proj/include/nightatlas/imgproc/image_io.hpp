#pragma once

#include <filesystem>

#include "nightatlas/imgproc/image.hpp"

namespace nightatlas::imgproc {

// 8-bit image files. Ingest divides by 255; emit multiplies by 255 and
// rounds half-up.

GrayImage read_png_gray(const std::filesystem::path& path);
RgbImage read_png_rgb(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const GrayImage& img);
void write_png(const std::filesystem::path& path, const RgbImage& img);

// Binary PGM (P5), used for fixture goldens.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

}  // namespace nightatlas::imgproc
