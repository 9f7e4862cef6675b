#include "nightatlas/eigencity/model_io.hpp"

#include <fstream>

#include "nightatlas/core/binary_io.hpp"
#include "nightatlas/core/error.hpp"

namespace nightatlas::eigencity {

namespace {
constexpr char kModelMagic[4] = {'E', 'C', 'P', 'C'};
constexpr char kEmbeddingMagic[4] = {'E', 'C', 'E', 'M'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_model(const std::filesystem::path& path, const PcaModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw core::IoError("cannot write " + path.string());
  core::write_magic(out, kModelMagic);
  core::write_u32(out, kVersion);
  core::write_u32(out, static_cast<std::uint32_t>(model.k));
  core::write_u32(out, static_cast<std::uint32_t>(model.components.cols));
  for (const double v : model.scaler.mean) core::write_f64(out, v);
  for (const double v : model.scaler.std) core::write_f64(out, v);
  for (const double v : model.components.data) core::write_f64(out, v);
  for (const double v : model.explained_variance) core::write_f64(out, v);
  if (!out) throw core::IoError("write failed: " + path.string());
}

PcaModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw core::IoError("cannot open " + path.string());
  core::expect_magic(in, kModelMagic, "PCA model");
  const std::uint32_t version = core::read_u32(in, "version");
  if (version != kVersion) {
    throw core::FormatError("unsupported PCA model version " + std::to_string(version));
  }
  const std::uint32_t k = core::read_u32(in, "k");
  const std::uint32_t d = core::read_u32(in, "d");
  PcaModel model;
  model.k = k;
  model.scaler.mean.resize(d);
  model.scaler.std.resize(d);
  model.components = Matrix(k, d);
  model.explained_variance.resize(k);
  for (auto& v : model.scaler.mean) v = core::read_f64(in, "mean");
  for (auto& v : model.scaler.std) v = core::read_f64(in, "std");
  for (auto& v : model.components.data) v = core::read_f64(in, "components");
  for (auto& v : model.explained_variance) v = core::read_f64(in, "explained_variance");
  return model;
}

void save_embeddings(const std::filesystem::path& path,
                     const std::vector<LabeledEmbedding>& embeddings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw core::IoError("cannot write " + path.string());
  const std::uint32_t k =
      embeddings.empty() ? 0 : static_cast<std::uint32_t>(embeddings.front().values.size());
  core::write_magic(out, kEmbeddingMagic);
  core::write_u32(out, kVersion);
  core::write_u32(out, static_cast<std::uint32_t>(embeddings.size()));
  core::write_u32(out, k);
  for (const auto& e : embeddings) {
    core::write_u32(out, static_cast<std::uint32_t>(e.label));
    for (const double v : e.values) core::write_f64(out, v);
  }
  if (!out) throw core::IoError("write failed: " + path.string());
}

std::vector<LabeledEmbedding> load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw core::IoError("cannot open " + path.string());
  core::expect_magic(in, kEmbeddingMagic, "embeddings");
  const std::uint32_t version = core::read_u32(in, "version");
  if (version != kVersion) {
    throw core::FormatError("unsupported embeddings version " + std::to_string(version));
  }
  const std::uint32_t count = core::read_u32(in, "count");
  const std::uint32_t k = core::read_u32(in, "k");
  std::vector<LabeledEmbedding> embeddings(count);
  for (auto& e : embeddings) {
    e.label = static_cast<int>(core::read_u32(in, "label"));
    e.values.resize(k);
    for (auto& v : e.values) v = core::read_f64(in, "embedding");
  }
  return embeddings;
}

}  // namespace nightatlas::eigencity
