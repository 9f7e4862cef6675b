#pragma once

#include <filesystem>
#include <vector>

#include "nightatlas/eigencity/pca.hpp"

namespace nightatlas::eigencity {

// Model file, little-endian: magic "ECPC", version u32, k u32, d u32, then
// mean[d], std[d], components[k*d], explained_variance[k] as f64.
void save_model(const std::filesystem::path& path, const PcaModel& model);
PcaModel load_model(const std::filesystem::path& path);

// Training embeddings, little-endian: magic "ECEM", version u32, count u32,
// k u32, then per item label u32 followed by k f64 coordinates.
void save_embeddings(const std::filesystem::path& path,
                     const std::vector<LabeledEmbedding>& embeddings);
std::vector<LabeledEmbedding> load_embeddings(const std::filesystem::path& path);

}  // namespace nightatlas::eigencity
