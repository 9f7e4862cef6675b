#include "nightatlas/augment/augment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "nightatlas/core/error.hpp"
#include "nightatlas/core/rng.hpp"
#include "nightatlas/imgproc/image_io.hpp"

namespace nightatlas::augment {

std::string to_string(Split split) { return split == Split::kTrain ? "train" : "validation"; }

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation") return Split::kValidation;
  throw core::ConfigError("unknown split: " + name);
}

imgproc::AffineParams sample_params(std::uint64_t seed, int index, const AugmentConfig& cfg) {
  if (cfg.rotation_max_deg < 0.0 || cfg.shift_max_frac < 0.0 || cfg.shear_max < 0.0 ||
      cfg.zoom_max_frac < 0.0) {
    throw core::ConfigError("sample_params: transform maxima must be >= 0");
  }
  core::Rng rng(core::derive_seed(seed, static_cast<std::uint64_t>(index)));
  imgproc::AffineParams p;
  p.rotation_deg = rng.uniform(-cfg.rotation_max_deg, cfg.rotation_max_deg);
  p.shift_x_frac = rng.uniform(-cfg.shift_max_frac, cfg.shift_max_frac);
  p.shift_y_frac = rng.uniform(-cfg.shift_max_frac, cfg.shift_max_frac);
  p.shear = rng.uniform(-cfg.shear_max, cfg.shear_max);
  p.zoom = rng.uniform(1.0 - cfg.zoom_max_frac, 1.0 + cfg.zoom_max_frac);
  p.flip_h = cfg.allow_flip_h && rng.bernoulli(0.5);
  p.flip_v = cfg.allow_flip_v && rng.bernoulli(0.5);
  return p;
}

std::vector<imgproc::GrayImage> augment_reference(const imgproc::RgbImage& ref,
                                                  const AugmentConfig& cfg) {
  if (ref.width != imgproc::kSourceWidth || ref.height != imgproc::kSourceHeight) {
    throw core::DimensionError("augment_reference expects 640x426 input, got " +
                               std::to_string(ref.width) + "x" + std::to_string(ref.height));
  }
  if (cfg.variants_per_image < 1) {
    throw core::ConfigError("variants_per_image must be >= 1");
  }
  const imgproc::GrayImage enhanced = imgproc::enhance(ref, cfg.enhance);
  std::vector<imgproc::GrayImage> variants;
  variants.reserve(cfg.variants_per_image);
  for (int i = 0; i < cfg.variants_per_image; ++i) {
    const imgproc::AffineParams p = sample_params(cfg.master_seed, i, cfg);
    variants.push_back(imgproc::geometry_pipeline(imgproc::affine_transform(enhanced, p)));
  }
  return variants;
}

namespace {

// Per-source stream key: stable under reordering of the source lists.
std::uint64_t source_seed(std::uint64_t master_seed, const std::string& source_id) {
  return core::derive_seed(master_seed, core::fnv1a64(source_id));
}

}  // namespace

SraManifest build_sra_manifest(const std::map<std::string, std::string>& class_sources,
                               const std::vector<std::string>& other_ids,
                               const AugmentConfig& cfg_class, const AugmentConfig& cfg_other,
                               double split_fraction, std::uint64_t split_seed) {
  if (class_sources.empty()) {
    throw core::ConfigError("build_sra_manifest: no labelled references given");
  }
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw core::ConfigError("split_fraction must be in (0,1)");
  }

  SraManifest manifest;
  for (const auto& [label, id] : class_sources) {
    if (label == kOtherClass) {
      throw core::ConfigError("'Other' is reserved for the unlabelled pool");
    }
    manifest.classes.push_back(label);
  }
  if (!other_ids.empty()) manifest.classes.push_back(kOtherClass);

  for (const auto& [label, id] : class_sources) {
    const std::uint64_t seed = source_seed(cfg_class.master_seed, id);
    for (int v = 0; v < cfg_class.variants_per_image; ++v) {
      manifest.items.push_back({id, label, v, seed, Split::kTrain});
    }
  }
  for (const auto& id : other_ids) {
    const std::uint64_t seed = source_seed(cfg_other.master_seed, id);
    for (int v = 0; v < cfg_other.variants_per_image; ++v) {
      manifest.items.push_back({id, kOtherClass, v, seed, Split::kTrain});
    }
  }

  // Stratified split so validation contains every class.
  for (std::size_t c = 0; c < manifest.classes.size(); ++c) {
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < manifest.items.size(); ++i) {
      if (manifest.items[i].label == manifest.classes[c]) indices.push_back(i);
    }
    core::Rng rng(core::derive_seed(split_seed, c));
    for (std::size_t i = indices.size(); i > 1; --i) {
      std::swap(indices[i - 1], indices[rng.below(i)]);
    }
    long train_count = std::lround(split_fraction * static_cast<double>(indices.size()));
    if (indices.size() >= 2) {
      train_count = std::clamp(train_count, 1L, static_cast<long>(indices.size()) - 1);
    }
    for (std::size_t i = 0; i < indices.size(); ++i) {
      manifest.items[indices[i]].split =
          static_cast<long>(i) < train_count ? Split::kTrain : Split::kValidation;
    }
  }
  return manifest;
}

int SraDataset::label_index(const std::string& label) const {
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    if (classes_[c] == label) return static_cast<int>(c);
  }
  throw core::ConfigError("unknown label: " + label);
}

const imgproc::GrayImage& SraDataset::enhanced_source(const std::string& source_id) const {
  const auto it = enhanced_.find(source_id);
  if (it == enhanced_.end()) throw core::ConfigError("unknown source id: " + source_id);
  return it->second;
}

imgproc::GrayImage SraDataset::materialize(const SraItem& item) const {
  const imgproc::GrayImage& source = enhanced_source(item.source_id);
  const AugmentConfig& cfg = item.label == kOtherClass ? cfg_other_ : cfg_class_;
  const imgproc::AffineParams p = sample_params(item.seed, item.variant_index, cfg);
  return imgproc::geometry_pipeline(imgproc::affine_transform(source, p));
}

std::vector<const SraItem*> SraDataset::split_items(Split split) const {
  std::vector<const SraItem*> out;
  for (const auto& item : items_) {
    if (item.split == split) out.push_back(&item);
  }
  return out;
}

std::string SraDataset::manifest_jsonl() const {
  std::string out;
  for (const auto& item : items_) {
    const nlohmann::json j{{"source_id", item.source_id},
                           {"label", item.label},
                           {"variant_index", item.variant_index},
                           {"seed", item.seed},
                           {"split", to_string(item.split)}};
    out += j.dump();
    out += "\n";
  }
  return out;
}

SraDataset SraDataset::build(const std::map<std::string, imgproc::RgbImage>& references,
                             const std::vector<imgproc::RgbImage>& others,
                             const AugmentConfig& cfg_class, const AugmentConfig& cfg_other,
                             double split_fraction, std::uint64_t split_seed) {
  std::map<std::string, std::string> class_sources;
  for (const auto& [label, image] : references) {
    class_sources[label] = "ref_" + label;
  }
  std::vector<std::string> other_ids;
  for (std::size_t i = 0; i < others.size(); ++i) {
    other_ids.push_back("other_" + std::to_string(i));
  }

  SraDataset dataset;
  const SraManifest manifest = build_sra_manifest(class_sources, other_ids, cfg_class,
                                                  cfg_other, split_fraction, split_seed);
  dataset.classes_ = manifest.classes;
  dataset.items_ = manifest.items;
  dataset.cfg_class_ = cfg_class;
  dataset.cfg_other_ = cfg_other;

  for (const auto& [label, image] : references) {
    dataset.enhanced_[class_sources[label]] = imgproc::enhance(image, cfg_class.enhance);
  }
  for (std::size_t i = 0; i < others.size(); ++i) {
    dataset.enhanced_[other_ids[i]] = imgproc::enhance(others[i], cfg_other.enhance);
  }
  return dataset;
}

SraDataset build_sra_dataset(const std::map<std::string, imgproc::RgbImage>& references,
                             const std::vector<imgproc::RgbImage>& others,
                             const AugmentConfig& cfg_class, const AugmentConfig& cfg_other,
                             double split_fraction, std::uint64_t split_seed) {
  return SraDataset::build(references, others, cfg_class, cfg_other, split_fraction,
                           split_seed);
}

void materialize_to_disk(const SraDataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& item : dataset.items()) {
    const imgproc::GrayImage img = dataset.materialize(item);
    imgproc::write_png(dir / (item.source_id + "_" + std::to_string(item.variant_index) +
                              ".png"),
                       img);
  }
  std::ofstream manifest(dir / "manifest.jsonl");
  if (!manifest) throw core::IoError("cannot write manifest in " + dir.string());
  manifest << dataset.manifest_jsonl();
}

}  // namespace nightatlas::augment
