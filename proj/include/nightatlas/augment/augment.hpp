#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "nightatlas/imgproc/image.hpp"

namespace nightatlas::augment {

struct AugmentConfig {
  double rotation_max_deg = 180.0;
  double shift_max_frac = 0.2;
  double shear_max = 0.2;
  double zoom_max_frac = 0.2;
  bool allow_flip_h = true;
  bool allow_flip_v = true;
  imgproc::EnhanceConfig enhance;
  int variants_per_image = 100;
  std::uint64_t master_seed = 0;
};

enum class Split { kTrain, kValidation };

std::string to_string(Split split);
Split split_from_string(const std::string& name);

// One dataset item; pixels are regenerated on demand from (seed,
// variant_index) so the manifest alone reproduces the dataset.
struct SraItem {
  std::string source_id;
  std::string label;
  int variant_index = 0;
  std::uint64_t seed = 0;  // per-source stream key
  Split split = Split::kTrain;
};

// Uniform draws from the configured closed ranges, keyed purely by
// (seed, index): the same pair yields the same parameters in any process.
// Draw order: rotation, shift x, shift y, shear, zoom, flip h, flip v.
imgproc::AffineParams sample_params(std::uint64_t seed, int index, const AugmentConfig& cfg);

// Enhances the 640x426 reference once, then emits variants_per_image
// transformed 224x224 variants using sample_params(master_seed, i).
std::vector<imgproc::GrayImage> augment_reference(const imgproc::RgbImage& ref,
                                                  const AugmentConfig& cfg);

// Pure manifest construction (no pixels): per labelled source
// cfg_class.variants_per_image items, per other source
// cfg_other.variants_per_image items, stratified-shuffled into train and
// validation by split_seed. Labelled source ids map label -> id; class order
// follows the map order with "Other" appended when other_ids is non-empty.
struct SraManifest {
  std::vector<std::string> classes;
  std::vector<SraItem> items;
};

SraManifest build_sra_manifest(const std::map<std::string, std::string>& class_sources,
                               const std::vector<std::string>& other_ids,
                               const AugmentConfig& cfg_class, const AugmentConfig& cfg_other,
                               double split_fraction, std::uint64_t split_seed);

inline const std::string kOtherClass = "Other";

// Manifest plus enhanced reference images; materializes any item to its
// 224x224 pixels on demand.
class SraDataset {
 public:
  SraDataset() = default;

  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<SraItem>& items() const { return items_; }
  int label_index(const std::string& label) const;

  // Enhanced 640x426 source for an item (pre-transform).
  const imgproc::GrayImage& enhanced_source(const std::string& source_id) const;

  // Applies the item's sampled transform and the geometry pipeline.
  imgproc::GrayImage materialize(const SraItem& item) const;

  std::vector<const SraItem*> split_items(Split split) const;

  // JSON-lines manifest, one record per item:
  // {"source_id":..,"label":..,"variant_index":..,"seed":..,"split":..}
  std::string manifest_jsonl() const;

  static SraDataset build(const std::map<std::string, imgproc::RgbImage>& references,
                          const std::vector<imgproc::RgbImage>& others,
                          const AugmentConfig& cfg_class, const AugmentConfig& cfg_other,
                          double split_fraction, std::uint64_t split_seed);

 private:
  std::vector<std::string> classes_;
  std::vector<SraItem> items_;
  std::unordered_map<std::string, imgproc::GrayImage> enhanced_;
  AugmentConfig cfg_class_;
  AugmentConfig cfg_other_;
};

// Convenience wrapper matching the manifest signature, with images.
SraDataset build_sra_dataset(const std::map<std::string, imgproc::RgbImage>& references,
                             const std::vector<imgproc::RgbImage>& others,
                             const AugmentConfig& cfg_class, const AugmentConfig& cfg_other,
                             double split_fraction, std::uint64_t split_seed);

// Writes `<source_id>_<variant_index>.png` per item plus manifest.jsonl.
void materialize_to_disk(const SraDataset& dataset, const std::filesystem::path& dir);

}  // namespace nightatlas::augment
