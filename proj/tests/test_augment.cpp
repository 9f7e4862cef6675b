#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "nightatlas/augment/augment.hpp"
#include "nightatlas/core/error.hpp"
#include "nightatlas/imgproc/image_io.hpp"
#include "test_util.hpp"

using namespace nightatlas;
using augment::AugmentConfig;
using augment::SraManifest;

namespace {

AugmentConfig identity_config(int variants = 1) {
  AugmentConfig cfg;
  cfg.rotation_max_deg = 0.0;
  cfg.shift_max_frac = 0.0;
  cfg.shear_max = 0.0;
  cfg.zoom_max_frac = 0.0;
  cfg.allow_flip_h = false;
  cfg.allow_flip_v = false;
  cfg.variants_per_image = variants;
  return cfg;
}

imgproc::RgbImage reference_fixture(std::uint64_t seed) {
  return testutil::random_rgb(imgproc::kSourceWidth, imgproc::kSourceHeight, seed);
}

}  // namespace

TEST_CASE("sample_params: degenerate ranges give the identity transform") {
  const AugmentConfig cfg = identity_config();
  for (int i = 0; i < 20; ++i) {
    const auto p = augment::sample_params(7, i, cfg);
    CHECK(p.rotation_deg == 0.0);
    CHECK(p.shift_x_frac == 0.0);
    CHECK(p.shift_y_frac == 0.0);
    CHECK(p.shear == 0.0);
    CHECK(p.zoom == 1.0);
    CHECK_FALSE(p.flip_h);
    CHECK_FALSE(p.flip_v);
    CHECK(p.is_identity());
  }
}

TEST_CASE("sample_params stays inside the configured closed ranges") {
  AugmentConfig cfg;
  cfg.rotation_max_deg = 180.0;
  cfg.shift_max_frac = 0.2;
  cfg.shear_max = 0.2;
  cfg.zoom_max_frac = 0.2;
  bool saw_flip_h = false, saw_flip_v = false;
  for (int i = 0; i < 100000; ++i) {
    const auto p = augment::sample_params(99, i, cfg);
    CHECK(p.rotation_deg >= -180.0);
    CHECK(p.rotation_deg <= 180.0);
    CHECK(p.shift_x_frac >= -0.2);
    CHECK(p.shift_x_frac <= 0.2);
    CHECK(p.shift_y_frac >= -0.2);
    CHECK(p.shift_y_frac <= 0.2);
    CHECK(p.shear >= -0.2);
    CHECK(p.shear <= 0.2);
    CHECK(p.zoom >= 0.8);
    CHECK(p.zoom <= 1.2);
    saw_flip_h |= p.flip_h;
    saw_flip_v |= p.flip_v;
  }
  CHECK(saw_flip_h);
  CHECK(saw_flip_v);
}

TEST_CASE("sample_params: frozen regression golden for (seed 42, index 7)") {
  const auto p = augment::sample_params(42, 7, AugmentConfig{});
  CHECK(p.rotation_deg == doctest::Approx(-3.3639163094375704).epsilon(1e-15));
  CHECK(p.shift_x_frac == doctest::Approx(0.06167603211170658).epsilon(1e-15));
  CHECK(p.shift_y_frac == doctest::Approx(0.18503678764359177).epsilon(1e-15));
  CHECK(p.shear == doctest::Approx(-0.19609771885988492).epsilon(1e-15));
  CHECK(p.zoom == doctest::Approx(0.85013612018912199).epsilon(1e-15));
  CHECK_FALSE(p.flip_h);
  CHECK(p.flip_v);
}

TEST_CASE("sample_params is a pure function of (seed, index)") {
  const AugmentConfig cfg;
  for (int i = 0; i < 100; ++i) {
    const auto a = augment::sample_params(1234, i, cfg);
    const auto b = augment::sample_params(1234, i, cfg);
    CHECK(a.rotation_deg == b.rotation_deg);
    CHECK(a.zoom == b.zoom);
    CHECK(a.flip_h == b.flip_h);
  }
  const auto p0 = augment::sample_params(1234, 0, cfg);
  const auto p1 = augment::sample_params(1234, 1, cfg);
  CHECK(p0.rotation_deg != p1.rotation_deg);
}

TEST_CASE("augment_reference: produces the requested number of 224x224 variants") {
  const auto ref = reference_fixture(201);
  AugmentConfig cfg;
  cfg.variants_per_image = 8;
  cfg.master_seed = 5;
  const auto variants = augment::augment_reference(ref, cfg);
  REQUIRE(variants.size() == 8);
  for (const auto& img : variants) {
    CHECK(img.width == 224);
    CHECK(img.height == 224);
    for (double v : img.data) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("augment_reference: identity config equals pipeline of enhance") {
  const auto ref = reference_fixture(202);
  const AugmentConfig cfg = identity_config(1);
  const auto variants = augment::augment_reference(ref, cfg);
  REQUIRE(variants.size() == 1);
  const auto expected = imgproc::geometry_pipeline(imgproc::enhance(ref, cfg.enhance));
  CHECK(variants[0].data == expected.data);
}

TEST_CASE("augment_reference: equal master seeds give pixel-identical runs") {
  const auto ref = reference_fixture(203);
  AugmentConfig cfg;
  cfg.variants_per_image = 3;
  cfg.master_seed = 77;
  const auto a = augment::augment_reference(ref, cfg);
  const auto b = augment::augment_reference(ref, cfg);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].data == b[i].data);
}

TEST_CASE("augment_reference rejects wrong dimensions") {
  CHECK_THROWS_AS(augment::augment_reference(imgproc::RgbImage(426, 640), AugmentConfig{}),
                  core::DimensionError);
}

TEST_CASE("build_sra_manifest: paper-scale Other counts") {
  // 3126 unlabelled sources, 20 variants each; 56 of them are secretly
  // labelled cities hiding as noise.
  std::vector<std::string> other_ids;
  for (int i = 0; i < 3126; ++i) other_ids.push_back("iss_" + std::to_string(i));
  AugmentConfig cfg_class;
  cfg_class.variants_per_image = 100;
  AugmentConfig cfg_other;
  cfg_other.variants_per_image = 20;

  const SraManifest manifest = augment::build_sra_manifest(
      {{"Berlin", "ref_berlin"}}, other_ids, cfg_class, cfg_other, 0.8, 1);

  long other_items = 0;
  long hidden_items = 0;
  for (const auto& item : manifest.items) {
    if (item.label == augment::kOtherClass) {
      ++other_items;
      const int n = std::stoi(item.source_id.substr(4));
      if (n < 56) ++hidden_items;
    }
  }
  CHECK(other_items == 62520);
  CHECK(hidden_items == 56 * 20);
  CHECK(manifest.items.size() == 62520 + 100);
}

TEST_CASE("build_sra_manifest: split fraction reproduces the 50000/12520 split") {
  std::vector<std::string> other_ids;
  for (int i = 0; i < 3126; ++i) other_ids.push_back("o" + std::to_string(i));
  AugmentConfig cfg_other;
  cfg_other.variants_per_image = 20;
  AugmentConfig cfg_class;
  cfg_class.variants_per_image = 1;

  const SraManifest manifest = augment::build_sra_manifest(
      {{"Berlin", "b"}}, other_ids, cfg_class, cfg_other, 50000.0 / 62520.0, 3);

  long train_other = 0, val_other = 0;
  for (const auto& item : manifest.items) {
    if (item.label != augment::kOtherClass) continue;
    (item.split == augment::Split::kTrain ? train_other : val_other)++;
  }
  CHECK(train_other == 50000);
  CHECK(val_other == 12520);
}

TEST_CASE("build_sra_manifest: stratified split covers every class within rounding") {
  std::map<std::string, std::string> refs{
      {"Berlin", "b"}, {"Madrid", "m"}, {"Paris", "p"}};
  AugmentConfig cfg_class;
  cfg_class.variants_per_image = 25;
  AugmentConfig cfg_other;
  cfg_other.variants_per_image = 10;
  std::vector<std::string> others = {"o1", "o2", "o3"};

  const SraManifest manifest =
      augment::build_sra_manifest(refs, others, cfg_class, cfg_other, 0.8, 9);
  CHECK(manifest.classes ==
        std::vector<std::string>{"Berlin", "Madrid", "Paris", augment::kOtherClass});

  for (const auto& label : manifest.classes) {
    long train = 0, val = 0, total = 0;
    for (const auto& item : manifest.items) {
      if (item.label != label) continue;
      ++total;
      (item.split == augment::Split::kTrain ? train : val)++;
    }
    CHECK(train >= 1);
    CHECK(val >= 1);
    CHECK(std::abs(train - 0.8 * total) <= 1.0);
  }
}

TEST_CASE("build_sra_manifest: provenance is unique and counts add up") {
  const SraManifest manifest = augment::build_sra_manifest(
      {{"A", "a"}, {"B", "b"}}, {"x", "y"}, identity_config(5), identity_config(3), 0.5, 4);
  CHECK(manifest.items.size() == 2 * 5 + 2 * 3);
  std::set<std::pair<std::string, int>> provenance;
  for (const auto& item : manifest.items) {
    CHECK(provenance.insert({item.source_id, item.variant_index}).second);
  }
}

TEST_CASE("build_sra_manifest: same inputs give identical manifests") {
  const auto build = [] {
    AugmentConfig cfg_class;
    cfg_class.variants_per_image = 7;
    cfg_class.master_seed = 11;
    AugmentConfig cfg_other;
    cfg_other.variants_per_image = 4;
    cfg_other.master_seed = 12;
    return augment::build_sra_manifest({{"A", "a"}, {"B", "b"}}, {"u", "v", "w"},
                                       cfg_class, cfg_other, 0.75, 21);
  };
  const auto m1 = build();
  const auto m2 = build();
  REQUIRE(m1.items.size() == m2.items.size());
  for (std::size_t i = 0; i < m1.items.size(); ++i) {
    CHECK(m1.items[i].source_id == m2.items[i].source_id);
    CHECK(m1.items[i].seed == m2.items[i].seed);
    CHECK(m1.items[i].split == m2.items[i].split);
  }
}

TEST_CASE("build_sra_manifest validates its inputs") {
  CHECK_THROWS_AS(augment::build_sra_manifest({}, {"x"}, AugmentConfig{}, AugmentConfig{},
                                              0.5, 1),
                  core::ConfigError);
  CHECK_THROWS_AS(augment::build_sra_manifest({{"A", "a"}}, {}, AugmentConfig{},
                                              AugmentConfig{}, 1.0, 1),
                  core::ConfigError);
  CHECK_THROWS_AS(augment::build_sra_manifest({{"Other", "o"}}, {}, AugmentConfig{},
                                              AugmentConfig{}, 0.5, 1),
                  core::ConfigError);
}

TEST_CASE("SraDataset: materialized items are 224x224 in [0,1] and deterministic") {
  std::map<std::string, imgproc::RgbImage> refs;
  refs["A"] = reference_fixture(301);
  refs["B"] = reference_fixture(302);
  std::vector<imgproc::RgbImage> others = {reference_fixture(303)};

  AugmentConfig cfg_class;
  cfg_class.variants_per_image = 4;
  cfg_class.master_seed = 31;
  AugmentConfig cfg_other;
  cfg_other.variants_per_image = 2;
  cfg_other.master_seed = 32;

  const auto d1 = augment::build_sra_dataset(refs, others, cfg_class, cfg_other, 0.5, 17);
  const auto d2 = augment::build_sra_dataset(refs, others, cfg_class, cfg_other, 0.5, 17);
  REQUIRE(d1.items().size() == 10);
  for (std::size_t i = 0; i < d1.items().size(); ++i) {
    const auto img1 = d1.materialize(d1.items()[i]);
    const auto img2 = d2.materialize(d2.items()[i]);
    CHECK(img1.width == 224);
    CHECK(img1.height == 224);
    CHECK(img1.data == img2.data);
    for (double v : img1.data) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("materialize_to_disk writes the manifest and per-item PNGs") {
  testutil::TempDir dir;
  std::map<std::string, imgproc::RgbImage> refs;
  refs["A"] = reference_fixture(304);
  const auto dataset = augment::build_sra_dataset(refs, {}, identity_config(3),
                                                  identity_config(1), 0.5, 23);
  augment::materialize_to_disk(dataset, dir.path());
  CHECK(std::filesystem::exists(dir.path() / "manifest.jsonl"));
  for (const auto& item : dataset.items()) {
    const auto file =
        dir.path() / (item.source_id + "_" + std::to_string(item.variant_index) + ".png");
    REQUIRE(std::filesystem::exists(file));
    const auto img = imgproc::read_png_gray(file);
    CHECK(img.width == 224);
    // disk copy equals the in-memory variant up to 8-bit quantization
    const auto live = dataset.materialize(item);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      CHECK(std::abs(img.data[i] - live.data[i]) <= 0.5 / 255.0 + 1e-12);
    }
  }
  std::ifstream manifest(dir.path() / "manifest.jsonl");
  int lines = 0;
  std::string line;
  while (std::getline(manifest, line)) {
    if (!line.empty()) ++lines;
  }
  CHECK(lines == 3);
}
