#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "nightatlas/augment/augment.hpp"
#include "nightatlas/eigencity/pca.hpp"
#include "nightatlas/neuralnet/checkpoint.hpp"
#include "nightatlas/neuralnet/network.hpp"

namespace nightatlas::harness {

// Uniform view over a training dataset: lazy SRA variants or a materialized
// directory of PNGs. Images are 224x224 unless the source says otherwise.
class TrainingData {
 public:
  virtual ~TrainingData() = default;
  virtual const std::vector<std::string>& classes() const = 0;
  virtual std::size_t size() const = 0;
  virtual const augment::SraItem& item(std::size_t i) const = 0;
  virtual imgproc::GrayImage image(std::size_t i) const = 0;
};

class SraTrainingData : public TrainingData {
 public:
  explicit SraTrainingData(augment::SraDataset dataset) : dataset_(std::move(dataset)) {}
  const std::vector<std::string>& classes() const override { return dataset_.classes(); }
  std::size_t size() const override { return dataset_.items().size(); }
  const augment::SraItem& item(std::size_t i) const override { return dataset_.items()[i]; }
  imgproc::GrayImage image(std::size_t i) const override {
    return dataset_.materialize(dataset_.items()[i]);
  }
  const augment::SraDataset& dataset() const { return dataset_; }

 private:
  augment::SraDataset dataset_;
};

// Reads manifest.jsonl plus <source_id>_<variant_index>.png files written by
// materialize_to_disk.
class DiskTrainingData : public TrainingData {
 public:
  explicit DiskTrainingData(const std::filesystem::path& dir);
  const std::vector<std::string>& classes() const override { return classes_; }
  std::size_t size() const override { return items_.size(); }
  const augment::SraItem& item(std::size_t i) const override { return items_[i]; }
  imgproc::GrayImage image(std::size_t i) const override;

 private:
  std::filesystem::path dir_;
  std::vector<std::string> classes_;
  std::vector<augment::SraItem> items_;
};

enum class TrainMode { kA, kB, kC };

TrainMode train_mode_from_string(const std::string& name);
std::string to_string(TrainMode mode);

struct TrainSeeds {
  std::uint64_t init = 1;
  std::uint64_t shuffle = 2;
  std::uint64_t dropout = 3;
};

struct TrainConfig {
  TrainMode mode = TrainMode::kC;
  int epochs = 50;
  int batch_size = 64;
  TrainSeeds seeds;
  double learning_rate = 1e-4;
  double l2_lambda = 5e-4;   // ignored (forced 0) in mode A
  int input_size = 224;      // images are bilinearly resized when smaller
  int map_divisor = 1;       // desk scale: input_size 64, map_divisor 4
  bool eval_every_epoch = true;
  std::string run_dir;       // when set: config, curves, checkpoints
  bool cache_images = true;  // keep materialized tensors across epochs
};

struct EpochRecord {
  int epoch = 0;
  double mean_train_loss = 0.0;
  double val_accuracy = 0.0;
  double wall_seconds = 0.0;
  std::string checkpoint_path;
};

struct StepSample {
  long step = 0;
  int epoch = 0;
  double raw_loss = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> epochs;
  std::vector<StepSample> loss_curve;
  neuralnet::Network network;
};

// Mode contract: A forces l2_lambda = 0 and dropout inactive; B keeps L2 and
// dropout inactive; C applies both.
void apply_mode(const TrainConfig& cfg, neuralnet::NetConfig& net_cfg, double& l2_lambda);

// Seeded-shuffle epoch loop: forward (train mode), cross entropy plus L2 for
// B/C, backward, Adam; validation accuracy after each epoch in eval mode and
// a checkpoint per epoch when run_dir is set. The last partial batch is kept.
TrainResult train_cnn(const TrainingData& data, const TrainConfig& cfg);

double validation_accuracy(const neuralnet::Network& net, const TrainingData& data,
                           int input_size, int batch_size = 64);

struct EigencityResult {
  eigencity::PcaModel model;
  std::vector<eigencity::LabeledEmbedding> embeddings;
  std::vector<std::string> classes;
};

// Experiment switches for the spectral features. Defaults are the plain
// magnitude spectrum; whatever is chosen at training time must be applied
// identically at evaluation time.
struct SpectralOptions {
  bool quadrant_shift = false;
  bool log_compress = false;
};

// FFT -> magnitude -> unroll -> scaler -> PCA over every item of the
// labelled-class dataset ("Other" is rejected); projects all training rows.
// input_size != 224 resizes first (64 in CI).
EigencityResult train_eigencity(const TrainingData& data, std::size_t k, int input_size = 224,
                                const SpectralOptions& opts = {});

// Feature pipeline for one image, identical at train and test time.
std::vector<double> spectral_features(const imgproc::GrayImage& img,
                                      const SpectralOptions& opts = {});

// Magnitude spectrum scaled into [0,1] for debug dumps.
imgproc::GrayImage spectrum_image(const imgproc::GrayImage& img, const SpectralOptions& opts);

// Thin wrappers over the checkpoint format.
void save_checkpoint(const std::filesystem::path& path, const neuralnet::Network& net);
neuralnet::Network load_checkpoint(const std::filesystem::path& path);

// Exporter-side smoothing for the loss curve: EMA with factor 0.6,
// never applied to stored raw values.
std::string loss_curve_csv(const std::vector<StepSample>& samples, double smoothing = 0.6);
std::string accuracy_curve_csv(const std::vector<EpochRecord>& epochs);

}  // namespace nightatlas::harness
