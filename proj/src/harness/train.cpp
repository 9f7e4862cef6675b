#include "nightatlas/harness/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nightatlas/core/error.hpp"
#include "nightatlas/core/rng.hpp"
#include "nightatlas/eigencity/model_io.hpp"
#include "nightatlas/imgproc/image_io.hpp"
#include "nightatlas/neuralnet/adam.hpp"
#include "nightatlas/spectral/fft.hpp"

namespace nightatlas::harness {

DiskTrainingData::DiskTrainingData(const std::filesystem::path& dir) : dir_(dir) {
  std::ifstream in(dir / "manifest.jsonl");
  if (!in) throw core::IoError("missing manifest.jsonl in " + dir.string());
  std::string line;
  std::set<std::string> labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw core::FormatError("bad manifest line: " + line);
    }
    augment::SraItem item;
    item.source_id = j.at("source_id").get<std::string>();
    item.label = j.at("label").get<std::string>();
    item.variant_index = j.at("variant_index").get<int>();
    item.seed = j.at("seed").get<std::uint64_t>();
    item.split = augment::split_from_string(j.at("split").get<std::string>());
    labels.insert(item.label);
    items_.push_back(std::move(item));
  }
  // Labelled classes in name order, Other last, matching build order.
  for (const auto& label : labels) {
    if (label != augment::kOtherClass) classes_.push_back(label);
  }
  if (labels.count(augment::kOtherClass)) classes_.push_back(augment::kOtherClass);
}

imgproc::GrayImage DiskTrainingData::image(std::size_t i) const {
  const auto& item = items_[i];
  return imgproc::read_png_gray(
      dir_ / (item.source_id + "_" + std::to_string(item.variant_index) + ".png"));
}

TrainMode train_mode_from_string(const std::string& name) {
  if (name == "A" || name == "a") return TrainMode::kA;
  if (name == "B" || name == "b") return TrainMode::kB;
  if (name == "C" || name == "c") return TrainMode::kC;
  throw core::ConfigError("unknown training mode: " + name);
}

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kA: return "A";
    case TrainMode::kB: return "B";
    case TrainMode::kC: return "C";
  }
  return "C";
}

void apply_mode(const TrainConfig& cfg, neuralnet::NetConfig& net_cfg, double& l2_lambda) {
  switch (cfg.mode) {
    case TrainMode::kA:
      l2_lambda = 0.0;
      net_cfg.dropout_active = false;
      break;
    case TrainMode::kB:
      l2_lambda = cfg.l2_lambda;
      net_cfg.dropout_active = false;
      break;
    case TrainMode::kC:
      l2_lambda = cfg.l2_lambda;
      net_cfg.dropout_active = true;
      break;
  }
  net_cfg.l2_lambda = l2_lambda;
}

namespace {

neuralnet::Tensor to_input_tensor(const std::vector<imgproc::GrayImage>& images) {
  const int batch = static_cast<int>(images.size());
  const int size = images.front().width;
  neuralnet::Tensor x({batch, 1, size, size});
  std::size_t offset = 0;
  for (const auto& img : images) {
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      x.data[offset + i] = static_cast<float>(img.data[i]);
    }
    offset += img.data.size();
  }
  return x;
}

imgproc::GrayImage fit_to_input(imgproc::GrayImage img, int input_size) {
  if (img.width == input_size && img.height == input_size) return img;
  return imgproc::resize_bilinear(img, input_size, input_size);
}

std::vector<std::size_t> indices_of_split(const TrainingData& data, augment::Split split) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.item(i).split == split) out.push_back(i);
  }
  return out;
}

}  // namespace

TrainResult train_cnn(const TrainingData& data, const TrainConfig& cfg) {
  const auto& classes = data.classes();
  const auto train_idx = indices_of_split(data, augment::Split::kTrain);
  const auto val_idx = indices_of_split(data, augment::Split::kValidation);

  // Every class must appear in both splits.
  for (const auto split : {augment::Split::kTrain, augment::Split::kValidation}) {
    std::set<std::string> present;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.item(i).split == split) present.insert(data.item(i).label);
    }
    for (const auto& label : classes) {
      if (!present.count(label)) {
        throw core::ConfigError("class '" + label + "' missing from the " +
                                augment::to_string(split) + " split");
      }
    }
  }

  neuralnet::NetConfig net_cfg = neuralnet::default_net_config(
      cfg.input_size, cfg.map_divisor, static_cast<int>(classes.size()));
  double l2_lambda = 0.0;
  apply_mode(cfg, net_cfg, l2_lambda);

  TrainResult result;
  result.network = neuralnet::build_network(net_cfg, cfg.seeds.init);
  auto adam = neuralnet::AdamState::for_network(result.network, cfg.learning_rate);

  const std::filesystem::path run_dir = cfg.run_dir;
  if (!cfg.run_dir.empty()) {
    std::filesystem::create_directories(run_dir / "checkpoints");
    std::filesystem::create_directories(run_dir / "curves");
    std::filesystem::create_directories(run_dir / "reports");
  }

  // Image cache: items are regenerated deterministically, so caching is a
  // pure speed knob.
  std::vector<imgproc::GrayImage> cache;
  std::vector<char> cached;
  if (cfg.cache_images) {
    cache.resize(data.size());
    cached.assign(data.size(), 0);
  }
  const auto load_image = [&](std::size_t i) -> imgproc::GrayImage {
    if (cfg.cache_images) {
      if (!cached[i]) {
        cache[i] = fit_to_input(data.image(i), cfg.input_size);
        cached[i] = 1;
      }
      return cache[i];
    }
    return fit_to_input(data.image(i), cfg.input_size);
  };

  long global_step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::size_t> order = train_idx;
    core::Rng rng(core::derive_seed(cfg.seeds.shuffle, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }

    double loss_sum = 0.0;
    long step_count = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), pos + cfg.batch_size);
      std::vector<imgproc::GrayImage> images;
      std::vector<int> labels;
      images.reserve(end - pos);
      for (std::size_t i = pos; i < end; ++i) {
        images.push_back(load_image(order[i]));
        labels.push_back(static_cast<int>(
            std::find(classes.begin(), classes.end(), data.item(order[i]).label) -
            classes.begin()));
      }
      const neuralnet::Tensor x = to_input_tensor(images);
      const std::uint64_t step_seed = core::derive_seed(cfg.seeds.dropout, global_step);

      const auto fwd = neuralnet::forward(result.network, x, neuralnet::RunMode::kTrain,
                                          step_seed);
      auto [ce_loss, grad_logits] = neuralnet::softmax_cross_entropy(fwd.logits, labels);
      auto grads = neuralnet::backward(result.network, fwd, grad_logits,
                                       neuralnet::RunMode::kTrain, step_seed);
      const double l2_loss = neuralnet::l2_penalty(result.network, l2_lambda, &grads);
      neuralnet::adam_step(adam, result.network, grads);

      const double raw_loss = ce_loss + l2_loss;
      loss_sum += raw_loss;
      ++step_count;
      ++global_step;
      result.loss_curve.push_back({global_step, epoch, raw_loss});
    }

    EpochRecord record;
    record.epoch = epoch;
    record.mean_train_loss = step_count > 0 ? loss_sum / step_count : 0.0;
    if (cfg.eval_every_epoch) {
      long correct = 0;
      for (std::size_t pos = 0; pos < val_idx.size(); pos += cfg.batch_size) {
        const std::size_t end = std::min(val_idx.size(), pos + cfg.batch_size);
        std::vector<imgproc::GrayImage> images;
        std::vector<int> labels;
        for (std::size_t i = pos; i < end; ++i) {
          images.push_back(load_image(val_idx[i]));
          labels.push_back(static_cast<int>(
              std::find(classes.begin(), classes.end(), data.item(val_idx[i]).label) -
              classes.begin()));
        }
        const auto fwd = neuralnet::forward(result.network, to_input_tensor(images),
                                            neuralnet::RunMode::kEval, 0);
        for (std::size_t b = 0; b < images.size(); ++b) {
          int best = 0;
          for (int c = 1; c < static_cast<int>(classes.size()); ++c) {
            if (fwd.probabilities.at(static_cast<int>(b), c) >
                fwd.probabilities.at(static_cast<int>(b), best)) {
              best = c;
            }
          }
          if (best == labels[b]) ++correct;
        }
      }
      record.val_accuracy =
          val_idx.empty() ? 0.0 : static_cast<double>(correct) / val_idx.size();
    }
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!cfg.run_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof(name), "epoch_%03d.nann", epoch);
      const auto path = run_dir / "checkpoints" / name;
      neuralnet::save_checkpoint(path, result.network);
      record.checkpoint_path = path.string();
    }
    result.epochs.push_back(std::move(record));
  }

  if (!cfg.run_dir.empty()) {
    std::ofstream loss_out(run_dir / "curves" / "loss.csv");
    loss_out << loss_curve_csv(result.loss_curve);
    std::ofstream acc_out(run_dir / "curves" / "val_accuracy.csv");
    acc_out << accuracy_curve_csv(result.epochs);
  }
  return result;
}

double validation_accuracy(const neuralnet::Network& net, const TrainingData& data,
                           int input_size, int batch_size) {
  const auto val_idx = indices_of_split(data, augment::Split::kValidation);
  if (val_idx.empty()) return 0.0;
  const auto& classes = data.classes();
  long correct = 0;
  for (std::size_t pos = 0; pos < val_idx.size(); pos += batch_size) {
    const std::size_t end = std::min(val_idx.size(), pos + batch_size);
    std::vector<imgproc::GrayImage> images;
    std::vector<int> labels;
    for (std::size_t i = pos; i < end; ++i) {
      images.push_back(fit_to_input(data.image(val_idx[i]), input_size));
      labels.push_back(static_cast<int>(
          std::find(classes.begin(), classes.end(), data.item(val_idx[i]).label) -
          classes.begin()));
    }
    const auto fwd = neuralnet::forward(net, to_input_tensor(images),
                                        neuralnet::RunMode::kEval, 0);
    for (std::size_t b = 0; b < images.size(); ++b) {
      int best = 0;
      for (int c = 1; c < static_cast<int>(classes.size()); ++c) {
        if (fwd.probabilities.at(static_cast<int>(b), c) >
            fwd.probabilities.at(static_cast<int>(b), best)) {
          best = c;
        }
      }
      if (best == labels[b]) ++correct;
    }
  }
  return static_cast<double>(correct) / val_idx.size();
}

namespace {

spectral::RealGrid spectral_grid(const imgproc::GrayImage& img, const SpectralOptions& opts) {
  spectral::RealGrid grid = spectral::magnitude_spectrum(spectral::fft2d(img));
  if (opts.quadrant_shift) grid = spectral::quadrant_shift(grid);
  if (opts.log_compress) grid = spectral::log_compress(grid);
  return grid;
}

}  // namespace

std::vector<double> spectral_features(const imgproc::GrayImage& img,
                                      const SpectralOptions& opts) {
  return spectral::unroll(spectral_grid(img, opts));
}

imgproc::GrayImage spectrum_image(const imgproc::GrayImage& img, const SpectralOptions& opts) {
  const spectral::RealGrid grid = spectral_grid(img, opts);
  double max_v = 0.0;
  for (const double v : grid.data) max_v = std::max(max_v, v);
  imgproc::GrayImage out(grid.width, grid.height);
  if (max_v > 0.0) {
    for (std::size_t i = 0; i < grid.data.size(); ++i) out.data[i] = grid.data[i] / max_v;
  }
  return out;
}

EigencityResult train_eigencity(const TrainingData& data, std::size_t k, int input_size,
                                const SpectralOptions& opts) {
  const auto& classes = data.classes();
  for (const auto& label : classes) {
    if (label == augment::kOtherClass) {
      throw core::ConfigError("train_eigencity: dataset must use labelled classes only");
    }
  }
  const std::size_t n = data.size();
  if (n < k + 1) {
    throw core::InsufficientDataError("train_eigencity: need at least k+1 samples, have " +
                                      std::to_string(n));
  }

  // First image fixes the feature width.
  std::vector<double> first =
      spectral_features(fit_to_input(data.image(0), input_size), opts);
  eigencity::Matrix rows(n, first.size());
  std::copy(first.begin(), first.end(), rows.row(0));
  std::vector<int> labels(n);
  labels[0] = static_cast<int>(
      std::find(classes.begin(), classes.end(), data.item(0).label) - classes.begin());
  for (std::size_t i = 1; i < n; ++i) {
    const auto features = spectral_features(fit_to_input(data.image(i), input_size), opts);
    if (features.size() != rows.cols) {
      throw core::DimensionError("train_eigencity: inconsistent feature widths");
    }
    std::copy(features.begin(), features.end(), rows.row(i));
    labels[i] = static_cast<int>(
        std::find(classes.begin(), classes.end(), data.item(i).label) - classes.begin());
  }

  EigencityResult result;
  result.classes = classes;
  const eigencity::ScalerStats stats = eigencity::fit_scaler(rows);
  eigencity::Matrix scaled(n, rows.cols);
  for (std::size_t i = 0; i < n; ++i) {
    const double* src = rows.row(i);
    double* dst = scaled.row(i);
    for (std::size_t j = 0; j < rows.cols; ++j) dst[j] = (src[j] - stats.mean[j]) / stats.std[j];
  }
  result.model = eigencity::fit_pca(scaled, k);
  result.model.scaler = stats;

  result.embeddings.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> raw(rows.row(i), rows.row(i) + rows.cols);
    result.embeddings[i] = {eigencity::project(result.model, raw), labels[i]};
  }
  return result;
}

void save_checkpoint(const std::filesystem::path& path, const neuralnet::Network& net) {
  neuralnet::save_checkpoint(path, net);
}

neuralnet::Network load_checkpoint(const std::filesystem::path& path) {
  return neuralnet::load_checkpoint(path);
}

std::string loss_curve_csv(const std::vector<StepSample>& samples, double smoothing) {
  std::ostringstream out;
  out << "step,epoch,raw_loss,smoothed_loss\n";
  out.precision(9);
  double ema = samples.empty() ? 0.0 : samples.front().raw_loss;
  for (const auto& s : samples) {
    ema = smoothing * ema + (1.0 - smoothing) * s.raw_loss;
    out << s.step << "," << s.epoch << "," << s.raw_loss << "," << ema << "\n";
  }
  return out.str();
}

std::string accuracy_curve_csv(const std::vector<EpochRecord>& epochs) {
  std::ostringstream out;
  out << "epoch,val_accuracy\n";
  out.precision(9);
  for (const auto& e : epochs) out << e.epoch << "," << e.val_accuracy << "\n";
  return out.str();
}

}  // namespace nightatlas::harness
