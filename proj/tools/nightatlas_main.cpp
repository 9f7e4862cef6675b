#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nightatlas/augment/augment.hpp"
#include "nightatlas/core/error.hpp"
#include "nightatlas/core/parallel.hpp"
#include "nightatlas/dataio/fetch.hpp"
#include "nightatlas/dataio/manifest.hpp"
#include "nightatlas/dataio/synth.hpp"
#include "nightatlas/eigencity/model_io.hpp"
#include "nightatlas/eigencity/sweep.hpp"
#include "nightatlas/evalkit/report.hpp"
#include "nightatlas/harness/train.hpp"
#include "nightatlas/imgproc/image_io.hpp"

namespace fs = std::filesystem;
using namespace nightatlas;

namespace {

// JSON config files: top-level keys set main options, nested objects set
// subcommand options. Written back verbatim into run directories so every
// run is self-describing.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    return dump_app(app, default_also).dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::FileError(std::string("invalid JSON config: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static nlohmann::json dump_app(const CLI::App* app, bool default_also) {
    nlohmann::json out = nlohmann::json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames().front();
      if (!opt->results().empty()) {
        if (opt->results().size() == 1) {
          out[name] = opt->results().front();
        } else {
          out[name] = opt->results();
        }
      } else if (default_also && !opt->get_default_str().empty()) {
        out[name] = opt->get_default_str();
      }
    }
    for (const CLI::App* sub : app->get_subcommands({})) {
      out[sub->get_name()] = dump_app(sub, default_also);
    }
    return out;
  }

  static void collect(const nlohmann::json& j, std::vector<std::string> parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        collect(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar_to_string(v));
      } else {
        item.inputs.push_back(scalar_to_string(value));
      }
      items.push_back(std::move(item));
    }
  }

  static std::string scalar_to_string(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }
};

std::string env_name(const std::string& option) {
  std::string name = "NIGHTATLAS_";
  for (char c : option) {
    name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return name;
}

// Adds the NIGHTATLAS_ environment fallback to every option of the app tree.
void wire_environment(CLI::App& app) {
  for (CLI::Option* opt : app.get_options()) {
    if (!opt->get_lnames().empty() && opt->get_envname().empty()) {
      opt->envname(env_name(opt->get_lnames().front()));
    }
  }
  for (CLI::App* sub : app.get_subcommands({})) wire_environment(*sub);
}

void write_run_config(const CLI::App& root, const fs::path& run_dir) {
  fs::create_directories(run_dir);
  std::ofstream out(run_dir / "config.json");
  if (!out) throw core::IoError("cannot write " + (run_dir / "config.json").string());
  out << root.config_to_str(true, false);
}

void print_resolved_config(const CLI::App& root) {
  std::cout << "resolved configuration:\n" << root.config_to_str(true, false);
}

// Source listing CSV: id,label,path. Labelled rows become the per-class
// references; rows labelled Other join the unlabelled pool.
struct SourceList {
  std::map<std::string, imgproc::RgbImage> references;
  std::map<std::string, std::string> reference_ids;
  std::vector<std::pair<std::string, imgproc::RgbImage>> others;
};

SourceList load_sources(const fs::path& csv_path,
                        const std::set<std::string>& exclude_from_other) {
  std::ifstream in(csv_path);
  if (!in) throw core::IoError("cannot open " + csv_path.string());
  SourceList sources;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line_no == 1) {
      if (line_no == 1 && line != "id,label,path") {
        throw core::FormatError(csv_path.string() + ": expected header 'id,label,path'");
      }
      continue;
    }
    std::istringstream fields(line);
    std::string id, label, path;
    if (!std::getline(fields, id, ',') || !std::getline(fields, label, ',') ||
        !std::getline(fields, path)) {
      throw core::FormatError(csv_path.string() + " line " + std::to_string(line_no) +
                              ": expected id,label,path");
    }
    const fs::path image_path =
        fs::path(path).is_absolute() ? fs::path(path) : csv_path.parent_path() / path;
    if (label == augment::kOtherClass) {
      if (!exclude_from_other.count(id)) {
        sources.others.emplace_back(id, imgproc::read_png_rgb(image_path));
      }
    } else {
      if (sources.references.count(label)) {
        throw core::ConfigError("duplicate reference for class '" + label +
                                "' (single-reference training takes exactly one)");
      }
      sources.references[label] = imgproc::read_png_rgb(image_path);
      sources.reference_ids[label] = id;
    }
  }
  return sources;
}

std::vector<double> parse_thresholds(const std::string& spec) {
  const auto colon = spec.find(':');
  std::vector<double> out;
  if (colon != std::string::npos) {
    const auto second = spec.find(':', colon + 1);
    if (second == std::string::npos) {
      throw core::ConfigError("threshold range must be start:end:step, got " + spec);
    }
    const double start = std::stod(spec.substr(0, colon));
    const double end = std::stod(spec.substr(colon + 1, second - colon - 1));
    const double step = std::stod(spec.substr(second + 1));
    if (step <= 0.0 || end < start) throw core::ConfigError("bad threshold range " + spec);
    for (double t = start; t <= end + 1e-9; t += step) out.push_back(t);
  } else {
    std::istringstream in(spec);
    std::string token;
    while (std::getline(in, token, ',')) {
      if (!token.empty()) out.push_back(std::stod(token));
    }
  }
  if (out.empty()) throw core::ConfigError("no thresholds in '" + spec + "'");
  return out;
}

std::vector<evalkit::TestItem> load_test_items(const harness::DiskTrainingData& data,
                                               int input_size) {
  std::vector<evalkit::TestItem> items;
  items.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& item = data.item(i);
    imgproc::GrayImage img = data.image(i);
    if (img.width != input_size || img.height != input_size) {
      img = imgproc::resize_bilinear(img, input_size, input_size);
    }
    int label = 0;
    for (std::size_t c = 0; c < data.classes().size(); ++c) {
      if (data.classes()[c] == item.label) label = static_cast<int>(c);
    }
    items.push_back({item.source_id + "_" + std::to_string(item.variant_index), label,
                     std::move(img)});
  }
  return items;
}

int run_synth(const std::string& out_dir, int classes, int per_class, std::uint64_t seed) {
  fs::create_directories(out_dir);
  const auto dataset = dataio::synth_dataset(classes, per_class, seed);
  std::ofstream listing(fs::path(out_dir) / "sources.csv");
  listing << "id,label,path\n";
  for (const auto& item : dataset) {
    const std::string id = item.label + "_" + std::to_string(item.instance);
    const std::string file = id + ".png";
    imgproc::write_png(fs::path(out_dir) / file, item.image);
    // instance 0 is the class reference; the rest join the Other pool as
    // untransformed repeat shots
    listing << id << "," << (item.instance == 0 ? item.label : augment::kOtherClass) << ","
            << file << "\n";
  }
  std::cout << "wrote " << dataset.size() << " synthetic images to " << out_dir << "\n";
  return 0;
}

int run_fetch(const std::string& manifest_path, const std::string& url_template,
              const std::string& cache_dir, bool force, int retries, int parallelism) {
  std::ifstream in(manifest_path);
  if (!in) throw core::IoError("cannot open " + manifest_path);
  const std::string csv((std::istreambuf_iterator<char>(in)), {});
  const auto entries = dataio::parse_manifest(csv);

  dataio::FetchOptions options;
  options.force = force;
  options.max_retries = retries;
  options.parallelism = std::min(parallelism, core::thread_cap());
  const auto results = dataio::fetch_images(entries, url_template, cache_dir, options);

  long cached = 0, downloaded = 0, missing = 0;
  std::ofstream report(fs::path(cache_dir) / "fetch_report.csv");
  report << "id,status\n";
  for (const auto& r : results) {
    report << r.id << "," << dataio::to_string(r.status) << "\n";
    switch (r.status) {
      case dataio::FetchStatus::kCached: ++cached; break;
      case dataio::FetchStatus::kDownloaded: ++downloaded; break;
      case dataio::FetchStatus::kMissing: ++missing; break;
    }
  }
  std::cout << entries.size() << " entries: " << downloaded << " downloaded, " << cached
            << " cached, " << missing << " missing\n";
  return 0;
}

int run_subset(const std::string& manifest_path, const std::string& bbox_path,
               const std::string& label, const std::string& out_path) {
  std::ifstream in(manifest_path);
  if (!in) throw core::IoError("cannot open " + manifest_path);
  const std::string csv((std::istreambuf_iterator<char>(in)), {});
  const auto entries = dataio::parse_manifest(csv);

  std::ifstream bbox_in(bbox_path);
  if (!bbox_in) throw core::IoError("cannot open " + bbox_path);
  nlohmann::json boxes;
  try {
    bbox_in >> boxes;
  } catch (const nlohmann::json::exception& e) {
    throw core::FormatError(std::string("invalid bbox JSON: ") + e.what());
  }
  if (!boxes.contains(label)) {
    throw core::ConfigError("bbox config has no entry for label '" + label + "'");
  }
  const auto& b = boxes.at(label);
  dataio::BBox box{b.at("lat_min").get<double>(), b.at("lat_max").get<double>(),
                   b.at("lon_min").get<double>(), b.at("lon_max").get<double>()};
  std::vector<std::string> exclusions;
  if (b.contains("exclusions_path")) {
    const fs::path list_path = fs::path(bbox_path).parent_path() /
                               b.at("exclusions_path").get<std::string>();
    std::ifstream list_in(list_path);
    if (!list_in) throw core::IoError("cannot open exclusions " + list_path.string());
    const std::string text((std::istreambuf_iterator<char>(list_in)), {});
    exclusions = dataio::parse_exclusion_list(text);
  }
  const auto subset = dataio::subset_by_bbox(entries, box, exclusions);
  std::ofstream out(out_path);
  if (!out) throw core::IoError("cannot write " + out_path);
  out << dataio::manifest_to_csv(subset);
  std::cout << label << ": " << subset.size() << " entries after "
            << exclusions.size() << " exclusions\n";
  return 0;
}

int run_augment(const CLI::App& root, const std::string& sources_path,
                const std::string& out_dir, int variants, int other_variants,
                std::uint64_t seed, double split_fraction, std::uint64_t split_seed,
                double q_low, double q_high, const std::string& threshold_method,
                bool originals, const std::string& exclude_from_other_path) {
  std::set<std::string> exclude;
  if (!exclude_from_other_path.empty()) {
    std::ifstream in(exclude_from_other_path);
    if (!in) throw core::IoError("cannot open " + exclude_from_other_path);
    const std::string text((std::istreambuf_iterator<char>(in)), {});
    for (const auto& id : dataio::parse_exclusion_list(text)) exclude.insert(id);
  }
  const SourceList sources = load_sources(sources_path, exclude);
  if (sources.references.empty()) {
    throw core::ConfigError("no labelled references in " + sources_path);
  }

  augment::AugmentConfig cfg_class;
  cfg_class.enhance.q_low = q_low;
  cfg_class.enhance.q_high = q_high;
  cfg_class.enhance.threshold_method = imgproc::threshold_method_from_string(threshold_method);
  cfg_class.variants_per_image = variants;
  cfg_class.master_seed = seed;
  if (originals) {
    // preprocessed originals: enhance + geometry only, one item per source
    cfg_class.rotation_max_deg = 0.0;
    cfg_class.shift_max_frac = 0.0;
    cfg_class.shear_max = 0.0;
    cfg_class.zoom_max_frac = 0.0;
    cfg_class.allow_flip_h = false;
    cfg_class.allow_flip_v = false;
    cfg_class.variants_per_image = 1;
  }
  augment::AugmentConfig cfg_other = cfg_class;
  if (!originals) cfg_other.variants_per_image = other_variants;
  cfg_other.master_seed = core::derive_seed(seed, 0x07);

  std::vector<imgproc::RgbImage> other_images;
  other_images.reserve(sources.others.size());
  for (const auto& [id, image] : sources.others) other_images.push_back(image);

  const auto dataset = augment::build_sra_dataset(sources.references, other_images,
                                                  cfg_class, cfg_other, split_fraction,
                                                  split_seed);
  augment::materialize_to_disk(dataset, out_dir);
  write_run_config(root, out_dir);
  std::cout << "materialized " << dataset.items().size() << " items ("
            << dataset.classes().size() << " classes) to " << out_dir << "\n";
  return 0;
}

int run_train_pca(const CLI::App& root, const std::string& data_dir,
                  const std::string& run_dir, int k, int input_size,
                  const harness::SpectralOptions& opts, int dump_spectra) {
  write_run_config(root, run_dir);
  harness::DiskTrainingData data(data_dir);
  const auto result =
      harness::train_eigencity(data, static_cast<std::size_t>(k), input_size, opts);

  fs::create_directories(run_dir);
  eigencity::save_model(fs::path(run_dir) / "model.ecpc", result.model);
  eigencity::save_embeddings(fs::path(run_dir) / "embeddings.ecem", result.embeddings);
  nlohmann::json meta{{"classes", result.classes},
                      {"input_size", input_size},
                      {"fft_shift", opts.quadrant_shift},
                      {"fft_log", opts.log_compress}};
  std::ofstream(fs::path(run_dir) / "classes.json") << meta.dump(2) << "\n";

  if (dump_spectra > 0) {
    const fs::path spectra_dir = fs::path(run_dir) / "spectra";
    fs::create_directories(spectra_dir);
    const int count = std::min<int>(dump_spectra, static_cast<int>(data.size()));
    for (int i = 0; i < count; ++i) {
      imgproc::GrayImage img = data.image(i);
      if (img.width != input_size || img.height != input_size) {
        img = imgproc::resize_bilinear(img, input_size, input_size);
      }
      const auto& item = data.item(i);
      imgproc::write_png(spectra_dir / (item.source_id + "_" +
                                        std::to_string(item.variant_index) + ".png"),
                         harness::spectrum_image(img, opts));
    }
    std::cout << "dumped " << count << " spectra to " << spectra_dir.string() << "\n";
  }

  std::cout << "trained PCA: " << result.embeddings.size() << " embeddings, k=" << k << "\n";
  for (std::size_t c = 0; c < result.model.explained_variance.size(); ++c) {
    std::cout << "  component " << c + 1 << ": variance "
              << result.model.explained_variance[c] << "\n";
  }
  return 0;
}

int run_eval_pca(const CLI::App& root, const std::string& model_dir,
                 const std::string& data_dir, const std::string& thresholds_spec,
                 const std::string& run_dir) {
  const auto model = eigencity::load_model(fs::path(model_dir) / "model.ecpc");
  const auto train_embeddings =
      eigencity::load_embeddings(fs::path(model_dir) / "embeddings.ecem");
  std::ifstream classes_in(fs::path(model_dir) / "classes.json");
  if (!classes_in) throw core::IoError("missing classes.json in " + model_dir);
  nlohmann::json meta;
  classes_in >> meta;
  std::vector<std::string> classes = meta.at("classes").get<std::vector<std::string>>();
  const int input_size = meta.at("input_size").get<int>();
  harness::SpectralOptions opts;
  opts.quadrant_shift = meta.value("fft_shift", false);
  opts.log_compress = meta.value("fft_log", false);

  write_run_config(root, run_dir);

  harness::DiskTrainingData data(data_dir);
  std::vector<std::string> eval_classes = classes;
  for (const auto& label : data.classes()) {
    if (std::find(eval_classes.begin(), eval_classes.end(), label) == eval_classes.end()) {
      eval_classes.push_back(label);
    }
  }

  std::vector<eigencity::LabeledEmbedding> test;
  test.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    imgproc::GrayImage img = data.image(i);
    if (img.width != input_size || img.height != input_size) {
      img = imgproc::resize_bilinear(img, input_size, input_size);
    }
    const auto features = harness::spectral_features(img, opts);
    int label = 0;
    for (std::size_t c = 0; c < eval_classes.size(); ++c) {
      if (eval_classes[c] == data.item(i).label) label = static_cast<int>(c);
    }
    test.push_back({eigencity::project(model, features), label});
  }

  const auto thresholds = parse_thresholds(thresholds_spec);
  const auto reports =
      eigencity::threshold_sweep(test, train_embeddings, thresholds, eval_classes);

  fs::create_directories(fs::path(run_dir) / "reports");
  std::ofstream(fs::path(run_dir) / "reports" / "sweep.csv")
      << evalkit::metrics_csv(reports, "threshold");
  std::ofstream(fs::path(run_dir) / "reports" / "sweep_means.csv")
      << evalkit::means_csv(reports, "threshold");
  std::cout << "swept " << thresholds.size() << " thresholds over " << test.size()
            << " test embeddings\n";
  return 0;
}

int run_train_cnn(const CLI::App& root, const std::string& data_dir,
                  const std::string& run_dir, const std::string& mode, int epochs, int batch,
                  double lr, double l2, int input_size, int map_divisor,
                  std::uint64_t seed_init, std::uint64_t seed_shuffle,
                  std::uint64_t seed_dropout) {
  write_run_config(root, run_dir);
  harness::DiskTrainingData data(data_dir);

  harness::TrainConfig cfg;
  cfg.mode = harness::train_mode_from_string(mode);
  cfg.epochs = epochs;
  cfg.batch_size = batch;
  cfg.learning_rate = lr;
  cfg.l2_lambda = l2;
  cfg.input_size = input_size;
  cfg.map_divisor = map_divisor;
  cfg.seeds = {seed_init, seed_shuffle, seed_dropout};
  cfg.run_dir = run_dir;

  const auto result = harness::train_cnn(data, cfg);
  for (const auto& record : result.epochs) {
    std::cout << "epoch " << record.epoch << ": loss " << record.mean_train_loss
              << ", val accuracy " << record.val_accuracy << " (" << record.wall_seconds
              << "s)\n";
  }
  return 0;
}

int run_eval_cnn(const CLI::App& root, const std::string& data_dir,
                 const std::string& run_dir, int input_size, int top_k) {
  write_run_config(root, fs::path(run_dir) / "eval");
  harness::DiskTrainingData data(data_dir);
  const auto test = load_test_items(data, input_size);

  const fs::path checkpoints = fs::path(run_dir) / "checkpoints";
  if (!fs::is_directory(checkpoints)) {
    throw core::IoError("no checkpoints directory in " + run_dir);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(checkpoints)) {
    if (entry.path().extension() == ".nann") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw core::IoError("no checkpoints found in " + checkpoints.string());

  std::vector<evalkit::EvalReport> reports;
  for (const auto& file : files) {
    const auto net = neuralnet::load_checkpoint(file);
    const std::string tag = file.stem().string().substr(std::string("epoch_").size());
    auto report = evalkit::evaluate_epoch(net, test, data.classes(), tag, top_k);
    const fs::path report_dir = fs::path(run_dir) / "reports" / file.stem().string();
    evalkit::export_report(report, report_dir, &test);
    std::ofstream(report_dir / "probabilities.csv")
        << evalkit::probabilities_csv(net, test, data.classes());
    std::cout << "epoch " << tag << ": accuracy " << report.accuracy << ", mean precision "
              << report.metrics.mean_precision << ", mean recall "
              << report.metrics.mean_recall << "\n";
    reports.push_back(std::move(report));
  }
  std::ofstream(fs::path(run_dir) / "reports" / "metrics.csv")
      << evalkit::metrics_csv(reports);
  std::ofstream(fs::path(run_dir) / "reports" / "means.csv") << evalkit::means_csv(reports);
  return 0;
}

int run_report(const std::string& run_dir) {
  const fs::path reports_dir = fs::path(run_dir) / "reports";
  if (!fs::is_directory(reports_dir)) {
    throw core::IoError("no reports directory in " + run_dir);
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(reports_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "probabilities.csv")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw core::IoError("no probability dumps under " + reports_dir.string());

  std::vector<evalkit::EvalReport> reports;
  for (const auto& dir : dirs) {
    std::ifstream in(dir / "probabilities.csv");
    std::string header;
    std::getline(in, header);
    std::vector<std::string> classes;
    {
      std::istringstream fields(header);
      std::string token;
      std::getline(fields, token, ',');
      std::getline(fields, token, ',');
      while (std::getline(fields, token, ',')) classes.push_back(token.substr(2));
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream fields(line);
      std::string id, true_label, token;
      std::getline(fields, id, ',');
      std::getline(fields, true_label, ',');
      int best = 0;
      double best_p = -1.0;
      for (int c = 0; std::getline(fields, token, ','); ++c) {
        const double p = std::stod(token);
        if (p > best_p) {
          best_p = p;
          best = c;
        }
      }
      pairs.emplace_back(true_label, classes[best]);
    }
    const auto matrix = evalkit::confusion_matrix(classes, pairs);
    evalkit::EvalReport report(matrix);
    report.tag = dir.filename().string().substr(std::string("epoch_").size());
    report.metrics = evalkit::precision_recall(matrix);
    report.accuracy = matrix.total() > 0
                          ? static_cast<double>(matrix.trace()) / matrix.total()
                          : 0.0;
    std::ofstream(dir / "confusion.csv") << evalkit::confusion_csv(matrix);
    std::ofstream(dir / "metrics.csv") << evalkit::metrics_csv({report});
    std::ofstream(dir / "means.csv") << evalkit::means_csv({report});
    reports.push_back(std::move(report));
    std::cout << "re-rendered " << dir.filename().string() << "\n";
  }
  std::ofstream(reports_dir / "metrics.csv") << evalkit::metrics_csv(reports);
  std::ofstream(reports_dir / "means.csv") << evalkit::means_csv(reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"single-reference night-city classifiers: dataset tooling, training, "
               "and evaluation"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file (flags > environment > config file)");

  int threads = 1;
  app.add_option("--threads", threads, "global parallelism cap")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "generate synthetic city fixtures");
  std::string synth_out = "synth";
  int synth_classes = 3, synth_per_class = 4;
  std::uint64_t synth_seed = 7;
  synth->add_option("--out", synth_out, "output directory")->capture_default_str();
  synth->add_option("--classes", synth_classes, "class count")->capture_default_str();
  synth->add_option("--per-class", synth_per_class, "images per class")->capture_default_str();
  synth->add_option("--seed", synth_seed, "generation seed")->capture_default_str();

  auto* fetch = app.add_subcommand("fetch", "download manifest images into the cache");
  std::string fetch_manifest, fetch_template, fetch_cache = "cache";
  bool fetch_force = false;
  int fetch_retries = 2, fetch_parallel = 4;
  fetch->add_option("--manifest", fetch_manifest, "CSV manifest (id,mission,lat,lon)")
      ->required();
  fetch->add_option("--url-template", fetch_template, "URL with {id} placeholder")->required();
  fetch->add_option("--cache", fetch_cache, "cache directory")->capture_default_str();
  fetch->add_flag("--force", fetch_force, "re-download cached entries");
  fetch->add_option("--retries", fetch_retries, "retries per entry")->capture_default_str();
  fetch->add_option("--parallel", fetch_parallel, "in-flight requests")->capture_default_str();

  auto* subset = app.add_subcommand("subset", "extract a geographic subset");
  std::string subset_manifest, subset_bboxes, subset_label, subset_out;
  subset->add_option("--manifest", subset_manifest, "CSV manifest")->required();
  subset->add_option("--bboxes", subset_bboxes, "bbox config JSON")->required();
  subset->add_option("--label", subset_label, "label to extract")->required();
  subset->add_option("--out", subset_out, "output CSV")->required();

  auto* augment_cmd = app.add_subcommand("augment", "materialize an SRA dataset");
  std::string aug_sources, aug_out = "dataset";
  int aug_variants = 100, aug_other_variants = 20;
  std::uint64_t aug_seed = 0, aug_split_seed = 0;
  double aug_split = 0.8, aug_q_low = 0.2, aug_q_high = 0.998;
  std::string aug_threshold = "mean", aug_exclude;
  bool aug_originals = false;
  augment_cmd->add_option("--sources", aug_sources, "source CSV (id,label,path)")->required();
  augment_cmd->add_option("--out", aug_out, "output dataset directory")->capture_default_str();
  augment_cmd->add_option("--variants", aug_variants, "variants per class reference")
      ->capture_default_str();
  augment_cmd->add_option("--other-variants", aug_other_variants, "variants per Other image")
      ->capture_default_str();
  augment_cmd->add_option("--seed", aug_seed, "augmentation master seed")
      ->capture_default_str();
  augment_cmd->add_option("--split-fraction", aug_split, "train fraction")
      ->capture_default_str();
  augment_cmd->add_option("--split-seed", aug_split_seed, "shuffle seed for the split")
      ->capture_default_str();
  augment_cmd->add_option("--q-low", aug_q_low, "low rescale quantile")->capture_default_str();
  augment_cmd->add_option("--q-high", aug_q_high, "high rescale quantile")
      ->capture_default_str();
  augment_cmd->add_option("--threshold-method", aug_threshold, "mean|median|p25|none")
      ->capture_default_str();
  augment_cmd->add_flag("--originals", aug_originals,
                        "emit one untransformed preprocessed original per source");
  augment_cmd->add_option("--exclude-from-other", aug_exclude,
                          "id list removed from the Other pool (cleaned mode)");

  auto* train_pca = app.add_subcommand("train-pca", "fit the Fourier/PCA classifier");
  std::string tp_data, tp_run = "runs/pca";
  int tp_k = 6, tp_input = 224, tp_dump = 0;
  bool tp_shift = false, tp_log = false;
  train_pca->add_option("--data", tp_data, "materialized dataset directory")->required();
  train_pca->add_option("--run-dir", tp_run, "run directory")->capture_default_str();
  train_pca->add_option("--k", tp_k, "principal component count")->capture_default_str();
  train_pca->add_option("--input-size", tp_input, "square input size")->capture_default_str();
  train_pca->add_flag("--fft-shift", tp_shift, "center the DC bin before unrolling");
  train_pca->add_flag("--fft-log", tp_log, "log-compress spectra before unrolling");
  train_pca->add_option("--dump-spectra", tp_dump,
                        "write normalized spectrum PNGs for the first N items");

  auto* eval_pca = app.add_subcommand("eval-pca", "threshold sweep over test data");
  std::string ep_model, ep_data, ep_thresholds = "0:1:0.05", ep_run = "runs/pca";
  eval_pca->add_option("--model", ep_model, "train-pca run directory")->required();
  eval_pca->add_option("--data", ep_data, "test dataset directory")->required();
  eval_pca->add_option("--thresholds", ep_thresholds, "start:end:step or comma list")
      ->capture_default_str();
  eval_pca->add_option("--run-dir", ep_run, "output run directory")->capture_default_str();

  auto* train_cnn = app.add_subcommand("train-cnn", "train the all-convolutional network");
  std::string tc_data, tc_run = "runs/cnn", tc_mode = "C";
  int tc_epochs = 50, tc_batch = 64, tc_input = 224, tc_divisor = 1;
  double tc_lr = 1e-4, tc_l2 = 5e-4;
  std::uint64_t tc_seed_init = 1, tc_seed_shuffle = 2, tc_seed_dropout = 3;
  train_cnn->add_option("--data", tc_data, "materialized dataset directory")->required();
  train_cnn->add_option("--run-dir", tc_run, "run directory")->capture_default_str();
  train_cnn->add_option("--mode", tc_mode, "A (plain) | B (L2) | C (L2+dropout)")
      ->capture_default_str();
  train_cnn->add_option("--epochs", tc_epochs, "training epochs")->capture_default_str();
  train_cnn->add_option("--batch", tc_batch, "batch size")->capture_default_str();
  train_cnn->add_option("--lr", tc_lr, "Adam learning rate")->capture_default_str();
  train_cnn->add_option("--l2", tc_l2, "L2 lambda (modes B and C)")->capture_default_str();
  train_cnn->add_option("--input-size", tc_input, "square input size")->capture_default_str();
  train_cnn->add_option("--map-divisor", tc_divisor, "divide all map/unit counts")
      ->capture_default_str();
  train_cnn->add_option("--seed-init", tc_seed_init, "weight init seed")
      ->capture_default_str();
  train_cnn->add_option("--seed-shuffle", tc_seed_shuffle, "epoch shuffle seed")
      ->capture_default_str();
  train_cnn->add_option("--seed-dropout", tc_seed_dropout, "dropout mask seed")
      ->capture_default_str();

  auto* eval_cnn = app.add_subcommand("eval-cnn", "evaluate every checkpoint of a run");
  std::string ec_data, ec_run;
  int ec_input = 224, ec_top_k = 9;
  eval_cnn->add_option("--data", ec_data, "test dataset directory")->required();
  eval_cnn->add_option("--run-dir", ec_run, "train-cnn run directory")->required();
  eval_cnn->add_option("--input-size", ec_input, "square input size")->capture_default_str();
  eval_cnn->add_option("--top-k", ec_top_k, "top predictions per class")
      ->capture_default_str();

  auto* report = app.add_subcommand("report", "re-render CSVs from stored dumps");
  std::string rp_run;
  report->add_option("--run-dir", rp_run, "run directory with reports/")->required();

  wire_environment(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      return app.exit(e);
    }
    app.exit(e);
    return 1;
  }

  core::set_thread_cap(threads);
  print_resolved_config(app);

  try {
    if (synth->parsed()) return run_synth(synth_out, synth_classes, synth_per_class, synth_seed);
    if (fetch->parsed()) {
      return run_fetch(fetch_manifest, fetch_template, fetch_cache, fetch_force, fetch_retries,
                       fetch_parallel);
    }
    if (subset->parsed()) {
      return run_subset(subset_manifest, subset_bboxes, subset_label, subset_out);
    }
    if (augment_cmd->parsed()) {
      return run_augment(app, aug_sources, aug_out, aug_variants, aug_other_variants, aug_seed,
                         aug_split, aug_split_seed, aug_q_low, aug_q_high, aug_threshold,
                         aug_originals, aug_exclude);
    }
    if (train_pca->parsed()) {
      harness::SpectralOptions opts;
      opts.quadrant_shift = tp_shift;
      opts.log_compress = tp_log;
      return run_train_pca(app, tp_data, tp_run, tp_k, tp_input, opts, tp_dump);
    }
    if (eval_pca->parsed()) {
      return run_eval_pca(app, ep_model, ep_data, ep_thresholds, ep_run);
    }
    if (train_cnn->parsed()) {
      return run_train_cnn(app, tc_data, tc_run, tc_mode, tc_epochs, tc_batch, tc_lr, tc_l2,
                           tc_input, tc_divisor, tc_seed_init, tc_seed_shuffle,
                           tc_seed_dropout);
    }
    if (eval_cnn->parsed()) return run_eval_cnn(app, ec_data, ec_run, ec_input, ec_top_k);
    if (report->parsed()) return run_report(rp_run);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
