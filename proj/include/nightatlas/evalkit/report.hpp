#pragma once

#include <filesystem>

#include "nightatlas/evalkit/eval.hpp"
#include "nightatlas/imgproc/image.hpp"
#include "nightatlas/neuralnet/network.hpp"

namespace nightatlas::evalkit {

struct TestItem {
  std::string id;
  int label = 0;  // index into the class list
  imgproc::GrayImage image;
};

// Forward in eval mode, argmax per image with ties to the lowest class
// index, metrics from the confusion matrix, top-k per class recorded by
// probability.
EvalReport evaluate_epoch(const neuralnet::Network& net, const std::vector<TestItem>& test,
                          const std::vector<std::string>& classes, const std::string& tag,
                          int top_k = 9, int batch_size = 64);

// Raw per-image probabilities for independent recomputation of the metrics:
// CSV `item,true_label,p_<class0>,...`.
std::string probabilities_csv(const neuralnet::Network& net, const std::vector<TestItem>& test,
                              const std::vector<std::string>& classes, int batch_size = 64);

// Writes confusion.csv, metrics.csv, means.csv, top_predictions.json and
// per-class contact sheets into dir.
void export_report(const EvalReport& report, const std::filesystem::path& dir,
                   const std::vector<TestItem>* images = nullptr);

// Schema `<tag_column>,class,precision,recall,support`, one row per class
// per report. The tag column is "epoch" for checkpoint evaluations and
// "threshold" for sweep results.
std::string metrics_csv(const std::vector<EvalReport>& reports,
                        const std::string& tag_column = "epoch");
std::string confusion_csv(const ConfusionMatrix& m);

// All-class and city-only (excluding "Other") means per report.
std::string means_csv(const std::vector<EvalReport>& reports,
                      const std::string& tag_column = "epoch");

// Parses a metrics.csv body back into (tag, class, precision, recall,
// support) tuples; used by round-trip checks and the report command.
struct MetricsRow {
  std::string tag;
  std::string class_name;
  double precision = 0.0;
  double recall = 0.0;
  long support = 0;
};
std::vector<MetricsRow> parse_metrics_csv(const std::string& text);

// Tiles the top-k predicted images for one class with probability captions.
imgproc::GrayImage contact_sheet(const std::vector<imgproc::GrayImage>& tiles,
                                 const std::vector<double>& probabilities, int columns = 3);

}  // namespace nightatlas::evalkit
