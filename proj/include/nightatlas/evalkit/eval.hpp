#pragma once

#include <string>
#include <utility>
#include <vector>

namespace nightatlas::evalkit {

// Reserved predicted-only outcome for classifiers that may withhold a label.
inline const std::string kAbstainLabel = "(abstain)";

// Square count grid over classes plus one reserved abstain column.
// Rows are true labels, columns predicted labels.
struct ConfusionMatrix {
  std::vector<std::string> classes;  // ordered, abstain excluded
  std::vector<long> counts;          // (K+1) x (K+1), row-major; index K = abstain

  explicit ConfusionMatrix(std::vector<std::string> class_list = {});

  int class_count() const { return static_cast<int>(classes.size()); }
  int grid_size() const { return class_count() + 1; }
  long& at(int true_idx, int pred_idx) { return counts[true_idx * grid_size() + pred_idx]; }
  long at(int true_idx, int pred_idx) const { return counts[true_idx * grid_size() + pred_idx]; }

  long row_sum(int true_idx) const;
  long col_sum(int pred_idx) const;
  long total() const;
  long trace() const;  // diagonal over real classes only
  int index_of(const std::string& label) const;  // -1 when unknown, K for abstain
};

struct ClassMetrics {
  std::vector<double> precision;  // per class, 0 when the class receives no predictions
  std::vector<double> recall;     // per class, 0 when the class has no support
  std::vector<long> support;      // per class row sums
  double mean_precision = 0.0;    // unweighted over the class list
  double mean_recall = 0.0;
};

struct TopPrediction {
  std::string item_id;
  double probability = 0.0;
};

struct EvalReport {
  std::string tag;  // epoch number or threshold value
  ConfusionMatrix matrix;
  ClassMetrics metrics;
  double accuracy = 0.0;  // trace / total
  std::vector<std::vector<TopPrediction>> top_per_class;

  explicit EvalReport(ConfusionMatrix m = ConfusionMatrix{});
};

// Tallies (true, predicted) label pairs; predicted may be kAbstainLabel.
// Unregistered labels raise an error naming the offending label.
ConfusionMatrix confusion_matrix(const std::vector<std::string>& classes,
                                 const std::vector<std::pair<std::string, std::string>>& pairs);

ClassMetrics precision_recall(const ConfusionMatrix& m);

// Builds a full report from index-level predictions (pred may be
// class_count for abstain).
EvalReport report_from_predictions(std::string tag, const std::vector<std::string>& classes,
                                   const std::vector<std::pair<int, int>>& true_pred_pairs);

// Mean of per-class values restricted to classes other than `excluded`
// (used for city-only curves next to the all-class means).
double mean_excluding(const std::vector<double>& per_class,
                      const std::vector<std::string>& classes, const std::string& excluded);

}  // namespace nightatlas::evalkit
