#include "nightatlas/evalkit/eval.hpp"

#include <algorithm>

#include "nightatlas/core/error.hpp"

namespace nightatlas::evalkit {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_list)
    : classes(std::move(class_list)) {
  counts.assign(static_cast<std::size_t>(grid_size()) * grid_size(), 0);
}

long ConfusionMatrix::row_sum(int true_idx) const {
  long sum = 0;
  for (int p = 0; p < grid_size(); ++p) sum += at(true_idx, p);
  return sum;
}

long ConfusionMatrix::col_sum(int pred_idx) const {
  long sum = 0;
  for (int t = 0; t < grid_size(); ++t) sum += at(t, pred_idx);
  return sum;
}

long ConfusionMatrix::total() const {
  long sum = 0;
  for (long v : counts) sum += v;
  return sum;
}

long ConfusionMatrix::trace() const {
  long sum = 0;
  for (int c = 0; c < class_count(); ++c) sum += at(c, c);
  return sum;
}

int ConfusionMatrix::index_of(const std::string& label) const {
  if (label == kAbstainLabel) return class_count();
  for (int c = 0; c < class_count(); ++c) {
    if (classes[c] == label) return c;
  }
  return -1;
}

EvalReport::EvalReport(ConfusionMatrix m) : matrix(std::move(m)) {}

ConfusionMatrix confusion_matrix(const std::vector<std::string>& classes,
                                 const std::vector<std::pair<std::string, std::string>>& pairs) {
  ConfusionMatrix m(classes);
  for (const auto& [true_label, pred_label] : pairs) {
    const int t = m.index_of(true_label);
    if (t < 0 || t == m.class_count()) {
      throw core::ConfigError("confusion_matrix: unregistered true label '" + true_label + "'");
    }
    const int p = m.index_of(pred_label);
    if (p < 0) {
      throw core::ConfigError("confusion_matrix: unregistered predicted label '" + pred_label +
                              "'");
    }
    ++m.at(t, p);
  }
  return m;
}

ClassMetrics precision_recall(const ConfusionMatrix& m) {
  const int k = m.class_count();
  ClassMetrics metrics;
  metrics.precision.resize(k);
  metrics.recall.resize(k);
  metrics.support.resize(k);
  for (int c = 0; c < k; ++c) {
    const long col = m.col_sum(c);
    const long row = m.row_sum(c);
    const long hit = m.at(c, c);
    metrics.precision[c] = col > 0 ? static_cast<double>(hit) / static_cast<double>(col) : 0.0;
    metrics.recall[c] = row > 0 ? static_cast<double>(hit) / static_cast<double>(row) : 0.0;
    metrics.support[c] = row;
  }
  if (k > 0) {
    double ps = 0.0, rs = 0.0;
    for (int c = 0; c < k; ++c) {
      ps += metrics.precision[c];
      rs += metrics.recall[c];
    }
    metrics.mean_precision = ps / k;
    metrics.mean_recall = rs / k;
  }
  return metrics;
}

EvalReport report_from_predictions(std::string tag, const std::vector<std::string>& classes,
                                   const std::vector<std::pair<int, int>>& true_pred_pairs) {
  ConfusionMatrix m(classes);
  for (const auto& [t, p] : true_pred_pairs) {
    if (t < 0 || t >= m.class_count()) throw core::ConfigError("true label index out of range");
    if (p < 0 || p > m.class_count()) throw core::ConfigError("predicted index out of range");
    ++m.at(t, p);
  }
  EvalReport report(std::move(m));
  report.tag = std::move(tag);
  report.metrics = precision_recall(report.matrix);
  const long total = report.matrix.total();
  report.accuracy = total > 0 ? static_cast<double>(report.matrix.trace()) / total : 0.0;
  report.top_per_class.resize(classes.size());
  return report;
}

double mean_excluding(const std::vector<double>& per_class,
                      const std::vector<std::string>& classes, const std::string& excluded) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t c = 0; c < classes.size() && c < per_class.size(); ++c) {
    if (classes[c] == excluded) continue;
    sum += per_class[c];
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

}  // namespace nightatlas::evalkit
