#include "nightatlas/eigencity/sweep.hpp"

#include <cstdio>

#include "nightatlas/core/error.hpp"

namespace nightatlas::eigencity {

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int i = 0; i <= 20; ++i) t.push_back(i * 0.05);
  return t;
}

std::vector<evalkit::EvalReport> threshold_sweep(
    const std::vector<LabeledEmbedding>& test, const std::vector<LabeledEmbedding>& train,
    const std::vector<double>& thresholds, const std::vector<std::string>& classes) {
  if (thresholds.empty()) throw core::ConfigError("threshold_sweep: no thresholds given");
  const int class_count = static_cast<int>(classes.size());

  std::vector<evalkit::EvalReport> reports;
  reports.reserve(thresholds.size());
  for (const double threshold : thresholds) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(test.size());
    for (const auto& item : test) {
      const VoteResult vote = classify_vote(item.values, train, threshold, class_count);
      const int pred = vote.label == kAbstain ? class_count : vote.label;
      pairs.emplace_back(item.label, pred);
    }
    char tag[32];
    std::snprintf(tag, sizeof(tag), "%.2f", threshold);
    reports.push_back(evalkit::report_from_predictions(tag, classes, pairs));
  }
  return reports;
}

}  // namespace nightatlas::eigencity
