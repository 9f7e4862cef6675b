#pragma once

#include <vector>

#include "nightatlas/eigencity/pca.hpp"
#include "nightatlas/evalkit/eval.hpp"

namespace nightatlas::eigencity {

// The default evaluation grid: thresholds 0.00, 0.05, ..., 1.00.
std::vector<double> default_thresholds();

// Classifies every test embedding against the training embeddings at each
// threshold and reports per-class and mean precision/recall. Abstentions are
// tallied in the reserved abstain column, so they hurt recall but never
// precision.
std::vector<evalkit::EvalReport> threshold_sweep(
    const std::vector<LabeledEmbedding>& test, const std::vector<LabeledEmbedding>& train,
    const std::vector<double>& thresholds, const std::vector<std::string>& classes);

}  // namespace nightatlas::eigencity
