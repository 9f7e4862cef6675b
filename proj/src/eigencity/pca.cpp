#include "nightatlas/eigencity/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nightatlas/core/error.hpp"

namespace nightatlas::eigencity {

ScalerStats fit_scaler(const Matrix& rows) {
  if (rows.rows < 2) throw core::InsufficientDataError("fit_scaler needs at least 2 rows");
  ScalerStats stats;
  stats.mean.assign(rows.cols, 0.0);
  stats.std.assign(rows.cols, 0.0);
  for (std::size_t i = 0; i < rows.rows; ++i) {
    const double* r = rows.row(i);
    for (std::size_t j = 0; j < rows.cols; ++j) stats.mean[j] += r[j];
  }
  const double inv_n = 1.0 / static_cast<double>(rows.rows);
  for (auto& m : stats.mean) m *= inv_n;
  for (std::size_t i = 0; i < rows.rows; ++i) {
    const double* r = rows.row(i);
    for (std::size_t j = 0; j < rows.cols; ++j) {
      const double d = r[j] - stats.mean[j];
      stats.std[j] += d * d;
    }
  }
  for (auto& s : stats.std) {
    s = std::sqrt(s * inv_n);
    if (s < ScalerStats::kEpsilon) s = ScalerStats::kEpsilon;
  }
  return stats;
}

std::vector<double> apply_scaler(const ScalerStats& stats, const std::vector<double>& row) {
  if (row.size() != stats.mean.size()) {
    throw core::DimensionError("apply_scaler: row length " + std::to_string(row.size()) +
                               " != feature count " + std::to_string(stats.mean.size()));
  }
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - stats.mean[j]) / stats.std[j];
  return out;
}

void jacobi_eigh(const Matrix& sym, std::vector<double>& eigenvalues, Matrix& eigenvectors) {
  const std::size_t n = sym.rows;
  Matrix a = sym;
  eigenvectors = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) eigenvectors.at(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    if (off < 1e-26 * static_cast<double>(n * n)) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double app = a.at(p, p);
        const double aqq = a.at(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a.at(i, p);
          const double aiq = a.at(i, q);
          a.at(i, p) = c * aip - s * aiq;
          a.at(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a.at(p, i);
          const double aqi = a.at(q, i);
          a.at(p, i) = c * api - s * aqi;
          a.at(q, i) = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = eigenvectors.at(i, p);
          const double viq = eigenvectors.at(i, q);
          eigenvectors.at(i, p) = c * vip - s * viq;
          eigenvectors.at(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = a.at(i, i);

  // Sort non-increasing, reordering the eigenvector columns to match.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return eigenvalues[x] > eigenvalues[y]; });
  std::vector<double> sorted_vals(n);
  Matrix sorted_vecs(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted_vals[k] = eigenvalues[order[k]];
    for (std::size_t i = 0; i < n; ++i) sorted_vecs.at(i, k) = eigenvectors.at(i, order[k]);
  }
  eigenvalues = std::move(sorted_vals);
  eigenvectors = std::move(sorted_vecs);
}

PcaModel fit_pca(const Matrix& scaled_rows, std::size_t k) {
  const std::size_t n = scaled_rows.rows;
  const std::size_t d = scaled_rows.cols;
  if (n < 2) throw core::InsufficientDataError("fit_pca needs at least 2 rows");
  if (k < 1 || k > std::min(n - 1, d)) {
    throw core::ConfigError("fit_pca: k=" + std::to_string(k) + " outside [1, min(n-1, d)] with n=" +
                            std::to_string(n) + " d=" + std::to_string(d));
  }

  // Gram matrix X X^T / n.
  Matrix gram(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ri = scaled_rows.row(i);
    for (std::size_t j = i; j < n; ++j) {
      const double* rj = scaled_rows.row(j);
      double dot = 0.0;
      for (std::size_t f = 0; f < d; ++f) dot += ri[f] * rj[f];
      dot /= static_cast<double>(n);
      gram.at(i, j) = dot;
      gram.at(j, i) = dot;
    }
  }

  std::vector<double> eigenvalues;
  Matrix eigenvectors;
  jacobi_eigh(gram, eigenvalues, eigenvectors);

  PcaModel model;
  model.k = k;
  model.components = Matrix(k, d);
  model.explained_variance.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    model.explained_variance[c] = std::max(eigenvalues[c], 0.0);
    // Lift u_c to feature space: v = X^T u.
    double* comp = model.components.row(c);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = eigenvectors.at(i, c);
      if (u == 0.0) continue;
      const double* ri = scaled_rows.row(i);
      for (std::size_t f = 0; f < d; ++f) comp[f] += u * ri[f];
    }
    double norm = 0.0;
    for (std::size_t f = 0; f < d; ++f) norm += comp[f] * comp[f];
    norm = std::sqrt(norm);
    if (norm < 1e-300) {
      throw core::InsufficientDataError("fit_pca: component " + std::to_string(c) +
                                        " has vanishing variance; reduce k");
    }
    const double inv = 1.0 / norm;
    for (std::size_t f = 0; f < d; ++f) comp[f] *= inv;

    // Deterministic sign: largest-magnitude coordinate made positive.
    std::size_t arg = 0;
    for (std::size_t f = 1; f < d; ++f) {
      if (std::abs(comp[f]) > std::abs(comp[arg])) arg = f;
    }
    if (comp[arg] < 0.0) {
      for (std::size_t f = 0; f < d; ++f) comp[f] = -comp[f];
    }
  }
  return model;
}

Embedding project(const PcaModel& model, const std::vector<double>& row) {
  const std::vector<double> scaled = apply_scaler(model.scaler, row);
  Embedding e(model.k, 0.0);
  for (std::size_t c = 0; c < model.k; ++c) {
    const double* comp = model.components.row(c);
    double dot = 0.0;
    for (std::size_t f = 0; f < scaled.size(); ++f) dot += comp[f] * scaled[f];
    e[c] = dot;
  }
  return e;
}

double cosine_distance(const Embedding& a, const Embedding& b) {
  if (a.size() != b.size()) throw core::DimensionError("cosine_distance: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 1.0;  // zero vectors carry no direction
  const double d = 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(d, 0.0, 2.0);
}

VoteResult classify_vote(const Embedding& query, const std::vector<LabeledEmbedding>& train,
                         double threshold, int class_count) {
  if (train.empty()) throw core::InsufficientDataError("classify_vote: empty training set");
  VoteResult result;
  result.votes.assign(class_count, 0);
  result.best_distance.assign(class_count, 2.0);
  for (const auto& item : train) {
    const double dist = cosine_distance(query, item.values);
    if (dist < threshold) ++result.votes[item.label];
    result.best_distance[item.label] = std::min(result.best_distance[item.label], dist);
  }
  int best = kAbstain;
  for (int c = 0; c < class_count; ++c) {
    if (result.votes[c] == 0) continue;
    if (best == kAbstain || result.votes[c] > result.votes[best] ||
        (result.votes[c] == result.votes[best] &&
         result.best_distance[c] < result.best_distance[best])) {
      best = c;
    }
  }
  result.label = best;
  return result;
}

}  // namespace nightatlas::eigencity
