#pragma once

#include <string>
#include <vector>

namespace nightatlas::eigencity {

// Dense row-major matrix, n rows of d features.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t i) { return &data[i * cols]; }
  const double* row(std::size_t i) const { return &data[i * cols]; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct ScalerStats {
  std::vector<double> mean;
  std::vector<double> std;  // floored at kEpsilon
  static constexpr double kEpsilon = 1e-8;
};

// Principal components of Fourier-magnitude features ("Eigencities").
struct PcaModel {
  Matrix components;  // k x d, rows orthonormal
  std::vector<double> explained_variance;  // k values, non-increasing
  ScalerStats scaler;
  std::size_t k = 0;
};

using Embedding = std::vector<double>;

// Per-feature mean and population standard deviation (divisor n).
// Requires n >= 2 rows.
ScalerStats fit_scaler(const Matrix& rows);

std::vector<double> apply_scaler(const ScalerStats& stats, const std::vector<double>& row);

// Top-k principal components of already standard-scaled rows, computed via
// the n x n Gram (snapshot) decomposition: with n samples far below the
// feature count the eigenvectors of X X^T / n are lifted to feature space as
// X^T u / |X^T u|, which are exactly the covariance eigenvectors. Covariance
// uses divisor n. Component signs are fixed by making each row's
// largest-magnitude coordinate positive.
PcaModel fit_pca(const Matrix& scaled_rows, std::size_t k);

// apply_scaler followed by the inner product with each component row.
Embedding project(const PcaModel& model, const std::vector<double>& row);

// 1 - a.b / (|a||b|), in [0,2]. Either argument zero gives 1.
double cosine_distance(const Embedding& a, const Embedding& b);

struct LabeledEmbedding {
  Embedding values;
  int label = 0;  // index into the class list
};

inline constexpr int kAbstain = -1;

struct VoteResult {
  int label = kAbstain;
  std::vector<int> votes;            // per class, entries under threshold
  std::vector<double> best_distance; // per class minimum cosine distance
};

// Counts, per class, the training embeddings with cosine distance strictly
// below the threshold; predicts the class with the most votes, ties broken
// by the smaller per-class minimum distance, remaining ties by the lower
// class index. Zero votes in total abstains.
VoteResult classify_vote(const Embedding& query, const std::vector<LabeledEmbedding>& train,
                         double threshold, int class_count);

// Symmetric n x n eigendecomposition by cyclic Jacobi rotations.
// Returns eigenvalues sorted non-increasing with matching eigenvectors
// (each eigenvectors[i] is the unit vector for eigenvalues[i]).
void jacobi_eigh(const Matrix& sym, std::vector<double>& eigenvalues,
                 Matrix& eigenvectors);

}  // namespace nightatlas::eigencity
