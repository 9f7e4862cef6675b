// Acceptance suite: one criterion per function, one pass/fail line each.
// Exit code 0 only when every criterion passes.

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nightatlas/augment/augment.hpp"
#include "nightatlas/core/rng.hpp"
#include "nightatlas/dataio/fetch.hpp"
#include "nightatlas/dataio/manifest.hpp"
#include "nightatlas/dataio/synth.hpp"
#include "nightatlas/eigencity/model_io.hpp"
#include "nightatlas/eigencity/pca.hpp"
#include "nightatlas/evalkit/report.hpp"
#include "nightatlas/harness/train.hpp"
#include "nightatlas/imgproc/image.hpp"
#include "nightatlas/neuralnet/adam.hpp"
#include "nightatlas/neuralnet/checkpoint.hpp"
#include "nightatlas/spectral/fft.hpp"

namespace fs = std::filesystem;
using namespace nightatlas;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() /
          ("nightatlas_acceptance_" +
           std::to_string(Clock::now().time_since_epoch().count()));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

std::string g_self_path;

// ---------------------------------------------------------------- helpers

imgproc::GrayImage random_gray(int w, int h, std::uint64_t seed) {
  core::Rng rng(seed);
  imgproc::GrayImage img(w, h);
  for (auto& v : img.data) v = rng.next_unit();
  return img;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

// 1. ------------------------------------------------------------------ FFT

spectral::ComplexGrid naive_dft(const imgproc::GrayImage& img) {
  const int w = img.width, h = img.height;
  spectral::ComplexGrid out(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      std::complex<double> acc(0.0, 0.0);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double angle = -2.0 * M_PI * (static_cast<double>(u) * x / w +
                                              static_cast<double>(v) * y / h);
          acc += img.at(x, y) * std::complex<double>(std::cos(angle), std::sin(angle));
        }
      }
      out.at(u, v) = acc;
    }
  }
  return out;
}

bool criterion_fft(std::string& detail) {
  const auto start = Clock::now();
  double worst_forward = 0.0, worst_roundtrip = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto img = random_gray(16, 16, seed);
    const auto fast = spectral::fft2d(img);
    const auto naive = naive_dft(img);
    for (std::size_t i = 0; i < fast.data.size(); ++i) {
      worst_forward = std::max(worst_forward, std::abs(fast.data[i] - naive.data[i]));
    }
    const auto back = spectral::ifft2d(fast);
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        worst_roundtrip = std::max(worst_roundtrip, std::abs(back.at(x, y) - img.at(x, y)));
      }
    }
  }
  const double elapsed = seconds_since(start);
  std::ostringstream out;
  out << "max |fft - naive| " << worst_forward << ", round-trip " << worst_roundtrip << ", "
      << elapsed << "s";
  detail = out.str();
  return worst_forward < 1e-9 && worst_roundtrip < 1e-9 && elapsed < 1.0;
}

// 2. ------------------------------------------------------------------ PCA

void classical_jacobi(std::vector<std::vector<double>> a, std::vector<double>& values,
                      std::vector<std::vector<double>>& vectors) {
  const std::size_t n = a.size();
  vectors.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) vectors[i][i] = 1.0;
  for (int iter = 0; iter < 10000; ++iter) {
    std::size_t p = 0, q = 1;
    double biggest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (std::abs(a[i][j]) > biggest) {
          biggest = std::abs(a[i][j]);
          p = i;
          q = j;
        }
      }
    }
    if (biggest < 1e-14) break;
    const double theta = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
    const double c = std::cos(theta), s = std::sin(theta);
    for (std::size_t i = 0; i < n; ++i) {
      const double aip = a[i][p], aiq = a[i][q];
      a[i][p] = c * aip - s * aiq;
      a[i][q] = s * aip + c * aiq;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double api = a[p][i], aqi = a[q][i];
      a[p][i] = c * api - s * aqi;
      a[q][i] = s * api + c * aqi;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double vip = vectors[i][p], viq = vectors[i][q];
      vectors[i][p] = c * vip - s * viq;
      vectors[i][q] = s * vip + c * viq;
    }
  }
  values.resize(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[i][i];
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });
  std::vector<double> sv(n);
  std::vector<std::vector<double>> svec(n, std::vector<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    sv[k] = values[order[k]];
    for (std::size_t i = 0; i < n; ++i) svec[i][k] = vectors[i][order[k]];
  }
  values = sv;
  vectors = svec;
}

bool criterion_pca(std::string& detail) {
  double worst_value = 0.0, worst_component = 0.0, worst_ortho = 0.0;
  bool recon_monotone = true;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    core::Rng rng(3000 + trial);
    eigencity::Matrix raw(8, 5);
    for (auto& v : raw.data) v = rng.normal();
    const auto stats = eigencity::fit_scaler(raw);
    eigencity::Matrix scaled(8, 5);
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        scaled.at(i, j) = (raw.at(i, j) - stats.mean[j]) / stats.std[j];
      }
    }

    // brute-force covariance eigendecomposition oracle
    std::vector<std::vector<double>> cov(5, std::vector<double>(5, 0.0));
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t a = 0; a < 5; ++a) {
        for (std::size_t b = 0; b < 5; ++b) {
          cov[a][b] += scaled.at(i, a) * scaled.at(i, b) / 8.0;
        }
      }
    }
    std::vector<double> oracle_values;
    std::vector<std::vector<double>> oracle_vectors;
    classical_jacobi(cov, oracle_values, oracle_vectors);

    const std::size_t k = 4;
    const auto model = eigencity::fit_pca(scaled, k);
    for (std::size_t c = 0; c < k; ++c) {
      worst_value =
          std::max(worst_value, std::abs(model.explained_variance[c] - oracle_values[c]));
      double same = 0.0, flipped = 0.0;
      for (std::size_t f = 0; f < 5; ++f) {
        same = std::max(same, std::abs(model.components.at(c, f) - oracle_vectors[f][c]));
        flipped = std::max(flipped, std::abs(model.components.at(c, f) + oracle_vectors[f][c]));
      }
      worst_component = std::max(worst_component, std::min(same, flipped));
      for (std::size_t c2 = 0; c2 < k; ++c2) {
        double dot = 0.0;
        for (std::size_t f = 0; f < 5; ++f) {
          dot += model.components.at(c, f) * model.components.at(c2, f);
        }
        worst_ortho = std::max(worst_ortho, std::abs(dot - (c == c2 ? 1.0 : 0.0)));
      }
    }

    double previous = -1.0;
    for (std::size_t kk = 1; kk <= 4; ++kk) {
      const auto m = eigencity::fit_pca(scaled, kk);
      double error = 0.0;
      for (std::size_t i = 0; i < 8; ++i) {
        std::vector<double> projected(5, 0.0);
        for (std::size_t c = 0; c < kk; ++c) {
          double coord = 0.0;
          for (std::size_t f = 0; f < 5; ++f) coord += m.components.at(c, f) * scaled.at(i, f);
          for (std::size_t f = 0; f < 5; ++f) projected[f] += coord * m.components.at(c, f);
        }
        for (std::size_t f = 0; f < 5; ++f) {
          const double r = scaled.at(i, f) - projected[f];
          error += r * r;
        }
      }
      if (previous >= 0.0 && error > previous + 1e-9) recon_monotone = false;
      previous = error;
    }
  }
  std::ostringstream out;
  out << "eigenvalue err " << worst_value << ", component err " << worst_component
      << ", orthonormality err " << worst_ortho
      << (recon_monotone ? ", reconstruction monotone" : ", reconstruction NOT monotone");
  detail = out.str();
  return worst_value < 1e-8 && worst_component < 1e-8 && worst_ortho < 1e-8 && recon_monotone;
}

// 3. ------------------------------------------------------- gradient checks

using Tensor64 = neuralnet::Tensor64;

Tensor64 random_tensor64(std::vector<int> shape, core::Rng& rng, double away_from_zero = 0.0) {
  Tensor64 t(std::move(shape));
  for (auto& v : t.data) {
    if (away_from_zero > 0.0) {
      const double magnitude = away_from_zero + rng.next_unit() * (1.0 - away_from_zero);
      v = rng.bernoulli(0.5) ? magnitude : -magnitude;
    } else {
      v = rng.uniform(-1.0, 1.0);
    }
  }
  return t;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

template <typename F>
double central_diff(F&& f, double* slot, double h = 1e-5) {
  const double orig = *slot;
  *slot = orig + h;
  const double hi = f();
  *slot = orig - h;
  const double lo = f();
  *slot = orig;
  return (hi - lo) / (2.0 * h);
}

bool criterion_gradients(std::string& detail) {
  const auto start = Clock::now();
  double worst = 0.0;
  const auto note = [&worst](double err) { worst = std::max(worst, err); };

  // conv: 20 random geometries
  for (int trial = 0; trial < 20; ++trial) {
    core::Rng rng(4000 + trial);
    const int batch = 1 + static_cast<int>(rng.below(2));
    const int in_c = 1 + static_cast<int>(rng.below(3));
    const int out_c = 1 + static_cast<int>(rng.below(3));
    const int k = 1 + static_cast<int>(rng.below(3));
    const int stride = 1 + static_cast<int>(rng.below(2));
    const int pad = static_cast<int>(rng.below(2));
    const int size = k + 2 + static_cast<int>(rng.below(3));

    Tensor64 x = random_tensor64({batch, in_c, size, size}, rng);
    Tensor64 w = random_tensor64({out_c, in_c, k, k}, rng);
    std::vector<double> b(out_c);
    for (auto& v : b) v = rng.uniform(-0.5, 0.5);
    const auto y0 = neuralnet::conv2d_forward(x, w, b, stride, pad);
    const Tensor64 coeff = random_tensor64(y0.shape, rng);
    const auto loss = [&] {
      const auto y = neuralnet::conv2d_forward(x, w, b, stride, pad);
      double s = 0.0;
      for (std::size_t i = 0; i < y.data.size(); ++i) s += coeff.data[i] * y.data[i];
      return s;
    };
    const auto [gx, gw, gb] = neuralnet::conv2d_backward(x, w, coeff, stride, pad);
    for (std::size_t i = 0; i < x.data.size(); i += std::max<std::size_t>(1, x.data.size() / 6)) {
      note(relative_error(gx.data[i], central_diff(loss, &x.data[i])));
    }
    for (std::size_t i = 0; i < w.data.size(); i += std::max<std::size_t>(1, w.data.size() / 6)) {
      note(relative_error(gw.data[i], central_diff(loss, &w.data[i])));
    }
    note(relative_error(gb[0], central_diff(loss, &b[0])));
  }

  // dense
  for (int trial = 0; trial < 20; ++trial) {
    core::Rng rng(4100 + trial);
    const int batch = 1 + static_cast<int>(rng.below(3));
    const int in_units = 2 + static_cast<int>(rng.below(6));
    const int out_units = 1 + static_cast<int>(rng.below(5));
    Tensor64 x = random_tensor64({batch, in_units}, rng);
    Tensor64 w = random_tensor64({out_units, in_units}, rng);
    std::vector<double> b(out_units, 0.1);
    const Tensor64 coeff = random_tensor64({batch, out_units}, rng);
    const auto loss = [&] {
      const auto y = neuralnet::dense_forward(x, w, b);
      double s = 0.0;
      for (std::size_t i = 0; i < y.data.size(); ++i) s += coeff.data[i] * y.data[i];
      return s;
    };
    const auto [gx, gw, gb] = neuralnet::dense_backward(x, w, coeff);
    for (std::size_t i = 0; i < x.data.size(); i += 2) {
      note(relative_error(gx.data[i], central_diff(loss, &x.data[i])));
    }
    for (std::size_t i = 0; i < w.data.size(); i += 3) {
      note(relative_error(gw.data[i], central_diff(loss, &w.data[i])));
    }
    note(relative_error(gb[0], central_diff(loss, &b[0])));
  }

  // relu (inputs away from the kink)
  for (int trial = 0; trial < 20; ++trial) {
    core::Rng rng(4200 + trial);
    Tensor64 x = random_tensor64({2, 4 + static_cast<int>(rng.below(8))}, rng, 0.1);
    const Tensor64 coeff = random_tensor64(x.shape, rng);
    const auto loss = [&] {
      const auto y = neuralnet::relu_forward(x);
      double s = 0.0;
      for (std::size_t i = 0; i < y.data.size(); ++i) s += coeff.data[i] * y.data[i];
      return s;
    };
    const auto g = neuralnet::relu_backward(x, coeff);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      note(relative_error(g.data[i], central_diff(loss, &x.data[i])));
    }
  }

  // flatten: gradient passes through the reshape unchanged
  for (int trial = 0; trial < 20; ++trial) {
    core::Rng rng(4300 + trial);
    const int c = 1 + static_cast<int>(rng.below(3));
    const int hw = 2 + static_cast<int>(rng.below(3));
    Tensor64 x = random_tensor64({2, c, hw, hw}, rng);
    const Tensor64 coeff = random_tensor64({2, c * hw * hw}, rng);
    const auto loss = [&] {
      const auto y = neuralnet::flatten(x);
      double s = 0.0;
      for (std::size_t i = 0; i < y.data.size(); ++i) s += coeff.data[i] * y.data[i];
      return s;
    };
    const auto grad = coeff.reshaped(x.shape);
    for (std::size_t i = 0; i < x.data.size(); i += 3) {
      note(relative_error(grad.data[i], central_diff(loss, &x.data[i])));
    }
  }

  // softmax cross entropy
  for (int trial = 0; trial < 20; ++trial) {
    core::Rng rng(4400 + trial);
    const int batch = 1 + static_cast<int>(rng.below(4));
    Tensor64 logits = random_tensor64({batch, 4}, rng);
    for (auto& v : logits.data) v *= 2.0;
    std::vector<int> labels(batch);
    for (auto& l : labels) l = static_cast<int>(rng.below(4));
    const auto loss = [&] {
      return neuralnet::softmax_cross_entropy(logits, labels).first;
    };
    const auto [loss0, grad] = neuralnet::softmax_cross_entropy(logits, labels);
    for (std::size_t i = 0; i < logits.data.size(); ++i) {
      note(relative_error(grad.data[i], central_diff(loss, &logits.data[i])));
    }
  }

  // L2 penalty over random small networks
  for (int trial = 0; trial < 20; ++trial) {
    core::Rng rng(4500 + trial);
    neuralnet::NetConfig cfg;
    cfg.class_count = 2;
    cfg.input_size = 6;
    cfg.layers = {neuralnet::LayerSpec::conv(3, 2, 1, 2), neuralnet::LayerSpec::relu(),
                  neuralnet::LayerSpec::flat(),
                  neuralnet::LayerSpec::dense(1 + static_cast<int>(rng.below(4))),
                  neuralnet::LayerSpec::relu(), neuralnet::LayerSpec::dense(2)};
    auto net = neuralnet::build_network_t<double>(cfg, 4600 + trial);
    const double lambda = rng.uniform(0.01, 1.0);
    neuralnet::Gradients<double> grads;
    grads.weights.resize(cfg.layers.size());
    grads.biases.resize(cfg.layers.size());
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
      if (!net.weights[i].empty()) {
        grads.weights[i] = Tensor64(net.weights[i].shape);
        grads.biases[i].assign(net.biases[i].size(), 0.0);
      }
    }
    neuralnet::l2_penalty(net, lambda, &grads);
    const auto loss = [&] { return neuralnet::l2_penalty(net, lambda); };
    for (const std::size_t layer : {std::size_t{0}, std::size_t{3}, std::size_t{5}}) {
      auto& w = net.weights[layer];
      for (std::size_t i = 0; i < w.data.size(); i += std::max<std::size_t>(1, w.data.size() / 4)) {
        note(relative_error(grads.weights[layer].data[i], central_diff(loss, &w.data[i])));
      }
    }
  }

  const double elapsed = seconds_since(start);
  std::ostringstream out;
  out << "worst relative error " << worst << " over 120 shapes, " << elapsed << "s";
  detail = out.str();
  return worst < 1e-4 && elapsed < 30.0;
}

// 4. --------------------------------------------------------- pinned values

bool criterion_arithmetic(std::string& detail) {
  std::ostringstream out;
  bool ok = true;

  ok &= neuralnet::count_dense_connections({256, 256, 4}) == 66560;

  // confusion grid: rows Berlin, Madrid, Other, Paris / same column order
  const std::vector<std::string> classes = {"Berlin", "Madrid", "Other", "Paris"};
  const long grid[4][4] = {{3, 0, 9, 0}, {0, 7, 24, 0}, {0, 0, 3063, 0}, {0, 0, 5, 8}};
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int t = 0; t < 4; ++t) {
    for (int p = 0; p < 4; ++p) {
      for (long n = 0; n < grid[t][p]; ++n) pairs.emplace_back(classes[t], classes[p]);
    }
  }
  const auto metrics = evalkit::precision_recall(evalkit::confusion_matrix(classes, pairs));
  ok &= std::abs(metrics.precision[0] - 1.0) < 1e-6;
  ok &= std::abs(metrics.precision[1] - 1.0) < 1e-6;
  ok &= std::abs(metrics.precision[3] - 1.0) < 1e-6;
  ok &= std::abs(metrics.recall[0] - 0.25) < 1e-6;
  ok &= std::abs(metrics.recall[1] - 0.225806) < 1e-6;
  ok &= std::abs(metrics.recall[3] - 0.615385) < 1e-6;

  // 50/100 vs 20/100 vs 30/100 under threshold 0.5 picks the first class
  std::vector<eigencity::LabeledEmbedding> train;
  const auto at_angle = [](double r) { return eigencity::Embedding{std::cos(r), std::sin(r)}; };
  for (int i = 0; i < 100; ++i) train.push_back({at_angle(i < 50 ? 0.5 : 1.6), 0});
  for (int i = 0; i < 100; ++i) train.push_back({at_angle(i < 20 ? 0.5 : 1.6), 1});
  for (int i = 0; i < 100; ++i) train.push_back({at_angle(i < 30 ? 0.5 : 1.6), 2});
  const auto vote = eigencity::classify_vote({1.0, 0.0}, train, 0.5, 3);
  ok &= vote.label == 0 && vote.votes[0] == 50 && vote.votes[1] == 20 && vote.votes[2] == 30;

  // uniform logits over 4 classes
  neuralnet::Tensor64 logits({1, 4});
  for (auto& v : logits.data) v = 1.7;
  const auto [uniform_loss, grad] = neuralnet::softmax_cross_entropy(logits, {2});
  ok &= std::abs(uniform_loss - std::log(4.0)) < 1e-6;

  // zero accounting for the reference threshold example
  const double s = imgproc::sparsity(5038 + 211977, 272640);
  ok &= std::abs(s - 217015.0 / 272640.0) < 1e-6;
  ok &= std::abs(s - 0.795976) < 1e-6;

  out << "connections 66560, precision/recall pinned, vote -> class 0, ln4 "
      << uniform_loss << ", sparsity " << s;
  detail = out.str();
  return ok;
}

// 5. ------------------------------------------------- augmentation invariants

std::uint64_t augment_digest() {
  dataio::SynthSpec spec;
  spec.class_seed = 4242;
  spec.noise_seed = 777;
  const auto ref = dataio::synth_city(spec);
  augment::AugmentConfig cfg;
  cfg.variants_per_image = 3;
  cfg.master_seed = 99;
  const auto variants = augment::augment_reference(ref, cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& img : variants) {
    for (const double v : img.data) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      for (int byte = 0; byte < 8; ++byte) {
        h ^= (bits >> (8 * byte)) & 0xff;
        h *= 0x100000001b3ULL;
      }
    }
  }
  return h;
}

bool criterion_augmentation(std::string& detail) {
  dataio::SynthSpec spec;
  spec.class_seed = 808;
  const auto ref = dataio::synth_city(spec);

  augment::AugmentConfig cfg;
  cfg.variants_per_image = 1000;
  cfg.master_seed = 31337;
  const auto variants = augment::augment_reference(ref, cfg);
  bool geometry_ok = variants.size() == 1000;
  for (const auto& img : variants) {
    geometry_ok &= img.width == 224 && img.height == 224;
    for (const double v : img.data) geometry_ok &= v >= 0.0 && v <= 1.0 + 1e-12;
  }

  // identity configuration is a no-op on the enhanced reference
  const auto enhanced = imgproc::enhance(ref, cfg.enhance);
  const bool identity_ok =
      imgproc::affine_transform(enhanced, imgproc::AffineParams{}).data == enhanced.data;

  imgproc::AffineParams flip;
  flip.flip_h = true;
  flip.flip_v = true;
  const bool involution_ok =
      imgproc::affine_transform(imgproc::affine_transform(enhanced, flip), flip).data ==
      enhanced.data;

  bool ranges_ok = true;
  for (int i = 0; i < 100000; ++i) {
    const auto p = augment::sample_params(5150, i, cfg);
    ranges_ok &= p.rotation_deg >= -180.0 && p.rotation_deg <= 180.0;
    ranges_ok &= p.shift_x_frac >= -0.2 && p.shift_x_frac <= 0.2;
    ranges_ok &= p.shift_y_frac >= -0.2 && p.shift_y_frac <= 0.2;
    ranges_ok &= p.shear >= -0.2 && p.shear <= 0.2;
    ranges_ok &= p.zoom >= 0.8 && p.zoom <= 1.2;
  }

  // determinism across two fresh processes
  bool processes_ok = false;
  std::string digests[2];
  for (int run = 0; run < 2; ++run) {
    const std::string command = "\"" + g_self_path + "\" --augment-digest";
    if (FILE* pipe = popen(command.c_str(), "r")) {
      char buffer[64] = {0};
      if (fgets(buffer, sizeof buffer, pipe)) digests[run] = buffer;
      pclose(pipe);
    }
  }
  processes_ok = !digests[0].empty() && digests[0] == digests[1];

  std::ostringstream out;
  out << "1000 variants " << (geometry_ok ? "in-range" : "OUT OF RANGE") << ", identity "
      << (identity_ok ? "exact" : "BROKEN") << ", double-flip "
      << (involution_ok ? "exact" : "BROKEN") << ", draws "
      << (ranges_ok ? "bounded" : "UNBOUNDED") << ", cross-process digest "
      << (processes_ok ? "identical" : "MISMATCH");
  detail = out.str();
  return geometry_ok && identity_ok && involution_ok && ranges_ok && processes_ok;
}

// 6. ------------------------------------------------------------ Adam/dropout

bool criterion_adam_dropout(std::string& detail) {
  // two-step hand oracle on a scalar parameter
  const double lr = 0.1, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double w = 1.0, m = 0.0, v = 0.0;
  const double g1 = 0.5, g2 = -0.3;
  m = beta1 * m + (1 - beta1) * g1;
  v = beta2 * v + (1 - beta2) * g1 * g1;
  w -= lr * (m / (1 - beta1)) / (std::sqrt(v / (1 - beta2)) + eps);
  m = beta1 * m + (1 - beta1) * g2;
  v = beta2 * v + (1 - beta2) * g2 * g2;
  w -= lr * (m / (1 - beta1 * beta1)) / (std::sqrt(v / (1 - beta2 * beta2)) + eps);

  neuralnet::NetConfig cfg;
  cfg.class_count = 1;
  cfg.input_size = 1;
  cfg.layers = {neuralnet::LayerSpec::flat(), neuralnet::LayerSpec::dense(1)};
  auto net = neuralnet::build_network_t<double>(cfg, 1);
  net.weights[1].data[0] = 1.0;
  auto adam = neuralnet::AdamStateT<double>::for_network(net, lr);
  neuralnet::Gradients<double> grads;
  grads.weights.resize(2);
  grads.biases.resize(2);
  grads.weights[1] = Tensor64({1, 1});
  grads.biases[1] = {0.0};
  grads.weights[1].data[0] = g1;
  neuralnet::adam_step(adam, net, grads);
  grads.weights[1].data[0] = g2;
  neuralnet::adam_step(adam, net, grads);
  const double adam_err = std::abs(net.weights[1].data[0] - w);

  // inverted dropout expectation over 1e5 masks
  Tensor64 ones({1, 100});
  for (auto& x : ones.data) x = 1.0;
  double total = 0.0;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    const auto y = neuralnet::dropout_forward(ones, 0.4, neuralnet::RunMode::kTrain,
                                              core::derive_seed(606, t));
    for (const double x : y.data) total += x;
  }
  const double mean = total / (100.0 * trials);
  const double expectation_err = std::abs(mean - 1.0);

  // eval mode is bitwise identity
  core::Rng rng(607);
  Tensor64 x({3, 7});
  for (auto& val : x.data) val = rng.normal();
  const bool eval_identity =
      neuralnet::dropout_forward(x, 0.4, neuralnet::RunMode::kEval, 1).data == x.data;

  std::ostringstream out;
  out << "adam vs oracle " << adam_err << ", dropout mean " << mean << ", eval identity "
      << (eval_identity ? "exact" : "BROKEN");
  detail = out.str();
  return adam_err < 1e-12 && expectation_err < 0.01 && eval_identity;
}

// 7. --------------------------------------------------- desk-scale learning

bool criterion_desk_scale(std::string& detail) {
  const auto start = Clock::now();

  // 3 class references with distinct structural densities plus 10 Other
  // sources; 100 SRA variants per class, 20 per Other source (200 items).
  std::map<std::string, imgproc::RgbImage> refs;
  std::vector<imgproc::RgbImage> others;
  for (int c = 0; c < 3; ++c) {
    dataio::SynthSpec spec;
    spec.class_seed = 100 + c;
    spec.noise_seed = 1000 + c;
    spec.blob_count = 8 + 7 * c;
    spec.road_count = 3 + 4 * c;
    spec.noise_level = 0.03;
    refs["city_" + std::to_string(c)] = dataio::synth_city(spec);
  }
  for (int i = 0; i < 10; ++i) {
    dataio::SynthSpec spec;
    spec.class_seed = 500 + i;
    spec.noise_seed = 2000 + i;
    others.push_back(dataio::synth_city(spec));
  }
  augment::AugmentConfig cfg_class;
  cfg_class.variants_per_image = 100;
  cfg_class.master_seed = 11;
  cfg_class.rotation_max_deg = 15.0;
  cfg_class.shift_max_frac = 0.05;
  cfg_class.shear_max = 0.05;
  cfg_class.zoom_max_frac = 0.1;
  cfg_class.allow_flip_h = false;
  cfg_class.allow_flip_v = false;
  augment::AugmentConfig cfg_other = cfg_class;
  cfg_other.variants_per_image = 20;
  cfg_other.master_seed = 12;
  const auto dataset =
      augment::build_sra_dataset(refs, others, cfg_class, cfg_other, 0.8, 13);
  harness::SraTrainingData data(dataset);

  harness::TrainConfig cfg;
  cfg.mode = harness::TrainMode::kC;
  cfg.epochs = 5;
  cfg.batch_size = 4;
  cfg.learning_rate = 1e-3;
  cfg.l2_lambda = 5e-4;
  cfg.input_size = 64;
  cfg.map_divisor = 4;
  const auto result = harness::train_cnn(data, cfg);
  double best_accuracy = 0.0;
  int reached_epoch = 0;
  for (const auto& record : result.epochs) {
    if (record.val_accuracy > best_accuracy) {
      best_accuracy = record.val_accuracy;
      reached_epoch = record.epoch;
    }
  }
  const bool accuracy_ok = best_accuracy >= 0.95;

  // single-batch overfit: 8 items, plain cross entropy (no regularizer)
  neuralnet::Tensor x({8, 1, 64, 64});
  std::vector<int> labels;
  std::size_t offset = 0;
  for (int i = 0; i < 8; ++i) {
    dataio::SynthSpec spec;
    spec.class_seed = 50 + i % 4;
    spec.noise_seed = 60 + i;
    const auto img = imgproc::resize_bilinear(
        imgproc::geometry_pipeline(imgproc::to_grayscale(dataio::synth_city(spec))), 64, 64);
    for (const double v : img.data) x.data[offset++] = static_cast<float>(v);
    labels.push_back(i % 4);
  }
  auto net = neuralnet::build_network(neuralnet::default_net_config(64, 4, 4), 99);
  auto adam = neuralnet::AdamState::for_network(net, 1e-3);
  double overfit_loss = 1e9;
  int overfit_steps = 0;
  for (int step = 1; step <= 500; ++step) {
    const auto fwd = neuralnet::forward(net, x, neuralnet::RunMode::kTrain, step);
    auto [loss, grad] = neuralnet::softmax_cross_entropy(fwd.logits, labels);
    overfit_loss = loss;
    overfit_steps = step;
    if (loss < 0.01) break;
    auto grads = neuralnet::backward(net, fwd, grad, neuralnet::RunMode::kTrain, step);
    neuralnet::adam_step(adam, net, grads);
  }
  const bool overfit_ok = overfit_loss < 0.01;

  const double elapsed = seconds_since(start);
  std::ostringstream out;
  out << "val accuracy " << best_accuracy << " (epoch " << reached_epoch << "), overfit loss "
      << overfit_loss << " after " << overfit_steps << " steps, " << elapsed << "s";
  detail = out.str();
  return accuracy_ok && overfit_ok && elapsed < 600.0;
}

// 8. ----------------------------------------------------------- mode contract

bool criterion_mode_contract(std::string& detail) {
  harness::TrainConfig cfg;
  cfg.l2_lambda = 5e-4;
  cfg.input_size = 32;
  cfg.map_divisor = 16;

  neuralnet::NetConfig net_cfg = neuralnet::default_net_config(32, 16, 4);
  double l2 = -1.0;

  cfg.mode = harness::TrainMode::kA;
  harness::apply_mode(cfg, net_cfg, l2);
  const bool a_ok = l2 == 0.0 && !net_cfg.dropout_active;
  const auto net_a = neuralnet::build_network(net_cfg, 5);
  const bool a_l2_zero = neuralnet::l2_penalty(net_a, l2) == 0.0;

  cfg.mode = harness::TrainMode::kB;
  harness::apply_mode(cfg, net_cfg, l2);
  const bool b_flags = l2 == 5e-4 && !net_cfg.dropout_active;
  const auto net_b = neuralnet::build_network(net_cfg, 5);

  neuralnet::Tensor x({2, 1, 32, 32});
  core::Rng rng(8008);
  for (auto& v : x.data) v = static_cast<float>(rng.next_unit());
  const auto b_train = neuralnet::forward(net_b, x, neuralnet::RunMode::kTrain, 3);
  const auto b_eval = neuralnet::forward(net_b, x, neuralnet::RunMode::kEval, 3);
  const bool b_identity = b_train.logits.data == b_eval.logits.data;

  cfg.mode = harness::TrainMode::kC;
  harness::apply_mode(cfg, net_cfg, l2);
  const bool c_flags = l2 == 5e-4 && net_cfg.dropout_active;
  const auto net_c = neuralnet::build_network(net_cfg, 5);
  const auto c_train = neuralnet::forward(net_c, x, neuralnet::RunMode::kTrain, 3);
  const auto c_eval = neuralnet::forward(net_c, x, neuralnet::RunMode::kEval, 3);
  const bool c_applies = c_train.logits.data != c_eval.logits.data &&
                         neuralnet::l2_penalty(net_c, l2) > 0.0;

  std::ostringstream out;
  out << "A zero-L2 " << (a_ok && a_l2_zero ? "yes" : "NO") << ", B dropout identity "
      << (b_flags && b_identity ? "yes" : "NO") << ", C both active "
      << (c_flags && c_applies ? "yes" : "NO");
  detail = out.str();
  return a_ok && a_l2_zero && b_flags && b_identity && c_flags && c_applies;
}

// 9. --------------------------------------------------------- reproducibility

bool criterion_reproducibility(std::string& detail) {
  Scratch scratch;

  const auto synth = dataio::synth_dataset(2, 2, 909);
  std::map<std::string, imgproc::RgbImage> refs;
  std::vector<imgproc::RgbImage> others;
  for (const auto& item : synth) {
    if (item.instance == 0) {
      refs[item.label] = item.image;
    } else {
      others.push_back(item.image);
    }
  }
  augment::AugmentConfig cfg_class;
  cfg_class.variants_per_image = 10;
  cfg_class.master_seed = 14;
  cfg_class.rotation_max_deg = 20.0;
  augment::AugmentConfig cfg_other = cfg_class;
  cfg_other.variants_per_image = 5;
  cfg_other.master_seed = 15;
  const auto dataset =
      augment::build_sra_dataset(refs, others, cfg_class, cfg_other, 0.7, 16);
  harness::SraTrainingData data(dataset);

  harness::TrainConfig cfg;
  cfg.mode = harness::TrainMode::kC;
  cfg.epochs = 2;
  cfg.batch_size = 8;
  cfg.learning_rate = 1e-3;
  cfg.input_size = 32;
  cfg.map_divisor = 16;

  cfg.run_dir = (scratch.dir / "run_a").string();
  const auto run_a = harness::train_cnn(data, cfg);
  cfg.run_dir = (scratch.dir / "run_b").string();
  const auto run_b = harness::train_cnn(data, cfg);

  const bool checkpoints_identical =
      read_bytes(scratch.dir / "run_a" / "checkpoints" / "epoch_002.nann") ==
      read_bytes(scratch.dir / "run_b" / "checkpoints" / "epoch_002.nann");
  const bool curves_identical =
      read_bytes(scratch.dir / "run_a" / "curves" / "loss.csv") ==
          read_bytes(scratch.dir / "run_b" / "curves" / "loss.csv") &&
      !read_bytes(scratch.dir / "run_a" / "curves" / "loss.csv").empty();

  // PCA model files byte-identical across reruns
  std::map<std::string, imgproc::RgbImage> pca_refs = refs;
  const auto pca_dataset = augment::build_sra_dataset(pca_refs, {}, cfg_class, cfg_other,
                                                      0.7, 16);
  harness::SraTrainingData pca_data(pca_dataset);
  const auto pca_1 = harness::train_eigencity(pca_data, 3, 64);
  const auto pca_2 = harness::train_eigencity(pca_data, 3, 64);
  eigencity::save_model(scratch.dir / "m1.ecpc", pca_1.model);
  eigencity::save_model(scratch.dir / "m2.ecpc", pca_2.model);
  const bool models_identical =
      read_bytes(scratch.dir / "m1.ecpc") == read_bytes(scratch.dir / "m2.ecpc");

  // checkpoint round-trip preserves evaluation output byte for byte
  std::vector<evalkit::TestItem> test;
  for (std::size_t i = 0; i < data.size() && test.size() < 12; ++i) {
    imgproc::GrayImage img = data.image(i);
    img = imgproc::resize_bilinear(img, 32, 32);
    int label = 0;
    for (std::size_t c = 0; c < data.classes().size(); ++c) {
      if (data.classes()[c] == data.item(i).label) label = static_cast<int>(c);
    }
    test.push_back({"t" + std::to_string(i), label, std::move(img)});
  }
  const std::string csv_before =
      evalkit::probabilities_csv(run_a.network, test, data.classes());
  harness::save_checkpoint(scratch.dir / "round.nann", run_a.network);
  const auto restored = harness::load_checkpoint(scratch.dir / "round.nann");
  const std::string csv_after = evalkit::probabilities_csv(restored, test, data.classes());
  const bool eval_identical = csv_before == csv_after;

  const auto report_a = evalkit::evaluate_epoch(run_a.network, test, data.classes(), "2");
  const auto report_b = evalkit::evaluate_epoch(restored, test, data.classes(), "2");
  const bool metrics_identical =
      evalkit::metrics_csv({report_a}) == evalkit::metrics_csv({report_b});

  std::ostringstream out;
  out << "checkpoints " << (checkpoints_identical ? "byte-identical" : "DIFFER") << ", curves "
      << (curves_identical ? "byte-identical" : "DIFFER") << ", models "
      << (models_identical ? "byte-identical" : "DIFFER") << ", save/load eval "
      << (eval_identical && metrics_identical ? "exact" : "DIFFERS");
  detail = out.str();
  return checkpoints_identical && curves_identical && models_identical && eval_identical &&
         metrics_identical;
}

// 10. ------------------------------------------------------------- ingestion

bool criterion_ingestion(std::string& detail) {
  Scratch scratch;
  std::atomic<int> requests{0};

  httplib::Server server;
  server.Get(R"(/img/(.+)\.png)", [&requests](const httplib::Request& req,
                                              httplib::Response& res) {
    requests.fetch_add(1);
    const std::string id = req.matches[1];
    if (id.find("gone") != std::string::npos) {
      res.status = 404;
      return;
    }
    res.set_content("BYTES:" + id, "application/octet-stream");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();

  std::vector<dataio::ManifestEntry> manifest;
  for (int i = 0; i < 9; ++i) {
    manifest.push_back({"ok" + std::to_string(i), "ISS", static_cast<double>(i), 0.0});
  }
  manifest.push_back({"gone0", "ISS", 0.0, 0.0});

  const std::string url = "http://127.0.0.1:" + std::to_string(port) + "/img/{id}.png";
  const fs::path cache = scratch.dir / "cache";

  const auto first = dataio::fetch_images(manifest, url, cache, {});
  int downloaded = 0, missing = 0;
  for (const auto& r : first) {
    if (r.status == dataio::FetchStatus::kDownloaded) ++downloaded;
    if (r.status == dataio::FetchStatus::kMissing) ++missing;
  }
  int cached_files = 0;
  for (const auto& entry : fs::directory_iterator(cache)) {
    if (entry.path().extension() == ".png") ++cached_files;
  }
  const bool first_ok = downloaded == 9 && missing == 1 && cached_files == 9;

  // warm rerun over the resolvable entries: every hit is served from the
  // cache, zero network requests
  auto resolvable = manifest;
  resolvable.pop_back();
  const int before = requests.load();
  const auto second = dataio::fetch_images(resolvable, url, cache, {});
  bool all_cached = true;
  for (const auto& r : second) all_cached &= r.status == dataio::FetchStatus::kCached;
  const bool warm_ok = all_cached && requests.load() == before;

  server.stop();
  server_thread.join();

  // bbox + exclusion filtering is idempotent
  std::vector<dataio::ManifestEntry> geo;
  for (int i = 0; i < 40; ++i) {
    geo.push_back({"p" + std::to_string(i), "ISS", 10.0 + 0.01 * i, 20.0 + 0.01 * i});
  }
  const dataio::BBox box{10.0, 10.2, 20.0, 20.2};
  const std::vector<std::string> exclusions = {"p3", "p7"};
  const auto once = dataio::subset_by_bbox(geo, box, exclusions);
  const auto twice = dataio::subset_by_bbox(once, box, exclusions);
  bool idempotent = once.size() == twice.size();
  for (std::size_t i = 0; idempotent && i < once.size(); ++i) {
    idempotent &= once[i].id == twice[i].id;
  }

  std::ostringstream out;
  out << downloaded << " downloaded / " << missing << " missing, warm rerun "
      << (warm_ok ? "zero requests" : "HIT THE NETWORK") << ", subsetting "
      << (idempotent ? "idempotent" : "NOT idempotent");
  detail = out.str();
  return first_ok && warm_ok && idempotent;
}

}  // namespace

int main(int argc, char** argv) {
  g_self_path = argv[0];
  if (argc > 1 && std::string(argv[1]) == "--augment-digest") {
    std::printf("%016llx\n", static_cast<unsigned long long>(augment_digest()));
    return 0;
  }

  struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "FFT matches the naive DFT oracle and inverts", criterion_fft},
      {2, "snapshot PCA matches the covariance eigensolver oracle", criterion_pca},
      {3, "analytic gradients match central finite differences", criterion_gradients},
      {4, "reference arithmetic pinned exactly", criterion_arithmetic},
      {5, "augmentation invariants and cross-process determinism", criterion_augmentation},
      {6, "Adam oracle and inverted-dropout expectation", criterion_adam_dropout},
      {7, "desk-scale end-to-end learning", criterion_desk_scale},
      {8, "training mode contract (A/B/C)", criterion_mode_contract},
      {9, "bitwise reproducibility and checkpoint round-trip", criterion_reproducibility},
      {10, "ingestion: stub server, cache, bbox filters", criterion_ingestion},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (argc > 1 && std::string(argv[1]) != std::to_string(criterion.id)) continue;
    const auto start = Clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %2d. %s (%.1fs): %s\n", ok ? "PASS" : "FAIL", criterion.id,
                criterion.name, seconds_since(start), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
