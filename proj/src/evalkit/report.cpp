#include "nightatlas/evalkit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nightatlas/core/error.hpp"
#include "nightatlas/imgproc/image_io.hpp"

namespace nightatlas::evalkit {

namespace {

neuralnet::Tensor batch_tensor(const std::vector<TestItem>& test, std::size_t begin,
                               std::size_t end) {
  const int size = test[begin].image.width;
  neuralnet::Tensor x({static_cast<int>(end - begin), 1, size, size});
  std::size_t offset = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const auto& img = test[i].image;
    for (std::size_t j = 0; j < img.data.size(); ++j) {
      x.data[offset + j] = static_cast<float>(img.data[j]);
    }
    offset += img.data.size();
  }
  return x;
}

// 3x5 digit glyphs for probability captions on contact sheets.
constexpr std::uint16_t kGlyphs[12] = {
    0b111101101101111,  // 0
    0b010110010010111,  // 1
    0b111001111100111,  // 2
    0b111001111001111,  // 3
    0b101101111001001,  // 4
    0b111100111001111,  // 5
    0b111100111101111,  // 6
    0b111001001001001,  // 7
    0b111101111101111,  // 8
    0b111101111001111,  // 9
    0b000000000000010,  // .
    0b000000000000000,  // space
};

void stamp_glyph(imgproc::GrayImage& img, int gx, int gy, int glyph, int scale) {
  const std::uint16_t bits = kGlyphs[glyph];
  for (int row = 0; row < 5; ++row) {
    for (int col = 0; col < 3; ++col) {
      if (!(bits >> (14 - (row * 3 + col)) & 1)) continue;
      for (int dy = 0; dy < scale; ++dy) {
        for (int dx = 0; dx < scale; ++dx) {
          const int x = gx + col * scale + dx;
          const int y = gy + row * scale + dy;
          if (x >= 0 && x < img.width && y >= 0 && y < img.height) img.at(x, y) = 1.0;
        }
      }
    }
  }
}

void stamp_text(imgproc::GrayImage& img, int x, int y, const std::string& text, int scale) {
  int cursor = x;
  for (const char c : text) {
    int glyph = 11;
    if (c >= '0' && c <= '9') glyph = c - '0';
    else if (c == '.') glyph = 10;
    stamp_glyph(img, cursor, y, glyph, scale);
    cursor += 4 * scale;
  }
}

}  // namespace

EvalReport evaluate_epoch(const neuralnet::Network& net, const std::vector<TestItem>& test,
                          const std::vector<std::string>& classes, const std::string& tag,
                          int top_k, int batch_size) {
  const int class_count = static_cast<int>(classes.size());
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(test.size());
  // (probability, item index) per class for the top-k lists
  std::vector<std::vector<std::pair<double, std::size_t>>> scored(classes.size());

  for (std::size_t pos = 0; pos < test.size(); pos += batch_size) {
    const std::size_t end = std::min(test.size(), pos + batch_size);
    const auto fwd =
        neuralnet::forward(net, batch_tensor(test, pos, end), neuralnet::RunMode::kEval, 0);
    for (std::size_t i = pos; i < end; ++i) {
      const int b = static_cast<int>(i - pos);
      int best = 0;
      for (int c = 1; c < class_count; ++c) {
        if (fwd.probabilities.at(b, c) > fwd.probabilities.at(b, best)) best = c;
      }
      pairs.emplace_back(test[i].label, best);
      scored[best].emplace_back(fwd.probabilities.at(b, best), i);
    }
  }

  EvalReport report = report_from_predictions(tag, classes, pairs);
  for (std::size_t c = 0; c < scored.size(); ++c) {
    auto& list = scored[c];
    std::stable_sort(list.begin(), list.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    const std::size_t keep = std::min<std::size_t>(top_k, list.size());
    for (std::size_t i = 0; i < keep; ++i) {
      report.top_per_class[c].push_back({test[list[i].second].id, list[i].first});
    }
  }
  return report;
}

std::string probabilities_csv(const neuralnet::Network& net, const std::vector<TestItem>& test,
                              const std::vector<std::string>& classes, int batch_size) {
  std::ostringstream out;
  out << "item,true_label";
  for (const auto& c : classes) out << ",p_" << c;
  out << "\n";
  out.precision(9);
  for (std::size_t pos = 0; pos < test.size(); pos += batch_size) {
    const std::size_t end = std::min(test.size(), pos + batch_size);
    const auto fwd =
        neuralnet::forward(net, batch_tensor(test, pos, end), neuralnet::RunMode::kEval, 0);
    for (std::size_t i = pos; i < end; ++i) {
      const int b = static_cast<int>(i - pos);
      out << test[i].id << "," << classes[test[i].label];
      for (int c = 0; c < static_cast<int>(classes.size()); ++c) {
        out << "," << fwd.probabilities.at(b, c);
      }
      out << "\n";
    }
  }
  return out.str();
}

std::string confusion_csv(const ConfusionMatrix& m) {
  std::ostringstream out;
  out << "true\\pred";
  for (const auto& c : m.classes) out << "," << c;
  out << "," << kAbstainLabel << "\n";
  for (int t = 0; t < m.class_count(); ++t) {
    out << m.classes[t];
    for (int p = 0; p < m.grid_size(); ++p) out << "," << m.at(t, p);
    out << "\n";
  }
  return out.str();
}

std::string metrics_csv(const std::vector<EvalReport>& reports,
                        const std::string& tag_column) {
  std::ostringstream out;
  out << tag_column << ",class,precision,recall,support\n";
  out.precision(9);
  for (const auto& report : reports) {
    for (int c = 0; c < report.matrix.class_count(); ++c) {
      out << report.tag << "," << report.matrix.classes[c] << ","
          << report.metrics.precision[c] << "," << report.metrics.recall[c] << ","
          << report.metrics.support[c] << "\n";
    }
  }
  return out.str();
}

std::string means_csv(const std::vector<EvalReport>& reports,
                      const std::string& tag_column) {
  std::ostringstream out;
  out << tag_column
      << ",mean_precision,mean_recall,city_mean_precision,city_mean_recall,accuracy\n";
  out.precision(9);
  for (const auto& report : reports) {
    out << report.tag << "," << report.metrics.mean_precision << ","
        << report.metrics.mean_recall << ","
        << mean_excluding(report.metrics.precision, report.matrix.classes, "Other") << ","
        << mean_excluding(report.metrics.recall, report.matrix.classes, "Other") << ","
        << report.accuracy << "\n";
  }
  return out.str();
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      (line != "epoch,class,precision,recall,support" &&
       line != "threshold,class,precision,recall,support")) {
    throw core::FormatError("metrics.csv: unexpected header");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    MetricsRow row;
    std::string precision, recall, support;
    if (!std::getline(fields, row.tag, ',') || !std::getline(fields, row.class_name, ',') ||
        !std::getline(fields, precision, ',') || !std::getline(fields, recall, ',') ||
        !std::getline(fields, support, ',')) {
      throw core::FormatError("metrics.csv: malformed row: " + line);
    }
    row.precision = std::stod(precision);
    row.recall = std::stod(recall);
    row.support = std::stol(support);
    rows.push_back(std::move(row));
  }
  return rows;
}

imgproc::GrayImage contact_sheet(const std::vector<imgproc::GrayImage>& tiles,
                                 const std::vector<double>& probabilities, int columns) {
  if (tiles.empty()) return imgproc::GrayImage(1, 1);
  const int tile_w = tiles.front().width;
  const int tile_h = tiles.front().height;
  const int caption = 12;
  const int pad = 4;
  const int cols = std::min<int>(columns, static_cast<int>(tiles.size()));
  const int rows = (static_cast<int>(tiles.size()) + cols - 1) / cols;
  imgproc::GrayImage sheet(cols * (tile_w + pad) + pad,
                           rows * (tile_h + caption + pad) + pad);
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const int row = static_cast<int>(i) / cols;
    const int col = static_cast<int>(i) % cols;
    const int ox = pad + col * (tile_w + pad);
    const int oy = pad + row * (tile_h + caption + pad);
    for (int y = 0; y < tile_h; ++y) {
      for (int x = 0; x < tile_w; ++x) {
        if (ox + x < sheet.width && oy + y < sheet.height) {
          sheet.at(ox + x, oy + y) = tiles[i].at(x, y);
        }
      }
    }
    if (i < probabilities.size()) {
      char caption_text[16];
      std::snprintf(caption_text, sizeof(caption_text), "%.3f", probabilities[i]);
      stamp_text(sheet, ox, oy + tile_h + 2, caption_text, 2);
    }
  }
  return sheet;
}

void export_report(const EvalReport& report, const std::filesystem::path& dir,
                   const std::vector<TestItem>* images) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "confusion.csv");
    if (!out) throw core::IoError("cannot write " + (dir / "confusion.csv").string());
    out << confusion_csv(report.matrix);
  }
  {
    std::ofstream out(dir / "metrics.csv");
    if (!out) throw core::IoError("cannot write " + (dir / "metrics.csv").string());
    out << metrics_csv({report});
  }
  {
    std::ofstream out(dir / "means.csv");
    if (!out) throw core::IoError("cannot write " + (dir / "means.csv").string());
    out << means_csv({report});
  }
  {
    nlohmann::json top;
    for (std::size_t c = 0; c < report.top_per_class.size(); ++c) {
      nlohmann::json list = nlohmann::json::array();
      for (const auto& p : report.top_per_class[c]) {
        list.push_back({{"id", p.item_id}, {"probability", p.probability}});
      }
      top[report.matrix.classes[c]] = std::move(list);
    }
    std::ofstream out(dir / "top_predictions.json");
    if (!out) throw core::IoError("cannot write " + (dir / "top_predictions.json").string());
    out << nlohmann::json{{"tag", report.tag}, {"top_predictions", top}}.dump(2) << "\n";
  }
  if (images) {
    for (std::size_t c = 0; c < report.top_per_class.size(); ++c) {
      std::vector<imgproc::GrayImage> tiles;
      std::vector<double> probs;
      for (const auto& p : report.top_per_class[c]) {
        const auto it = std::find_if(images->begin(), images->end(),
                                     [&](const TestItem& t) { return t.id == p.item_id; });
        if (it == images->end()) continue;
        tiles.push_back(it->image);
        probs.push_back(p.probability);
      }
      if (tiles.empty()) continue;
      imgproc::write_png(dir / ("top_" + report.matrix.classes[c] + ".png"),
                         contact_sheet(tiles, probs));
    }
  }
}

}  // namespace nightatlas::evalkit
