#include "nightatlas/neuralnet/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "nightatlas/core/binary_io.hpp"

namespace nightatlas::neuralnet {

namespace {
constexpr char kMagic[4] = {'N', 'A', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t kind_tag(LayerKind kind) { return static_cast<std::uint32_t>(kind); }
}  // namespace

std::string net_config_to_json(const NetConfig& cfg) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : cfg.layers) {
    nlohmann::json j{{"kind", to_string(layer.kind)}};
    if (layer.kind == LayerKind::kConv) {
      j["kernel"] = layer.kernel;
      j["stride"] = layer.stride;
      j["pad"] = layer.pad;
      j["out_maps"] = layer.out_maps;
    } else if (layer.kind == LayerKind::kDense) {
      j["units"] = layer.units;
    } else if (layer.kind == LayerKind::kDropout) {
      j["rate"] = layer.rate;
    }
    layers.push_back(std::move(j));
  }
  const nlohmann::json j{{"layers", layers},
                         {"dropout_active", cfg.dropout_active},
                         {"l2_lambda", cfg.l2_lambda},
                         {"class_count", cfg.class_count},
                         {"input_size", cfg.input_size},
                         {"input_channels", cfg.input_channels}};
  return j.dump(2);
}

NetConfig net_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw core::FormatError(std::string("invalid network config JSON: ") + e.what());
  }
  NetConfig cfg;
  cfg.dropout_active = j.at("dropout_active").get<bool>();
  cfg.l2_lambda = j.at("l2_lambda").get<double>();
  cfg.class_count = j.at("class_count").get<int>();
  cfg.input_size = j.at("input_size").get<int>();
  cfg.input_channels = j.at("input_channels").get<int>();
  for (const auto& lj : j.at("layers")) {
    LayerSpec layer;
    layer.kind = layer_kind_from_string(lj.at("kind").get<std::string>());
    switch (layer.kind) {
      case LayerKind::kConv:
        layer.kernel = lj.at("kernel").get<int>();
        layer.stride = lj.at("stride").get<int>();
        layer.pad = lj.at("pad").get<int>();
        layer.out_maps = lj.at("out_maps").get<int>();
        break;
      case LayerKind::kDense:
        layer.units = lj.at("units").get<int>();
        break;
      case LayerKind::kDropout:
        layer.rate = lj.at("rate").get<double>();
        break;
      default:
        break;
    }
    cfg.layers.push_back(layer);
  }
  return cfg;
}

void save_checkpoint(const std::filesystem::path& path, const Network& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw core::IoError("cannot write " + path.string());
  core::write_magic(out, kMagic);
  core::write_u32(out, kVersion);
  core::write_u32(out, static_cast<std::uint32_t>(net.cfg.layers.size()));
  for (std::size_t i = 0; i < net.cfg.layers.size(); ++i) {
    core::write_u32(out, kind_tag(net.cfg.layers[i].kind));
    const auto& w = net.weights[i];
    core::write_u32(out, static_cast<std::uint32_t>(w.shape.size()));
    for (int d : w.shape) core::write_u32(out, static_cast<std::uint32_t>(d));
    for (float v : w.data) core::write_f32(out, v);
    const auto& b = net.biases[i];
    core::write_u32(out, static_cast<std::uint32_t>(b.size()));
    for (float v : b) core::write_f32(out, v);
  }
  if (!out) throw core::IoError("write failed: " + path.string());

  std::ofstream cfg_out(path.string() + ".json");
  if (!cfg_out) throw core::IoError("cannot write " + path.string() + ".json");
  cfg_out << net_config_to_json(net.cfg) << "\n";
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream cfg_in(path.string() + ".json");
  if (!cfg_in) throw core::IoError("missing network config: " + path.string() + ".json");
  std::string cfg_text((std::istreambuf_iterator<char>(cfg_in)),
                       std::istreambuf_iterator<char>());
  Network net;
  net.cfg = net_config_from_json(cfg_text);

  std::ifstream in(path, std::ios::binary);
  if (!in) throw core::IoError("cannot open " + path.string());
  core::expect_magic(in, kMagic, "checkpoint");
  const std::uint32_t version = core::read_u32(in, "version");
  if (version != kVersion) {
    throw core::FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t layer_count = core::read_u32(in, "layer count");
  if (layer_count != net.cfg.layers.size()) {
    throw core::FormatError("checkpoint layer count " + std::to_string(layer_count) +
                            " does not match config (" +
                            std::to_string(net.cfg.layers.size()) + ")");
  }
  net.weights.resize(layer_count);
  net.biases.resize(layer_count);
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    const std::uint32_t tag = core::read_u32(in, "layer kind");
    if (tag != kind_tag(net.cfg.layers[i].kind)) {
      throw core::FormatError("checkpoint layer " + std::to_string(i) +
                              " kind does not match config");
    }
    const std::uint32_t rank = core::read_u32(in, "weight rank");
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(core::read_u32(in, "weight dim"));
    if (rank > 0) {
      net.weights[i] = Tensor(shape);
      for (auto& v : net.weights[i].data) v = core::read_f32(in, "weight");
    }
    const std::uint32_t bias_len = core::read_u32(in, "bias length");
    net.biases[i].resize(bias_len);
    for (auto& v : net.biases[i]) v = core::read_f32(in, "bias");
  }
  return net;
}

}  // namespace nightatlas::neuralnet
