#include "cgboost/cli/model_file.hpp"

#include <bit>
#include <cstring>

#include <fmt/format.h>

#include "cgboost/cli/config.hpp"
#include "cgboost/cli/ingest.hpp"
#include "cgboost/error.hpp"
#include "cgboost/io/canonical_json.hpp"

namespace cgb::cli {
namespace {

static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

using nlohmann::json;
constexpr std::string_view kMagic = "CGBMODEL";

class TensorTable {
 public:
  std::size_t add(const nd::Tensor& t) {
    tensors_.push_back(&t);
    return tensors_.size() - 1;
  }
  const std::vector<const nd::Tensor*>& tensors() const { return tensors_; }

 private:
  std::vector<const nd::Tensor*> tensors_;
};

json layer_json(const nd::Layer& layer) {
  switch (layer.kind()) {
    case nd::LayerKind::dense: {
      const auto& d = layer.as<nd::DenseLayer>();
      return {{"kind", "dense"}, {"in", d.weight.dim(1)}, {"out", d.weight.dim(0)}};
    }
    case nd::LayerKind::conv1d: {
      const auto& c = layer.as<nd::Conv1dLayer>();
      return {{"kind", "conv1d"}, {"in", c.kernel.dim(1)}, {"out", c.kernel.dim(0)}, {"kernel", c.kernel.dim(2)}};
    }
    case nd::LayerKind::residual: {
      json inner = json::array();
      for (const auto& l : layer.as<nd::ResidualBlock>().inner) inner.push_back(layer_json(l));
      return {{"kind", "residual"}, {"inner", inner}};
    }
    default:
      return {{"kind", std::string(nd::layer_kind_name(layer.kind()))}};
  }
}

json network_json(const nd::Network& net, TensorTable& table) {
  json layers = json::array();
  for (const auto& l : net.layers()) layers.push_back(layer_json(l));
  json params = json::array();
  for (const auto& p : net.parameters()) params.push_back(table.add(*p.tensor));
  return {{"input_shape", net.input_shape()}, {"layers", layers}, {"parameters", params}};
}

json stamp_json(const features::DataStamp& s) {
  return {{"first", features::format_date(s.first)}, {"last", features::format_date(s.last)}};
}

// Reader over the stored bytes.
class Cursor {
 public:
  explicit Cursor(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw IoError("model file is truncated");
    const std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  template <typename T>
  T read() {
    T v;
    std::memcpy(&v, take(sizeof(T)).data(), sizeof(T));
    return v;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
void append(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

nd::Layer layer_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "dense") return nd::Layer::dense(j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>());
  if (kind == "conv1d") {
    return nd::Layer::conv1d(j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>(),
                             j.at("kernel").get<std::size_t>());
  }
  if (kind == "relu") return nd::Layer::relu();
  if (kind == "sigmoid") return nd::Layer::sigmoid();
  if (kind == "flatten") return nd::Layer::flatten();
  if (kind == "residual") {
    std::vector<nd::Layer> inner;
    for (const auto& l : j.at("inner")) inner.push_back(layer_from_json(l));
    return nd::Layer::residual(std::move(inner));
  }
  throw IoError(fmt::format("model file has unknown layer kind '{}'", kind));
}

nd::Network network_from_json(const json& j, const std::vector<nd::Tensor>& tensors) {
  std::vector<nd::Layer> layers;
  for (const auto& l : j.at("layers")) layers.push_back(layer_from_json(l));
  nd::Network net(j.at("input_shape").get<nd::Shape>(), std::move(layers));
  const auto ids = j.at("parameters").get<std::vector<std::size_t>>();
  auto params = net.parameters();
  if (ids.size() != params.size()) throw IoError("model file network parameter count mismatch");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= tensors.size()) throw IoError("model file references a missing tensor");
    if (tensors[ids[i]].shape() != params[i].tensor->shape()) throw IoError("model file tensor shape mismatch");
    *params[i].tensor = tensors[ids[i]];
  }
  return net;
}

features::DataStamp stamp_from_json(const json& j) {
  return {features::parse_date(j.at("first").get<std::string>()), features::parse_date(j.at("last").get<std::string>())};
}

}  // namespace

std::string serialize_model(const PipelineModel& model) {
  const eval::FittedPipeline& p = model.pipeline;
  TensorTable table;
  std::vector<nd::Tensor> normalizer_tensors;
  normalizer_tensors.reserve(p.normalizers.size());
  json normalizers = json::array();
  for (const auto& n : p.normalizers) {
    nd::Tensor t({n.columns().size(), 4});
    for (std::size_t c = 0; c < n.columns().size(); ++c) {
      const auto& s = n.columns()[c];
      t.at(c, 0) = s.clip_low;
      t.at(c, 1) = s.clip_high;
      t.at(c, 2) = s.shift;
      t.at(c, 3) = s.scale;
    }
    normalizer_tensors.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < p.normalizers.size(); ++i) {
    json entry = {{"columns", table.add(normalizer_tensors[i])}};
    if (p.normalizers[i].stamp()) entry["stamp"] = stamp_json(*p.normalizers[i].stamp());
    normalizers.push_back(entry);
  }
  json encoder = {{"input_dim", p.encoder.input_dim}, {"network", network_json(p.encoder.network, table)}};
  json stages = json::array();
  for (const auto& net : p.ensemble.base_models) stages.push_back(network_json(net, table));
  json fit_ranges = json::array();
  for (const auto& r : p.fit_ranges) fit_ranges.push_back(stamp_json(r));

  const json header = {
      {"format", "cgboost-pipeline"},
      {"config", run_config_to_json(model.config)},
      {"provenance",
       {{"seed", model.provenance.seed},
        {"config_hash", model.provenance.config_hash},
        {"data_fingerprint", model.provenance.data_fingerprint},
        {"data_sources", model.provenance.data_sources},
        {"first_date", features::format_date(model.provenance.first_date)},
        {"last_date", features::format_date(model.provenance.last_date)}}},
      {"pipeline",
       {{"index_names", p.index_names},
        {"feature_columns", p.feature_columns},
        {"window_len", p.window_len},
        {"rate_scale", p.rate_scale},
        {"sample_counts", p.sample_counts},
        {"fit_ranges", fit_ranges},
        {"sae_initial_loss", p.sae_initial_loss},
        {"sae_final_loss", p.sae_final_loss},
        {"normalizers", normalizers},
        {"encoder", encoder},
        {"ensemble",
         {{"shrinkage", p.ensemble.shrinkage},
          {"base_score", p.ensemble.base_score},
          {"initial_train_mse", p.ensemble.initial_train_mse},
          {"stage_train_mse", p.ensemble.stage_train_mse},
          {"stages", stages}}}}}};

  const std::string text = io::canonical_dump(header);
  std::string out(kMagic);
  append<std::uint32_t>(out, kModelFormatVersion);
  append<std::uint64_t>(out, text.size());
  out += text;
  append<std::uint64_t>(out, table.tensors().size());
  for (const nd::Tensor* t : table.tensors()) {
    append<std::uint32_t>(out, static_cast<std::uint32_t>(t->rank()));
    for (std::size_t d : t->shape()) append<std::uint64_t>(out, d);
    for (double v : t->data()) append<double>(out, v);
  }
  return out;
}

PipelineModel deserialize_model(std::string_view bytes) {
  Cursor in(bytes);
  if (bytes.size() < kMagic.size() || in.take(kMagic.size()) != kMagic) throw IoError("not a cgboost model file");
  const auto version = in.read<std::uint32_t>();
  if (version != kModelFormatVersion) {
    throw IoError(fmt::format("model file format version {} is not supported (this build reads version {})", version,
                              kModelFormatVersion));
  }
  const auto header_len = in.read<std::uint64_t>();
  const std::string_view text = in.take(header_len);
  const auto count = in.read<std::uint64_t>();
  std::vector<nd::Tensor> tensors;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto rank = in.read<std::uint32_t>();
    if (rank > 8) throw IoError("model file tensor rank is implausible");
    nd::Shape shape(rank);
    for (auto& d : shape) d = in.read<std::uint64_t>();
    const std::size_t n = nd::shape_size(shape);
    if (n > bytes.size() / sizeof(double)) throw IoError("model file is truncated");
    std::vector<double> values(n);
    const std::string_view raw = in.take(n * sizeof(double));
    std::memcpy(values.data(), raw.data(), raw.size());
    tensors.emplace_back(shape, std::move(values));
  }
  if (!in.at_end()) throw IoError("model file has trailing bytes");

  try {
    const json h = json::parse(text);
    if (h.at("format") != "cgboost-pipeline") throw IoError("model header has an unexpected format tag");
    PipelineModel m;
    m.config = parse_run_config(h.at("config").dump());
    const json& pv = h.at("provenance");
    m.provenance.seed = pv.at("seed").get<std::uint64_t>();
    m.provenance.config_hash = pv.at("config_hash").get<std::string>();
    m.provenance.data_fingerprint = pv.at("data_fingerprint").get<std::string>();
    m.provenance.data_sources = pv.at("data_sources").get<std::vector<std::string>>();
    m.provenance.first_date = features::parse_date(pv.at("first_date").get<std::string>());
    m.provenance.last_date = features::parse_date(pv.at("last_date").get<std::string>());

    const json& pj = h.at("pipeline");
    eval::FittedPipeline& p = m.pipeline;
    p.index_names = pj.at("index_names").get<std::vector<std::string>>();
    p.feature_columns = pj.at("feature_columns").get<std::vector<std::string>>();
    p.window_len = pj.at("window_len").get<std::size_t>();
    p.rate_scale = pj.at("rate_scale").get<double>();
    p.sample_counts = pj.at("sample_counts").get<std::vector<std::size_t>>();
    for (const auto& r : pj.at("fit_ranges")) p.fit_ranges.push_back(stamp_from_json(r));
    p.sae_initial_loss = pj.at("sae_initial_loss").get<double>();
    p.sae_final_loss = pj.at("sae_final_loss").get<double>();
    for (const auto& n : pj.at("normalizers")) {
      const std::size_t id = n.at("columns").get<std::size_t>();
      if (id >= tensors.size() || tensors[id].rank() != 2 || tensors[id].dim(1) != 4) {
        throw IoError("model file normalizer tensor is malformed");
      }
      std::vector<features::ColumnScaling> cols;
      for (std::size_t c = 0; c < tensors[id].dim(0); ++c) {
        const nd::Tensor& t = tensors[id];
        cols.push_back({t.at(c, 0), t.at(c, 1), t.at(c, 2), t.at(c, 3)});
      }
      std::optional<features::DataStamp> stamp;
      if (n.contains("stamp")) stamp = stamp_from_json(n.at("stamp"));
      p.normalizers.push_back(features::Normalizer::from_parameters(std::move(cols), stamp));
    }
    p.encoder.input_dim = pj.at("encoder").at("input_dim").get<std::size_t>();
    p.encoder.network = network_from_json(pj.at("encoder").at("network"), tensors);
    const json& ej = pj.at("ensemble");
    p.ensemble.shrinkage = ej.at("shrinkage").get<double>();
    p.ensemble.base_score = ej.at("base_score").get<double>();
    p.ensemble.initial_train_mse = ej.at("initial_train_mse").get<double>();
    p.ensemble.stage_train_mse = ej.at("stage_train_mse").get<std::vector<double>>();
    for (const auto& s : ej.at("stages")) p.ensemble.base_models.push_back(network_from_json(s, tensors));
    if (p.normalizers.size() != p.index_names.size()) throw IoError("model file has one normalizer per index missing");
    return m;
  } catch (const json::exception& e) {
    throw IoError(fmt::format("model header is malformed: {}", e.what()));
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw IoError(fmt::format("model file is inconsistent: {}", e.what()));
  }
}

void save_model(const std::filesystem::path& path, const PipelineModel& model) {
  write_text_file(path, serialize_model(model));
}

PipelineModel load_model(const std::filesystem::path& path) {
  try {
    return deserialize_model(read_text_file(path));
  } catch (const IoError& e) {
    throw IoError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string data_fingerprint(const std::vector<features::SeriesFrame>& frames) {
  std::uint64_t h = fnv1a64("");
  for (const auto& f : frames) {
    h = fnv1a64(f.index_name, h);
    h = fnv1a64("\n", h);
    h = fnv1a64(format_series_csv(f), h);
  }
  return fmt::format("{:016x}", h);
}

}  // namespace cgb::cli
