#include "cgboost/cli/config.hpp"

#include <set>

#include <fmt/format.h>

#include "cgboost/cli/ingest.hpp"
#include "cgboost/error.hpp"
#include "cgboost/io/canonical_json.hpp"

namespace cgb::cli {
namespace {

using nlohmann::json;

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(fmt::format("{} must be an object", where()));
  }

  // Rejects keys that no read() asked for.
  void done() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(fmt::format("unknown config key '{}'", key_path(it.key())));
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void read(const std::string& key, double& out, double lo, double hi, bool lo_open = false, bool hi_open = false) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number()) throw ConfigError(fmt::format("{} must be a number", key_path(key)));
    const double d = v->get<double>();
    const bool ok = (lo_open ? d > lo : d >= lo) && (hi_open ? d < hi : d <= hi);
    if (!ok) {
      throw ConfigError(fmt::format("{} = {} is outside {}{}, {}{}", key_path(key), d, lo_open ? "(" : "[", lo, hi,
                                    hi_open ? ")" : "]"));
    }
    out = d;
  }

  void read(const std::string& key, std::size_t& out, std::size_t lo, std::size_t hi) {
    std::uint64_t v = out;
    read_u64(key, v, lo, hi);
    out = static_cast<std::size_t>(v);
  }

  void read_u64(const std::string& key, std::uint64_t& out, std::uint64_t lo, std::uint64_t hi) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
      throw ConfigError(fmt::format("{} must be a non-negative integer", key_path(key)));
    }
    const std::uint64_t u = v->get<std::uint64_t>();
    if (u < lo || u > hi) throw ConfigError(fmt::format("{} = {} is outside [{}, {}]", key_path(key), u, lo, hi));
    out = u;
  }

  template <typename Parse, typename T>
  void read_enum(const std::string& key, T& out, Parse parse) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_string()) throw ConfigError(fmt::format("{} must be a string", key_path(key)));
    try {
      out = parse(v->get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}: {}", key_path(key), e.what()));
    }
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

constexpr std::size_t kBig = 1'000'000'000;

void read_sgd(Section& parent, const std::string& key, nd::SgdConfig& sgd) {
  const json* v = parent.find(key);
  if (!v) return;
  Section s(*v, parent.key_path(key));
  s.read("learning_rate", sgd.learning_rate, 0.0, 1e6);
  s.read("l2_lambda", sgd.l2_lambda, 0.0, 1e12);
  s.read("batch_size", sgd.batch_size, 1, kBig);
  s.read("epochs", sgd.epochs, 1, kBig);
  s.done();
}

json sgd_json(const nd::SgdConfig& s) {
  return {{"learning_rate", s.learning_rate},
          {"l2_lambda", s.l2_lambda},
          {"batch_size", s.batch_size},
          {"epochs", s.epochs}};
}

std::string_view encoder_name(sae::EncoderArch a) {
  return a == sae::EncoderArch::dense ? "dense" : "residual_conv";
}

sae::EncoderArch parse_encoder(const std::string& name) {
  if (name == "dense") return sae::EncoderArch::dense;
  if (name == "residual_conv") return sae::EncoderArch::residual_conv;
  throw ConfigError(fmt::format("unknown encoder '{}' (expected dense or residual_conv)", name));
}

}  // namespace

eval::PipelineConfig parse_run_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  eval::PipelineConfig cfg;
  {
    Section top(root, "");
    top.read_u64("seed", cfg.seed, 0, UINT64_MAX);
    top.read_enum("mode", cfg.mode, [](const std::string& s) { return eval::parse_pool_mode(s); });
    top.read("threads", cfg.threads, 1, 1024);
    if (const json* v = top.find("features")) {
      Section s(*v, "features");
      s.read("window_len", cfg.features.window_len, 1, 10'000);
      s.read("clip_low", cfg.features.clip_low, 0.0, 1.0);
      s.read("clip_high", cfg.features.clip_high, 0.0, 1.0);
      s.done();
    }
    if (const json* v = top.find("sae")) {
      Section s(*v, "sae");
      s.read("hidden", cfg.sae.arch.hidden, 1, 4096);
      s.read_enum("encoder", cfg.sae.arch.encoder, parse_encoder);
      s.read("conv_channels", cfg.sae.arch.conv_channels, 1, 4096);
      s.read("kernel_width", cfg.sae.arch.kernel_width, 1, 1001);
      s.read("rho", cfg.sae.rho, 0.0, 1.0, true, true);
      s.read("beta", cfg.sae.beta, 0.0, 1e12);
      read_sgd(s, "sgd", cfg.sae.sgd);
      s.done();
    }
    if (const json* v = top.find("boost")) {
      Section s(*v, "boost");
      s.read("stages", cfg.boost.stages, 1, 100'000);
      s.read("shrinkage", cfg.boost.shrinkage, 0.0, 1.0, true, false);
      s.read("base_score", cfg.boost.base_score, -1e6, 1e6);
      s.read("l2_lambda", cfg.boost.l2_lambda, 0.0, 1e12);
      if (const json* b = s.find("base")) {
        Section base(*b, "boost.base");
        base.read("blocks", cfg.boost.base.blocks, 0, 1000);
        base.read("channels", cfg.boost.base.channels, 1, 4096);
        base.read("kernel_width", cfg.boost.base.kernel_width, 1, 1001);
        base.done();
      }
      read_sgd(s, "sgd", cfg.boost.sgd);
      s.done();
    }
    if (const json* v = top.find("split")) {
      Section s(*v, "split");
      s.read_enum("unit", cfg.split.unit, [](const std::string& n) { return eval::parse_split_unit(n); });
      s.read("train", cfg.split.train, 1, kBig);
      s.read("validate", cfg.split.validate, 1, kBig);
      s.read("test", cfg.split.test, 1, kBig);
      s.read("stride", cfg.split.stride, 1, kBig);
      s.read("windows_per_year", cfg.split.windows_per_year, 1, 1000);
      s.done();
    }
    top.done();
  }
  cfg.validate();
  return cfg;
}

eval::PipelineConfig load_run_config(const std::filesystem::path& path) {
  try {
    return parse_run_config(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

json run_config_to_json(const eval::PipelineConfig& c) {
  return {{"seed", c.seed},
          {"mode", std::string(eval::pool_mode_name(c.mode))},
          {"threads", c.threads},
          {"features",
           {{"window_len", c.features.window_len}, {"clip_low", c.features.clip_low}, {"clip_high", c.features.clip_high}}},
          {"sae",
           {{"hidden", c.sae.arch.hidden},
            {"encoder", std::string(encoder_name(c.sae.arch.encoder))},
            {"conv_channels", c.sae.arch.conv_channels},
            {"kernel_width", c.sae.arch.kernel_width},
            {"rho", c.sae.rho},
            {"beta", c.sae.beta},
            {"sgd", sgd_json(c.sae.sgd)}}},
          {"boost",
           {{"stages", c.boost.stages},
            {"shrinkage", c.boost.shrinkage},
            {"base_score", c.boost.base_score},
            {"l2_lambda", c.boost.l2_lambda},
            {"base",
             {{"blocks", c.boost.base.blocks},
              {"channels", c.boost.base.channels},
              {"kernel_width", c.boost.base.kernel_width}}},
            {"sgd", sgd_json(c.boost.sgd)}}},
          {"split",
           {{"unit", std::string(eval::split_unit_name(c.split.unit))},
            {"train", c.split.train},
            {"validate", c.split.validate},
            {"test", c.split.test},
            {"stride", c.split.stride},
            {"windows_per_year", c.split.windows_per_year}}}};
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::string config_hash(const eval::PipelineConfig& cfg) {
  return fmt::format("{:016x}", fnv1a64(io::canonical_dump(run_config_to_json(cfg))));
}

}  // namespace cgb::cli
