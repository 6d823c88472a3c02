#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cgboost/cli/commands.hpp"
#include "cgboost/cli/config.hpp"
#include "cgboost/cli/gradient_suite.hpp"
#include "cgboost/cli/ingest.hpp"
#include "cgboost/cli/synthetic.hpp"
#include "cgboost/error.hpp"
#include "cgboost/io/canonical_json.hpp"

namespace fs = std::filesystem;
using namespace cgb;

namespace {

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kUsage = 2,
  kConfig = 3,
  kData = 4,
  kTraining = 5,
  kIo = 6,
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return kConfig;
    case ErrorKind::data: return kData;
    case ErrorKind::training: return kTraining;
    case ErrorKind::io: return kIo;
    case ErrorKind::usage:
    case ErrorKind::shape:
    case ErrorKind::domain: return kUsage;
  }
  return kOther;
}

struct CommonOptions {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  fs::path out;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool out_required) {
  cmd->add_option("--config", o.config, "JSON run config (defaults apply to absent keys)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Override the config seed");
  cmd->add_option("--threads", o.threads, "Worker thread cap");
  auto* out = cmd->add_option("--out", o.out, "Output path");
  if (out_required) out->required();
}

eval::PipelineConfig resolve_config(const CommonOptions& o) {
  eval::PipelineConfig cfg = o.config ? cli::load_run_config(*o.config) : eval::PipelineConfig{};
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  cfg.validate();
  return cfg;
}

std::vector<features::SeriesFrame> load_frames(const std::vector<fs::path>& paths) {
  std::vector<features::SeriesFrame> frames;
  for (const auto& p : paths) {
    std::vector<std::string> warnings;
    frames.push_back(cli::ingest(p, warnings));
    for (const auto& w : warnings) spdlog::warn("{}", w);
    spdlog::info("{}: {} rows, {} macro columns", p.string(), frames.back().rows.size(),
                 frames.back().macro_names.size());
  }
  return frames;
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) { return fs::path(p.string() + suffix); }

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("cgboost");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("CGBOOST_LOG")) spdlog::cfg::helpers::load_levels(level);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Stock index forecasting with a sparse autoencoder and boosted residual CNNs"};
  app.require_subcommand(1);

  CommonOptions train_opts;
  std::vector<fs::path> train_data;
  auto* train = app.add_subcommand("train", "Fit the pipeline on full series and write a model file");
  add_common(train, train_opts, true);
  train->add_option("--data", train_data, "Input CSV (repeat for pooled mode)")->required()->check(CLI::ExistingFile);

  CommonOptions predict_opts;
  fs::path predict_model, predict_data;
  auto* predict = app.add_subcommand("predict", "Forecast next-day closes with a trained model");
  add_common(predict, predict_opts, true);
  predict->add_option("--model", predict_model, "Model file from train")->required()->check(CLI::ExistingFile);
  predict->add_option("--data", predict_data, "Input CSV")->required()->check(CLI::ExistingFile);

  CommonOptions eval_opts;
  std::vector<fs::path> eval_data;
  auto* evaluate = app.add_subcommand("evaluate", "Walk-forward backtest against the naive last-value baseline");
  add_common(evaluate, eval_opts, true);
  evaluate->add_option("--data", eval_data, "Input CSV (repeat for several indexes)")
      ->required()
      ->check(CLI::ExistingFile);

  CommonOptions gen_opts;
  cli::SyntheticSpec gen_spec;
  std::string gen_regime = "sinusoid";
  auto* gen = app.add_subcommand("gen-data", "Write a seeded synthetic OHLC series as CSV");
  add_common(gen, gen_opts, true);
  gen->add_option("--days", gen_spec.days, "Trading days")->capture_default_str();
  gen->add_option("--regime", gen_regime, "sinusoid | gbm | trend_noise")->capture_default_str();
  gen->add_option("--name", gen_spec.index_name, "Index name")->capture_default_str();
  gen->add_option("--noise", gen_spec.noise, "Daily noise level")->capture_default_str();

  CommonOptions grad_opts;
  std::size_t grad_cases = 100;
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  add_common(grad, grad_opts, false);
  grad->add_option("--cases", grad_cases, "Random cases per check")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train) {
      const eval::PipelineConfig cfg = resolve_config(train_opts);
      const auto frames = load_frames(train_data);
      std::vector<std::string> sources;
      for (const auto& p : train_data) sources.push_back(p.filename().string());
      spdlog::info("training {} model on {} index(es), config {}", eval::pool_mode_name(cfg.mode), frames.size(),
                   cli::config_hash(cfg));
      const cli::TrainedModel trained = cli::train_model(cfg, frames, sources);
      const auto& p = trained.model.pipeline;
      spdlog::info("sae loss {:.6g} -> {:.6g}; boost train mse {:.6g} -> {:.6g}", p.sae_initial_loss,
                   p.sae_final_loss, p.ensemble.initial_train_mse,
                   p.ensemble.stage_train_mse.empty() ? p.ensemble.initial_train_mse
                                                      : p.ensemble.stage_train_mse.back());
      cli::save_model(train_opts.out, trained.model);
      cli::write_text_file(with_suffix(train_opts.out, ".log.json"), io::canonical_dump(trained.log));
      spdlog::info("wrote {}", train_opts.out.string());
    } else if (*predict) {
      const cli::PipelineModel model = cli::load_model(predict_model);
      if (cli::config_hash(model.config) != model.provenance.config_hash) {
        throw IoError("model file config does not match its recorded config hash");
      }
      std::vector<std::string> warnings;
      const features::SeriesFrame frame = cli::ingest(predict_data, warnings);
      for (const auto& w : warnings) spdlog::warn("{}", w);
      const auto rows = cli::predict_series(model, frame);
      cli::write_text_file(predict_opts.out, cli::predictions_to_csv(rows));
      spdlog::info("wrote {} predictions to {}", rows.size(), predict_opts.out.string());
    } else if (*evaluate) {
      const eval::PipelineConfig cfg = resolve_config(eval_opts);
      const auto frames = load_frames(eval_data);
      const eval::EvalReport report = eval::run_backtest(frames, cfg);
      cli::write_evaluation(eval_opts.out, report);
      for (const auto& avg : report.averages) {
        spdlog::info("{}: mape {:.6g} (naive {:.6g})", avg.index, avg.model.mape, avg.naive.mape);
      }
      if (!report.audit_passed()) spdlog::error("leakage audit failed; see report.json");
      spdlog::info("wrote reports to {}", eval_opts.out.string());
      if (!report.audit_passed()) return kData;
    } else if (*gen) {
      gen_spec.regime = cli::parse_regime(gen_regime);
      if (gen_opts.seed) gen_spec.seed = *gen_opts.seed;
      const features::SeriesFrame frame = cli::generate_synthetic(gen_spec);
      cli::write_text_file(gen_opts.out, cli::format_series_csv(frame));
      spdlog::info("wrote {} rows to {}", frame.rows.size(), gen_opts.out.string());
    } else if (*grad) {
      const cli::GradientSuiteResult r = cli::run_gradient_suite(grad_opts.seed.value_or(0), grad_cases);
      for (const auto& e : r.entries) {
        fmt::print("{:<24} cases {:>4}  checked {:>7}  failures {:>3}  worst rel {:.3g}  worst abs {:.3g}\n", e.name,
                   e.cases, e.stats.checked, e.stats.failures, e.stats.worst_relative, e.stats.worst_absolute);
      }
      fmt::print("{} in {:.2f} s\n", r.ok() ? "PASS" : "FAIL", r.seconds);
      return r.ok() ? kOk : kOther;
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kOther;
  }
  return kOk;
}
