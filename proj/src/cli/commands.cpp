#include "cgboost/cli/commands.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "cgboost/cli/config.hpp"
#include "cgboost/cli/ingest.hpp"
#include "cgboost/error.hpp"
#include "cgboost/eval/report.hpp"
#include "cgboost/features/indicators.hpp"
#include "cgboost/features/windowing.hpp"

namespace cgb::cli {
namespace {

void require_schema(const std::vector<std::string>& expected, const std::vector<std::string>& got,
                    const std::string& index) {
  if (expected == got) return;
  std::vector<std::string> missing, extra;
  for (const auto& c : expected)
    if (std::find(got.begin(), got.end(), c) == got.end()) missing.push_back(c);
  for (const auto& c : got)
    if (std::find(expected.begin(), expected.end(), c) == expected.end()) extra.push_back(c);
  if (missing.empty() && extra.empty()) {
    throw DataError(fmt::format("{}: feature columns are in a different order than at training time", index));
  }
  throw DataError(fmt::format("{}: data schema does not match the model; missing columns [{}], extra columns [{}]",
                              index, fmt::join(missing, ", "), fmt::join(extra, ", ")));
}

}  // namespace

TrainedModel train_model(const eval::PipelineConfig& cfg, const std::vector<features::SeriesFrame>& frames,
                         const std::vector<std::string>& sources) {
  cfg.validate();
  if (frames.empty()) throw UsageError("train needs at least one data file");
  if (cfg.mode == eval::PoolMode::per_index && frames.size() != 1) {
    throw ConfigError(fmt::format(
        "mode per_index trains one model per index but {} data files were given; use mode pooled", frames.size()));
  }
  std::vector<features::FeatureMatrix> rows;
  std::vector<std::string> names;
  for (const auto& f : frames) {
    for (const auto& n : names)
      if (n == f.index_name) throw DataError(fmt::format("index '{}' was given twice", n));
    names.push_back(f.index_name);
    try {
      rows.push_back(features::compute_indicators(f));
    } catch (const Error& e) {
      rethrow_with_context(e, f.index_name + ": preprocessing");
    }
  }

  TrainedModel out;
  PipelineModel& m = out.model;
  m.config = cfg;
  m.pipeline = eval::fit_pipeline(rows, names, cfg);
  m.provenance.seed = cfg.seed;
  m.provenance.config_hash = config_hash(cfg);
  m.provenance.data_fingerprint = data_fingerprint(frames);
  m.provenance.data_sources = sources;
  m.provenance.first_date = frames.front().rows.front().date;
  m.provenance.last_date = frames.front().rows.back().date;
  for (const auto& f : frames) {
    m.provenance.first_date = std::min(m.provenance.first_date, f.rows.front().date);
    m.provenance.last_date = std::max(m.provenance.last_date, f.rows.back().date);
  }

  const eval::FittedPipeline& p = m.pipeline;
  nlohmann::json stages = nlohmann::json::array();
  for (std::size_t t = 0; t < p.ensemble.stages(); ++t) {
    stages.push_back({{"stage", t + 1},
                      {"train_mse", p.ensemble.stage_train_mse[t]},
                      {"epoch_loss", p.ensemble.stage_epoch_loss.at(t)}});
  }
  nlohmann::json counts = nlohmann::json::object();
  for (std::size_t i = 0; i < names.size(); ++i) counts[names[i]] = p.sample_counts[i];
  out.log = {{"config_hash", m.provenance.config_hash},
             {"seed", cfg.seed},
             {"mode", std::string(eval::pool_mode_name(cfg.mode))},
             {"sample_counts", counts},
             {"rate_scale", p.rate_scale},
             {"sae", {{"initial_loss", p.sae_initial_loss}, {"final_loss", p.sae_final_loss},
                      {"epoch_loss", p.sae_epoch_loss}}},
             {"boost", {{"initial_train_mse", p.ensemble.initial_train_mse}, {"stages", stages}}}};
  return out;
}

std::vector<PredictionRow> predict_series(const PipelineModel& model, const features::SeriesFrame& frame) {
  const eval::FittedPipeline& p = model.pipeline;
  std::size_t index = 0;
  const auto it = std::find(p.index_names.begin(), p.index_names.end(), frame.index_name);
  if (it != p.index_names.end()) {
    index = static_cast<std::size_t>(it - p.index_names.begin());
  } else if (p.index_names.size() != 1) {
    throw DataError(fmt::format("index '{}' is not one of the model's indexes [{}]", frame.index_name,
                                fmt::join(p.index_names, ", ")));
  }
  const features::FeatureMatrix raw = features::compute_indicators(frame);
  require_schema(p.feature_columns, raw.columns, frame.index_name);
  if (raw.rows() < p.window_len) {
    throw DataError(fmt::format("{}: {} usable rows after indicator warm-up cannot fill a window of {}",
                                frame.index_name, raw.rows(), p.window_len));
  }
  const auto inputs = features::window_inputs(raw, p.window_len);
  std::vector<std::size_t> rows;
  for (const auto& s : inputs) rows.push_back(s.row);
  const std::vector<double> rates = eval::predict_rates(p, index, raw, rows);
  std::vector<PredictionRow> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double close = raw.close[rows[i]];
    out.push_back({raw.dates[rows[i]], close, rates[i], close * (1.0 + rates[i])});
  }
  return out;
}

std::string predictions_to_csv(const std::vector<PredictionRow>& rows) {
  std::string out = "date,close_today,predicted_rate,predicted_next_close\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{:.17g},{:.17g},{:.17g}\n", features::format_date(r.date), r.close_today, r.predicted_rate,
                       r.predicted_next_close);
  }
  return out;
}

void write_evaluation(const std::filesystem::path& out_dir, const eval::EvalReport& report) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));
  const std::string json = eval::report_json(report);
  const std::string csv = eval::report_csv(report);
  const std::string curves = eval::predictions_csv(report);
  write_text_file(out_dir / "report.json", json);
  write_text_file(out_dir / "report.csv", csv);
  write_text_file(out_dir / "predictions.csv", curves);
}

}  // namespace cgb::cli
