#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cgboost/cli/model_file.hpp"
#include "cgboost/eval/backtest.hpp"

namespace cgb::cli {

struct TrainedModel {
  PipelineModel model;
  nlohmann::json log;  // per-epoch SAE loss, per-stage boost loss
};

// Fits the full pipeline on every row of `frames`. Per-index mode takes
// exactly one frame; pooled mode fits one model across all of them.
TrainedModel train_model(const eval::PipelineConfig& cfg, const std::vector<features::SeriesFrame>& frames,
                         const std::vector<std::string>& sources);

struct PredictionRow {
  features::Date date;
  double close_today = 0;
  double predicted_rate = 0;
  double predicted_next_close = 0;
};

// One row per eligible window of `frame`, including the last day. The frame's
// index must be one the model was trained on, unless the model has a single
// index. Throws DataError on a schema mismatch or a series too short for one
// window.
std::vector<PredictionRow> predict_series(const PipelineModel& model, const features::SeriesFrame& frame);
std::string predictions_to_csv(const std::vector<PredictionRow>& rows);

// Writes report.json, report.csv and predictions.csv into `out_dir`.
void write_evaluation(const std::filesystem::path& out_dir, const eval::EvalReport& report);

}  // namespace cgb::cli
