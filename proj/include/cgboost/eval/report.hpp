#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "cgboost/eval/backtest.hpp"

namespace cgb::eval {

nlohmann::json report_to_json(const EvalReport& report);

// Canonical JSON text; identical reports give identical bytes.
std::string report_json(const EvalReport& report);

// index,year,metric,model,naive with one row per (index, year, metric); the
// per-index averages use year "average".
std::string report_csv(const EvalReport& report);

// index,window,year,date,close_today,actual,predicted,naive for plotting.
std::string predictions_csv(const EvalReport& report);

}  // namespace cgb::eval
