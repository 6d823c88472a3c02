#include "cgboost/eval/report.hpp"

#include <fmt/format.h>

#include "cgboost/io/canonical_json.hpp"

namespace cgb::eval {
namespace {

using nlohmann::json;

json metrics_json(const MetricSet& m) {
  return {{"MAPE", m.mape}, {"R", m.r ? json(*m.r) : json(nullptr)}, {"TheilU", m.theil_u}};
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string r_text(const MetricSet& m) { return m.r ? num(*m.r) : ""; }

void metric_rows(std::string& out, const std::string& index, const std::string& year, const MetricSet& model,
                 const MetricSet& naive) {
  out += fmt::format("{},{},MAPE,{},{}\n", index, year, num(model.mape), num(naive.mape));
  out += fmt::format("{},{},R,{},{}\n", index, year, r_text(model), r_text(naive));
  out += fmt::format("{},{},TheilU,{},{}\n", index, year, num(model.theil_u), num(naive.theil_u));
}

}  // namespace

json report_to_json(const EvalReport& report) {
  json indexes = json::object();
  for (const auto& name : report.indexes) indexes[name] = {{"years", json::array()}};
  for (const auto& y : report.years) {
    indexes[y.index]["years"].push_back({{"year", y.year},
                                         {"first_date", features::format_date(y.first)},
                                         {"last_date", features::format_date(y.last)},
                                         {"windows", y.windows},
                                         {"points", y.points},
                                         {"model", metrics_json(y.model)},
                                         {"naive", metrics_json(y.naive)}});
  }
  for (const auto& a : report.averages) {
    indexes[a.index]["average"] = {
        {"years", a.years}, {"model", metrics_json(a.model)}, {"naive", metrics_json(a.naive)}};
  }
  json audit = json::array();
  for (const auto& a : report.audit) {
    audit.push_back({{"index", a.index},
                     {"window", a.window},
                     {"statistic", a.statistic},
                     {"scope", a.scope},
                     {"first_date", features::format_date(a.range.first)},
                     {"last_date", features::format_date(a.range.last)},
                     {"test_start", features::format_date(a.test_start)},
                     {"ok", a.ok()}});
  }
  return {{"mode", std::string(pool_mode_name(report.mode))},
          {"indexes", indexes},
          {"windows", report.windows.size()},
          {"audit", audit},
          {"audit_passed", report.audit_passed()}};
}

std::string report_json(const EvalReport& report) { return io::canonical_dump(report_to_json(report)); }

std::string report_csv(const EvalReport& report) {
  std::string out = "index,year,metric,model,naive\n";
  for (const auto& y : report.years) metric_rows(out, y.index, std::to_string(y.year), y.model, y.naive);
  for (const auto& a : report.averages) metric_rows(out, a.index, "average", a.model, a.naive);
  return out;
}

std::string predictions_csv(const EvalReport& report) {
  std::string out = "index,window,year,date,close_today,actual,predicted,naive\n";
  for (const auto& w : report.windows) {
    for (std::size_t i = 0; i < w.dates.size(); ++i) {
      out += fmt::format("{},{},{},{},{},{},{},{}\n", w.index, w.window, w.year, features::format_date(w.dates[i]),
                         num(w.close_today[i]), num(w.actual[i]), num(w.predicted[i]), num(w.naive[i]));
    }
  }
  return out;
}

}  // namespace cgb::eval
