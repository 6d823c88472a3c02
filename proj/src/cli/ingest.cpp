#include "cgboost/cli/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "cgboost/error.hpp"

namespace cgb::cli {
namespace {

constexpr std::string_view kRequired[] = {"date", "open", "high", "low", "close", "volume"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, const std::string& where, std::string_view column) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw DataError(fmt::format("{}: column '{}' is not a number: '{}'", where, column, field));
  }
  return v;
}

}  // namespace

features::SeriesFrame parse_series_csv(std::string_view text, const std::string& index_name,
                                       const std::string& source, std::vector<std::string>& warnings) {
  features::SeriesFrame frame;
  frame.index_name = index_name;
  std::vector<std::string> header;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    const std::string where = fmt::format("{}:{}", source, line_no);
    if (header.empty()) {
      if (fields.size() < std::size(kRequired)) {
        throw DataError(fmt::format("{}: header needs columns date,open,high,low,close,volume", where));
      }
      for (std::size_t i = 0; i < fields.size(); ++i) {
        std::string name(fields[i]);
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
        if (i < std::size(kRequired) && name != kRequired[i]) {
          throw DataError(fmt::format("{}: header column {} is '{}', expected '{}'", where, i + 1, fields[i],
                                      kRequired[i]));
        }
        if (name.empty()) throw DataError(fmt::format("{}: header column {} is empty", where, i + 1));
        if (std::find(header.begin(), header.end(), name) != header.end()) {
          throw DataError(fmt::format("{}: duplicate header column '{}'", where, name));
        }
        header.push_back(name);
      }
      frame.macro_names.assign(header.begin() + std::size(kRequired), header.end());
      continue;
    }
    if (fields.size() != header.size()) {
      throw DataError(fmt::format("{}: expected {} fields, found {}", where, header.size(), fields.size()));
    }
    features::SeriesRow row;
    try {
      row.date = features::parse_date(fields[0]);
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}: {}", where, e.what()));
    }
    row.open = parse_number(fields[1], where, "open");
    row.high = parse_number(fields[2], where, "high");
    row.low = parse_number(fields[3], where, "low");
    row.close = parse_number(fields[4], where, "close");
    row.volume = parse_number(fields[5], where, "volume");
    for (std::size_t i = std::size(kRequired); i < fields.size(); ++i) {
      row.macro.push_back(parse_number(fields[i], where, header[i]));
    }
    frame.rows.push_back(std::move(row));
  }
  if (header.empty()) throw DataError(fmt::format("{}: empty file", source));
  if (frame.rows.empty()) throw DataError(fmt::format("{}: no data rows", source));
  if (frame.macro_names.empty()) {
    warnings.push_back(fmt::format("{}: no macro columns; features use market columns only", source));
  }

  const auto by_date = [](const features::SeriesRow& a, const features::SeriesRow& b) { return a.date < b.date; };
  if (!std::is_sorted(frame.rows.begin(), frame.rows.end(), by_date)) {
    std::stable_sort(frame.rows.begin(), frame.rows.end(), by_date);
    warnings.push_back(fmt::format("{}: rows were not in date order and have been sorted", source));
  }
  for (std::size_t i = 1; i < frame.rows.size(); ++i) {
    if (frame.rows[i].date == frame.rows[i - 1].date) {
      throw DataError(fmt::format("{}: duplicate date {}", source, features::format_date(frame.rows[i].date)));
    }
  }
  frame.validate();
  return frame;
}

features::SeriesFrame ingest(const std::filesystem::path& path, std::vector<std::string>& warnings) {
  return parse_series_csv(read_text_file(path), path.stem().string(), path.string(), warnings);
}

std::string format_series_csv(const features::SeriesFrame& frame) {
  std::string out = "date,open,high,low,close,volume";
  for (const auto& m : frame.macro_names) out += "," + m;
  out += "\n";
  for (const auto& r : frame.rows) {
    out += fmt::format("{},{},{},{},{},{}", features::format_date(r.date), r.open, r.high, r.low, r.close, r.volume);
    for (double m : r.macro) out += fmt::format(",{}", m);
    out += "\n";
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(fmt::format("failed reading '{}'", path.string()));
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", tmp.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError(fmt::format("failed writing '{}'", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError(fmt::format("cannot move output into place at '{}'", path.string()));
  }
}

}  // namespace cgb::cli
