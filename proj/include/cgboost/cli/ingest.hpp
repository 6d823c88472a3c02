#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cgboost/features/series.hpp"

namespace cgb::cli {

// Parses delimited text with header date,open,high,low,close,volume followed by
// optional macro columns. Rows are sorted by date when needed (with a
// warning); duplicate dates, malformed rows and OHLC violations throw
// DataError with the line number or date. `source` labels error messages.
features::SeriesFrame parse_series_csv(std::string_view text, const std::string& index_name,
                                       const std::string& source, std::vector<std::string>& warnings);

// Reads a file; the index is named after the file stem.
features::SeriesFrame ingest(const std::filesystem::path& path, std::vector<std::string>& warnings);

// Shortest round-trip decimal form, so ingest(format_series_csv(f)) == f.
std::string format_series_csv(const features::SeriesFrame& frame);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary file and rename, so readers never see partial output.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace cgb::cli
