#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cgboost/eval/pipeline.hpp"

namespace cgb::cli {

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct Provenance {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string data_fingerprint;  // FNV-1a 64 over the ingested series
  std::vector<std::string> data_sources;
  features::Date first_date;
  features::Date last_date;
};

struct PipelineModel {
  eval::PipelineConfig config;
  eval::FittedPipeline pipeline;
  Provenance provenance;
};

// Layout (all integers and floats little-endian):
//   8 bytes  "CGBMODEL"
//   u32      format version
//   u64      header length, then that many bytes of canonical JSON (config,
//            provenance, architectures, scalars; tensors referenced by index)
//   u64      tensor count, then per tensor: u32 rank, u64 dims[rank],
//            f64 values[prod(dims)]
std::string serialize_model(const PipelineModel& model);
// Throws IoError on a wrong magic, unsupported version or truncated data.
PipelineModel deserialize_model(std::string_view bytes);

void save_model(const std::filesystem::path& path, const PipelineModel& model);
PipelineModel load_model(const std::filesystem::path& path);

// Fingerprint of the series a model was trained on.
std::string data_fingerprint(const std::vector<features::SeriesFrame>& frames);

}  // namespace cgb::cli
