#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace cgb::io {

// Deterministic text form: keys sorted, two-space indent, floating-point
// numbers with 17 significant digits, non-finite numbers as null.
std::string canonical_dump(const nlohmann::json& value);

}  // namespace cgb::io
