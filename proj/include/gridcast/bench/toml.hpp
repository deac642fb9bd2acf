#pragma once

#include <string_view>

#include <json.hpp>

namespace gridcast::bench {

/// Parse a TOML subset into a JSON document so TOML and JSON configs share
/// one loading path.
///
/// Supported: comments; bare/quoted keys, dotted keys; basic and literal
/// strings; integers (with underscores); floats; booleans; homogeneous or
/// mixed arrays (multi-line allowed); [table] headers and [[array-of-table]]
/// headers with dotted paths. Unsupported constructs (dates, inline tables,
/// multi-line strings) raise ConfigError with a line number.
nlohmann::json parse_toml(std::string_view text);

}  // namespace gridcast::bench
