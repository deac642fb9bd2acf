#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridcast/panel.hpp"

namespace gridcast {

/// Parsing options for the long-format hourly price CSV.
struct IngestOptions {
    std::string datetime_column = "datetime";
    std::string country_column = "country";
    std::string price_column = "price";
    GapPolicy gap_policy = GapPolicy::error;
    /// Optional half-open UTC slice [start, end) in epoch seconds.
    std::optional<std::pair<std::int64_t, std::int64_t>> time_range;
    /// Optional channel whitelist; empty optional keeps every country.
    std::optional<std::vector<std::string>> country_filter;
};

/// Parse a long-format CSV (header required) into a gap-repaired panel.
PricePanel parse_price_csv(std::string_view bytes, const IngestOptions& options = {});

PricePanel load_price_csv(const std::string& path, const IngestOptions& options = {});

/// Serialize back to the long format; parse(serialize(p)) == p on gap-free
/// panels (values are written in shortest round-trip form).
std::string serialize_price_csv(const PricePanel& panel, const IngestOptions& options = {});

/// Wide-format export (one column per channel) for manual inspection.
std::string serialize_wide_csv(const PricePanel& panel);

/// Split one CSV record, honoring double quotes; no embedded newlines.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace gridcast
