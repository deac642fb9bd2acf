#pragma once

#include <string>
#include <string_view>

#include "gridcast/bench/store.hpp"

namespace gridcast::bench {

enum class ReportKind { ranking, heatmap, boxplot, geomap, tables };

/// Parses one of: ranking | heatmap | boxplot | geomap | tables.
ReportKind parse_report_kind(std::string_view name);
std::string_view to_string(ReportKind kind);

/// Emit one plot-ready CSV into <rundir>/reports/<kind>.csv and return its
/// path. Pure function of the store contents; numbers carry 6 significant
/// digits. Throws DataError on an empty store.
std::string emit_report(const ResultStore& store, ReportKind kind);

/// The CSV text itself (emit_report writes this to disk).
std::string render_report(const ResultStore& store, ReportKind kind);

}  // namespace gridcast::bench
