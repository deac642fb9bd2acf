#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridcast/external/adapter.hpp"
#include "gridcast/models/arima.hpp"
#include "gridcast/models/trainer.hpp"
#include "gridcast/panel.hpp"
#include "gridcast/synth.hpp"

namespace gridcast::bench {

/// One roster entry. `kind` selects the forecaster; the sizing fields are
/// read only by the kinds that use them.
struct ModelEntry {
    std::string name;  // report label; defaults to `kind`
    std::string kind;  // nlinear | dlinear | tsmixer | patchtst | arima | naive | external

    std::size_t kernel_size = 25;                      // dlinear
    std::size_t n_blocks = 2, hidden_dim = 64;         // tsmixer
    std::size_t patch_len = 16, patch_stride = 8;      // patchtst
    std::size_t d_model = 64, n_layers = 2, n_heads = 4, ff_dim = 128;
    models::ArimaOrder order{2, 1, 2};                 // arima
    external::ExternalForecasterSpec external;         // external
};

/// Where the benchmark panel comes from: exactly one of a prebuilt panel
/// file, a price CSV, or inline synthetic channel specs.
struct DataSource {
    std::string panel_path;
    std::string csv_path;
    GapPolicy csv_fill = GapPolicy::error;
    std::vector<SynthSpec> synth;
    std::int64_t synth_start = 1704067200;  // 2024-01-01T00:00Z
};

struct BenchConfig {
    DataSource data;
    std::vector<ModelEntry> roster;

    std::size_t train_len = 2000, test_len = 500, n_folds = 6, fold_stride = 500;
    std::size_t input_len = 96, horizon = 96, eval_stride = 96;

    models::TrainConfig train;
    std::uint64_t seed = 0;
    int precision = 32;  // 32 | 64
    std::size_t jobs = 1;
    std::string output_dir;

    /// Test hook, not part of the config surface: called after each completed
    /// (model, fold) unit; returning false stops the run (simulated crash).
    std::function<bool(const std::string&, std::size_t)> after_unit;
};

void validate(const BenchConfig& config);

/// Parse from the JSON document shape shared by TOML and JSON config files.
BenchConfig parse_bench_config(const nlohmann::json& doc);

/// Load a `.toml` or `.json` config file.
BenchConfig load_bench_config(const std::string& path);

/// Canonical JSON image of the result-determining fields (output_dir, jobs,
/// and hooks excluded), used for hashing and stored in run metadata.
nlohmann::json config_to_json(const BenchConfig& config);

/// FNV-1a over the canonical JSON dump.
std::uint64_t config_hash(const BenchConfig& config);

/// Parse synthetic channel specs from a document with [[channel]] entries
/// (the `synth` CLI spec file and the [data] block share this shape).
std::vector<SynthSpec> parse_synth_channels(const nlohmann::json& doc);

/// Read a whole file; IoError on failure.
std::string read_text_file(const std::string& path);

void write_text_file(const std::string& path, std::string_view content);

}  // namespace gridcast::bench
