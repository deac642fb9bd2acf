#pragma once

#include "gridcast/bench/config.hpp"
#include "gridcast/bench/store.hpp"

namespace gridcast::bench {

struct BenchOutcome {
    std::size_t failed_units = 0;
    bool stopped = false;  // true when the after_unit hook requested a stop
};

/// Seed for a model's initial parameters, stable across runs and resume.
std::uint64_t model_init_seed(std::uint64_t base, const std::string& model);

/// Seed for one (model, fold) training unit.
std::uint64_t unit_seed(std::uint64_t base, const std::string& model, std::size_t fold);

/// Materialize the configured data source (panel file, CSV, or synthesis).
PricePanel load_bench_panel(const DataSource& data);

/// Run the full benchmark into config.output_dir. Folds of one model run
/// strictly in sequence (the warm-start chain); distinct models run
/// concurrently up to config.jobs. Completed (model, fold) units found in an
/// existing run directory are skipped, so an interrupted run resumes. Unit
/// errors are recorded and the run continues; the outcome carries the count.
BenchOutcome run_benchmark(const BenchConfig& config);

}  // namespace gridcast::bench
