#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace gridcast {

/// Forecast error metrics on one (actual, predicted) pair.
///
/// SMAPE is the fraction-valued convention: mean of 2|y_hat - y| / (|y| + |y_hat|),
/// range [0, 2], with a 1e-8 denominator guard (a term where both sides are
/// below the guard counts as 0 — prices can legitimately be zero).
struct MetricSet {
    double smape = 0.0;
    double mae = 0.0;
    double mse = 0.0;
    double rmse = 0.0;

    bool operator==(const MetricSet&) const = default;
};

MetricSet compute_metrics(const std::vector<double>& actual,
                          const std::vector<double>& predicted);

/// The ranking score: (100 * smape + rmse) / 2. Lower is better.
double performance_indicator(const MetricSet& metrics);

/// One scored benchmark cell.
struct MetricRecord {
    std::string model;
    std::string country;
    std::size_t fold = 0;
    std::size_t window = 0;
    MetricSet metrics;
};

enum class GroupBy { model, country, fold, model_country };

/// Unweighted arithmetic means of each metric over the grouped records.
/// model_country keys look like "model\x1fcountry".
std::map<std::string, MetricSet> aggregate(const std::vector<MetricRecord>& records,
                                           GroupBy group_by);

/// Join/split helpers for the model_country composite key.
std::string group_key(const std::string& model, const std::string& country);
std::pair<std::string, std::string> split_group_key(const std::string& key);

}  // namespace gridcast
