#include "gridcast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gridcast/common.hpp"

namespace gridcast {

MetricSet compute_metrics(const std::vector<double>& actual,
                          const std::vector<double>& predicted) {
    if (actual.empty()) throw DataError("cannot score an empty forecast");
    if (actual.size() != predicted.size()) {
        throw DataError("actual/predicted length mismatch: " + std::to_string(actual.size()) +
                        " vs " + std::to_string(predicted.size()));
    }
    constexpr double eps = 1e-8;
    const double n = static_cast<double>(actual.size());
    double smape_sum = 0.0, abs_sum = 0.0, sq_sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double y = actual[i];
        const double yhat = predicted[i];
        if (!std::isfinite(y) || !std::isfinite(yhat)) {
            throw DataError("non-finite value at position " + std::to_string(i));
        }
        const double err = std::fabs(yhat - y);
        abs_sum += err;
        sq_sum += err * err;
        if (std::fabs(y) < eps && std::fabs(yhat) < eps) {
            continue;  // both effectively zero: the term contributes 0
        }
        smape_sum += 2.0 * err / std::max(std::fabs(y) + std::fabs(yhat), eps);
    }
    MetricSet m;
    m.smape = smape_sum / n;
    m.mae = abs_sum / n;
    m.mse = sq_sum / n;
    m.rmse = std::sqrt(m.mse);
    return m;
}

double performance_indicator(const MetricSet& metrics) {
    return (100.0 * metrics.smape + metrics.rmse) / 2.0;
}

std::string group_key(const std::string& model, const std::string& country) {
    return model + '\x1f' + country;
}

std::pair<std::string, std::string> split_group_key(const std::string& key) {
    const auto sep = key.find('\x1f');
    if (sep == std::string::npos) throw Error("malformed group key '" + key + "'");
    return {key.substr(0, sep), key.substr(sep + 1)};
}

std::map<std::string, MetricSet> aggregate(const std::vector<MetricRecord>& records,
                                           GroupBy group_by) {
    if (records.empty()) throw DataError("cannot aggregate an empty record set");
    std::map<std::string, MetricSet> sums;
    std::map<std::string, std::size_t> counts;
    for (const auto& r : records) {
        std::string key;
        switch (group_by) {
            case GroupBy::model: key = r.model; break;
            case GroupBy::country: key = r.country; break;
            case GroupBy::fold: key = std::to_string(r.fold); break;
            case GroupBy::model_country: key = group_key(r.model, r.country); break;
        }
        auto& s = sums[key];
        s.smape += r.metrics.smape;
        s.mae += r.metrics.mae;
        s.mse += r.metrics.mse;
        s.rmse += r.metrics.rmse;
        counts[key] += 1;
    }
    for (auto& [key, s] : sums) {
        const double n = static_cast<double>(counts[key]);
        s.smape /= n;
        s.mae /= n;
        s.mse /= n;
        s.rmse /= n;
    }
    return sums;
}

}  // namespace gridcast
