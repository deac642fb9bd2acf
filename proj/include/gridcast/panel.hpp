#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridcast/common.hpp"

namespace gridcast {

/// One observation in the long ("tidy") input layout.
struct PriceRecord {
    std::int64_t timestamp = 0;  // epoch seconds, UTC
    std::string channel;         // country identifier
    double price = 0.0;          // EUR/MWh, may be negative
};

/// Hourly multi-country price grid.
///
/// Rows are strictly increasing, exactly hour-spaced UTC instants; columns are
/// lexicographically sorted, unique channel identifiers. Cells may hold NaN
/// only between construction and gap repair.
class PricePanel {
public:
    PricePanel() = default;
    PricePanel(std::int64_t start_timestamp, std::vector<std::string> channels,
               std::vector<double> values, std::string provenance);

    std::size_t n_hours() const { return n_hours_; }
    std::size_t n_channels() const { return channels_.size(); }
    std::int64_t timestamp(std::size_t hour) const {
        return start_timestamp_ + static_cast<std::int64_t>(hour) * kSecondsPerHour;
    }
    std::int64_t start_timestamp() const { return start_timestamp_; }
    const std::vector<std::string>& channels() const { return channels_; }
    const std::string& provenance() const { return provenance_; }

    double at(std::size_t hour, std::size_t channel) const {
        return values_[hour * channels_.size() + channel];
    }
    double& at(std::size_t hour, std::size_t channel) {
        return values_[hour * channels_.size() + channel];
    }
    const std::vector<double>& values() const { return values_; }

    /// Index of a channel by name; throws DataError when absent.
    std::size_t channel_index(const std::string& name) const;

    /// One channel as a contiguous series, optionally restricted to a range.
    std::vector<double> channel_series(std::size_t channel) const;
    std::vector<double> channel_series(std::size_t channel, IndexRange range) const;

    std::size_t gap_count() const;
    bool has_gaps() const { return gap_count() > 0; }

private:
    std::int64_t start_timestamp_ = 0;
    std::size_t n_hours_ = 0;
    std::vector<std::string> channels_;
    std::vector<double> values_;  // row-major [n_hours x n_channels]
    std::string provenance_;
};

/// Assemble a panel from long-format records. The hour grid spans the min to
/// the max timestamp; cells never observed become NaN gaps for later repair.
PricePanel build_panel(const std::vector<PriceRecord>& records,
                       std::string provenance = "records");

enum class GapPolicy { error, forward_fill, linear_interpolate };

GapPolicy parse_gap_policy(std::string_view name);
std::string_view to_string(GapPolicy policy);

/// Replace NaN cells per policy; returns the repaired panel and the number of
/// repaired cells. Leading gaps (no earlier observation in the channel) are
/// unrepairable and raise DataError under every fill policy.
std::pair<PricePanel, std::size_t> repair_gaps(const PricePanel& panel, GapPolicy policy);

/// One walk-forward fold: train immediately followed by test.
struct Fold {
    IndexRange train;
    IndexRange test;
    bool operator==(const Fold&) const = default;
};

struct WalkForwardPlan {
    std::size_t train_len = 2000;
    std::size_t test_len = 500;
    std::size_t n_folds = 6;
    std::size_t stride = 500;
    std::vector<Fold> folds;
};

WalkForwardPlan make_walk_forward_plan(std::size_t n_hours, std::size_t train_len = 2000,
                                       std::size_t test_len = 500, std::size_t n_folds = 6,
                                       std::size_t stride = 500);

/// Per-channel standardization fitted on one index range (population std).
struct ChannelScaler {
    std::vector<double> means;
    std::vector<double> stds;
    IndexRange fit_range;
};

ChannelScaler fit_scaler(const PricePanel& panel, IndexRange fit_range);

enum class ScaleDirection { forward, inverse };

/// Standardize or un-standardize a row-major [n_rows x n_channels] matrix.
std::vector<double> scale(const std::vector<double>& matrix, std::size_t n_channels,
                          const ChannelScaler& scaler, ScaleDirection direction);

/// Panel rows [range.begin, range.end) as a row-major matrix.
std::vector<double> panel_slice(const PricePanel& panel, IndexRange range);

/// One evaluation window: context immediately precedes the target.
struct EvalWindow {
    std::size_t fold_index = 0;
    IndexRange context_range;
    IndexRange target_range;
    bool operator==(const EvalWindow&) const = default;
};

/// Forecast origins at test_start + m * eval_stride while the target fits in
/// the test range. Contexts may reach back into the train tail — that history
/// is available at forecast time.
std::vector<EvalWindow> enumerate_eval_windows(const WalkForwardPlan& plan,
                                               std::size_t fold_index, std::size_t input_len,
                                               std::size_t horizon, std::size_t eval_stride);

/// Binary panel interchange format used by the CLI (`panel.bin`).
void save_panel(const PricePanel& panel, const std::string& path);
PricePanel load_panel(const std::string& path);

}  // namespace gridcast
