#include "gridcast/panel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>

namespace gridcast {

PricePanel::PricePanel(std::int64_t start_timestamp, std::vector<std::string> channels,
                       std::vector<double> values, std::string provenance)
    : start_timestamp_(start_timestamp),
      channels_(std::move(channels)),
      values_(std::move(values)),
      provenance_(std::move(provenance)) {
    if (channels_.empty()) {
        throw DataError("panel needs at least one channel");
    }
    if (values_.size() % channels_.size() != 0) {
        throw DataError("panel value count is not a multiple of the channel count");
    }
    n_hours_ = values_.size() / channels_.size();
    for (std::size_t i = 1; i < channels_.size(); ++i) {
        if (channels_[i - 1] >= channels_[i]) {
            throw DataError("panel channels must be sorted and unique");
        }
    }
    if (start_timestamp_ % kSecondsPerHour != 0) {
        throw DataError("panel start timestamp is not hour-aligned");
    }
}

std::size_t PricePanel::channel_index(const std::string& name) const {
    auto it = std::lower_bound(channels_.begin(), channels_.end(), name);
    if (it == channels_.end() || *it != name) {
        throw DataError("unknown channel '" + name + "'");
    }
    return static_cast<std::size_t>(it - channels_.begin());
}

std::vector<double> PricePanel::channel_series(std::size_t channel) const {
    return channel_series(channel, IndexRange{0, n_hours_});
}

std::vector<double> PricePanel::channel_series(std::size_t channel, IndexRange range) const {
    if (channel >= n_channels() || range.end > n_hours_ || range.begin > range.end) {
        throw DataError("channel series request out of bounds");
    }
    std::vector<double> out;
    out.reserve(range.length());
    for (std::size_t h = range.begin; h < range.end; ++h) {
        out.push_back(at(h, channel));
    }
    return out;
}

std::size_t PricePanel::gap_count() const {
    std::size_t n = 0;
    for (double v : values_) {
        if (!std::isfinite(v)) ++n;
    }
    return n;
}

PricePanel build_panel(const std::vector<PriceRecord>& records, std::string provenance) {
    if (records.empty()) {
        throw DataError("cannot build a panel from zero records");
    }
    std::int64_t t_min = std::numeric_limits<std::int64_t>::max();
    std::int64_t t_max = std::numeric_limits<std::int64_t>::min();
    std::set<std::string> channel_set;
    for (const auto& r : records) {
        if (r.timestamp % kSecondsPerHour != 0) {
            throw DataError("timestamp " + format_iso8601(r.timestamp) +
                            " is not aligned to a whole hour");
        }
        t_min = std::min(t_min, r.timestamp);
        t_max = std::max(t_max, r.timestamp);
        channel_set.insert(r.channel);
    }

    std::vector<std::string> channels(channel_set.begin(), channel_set.end());
    const std::size_t n_channels = channels.size();
    const std::size_t n_hours =
        static_cast<std::size_t>((t_max - t_min) / kSecondsPerHour) + 1;

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> values(n_hours * n_channels, nan);
    std::vector<bool> seen(n_hours * n_channels, false);

    std::map<std::string, std::size_t> channel_of;
    for (std::size_t c = 0; c < n_channels; ++c) channel_of[channels[c]] = c;

    for (const auto& r : records) {
        const std::size_t h = static_cast<std::size_t>((r.timestamp - t_min) / kSecondsPerHour);
        const std::size_t c = channel_of.at(r.channel);
        const std::size_t idx = h * n_channels + c;
        if (seen[idx]) {
            throw DataError("duplicate cell (" + format_iso8601(r.timestamp) + ", " + r.channel +
                            ")");
        }
        seen[idx] = true;
        values[idx] = r.price;
    }
    return PricePanel(t_min, std::move(channels), std::move(values), std::move(provenance));
}

GapPolicy parse_gap_policy(std::string_view name) {
    if (name == "error") return GapPolicy::error;
    if (name == "forward_fill") return GapPolicy::forward_fill;
    if (name == "linear_interpolate") return GapPolicy::linear_interpolate;
    throw ConfigError("unknown gap policy '" + std::string(name) +
                      "' (expected error, forward_fill, or linear_interpolate)");
}

std::string_view to_string(GapPolicy policy) {
    switch (policy) {
        case GapPolicy::error: return "error";
        case GapPolicy::forward_fill: return "forward_fill";
        case GapPolicy::linear_interpolate: return "linear_interpolate";
    }
    return "?";
}

std::pair<PricePanel, std::size_t> repair_gaps(const PricePanel& panel, GapPolicy policy) {
    const std::size_t n_hours = panel.n_hours();
    const std::size_t n_channels = panel.n_channels();
    std::vector<double> values = panel.values();
    std::size_t repaired = 0;

    for (std::size_t c = 0; c < n_channels; ++c) {
        for (std::size_t h = 0; h < n_hours; ++h) {
            double v = values[h * n_channels + c];
            if (std::isfinite(v)) continue;
            if (policy == GapPolicy::error) {
                throw DataError("gap at (" + format_iso8601(panel.timestamp(h)) + ", " +
                                panel.channels()[c] + ") with gap policy 'error'");
            }
            if (h == 0 || !std::isfinite(values[(h - 1) * n_channels + c])) {
                throw DataError("leading gap in channel '" + panel.channels()[c] +
                                "': no earlier value to fill from");
            }
            const double prev = values[(h - 1) * n_channels + c];
            if (policy == GapPolicy::forward_fill) {
                values[h * n_channels + c] = prev;
                ++repaired;
                continue;
            }
            // linear_interpolate: find the gap run's right anchor; a trailing
            // gap (no later observation) degenerates to a forward fill.
            std::size_t next = h;
            while (next < n_hours && !std::isfinite(values[next * n_channels + c])) ++next;
            if (next == n_hours) {
                for (std::size_t g = h; g < n_hours; ++g) {
                    values[g * n_channels + c] = prev;
                    ++repaired;
                }
                break;
            }
            const double right = values[next * n_channels + c];
            const double run = static_cast<double>(next - (h - 1));
            for (std::size_t g = h; g < next; ++g) {
                const double frac = static_cast<double>(g - (h - 1)) / run;
                values[g * n_channels + c] = prev + frac * (right - prev);
                ++repaired;
            }
            h = next;  // continue scanning after the repaired run
        }
    }
    PricePanel repaired_panel(panel.start_timestamp(), panel.channels(), std::move(values),
                              panel.provenance());
    return {std::move(repaired_panel), repaired};
}

WalkForwardPlan make_walk_forward_plan(std::size_t n_hours, std::size_t train_len,
                                       std::size_t test_len, std::size_t n_folds,
                                       std::size_t stride) {
    if (train_len == 0 || test_len == 0 || n_folds == 0 || stride == 0) {
        throw ConfigError("walk-forward parameters must all be positive");
    }
    const std::size_t required = train_len + (n_folds - 1) * stride + test_len;
    if (n_hours < required) {
        throw ConfigError("insufficient hours for walk-forward plan: have " +
                          std::to_string(n_hours) + ", need " + std::to_string(required));
    }
    WalkForwardPlan plan{train_len, test_len, n_folds, stride, {}};
    plan.folds.reserve(n_folds);
    for (std::size_t k = 0; k < n_folds; ++k) {
        const std::size_t start = k * stride;
        plan.folds.push_back(Fold{IndexRange{start, start + train_len},
                                  IndexRange{start + train_len, start + train_len + test_len}});
    }
    return plan;
}

ChannelScaler fit_scaler(const PricePanel& panel, IndexRange fit_range) {
    if (fit_range.end > panel.n_hours() || fit_range.begin >= fit_range.end) {
        throw DataError("scaler fit range out of bounds");
    }
    const std::size_t n_channels = panel.n_channels();
    const double n = static_cast<double>(fit_range.length());
    ChannelScaler scaler;
    scaler.fit_range = fit_range;
    scaler.means.resize(n_channels);
    scaler.stds.resize(n_channels);
    for (std::size_t c = 0; c < n_channels; ++c) {
        double sum = 0.0;
        for (std::size_t h = fit_range.begin; h < fit_range.end; ++h) sum += panel.at(h, c);
        const double mean = sum / n;
        double ss = 0.0;
        for (std::size_t h = fit_range.begin; h < fit_range.end; ++h) {
            const double d = panel.at(h, c) - mean;
            ss += d * d;
        }
        const double var = ss / n;  // population variance
        if (var <= 0.0) {
            throw DataError("channel '" + panel.channels()[c] +
                            "' has zero variance on the fit range; cannot standardize");
        }
        scaler.means[c] = mean;
        scaler.stds[c] = std::sqrt(var);
    }
    return scaler;
}

std::vector<double> scale(const std::vector<double>& matrix, std::size_t n_channels,
                          const ChannelScaler& scaler, ScaleDirection direction) {
    if (n_channels == 0 || matrix.size() % n_channels != 0) {
        throw DataError("matrix size is not a multiple of the channel count");
    }
    if (scaler.means.size() != n_channels) {
        throw DataError("scaler channel count mismatch");
    }
    std::vector<double> out(matrix.size());
    const std::size_t n_rows = matrix.size() / n_channels;
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < n_channels; ++c) {
            const double v = matrix[r * n_channels + c];
            out[r * n_channels + c] = direction == ScaleDirection::forward
                                          ? (v - scaler.means[c]) / scaler.stds[c]
                                          : v * scaler.stds[c] + scaler.means[c];
        }
    }
    return out;
}

std::vector<double> panel_slice(const PricePanel& panel, IndexRange range) {
    if (range.end > panel.n_hours() || range.begin > range.end) {
        throw DataError("panel slice out of bounds");
    }
    const std::size_t n_channels = panel.n_channels();
    const auto& values = panel.values();
    return std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(range.begin * n_channels),
                               values.begin() + static_cast<std::ptrdiff_t>(range.end * n_channels));
}

std::vector<EvalWindow> enumerate_eval_windows(const WalkForwardPlan& plan,
                                               std::size_t fold_index, std::size_t input_len,
                                               std::size_t horizon, std::size_t eval_stride) {
    if (fold_index >= plan.folds.size()) {
        throw ConfigError("fold index out of range");
    }
    if (horizon == 0 || input_len == 0 || eval_stride == 0) {
        throw ConfigError("window parameters must be positive");
    }
    if (horizon > plan.test_len) {
        throw ConfigError("horizon " + std::to_string(horizon) + " exceeds test length " +
                          std::to_string(plan.test_len));
    }
    if (input_len > plan.train_len) {
        throw ConfigError("input length exceeds train length");
    }
    const Fold& fold = plan.folds[fold_index];
    std::vector<EvalWindow> windows;
    for (std::size_t origin = fold.test.begin; origin + horizon <= fold.test.end;
         origin += eval_stride) {
        windows.push_back(EvalWindow{fold_index, IndexRange{origin - input_len, origin},
                                     IndexRange{origin, origin + horizon}});
    }
    return windows;
}

namespace {

constexpr char kPanelMagic[4] = {'G', 'P', 'A', 'N'};
constexpr std::uint32_t kPanelVersion = 1;

template <typename T>
void write_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is, const char* what) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw IoError(std::string("truncated panel file while reading ") + what);
    return v;
}

void write_str(std::ostream& os, const std::string& s) {
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& is, const char* what) {
    const auto len = read_raw<std::uint32_t>(is, what);
    std::string s(len, '\0');
    is.read(s.data(), len);
    if (!is) throw IoError(std::string("truncated panel file while reading ") + what);
    return s;
}

}  // namespace

void save_panel(const PricePanel& panel, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os.write(kPanelMagic, 4);
    write_raw<std::uint32_t>(os, kPanelVersion);
    write_raw<std::int64_t>(os, panel.start_timestamp());
    write_raw<std::uint64_t>(os, panel.n_hours());
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(panel.n_channels()));
    for (const auto& name : panel.channels()) write_str(os, name);
    write_str(os, panel.provenance());
    os.write(reinterpret_cast<const char*>(panel.values().data()),
             static_cast<std::streamsize>(panel.values().size() * sizeof(double)));
    if (!os) throw IoError("failed writing panel to '" + path + "'");
}

PricePanel load_panel(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open panel file '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kPanelMagic, 4) != 0) {
        throw DataError("'" + path + "' is not a panel file (bad magic)");
    }
    const auto version = read_raw<std::uint32_t>(is, "version");
    if (version != kPanelVersion) {
        throw DataError("unsupported panel file version " + std::to_string(version));
    }
    const auto t0 = read_raw<std::int64_t>(is, "start timestamp");
    const auto n_hours = read_raw<std::uint64_t>(is, "hour count");
    const auto n_channels = read_raw<std::uint32_t>(is, "channel count");
    std::vector<std::string> channels;
    channels.reserve(n_channels);
    for (std::uint32_t c = 0; c < n_channels; ++c) channels.push_back(read_str(is, "channel"));
    std::string provenance = read_str(is, "provenance");
    std::vector<double> values(static_cast<std::size_t>(n_hours) * n_channels);
    is.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!is) throw IoError("truncated panel file while reading values");
    return PricePanel(t0, std::move(channels), std::move(values), std::move(provenance));
}

}  // namespace gridcast
