#include "gridcast/bench/runner.hpp"

#include <atomic>
#include <ctime>
#include <filesystem>
#include <thread>

#include "gridcast/ingest.hpp"
#include "gridcast/models/arima.hpp"
#include "gridcast/models/linear.hpp"
#include "gridcast/models/patchtst.hpp"
#include "gridcast/models/trainer.hpp"
#include "gridcast/models/tsmixer.hpp"
#include "gridcast/nn/checkpoint.hpp"

namespace gridcast::bench {

namespace {

namespace fs = std::filesystem;

struct Shared {
    const BenchConfig& config;
    const PricePanel& panel;
    const WalkForwardPlan& plan;
    const std::vector<std::vector<EvalWindow>>& windows;  // per fold
    ResultStore& store;
    std::atomic<bool> stop{false};
    std::atomic<std::size_t> failed{0};
};

/// Column `c` of a row-major [rows x C] matrix.
std::vector<double> column(const std::vector<double>& matrix, std::size_t n_channels,
                           std::size_t c) {
    std::vector<double> out(matrix.size() / n_channels);
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = matrix[r * n_channels + c];
    return out;
}

/// Score a [H x C] forecast (original scale) against the window's actuals.
void score_window(Shared& s, const std::string& model_name, const EvalWindow& w,
                  std::size_t window_index, const std::vector<double>& forecast,
                  std::vector<StoredRecord>& out) {
    const std::size_t C = s.panel.n_channels();
    const auto actual = panel_slice(s.panel, w.target_range);
    for (std::size_t c = 0; c < C; ++c) {
        StoredRecord r;
        r.model = model_name;
        r.country = s.panel.channels()[c];
        r.fold = w.fold_index;
        r.window = window_index;
        r.origin = w.target_range.begin;
        r.metrics = compute_metrics(column(actual, C, c), column(forecast, C, c));
        out.push_back(std::move(r));
    }
}

/// Calls the stop hook after a finished unit; returns false to stop the run.
bool after_unit(Shared& s, const std::string& model, std::size_t fold) {
    if (!s.config.after_unit) return true;
    if (s.config.after_unit(model, fold)) return true;
    s.stop.store(true);
    return false;
}

template <typename Fn>
void run_fold_loop(Shared& s, const std::string& name, Fn&& run_one_fold) {
    for (std::size_t k = 0; k < s.plan.folds.size(); ++k) {
        if (s.stop.load()) return;
        if (s.store.unit_done(name, k)) continue;
        try {
            run_one_fold(k);
        } catch (const std::exception& e) {
            s.store.record_unit_failure(name, k, e.what());
            s.failed.fetch_add(1);
            continue;
        }
        if (!after_unit(s, name, k)) return;
    }
}

template <typename T, typename Model, typename ModelConfig>
void run_neural_chain(Shared& s, const ModelEntry& entry, const ModelConfig& mcfg) {
    const std::size_t C = s.panel.n_channels();
    const std::size_t L = s.config.input_len, H = s.config.horizon;

    run_fold_loop(s, entry.name, [&](std::size_t k) {
        const Fold& fold = s.plan.folds[k];
        Model model(mcfg, model_init_seed(s.config.seed, entry.name));
        if (k > 0) {
            // The warm-start chain always reads fold k-1 from disk so that a
            // resumed run is indistinguishable from an uninterrupted one. A
            // missing checkpoint (previous fold failed) falls back to the
            // seeded fresh initialization.
            const std::string prev = s.store.checkpoint_path(entry.name, k - 1);
            if (fs::exists(prev)) nn::load_checkpoint<T>(prev, model.parameters());
        }

        const ChannelScaler scaler = fit_scaler(s.panel, fold.train);
        models::WindowSet data;
        data.n_channels = C;
        data.input_len = L;
        data.horizon = H;
        data.matrix = scale(panel_slice(s.panel, fold.train), C, scaler, ScaleDirection::forward);
        data.origins = models::enumerate_train_origins(fold.train.length(), L, H);

        models::TrainConfig train = s.config.train;
        train.seed = unit_seed(s.config.seed, entry.name, k);
        const auto result = models::train_model(model, data, train);
        nn::save_checkpoint(s.store.checkpoint_path(entry.name, k), model.parameters());

        std::vector<StoredRecord> records;
        for (std::size_t m = 0; m < s.windows[k].size(); ++m) {
            const EvalWindow& w = s.windows[k][m];
            const auto raw_ctx = panel_slice(s.panel, w.context_range);
            const auto std_ctx = scale(raw_ctx, C, scaler, ScaleDirection::forward);
            const std::vector<T> ctx(std_ctx.begin(), std_ctx.end());
            nn::Tape<T> tape;
            const auto out = model.forward(tape, nn::Tensor<T>::from({1, L, C}, ctx));
            const std::vector<double> widened(out.value().begin(), out.value().end());
            const auto forecast = scale(widened, C, scaler, ScaleDirection::inverse);
            score_window(s, entry.name, w, m, forecast, records);
        }
        s.store.append_unit(entry.name, k, records, result.loss_history);
    });
}

void run_arima_model(Shared& s, const ModelEntry& entry) {
    const std::size_t C = s.panel.n_channels();
    run_fold_loop(s, entry.name, [&](std::size_t k) {
        const Fold& fold = s.plan.folds[k];
        std::vector<StoredRecord> records;
        for (std::size_t c = 0; c < C; ++c) {
            // Refit per fold per country on raw prices; ARIMA owns its own
            // location/scale handling.
            const auto train_series = s.panel.channel_series(c, fold.train);
            const auto model = models::fit_arima(train_series, entry.order);
            for (std::size_t m = 0; m < s.windows[k].size(); ++m) {
                const EvalWindow& w = s.windows[k][m];
                const auto context = s.panel.channel_series(c, w.context_range);
                const auto fc = models::forecast_arima(model, context, s.config.horizon);
                const auto actual = s.panel.channel_series(c, w.target_range);
                StoredRecord r;
                r.model = entry.name;
                r.country = s.panel.channels()[c];
                r.fold = k;
                r.window = m;
                r.origin = w.target_range.begin;
                r.metrics = compute_metrics(actual, fc);
                records.push_back(std::move(r));
            }
        }
        s.store.append_unit(entry.name, k, records, {});
    });
}

void run_external_model(Shared& s, const ModelEntry& entry) {
    const std::size_t C = s.panel.n_channels();
    run_fold_loop(s, entry.name, [&](std::size_t k) {
        std::vector<StoredRecord> records;
        for (std::size_t m = 0; m < s.windows[k].size(); ++m) {
            const EvalWindow& w = s.windows[k][m];
            // Contexts go out in original price scale; pre-trained models own
            // their normalization.
            const auto context = panel_slice(s.panel, w.context_range);
            const auto forecast = external::forecast_external(
                entry.external, context, C, s.config.horizon, s.panel.channels());
            score_window(s, entry.name, w, m, forecast, records);
        }
        s.store.append_unit(entry.name, k, records, {});
    });
}

void run_naive_model(Shared& s, const ModelEntry& entry) {
    const std::size_t C = s.panel.n_channels();
    const std::size_t H = s.config.horizon;
    run_fold_loop(s, entry.name, [&](std::size_t k) {
        std::vector<StoredRecord> records;
        for (std::size_t m = 0; m < s.windows[k].size(); ++m) {
            const EvalWindow& w = s.windows[k][m];
            std::vector<double> forecast(H * C);
            for (std::size_t c = 0; c < C; ++c) {
                const double last = s.panel.at(w.context_range.end - 1, c);
                for (std::size_t h = 0; h < H; ++h) forecast[h * C + c] = last;
            }
            score_window(s, entry.name, w, m, forecast, records);
        }
        s.store.append_unit(entry.name, k, records, {});
    });
}

template <typename T>
void run_neural_kind(Shared& s, const ModelEntry& entry) {
    const std::size_t L = s.config.input_len, H = s.config.horizon;
    if (entry.kind == "nlinear") {
        run_neural_chain<T, models::NLinear<T>>(s, entry, models::LinearConfig{L, H});
    } else if (entry.kind == "dlinear") {
        run_neural_chain<T, models::DLinear<T>>(s, entry,
                                                models::DLinearConfig{L, H, entry.kernel_size});
    } else if (entry.kind == "tsmixer") {
        run_neural_chain<T, models::TSMixer<T>>(
            s, entry,
            models::TSMixerConfig{L, H, s.panel.n_channels(), entry.n_blocks, entry.hidden_dim});
    } else if (entry.kind == "patchtst") {
        run_neural_chain<T, models::PatchTST<T>>(
            s, entry,
            models::PatchTSTConfig{L, H, entry.patch_len, entry.patch_stride, entry.d_model,
                                   entry.n_layers, entry.n_heads, entry.ff_dim});
    }
}

void run_model(Shared& s, const ModelEntry& entry) {
    if (entry.kind == "arima") {
        run_arima_model(s, entry);
    } else if (entry.kind == "external") {
        run_external_model(s, entry);
    } else if (entry.kind == "naive") {
        run_naive_model(s, entry);
    } else if (s.config.precision == 64) {
        run_neural_kind<double>(s, entry);
    } else {
        run_neural_kind<float>(s, entry);
    }
}

}  // namespace

std::uint64_t model_init_seed(std::uint64_t base, const std::string& model) {
    return derive_seed(base, "init/" + model);
}

std::uint64_t unit_seed(std::uint64_t base, const std::string& model, std::size_t fold) {
    return derive_seed(base, "train/" + model + "/fold" + std::to_string(fold));
}

PricePanel load_bench_panel(const DataSource& data) {
    if (!data.panel_path.empty()) return load_panel(data.panel_path);
    if (!data.csv_path.empty()) {
        IngestOptions options;
        options.gap_policy = data.csv_fill;
        return load_price_csv(data.csv_path, options);
    }
    return generate_panel(data.synth, data.synth_start);
}

BenchOutcome run_benchmark(const BenchConfig& config) {
    validate(config);
    const PricePanel panel = load_bench_panel(config.data);
    if (panel.has_gaps())
        throw DataError("benchmark panel still has gaps; choose a fill policy at ingest");

    const WalkForwardPlan plan = make_walk_forward_plan(
        panel.n_hours(), config.train_len, config.test_len, config.n_folds, config.fold_stride);
    std::vector<std::vector<EvalWindow>> windows;
    for (std::size_t k = 0; k < plan.folds.size(); ++k) {
        windows.push_back(enumerate_eval_windows(plan, k, config.input_len, config.horizon,
                                                 config.eval_stride));
    }
    if (windows.front().empty())
        throw ConfigError("config: no evaluation window fits in the test range");

    RunMeta meta;
    meta.config_hash = config_hash(config);
    meta.seed = config.seed;
    meta.precision = config.precision;
    meta.created = format_iso8601(static_cast<std::int64_t>(std::time(nullptr)));
    for (const auto& m : config.roster) meta.models.push_back(m.name);
    meta.countries = panel.channels();
    meta.n_folds = plan.folds.size();
    meta.windows_per_fold = windows.front().size();

    ResultStore store(config.output_dir, meta);
    Shared shared{config, panel, plan, windows, store};

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (;;) {
            if (shared.stop.load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= config.roster.size()) return;
            run_model(shared, config.roster[i]);
        }
    };

    const std::size_t n_threads = std::min(config.jobs, config.roster.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    BenchOutcome outcome;
    outcome.failed_units = shared.failed.load();
    outcome.stopped = shared.stop.load();
    if (!outcome.stopped) store.finish();
    return outcome;
}

}  // namespace gridcast::bench
