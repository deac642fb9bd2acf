// gridcast — walk-forward electricity-price forecasting workbench CLI.
//
// Subcommands: ingest, synth, pacf, bench, report, rank.
// Exit codes: 0 success, 1 usage/config/data error, 2 partial benchmark
// failure, 3 I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gridcast/bench/config.hpp"
#include "gridcast/bench/report.hpp"
#include "gridcast/bench/runner.hpp"
#include "gridcast/bench/toml.hpp"
#include "gridcast/ingest.hpp"
#include "gridcast/ranking.hpp"
#include "gridcast/stats.hpp"
#include "gridcast/synth.hpp"

using namespace gridcast;

namespace {

struct GlobalFlags {
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t jobs = 0;
    int precision = 0;
};

nlohmann::json load_config_doc(const std::string& path) {
    const std::string text = bench::read_text_file(path);
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        auto doc = nlohmann::json::parse(text, nullptr, false);
        if (doc.is_discarded()) throw ConfigError("'" + path + "' is not valid JSON");
        return doc;
    }
    return bench::parse_toml(text);
}

int cmd_ingest(const std::string& csv, const std::string& fill, const std::string& range,
               const std::string& out) {
    IngestOptions options;
    options.gap_policy = parse_gap_policy(fill);
    if (!range.empty()) {
        const auto sep = range.find("..");
        if (sep == std::string::npos)
            throw ConfigError("--range expects '<start>..<end>' (half-open UTC)");
        options.time_range = {parse_iso8601(range.substr(0, sep)),
                              parse_iso8601(range.substr(sep + 2))};
    }
    const PricePanel panel = load_price_csv(csv, options);
    save_panel(panel, out);
    std::printf("panel: %zu hours x %zu channels -> %s\n", panel.n_hours(), panel.n_channels(),
                out.c_str());
    return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out) {
    const auto doc = load_config_doc(spec_path);
    const auto specs = bench::parse_synth_channels(doc);
    std::int64_t start = 1704067200;  // 2024-01-01T00:00Z
    if (doc.contains("start")) start = parse_iso8601(doc.at("start").get<std::string>());
    const PricePanel panel = generate_panel(specs, start);
    save_panel(panel, out);
    std::printf("panel: %zu hours x %zu channels -> %s\n", panel.n_hours(), panel.n_channels(),
                out.c_str());
    return 0;
}

int cmd_pacf(const std::string& panel_path, const std::string& channel, std::size_t max_lag,
             const std::string& out) {
    const PricePanel panel = load_panel(panel_path);
    const auto series = panel.channel_series(panel.channel_index(channel));
    const auto result = pacf(series, max_lag);
    const std::string csv = pacf_to_csv(result);
    if (out.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        bench::write_text_file(out, csv);
        std::printf("pacf: %zu lags of %s -> %s\n", max_lag, channel.c_str(), out.c_str());
    }
    return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out, const GlobalFlags& flags) {
    bench::BenchConfig config = bench::load_bench_config(config_path);
    config.output_dir = out;
    if (flags.seed_set) config.seed = flags.seed;
    if (flags.jobs > 0) config.jobs = flags.jobs;
    if (flags.precision > 0) config.precision = flags.precision;

    const auto outcome = bench::run_benchmark(config);
    const bench::ResultStore store(config.output_dir);
    std::printf("bench: %zu records across %zu models, %zu folds -> %s\n",
                store.records().size(), store.meta().models.size(), store.meta().n_folds,
                config.output_dir.c_str());
    if (outcome.failed_units > 0) {
        std::fprintf(stderr, "bench: %zu unit(s) failed:\n", outcome.failed_units);
        for (const auto& f : store.failures()) std::fprintf(stderr, "  %s\n", f.c_str());
        return 2;
    }
    return 0;
}

int cmd_report(const std::string& rundir, const std::string& kind) {
    const bench::ResultStore store(rundir);
    const std::string path = bench::emit_report(store, bench::parse_report_kind(kind));
    std::printf("%s\n", path.c_str());
    return 0;
}

// Ranking straight from a per-(model, country) score CSV. Accepts either an
// `indicator` column or `smape` + `rmse` columns (combined via the usual
// (100*smape + rmse)/2 score).
int cmd_rank(const std::string& scores_path) {
    const std::string text = bench::read_text_file(scores_path);
    std::istringstream stream(text);
    std::string line;
    if (!std::getline(stream, line)) throw DataError("'" + scores_path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto split = [](const std::string& row) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            const auto comma = row.find(',', start);
            if (comma == std::string::npos) {
                cells.push_back(row.substr(start));
                return cells;
            }
            cells.push_back(row.substr(start, comma - start));
            start = comma + 1;
        }
    };

    std::map<std::string, std::size_t> col;
    const auto header = split(line);
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    if (!col.count("model") || !col.count("country"))
        throw DataError("score CSV needs 'model' and 'country' columns");
    const bool has_indicator = col.count("indicator") > 0;
    if (!has_indicator && (!col.count("smape") || !col.count("rmse")))
        throw DataError("score CSV needs an 'indicator' column or 'smape' and 'rmse' columns");

    std::map<std::string, double> indicator;
    std::size_t line_no = 1;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw DataError(scores_path + ":" + std::to_string(line_no) + ": wrong column count");
        const std::string key = group_key(cells[col["model"]], cells[col["country"]]);
        double value;
        if (has_indicator) {
            value = parse_double(cells[col["indicator"]]);
        } else {
            MetricSet m;
            m.smape = parse_double(cells[col["smape"]]);
            m.rmse = parse_double(cells[col["rmse"]]);
            value = performance_indicator(m);
        }
        indicator[key] = value;
    }

    const ScoreTable table = make_score_table(indicator);
    const RankTable ranks = rank_models(table);
    std::size_t best = 0;
    for (std::size_t i = 1; i < ranks.models.size(); ++i)
        if (ranks.average_ranks[i] < ranks.average_ranks[best]) best = i;

    std::vector<std::size_t> order(table.models.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ranks.average_ranks[a] < ranks.average_ranks[b];
    });

    const bool friedman_possible = table.models.size() >= 2 && table.countries.size() >= 2;
    std::printf("model,avg_rank,friedman_p_vs_best\n");
    for (std::size_t i : order) {
        std::printf("%s,%.6g,", table.models[i].c_str(), ranks.average_ranks[i]);
        if (friedman_possible && i != best) {
            const auto f = friedman_test(table, {table.models[best], table.models[i]});
            std::printf("%.6g", f.p_value);
        }
        std::printf("\n");
    }
    if (!friedman_possible)
        std::printf("# friedman: insufficient models for pairwise tests\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridcast — walk-forward electricity price forecasting workbench"};
    app.require_subcommand(1);

    GlobalFlags flags;
    auto* seed_opt = app.add_option("--seed", flags.seed, "Override the benchmark seed");
    app.add_option("--jobs", flags.jobs, "Concurrent model jobs");
    app.add_option("--precision", flags.precision, "Neural float width (32 or 64)")
        ->check(CLI::IsMember({32, 64}));

    std::string in_path, out_path, fill = "error", range, channel, kind;
    std::size_t max_lag = 100;

    auto* ingest = app.add_subcommand("ingest", "Build a panel from a long-format price CSV");
    ingest->add_option("csv", in_path, "Input CSV path")->required();
    ingest->add_option("--fill", fill, "Gap policy: error|forward_fill|linear_interpolate");
    ingest->add_option("--range", range, "UTC slice '<start>..<end>' (half-open)");
    ingest->add_option("-o,--output", out_path, "Output panel file")->required();

    auto* synth = app.add_subcommand("synth", "Generate a synthetic panel from a spec file");
    synth->add_option("spec", in_path, "Synth spec (.toml or .json)")->required();
    synth->add_option("-o,--output", out_path, "Output panel file")->required();

    auto* pacf_cmd = app.add_subcommand("pacf", "Partial autocorrelation of one channel");
    pacf_cmd->add_option("panel", in_path, "Panel file")->required();
    pacf_cmd->add_option("--channel", channel, "Channel name")->required();
    pacf_cmd->add_option("--max-lag", max_lag, "Largest lag");
    pacf_cmd->add_option("-o,--output", out_path, "Output CSV (stdout when omitted)");

    auto* bench_cmd = app.add_subcommand("bench", "Run the walk-forward benchmark");
    bench_cmd->add_option("config", in_path, "Benchmark config (.toml or .json)")->required();
    bench_cmd->add_option("-o,--output", out_path, "Run directory")->required();

    auto* report = app.add_subcommand("report", "Emit plot-ready CSV from a run directory");
    report->add_option("rundir", in_path, "Run directory")->required();
    report->add_option("--kind", kind, "ranking|heatmap|boxplot|geomap|tables")->required();

    auto* rank = app.add_subcommand("rank", "Rank models from a per-country score CSV");
    rank->add_option("scores", in_path, "Score CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        flags.seed_set = seed_opt->count() > 0;
        if (ingest->parsed()) return cmd_ingest(in_path, fill, range, out_path);
        if (synth->parsed()) return cmd_synth(in_path, out_path);
        if (pacf_cmd->parsed()) return cmd_pacf(in_path, channel, max_lag, out_path);
        if (bench_cmd->parsed()) return cmd_bench(in_path, out_path, flags);
        if (report->parsed()) return cmd_report(in_path, kind);
        if (rank->parsed()) return cmd_rank(in_path);
    } catch (const IoError& e) {
        std::fprintf(stderr, "gridcast: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "gridcast: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "gridcast: %s\n", e.what());
        return 1;
    }
    return 0;
}
