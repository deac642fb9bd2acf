#include "gridcast/bench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>

#include "gridcast/bench/config.hpp"
#include "gridcast/ranking.hpp"

namespace gridcast::bench {

namespace {

std::string sig6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Linear-interpolation quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * double(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - double(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

std::string render_tables(const std::vector<StoredRecord>& records) {
    std::string csv = "model,country,smape,mae,mse,rmse\n";
    for (const auto& [key, m] : model_country_means(records)) {
        csv += key.first + "," + key.second + "," + sig6(m.smape) + "," + sig6(m.mae) + "," +
               sig6(m.mse) + "," + sig6(m.rmse) + "\n";
    }
    return csv;
}

std::string render_heatmap(const std::vector<StoredRecord>& records) {
    const auto means = model_country_means(records);
    std::vector<std::string> models, countries;
    for (const auto& [key, m] : means) {
        if (models.empty() || models.back() != key.first) models.push_back(key.first);
        countries.push_back(key.second);
    }
    std::sort(models.begin(), models.end());
    models.erase(std::unique(models.begin(), models.end()), models.end());
    std::sort(countries.begin(), countries.end());
    countries.erase(std::unique(countries.begin(), countries.end()), countries.end());

    std::string csv = "model";
    for (const auto& c : countries) csv += "," + c;
    csv += "\n";
    for (const auto& m : models) {
        csv += m;
        for (const auto& c : countries) {
            auto it = means.find({m, c});
            csv += ",";
            if (it != means.end()) csv += sig6(performance_indicator(it->second));
        }
        csv += "\n";
    }
    return csv;
}

std::string render_geomap(const std::vector<StoredRecord>& records) {
    std::map<std::string, std::vector<double>> by_country;
    for (const auto& [key, m] : model_country_means(records))
        by_country[key.second].push_back(m.smape);
    std::string csv = "country,smape\n";
    for (const auto& [country, values] : by_country) {
        const double mean =
            std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
        csv += country + "," + sig6(mean) + "\n";
    }
    return csv;
}

std::string render_boxplot(const std::vector<StoredRecord>& records) {
    std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
    for (const auto& r : records)
        groups[{r.model, r.fold}].push_back(performance_indicator(r.metrics));
    std::string csv = "model,fold,min,q1,median,q3,max\n";
    for (auto& [key, values] : groups) {
        std::sort(values.begin(), values.end());
        csv += key.first + "," + std::to_string(key.second);
        for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) csv += "," + sig6(quantile_sorted(values, q));
        csv += "\n";
    }
    return csv;
}

std::string render_ranking(const std::vector<StoredRecord>& records) {
    std::map<std::string, double> indicator;
    for (const auto& [key, m] : model_country_means(records))
        indicator[group_key(key.first, key.second)] = performance_indicator(m);
    const ScoreTable table = make_score_table(indicator);
    const RankTable ranks = rank_models(table);

    const bool friedman_possible = table.models.size() >= 2 && table.countries.size() >= 2;
    std::size_t best = 0;
    for (std::size_t i = 1; i < ranks.models.size(); ++i)
        if (ranks.average_ranks[i] < ranks.average_ranks[best]) best = i;

    std::map<std::string, double> p_vs_best;
    if (friedman_possible) {
        for (std::size_t i = 0; i < table.models.size(); ++i) {
            if (i == best) continue;
            p_vs_best[table.models[i]] =
                friedman_test(table, {table.models[best], table.models[i]}).p_value;
        }
    }

    // Models ordered by average rank (best first).
    std::vector<std::size_t> order(table.models.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (ranks.average_ranks[a] != ranks.average_ranks[b])
            return ranks.average_ranks[a] < ranks.average_ranks[b];
        return table.models[a] < table.models[b];
    });

    std::string csv;
    if (!friedman_possible)
        csv += "# friedman: insufficient models for pairwise tests (need >= 2 models and >= 2 "
               "blocks)\n";
    csv += "model,country,indicator,rank,avg_rank,friedman_p_vs_best\n";
    for (std::size_t oi : order) {
        for (std::size_t c = 0; c < table.countries.size(); ++c) {
            csv += table.models[oi] + "," + table.countries[c] + "," + sig6(table.at(oi, c)) +
                   "," + sig6(ranks.rank_at(oi, c)) + "," + sig6(ranks.average_ranks[oi]) + ",";
            if (friedman_possible && oi != best) csv += sig6(p_vs_best.at(table.models[oi]));
            csv += "\n";
        }
    }
    return csv;
}

}  // namespace

ReportKind parse_report_kind(std::string_view name) {
    if (name == "ranking") return ReportKind::ranking;
    if (name == "heatmap") return ReportKind::heatmap;
    if (name == "boxplot") return ReportKind::boxplot;
    if (name == "geomap") return ReportKind::geomap;
    if (name == "tables") return ReportKind::tables;
    throw ConfigError("unknown report kind '" + std::string(name) +
                      "' (expected ranking|heatmap|boxplot|geomap|tables)");
}

std::string_view to_string(ReportKind kind) {
    switch (kind) {
        case ReportKind::ranking: return "ranking";
        case ReportKind::heatmap: return "heatmap";
        case ReportKind::boxplot: return "boxplot";
        case ReportKind::geomap: return "geomap";
        case ReportKind::tables: return "tables";
    }
    return "?";
}

std::string render_report(const ResultStore& store, ReportKind kind) {
    const auto records = store.sorted_records();
    if (records.empty())
        throw DataError("run directory '" + store.dir() + "' holds no records to report");
    switch (kind) {
        case ReportKind::ranking: return render_ranking(records);
        case ReportKind::heatmap: return render_heatmap(records);
        case ReportKind::boxplot: return render_boxplot(records);
        case ReportKind::geomap: return render_geomap(records);
        case ReportKind::tables: return render_tables(records);
    }
    throw ConfigError("unknown report kind");
}

std::string emit_report(const ResultStore& store, ReportKind kind) {
    const std::string text = render_report(store, kind);
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(store.dir()) / "reports";
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create reports directory in '" + store.dir() + "'");
    const std::string path = (dir / (std::string(to_string(kind)) + ".csv")).string();
    write_text_file(path, text);
    return path;
}

}  // namespace gridcast::bench
