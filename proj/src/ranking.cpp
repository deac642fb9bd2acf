#include "gridcast/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gridcast/common.hpp"
#include "gridcast/metrics.hpp"
#include "gridcast/special.hpp"

namespace gridcast {

ScoreTable make_score_table(const std::map<std::string, double>& indicator_by_model_country) {
    std::set<std::string> model_set, country_set;
    for (const auto& [key, score] : indicator_by_model_country) {
        auto [model, country] = split_group_key(key);
        model_set.insert(model);
        country_set.insert(country);
        if (!std::isfinite(score)) {
            throw DataError("non-finite score for " + model + "/" + country);
        }
    }
    ScoreTable table;
    table.models.assign(model_set.begin(), model_set.end());
    table.countries.assign(country_set.begin(), country_set.end());
    table.scores.resize(table.models.size() * table.countries.size());
    for (std::size_t m = 0; m < table.models.size(); ++m) {
        for (std::size_t c = 0; c < table.countries.size(); ++c) {
            auto it = indicator_by_model_country.find(
                group_key(table.models[m], table.countries[c]));
            if (it == indicator_by_model_country.end()) {
                throw DataError("score table incomplete: missing " + table.models[m] + "/" +
                                table.countries[c]);
            }
            table.at(m, c) = it->second;
        }
    }
    return table;
}

std::vector<double> midranks(const std::vector<double>& scores) {
    const std::size_t k = scores.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> ranks(k, 0.0);
    std::size_t i = 0;
    while (i < k) {
        std::size_t j = i;
        while (j + 1 < k && scores[order[j + 1]] == scores[order[i]]) ++j;
        // positions i..j (0-based) share the midrank of ranks i+1..j+1
        const double midrank = static_cast<double>(i + j + 2) / 2.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = midrank;
        i = j + 1;
    }
    return ranks;
}

RankTable rank_models(const ScoreTable& table) {
    if (table.models.empty() || table.countries.empty()) {
        throw DataError("cannot rank an empty score table");
    }
    RankTable result;
    result.models = table.models;
    result.countries = table.countries;
    result.ranks.resize(table.scores.size());
    const std::size_t k = table.models.size();
    const std::size_t n = table.countries.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<double> column(k);
        for (std::size_t m = 0; m < k; ++m) column[m] = table.at(m, c);
        auto ranks = midranks(column);
        for (std::size_t m = 0; m < k; ++m) result.ranks[m * n + c] = ranks[m];
    }
    result.average_ranks.resize(k);
    for (std::size_t m = 0; m < k; ++m) {
        double sum = 0.0;
        for (std::size_t c = 0; c < n; ++c) sum += result.rank_at(m, c);
        result.average_ranks[m] = sum / static_cast<double>(n);
    }
    return result;
}

FriedmanResult friedman_test(const ScoreTable& table,
                             const std::vector<std::string>& model_subset) {
    std::vector<std::size_t> rows;
    if (model_subset.empty()) {
        rows.resize(table.models.size());
        std::iota(rows.begin(), rows.end(), 0);
    } else {
        for (const auto& name : model_subset) {
            auto it = std::find(table.models.begin(), table.models.end(), name);
            if (it == table.models.end()) {
                throw ConfigError("friedman_test: unknown model '" + name + "'");
            }
            rows.push_back(static_cast<std::size_t>(it - table.models.begin()));
        }
    }
    const std::size_t k = rows.size();
    const std::size_t n = table.countries.size();
    if (k < 2 || n < 2) {
        throw ConfigError("friedman_test needs at least 2 models and 2 blocks");
    }

    std::vector<double> rank_sums(k, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<double> column(k);
        for (std::size_t i = 0; i < k; ++i) column[i] = table.at(rows[i], c);
        auto ranks = midranks(column);
        for (std::size_t i = 0; i < k; ++i) rank_sums[i] += ranks[i];
    }

    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    double sum_sq = 0.0;
    for (double r : rank_sums) sum_sq += r * r;
    const double chi = 12.0 / (nd * kd * (kd + 1.0)) * sum_sq - 3.0 * nd * (kd + 1.0);

    FriedmanResult result;
    result.chi_square = chi;
    result.degrees_of_freedom = k - 1;
    result.p_value = chi_square_survival(std::max(chi, 0.0), static_cast<double>(k - 1));
    return result;
}

}  // namespace gridcast
