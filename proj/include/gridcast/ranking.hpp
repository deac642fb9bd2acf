#pragma once

#include <map>
#include <string>
#include <vector>

namespace gridcast {

/// Complete models x countries matrix of performance-indicator values.
/// Lower is better throughout.
struct ScoreTable {
    std::vector<std::string> models;
    std::vector<std::string> countries;
    /// Row-major [models x countries].
    std::vector<double> scores;

    double at(std::size_t model, std::size_t country) const {
        return scores[model * countries.size() + country];
    }
    double& at(std::size_t model, std::size_t country) {
        return scores[model * countries.size() + country];
    }
};

/// Build a score table from per-(model, country) indicator values; throws on
/// missing cells.
ScoreTable make_score_table(const std::map<std::string, double>& indicator_by_model_country);

struct RankTable {
    std::vector<std::string> models;
    std::vector<std::string> countries;
    /// Row-major [models x countries]; midranks within each country.
    std::vector<double> ranks;
    /// Per-model mean rank across countries, aligned with `models`.
    std::vector<double> average_ranks;

    double rank_at(std::size_t model, std::size_t country) const {
        return ranks[model * countries.size() + country];
    }
};

/// Midrank assignment per country (ties share the average of their positions),
/// then per-model averaging.
RankTable rank_models(const ScoreTable& table);

struct FriedmanResult {
    double chi_square = 0.0;
    std::size_t degrees_of_freedom = 0;
    double p_value = 1.0;
};

/// Friedman rank test over the given model subset (all models when empty),
/// blocks = countries. Requires >= 2 models and >= 2 countries.
FriedmanResult friedman_test(const ScoreTable& table,
                             const std::vector<std::string>& model_subset = {});

/// Midranks of one block: values are scores (lower = rank 1).
std::vector<double> midranks(const std::vector<double>& scores);

}  // namespace gridcast
