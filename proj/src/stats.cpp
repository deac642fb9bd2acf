#include "gridcast/stats.hpp"

#include <cmath>
#include <string>

#include "gridcast/common.hpp"

namespace gridcast {

PacfResult pacf(const std::vector<double>& series, std::size_t max_lag) {
    const std::size_t n = series.size();
    if (max_lag == 0) throw ConfigError("max_lag must be >= 1");
    if (n <= max_lag + 1) {
        throw ConfigError("series length " + std::to_string(n) +
                          " too short for max_lag " + std::to_string(max_lag));
    }

    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);

    // Biased (1/n) autocovariances; the denominator cancels in the ACF but
    // this normalization is what keeps the Durbin-Levinson recursion valid.
    std::vector<double> acov(max_lag + 1, 0.0);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t t = k; t < n; ++t) {
            s += (series[t] - mean) * (series[t - k] - mean);
        }
        acov[k] = s / static_cast<double>(n);
    }
    if (acov[0] <= 0.0) {
        throw DataError("constant series: zero variance, PACF undefined");
    }

    PacfResult result;
    result.n = n;
    result.band = 1.96 / std::sqrt(static_cast<double>(n));
    result.acf.resize(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) result.acf[k] = acov[k] / acov[0];

    // Durbin-Levinson: phi[k][k] is the lag-k partial autocorrelation.
    result.pacf.assign(max_lag + 1, 0.0);
    result.pacf[0] = 1.0;
    std::vector<double> phi(max_lag + 1, 0.0);
    std::vector<double> prev(max_lag + 1, 0.0);
    double v = result.acf[0];  // prediction error variance (in acf units)
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = result.acf[k];
        for (std::size_t j = 1; j < k; ++j) num -= prev[j] * result.acf[k - j];
        const double phi_kk = num / v;
        phi[k] = phi_kk;
        for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - phi_kk * prev[k - j];
        v *= (1.0 - phi_kk * phi_kk);
        result.pacf[k] = phi_kk;
        for (std::size_t j = 1; j <= k; ++j) prev[j] = phi[j];
    }
    return result;
}

std::string pacf_to_csv(const PacfResult& result) {
    std::string out = "lag,acf,pacf,band\n";
    for (std::size_t k = 0; k < result.acf.size(); ++k) {
        out += std::to_string(k);
        out += ',';
        out += format_double(result.acf[k]);
        out += ',';
        out += format_double(result.pacf[k]);
        out += ',';
        out += format_double(result.band);
        out += '\n';
    }
    return out;
}

}  // namespace gridcast
