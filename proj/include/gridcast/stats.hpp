#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gridcast {

/// Autocorrelation and partial autocorrelation of one series.
///
/// `acf[k]` and `pacf[k]` correspond to lag k; acf[0] == pacf[0] == 1 by
/// convention and pacf[1] == acf[1] exactly. `band` is the half-width of the
/// conventional 95% significance region, 1.96 / sqrt(n).
struct PacfResult {
    std::vector<double> acf;
    std::vector<double> pacf;
    double band = 0.0;
    std::size_t n = 0;
};

/// Sample ACF with the biased (1/n) estimator and PACF via the
/// Durbin–Levinson recursion. Throws DataError on constant input and
/// ConfigError when max_lag is too large for the series.
PacfResult pacf(const std::vector<double>& series, std::size_t max_lag);

/// CSV rows `lag,acf,pacf,band` for plotting.
std::string pacf_to_csv(const PacfResult& result);

}  // namespace gridcast
