#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gridcast/common.hpp"

namespace gridcast::models {

struct ArimaOrder {
    std::size_t p = 2;  // autoregressive lags
    std::size_t d = 1;  // differencing passes
    std::size_t q = 2;  // moving-average lags
    bool operator==(const ArimaOrder&) const = default;
};

/// Throws ConfigError unless the order names an actual model (at least one of
/// p, q, d positive).
void validate(const ArimaOrder& order);

struct ArimaFitConfig {
    std::size_t max_iters = 3000;
    double learning_rate = 0.02;
    double tol = 1e-11;  // relative CSS improvement considered "no progress"
};

struct ArimaModel {
    ArimaOrder order;
    std::vector<double> ar;   // phi, length p
    std::vector<double> ma;   // theta, length q
    double intercept = 0.0;   // fitted only when d == 0
    bool converged = true;    // false: iteration cap hit, best-so-far returned
    double css = 0.0;         // conditional sum of squares at the solution
    std::size_t n_obs = 0;    // differenced-series length used in the fit
};

/// Conditional-sum-of-squares fit via gradient descent on the d-times
/// differenced series, with analytic residual-derivative recursions. MA roots
/// inside the unit circle are reflected to the invertible region afterwards.
/// Requires series length > p + d + q + 10.
ArimaModel fit_arima(const std::vector<double>& series, ArimaOrder order,
                     ArimaFitConfig config = {});

/// Recursive multi-step forecast: future shocks are zero, in-sample residuals
/// are rebuilt from the context, and the d differencing passes are undone
/// cumulatively. Requires context length >= p + d.
std::vector<double> forecast_arima(const ArimaModel& model, const std::vector<double>& context,
                                   std::size_t horizon = 96);

/// AIC grid search over p, q in {0..3} and d in {0, 1} (skipping the empty
/// (0,0,0) order); ties break toward fewer parameters.
ArimaOrder select_arima_order(const std::vector<double>& series, ArimaFitConfig config = {});

std::string arima_to_json(const ArimaModel& model);
ArimaModel arima_from_json(const std::string& text);

/// ARIMA is refit from scratch every fold; carrying parameters across folds
/// is a contract violation, not a no-op.
inline void warm_start(ArimaModel&, const ArimaModel&) {
    throw ConfigError("warm start does not apply to ARIMA; the model is refit per fold");
}

}  // namespace gridcast::models
