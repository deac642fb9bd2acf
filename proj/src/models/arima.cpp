#include "gridcast/models/arima.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <json.hpp>

namespace gridcast::models {

namespace {

std::vector<double> difference(const std::vector<double>& x, std::size_t d) {
    std::vector<double> w = x;
    for (std::size_t pass = 0; pass < d; ++pass) {
        for (std::size_t i = 0; i + 1 < w.size(); ++i) w[i] = w[i + 1] - w[i];
        w.pop_back();
    }
    return w;
}

/// Residuals of the ARMA recursion on the differenced series, plus the
/// conditional sum of squares. Pre-sample residuals are fixed at zero and the
/// recursion starts at t = p.
double css_residuals(const std::vector<double>& w, const std::vector<double>& phi,
                     const std::vector<double>& theta, double c, std::vector<double>& eps) {
    const std::size_t p = phi.size(), q = theta.size();
    eps.assign(w.size(), 0.0);
    double css = 0.0;
    for (std::size_t t = p; t < w.size(); ++t) {
        double e = w[t] - c;
        for (std::size_t i = 0; i < p; ++i) e -= phi[i] * w[t - 1 - i];
        for (std::size_t k = 0; k < q && k < t; ++k) e -= theta[k] * eps[t - 1 - k];
        eps[t] = e;
        css += e * e;
    }
    return css;
}

/// Roots of theta(z) = 1 + theta[0] z + ... + theta[q-1] z^q by Durand-Kerner.
std::vector<std::complex<double>> ma_roots(const std::vector<double>& theta) {
    std::size_t q = theta.size();
    while (q > 0 && std::abs(theta[q - 1]) < 1e-14) --q;  // degenerate leading zeros
    if (q == 0) return {};

    // Monic form: z^q + (theta[q-2]/theta[q-1]) z^{q-1} + ... + 1/theta[q-1].
    std::vector<std::complex<double>> coef(q + 1);
    coef[q] = 1.0;
    for (std::size_t i = 0; i < q; ++i) {
        coef[i] = (i == 0 ? 1.0 : theta[i - 1]) / theta[q - 1];
    }
    auto eval = [&](std::complex<double> z) {
        std::complex<double> acc = 0.0;
        for (std::size_t i = q + 1; i-- > 0;) acc = acc * z + coef[i];
        return acc;
    };

    std::vector<std::complex<double>> roots(q);
    const std::complex<double> seed(0.4, 0.9);
    std::complex<double> power = 1.0;
    for (std::size_t i = 0; i < q; ++i) {
        power *= seed;
        roots[i] = power;
    }
    for (std::size_t iter = 0; iter < 200; ++iter) {
        double shift = 0.0;
        for (std::size_t i = 0; i < q; ++i) {
            std::complex<double> denom = 1.0;
            for (std::size_t j = 0; j < q; ++j) {
                if (j != i) denom *= roots[i] - roots[j];
            }
            if (std::abs(denom) < 1e-300) continue;
            const std::complex<double> delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            shift = std::max(shift, std::abs(delta));
        }
        if (shift < 1e-13) break;
    }
    return roots;
}

bool enforce_invertibility(std::vector<double>& theta);

/// The AR polynomial 1 - phi_1 z - ... - phi_p z^p is stable when its roots
/// lie outside the unit circle; negating the coefficients turns it into the
/// MA-style form handled below.
bool enforce_stability(std::vector<double>& phi) {
    std::vector<double> negated(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) negated[i] = -phi[i];
    if (!enforce_invertibility(negated)) return false;
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = -negated[i];
    return true;
}

/// Reflect any MA root strictly inside the unit circle to 1/conj(root) and
/// rebuild real coefficients. Returns true when a reflection happened.
bool enforce_invertibility(std::vector<double>& theta) {
    auto roots = ma_roots(theta);
    bool changed = false;
    for (auto& r : roots) {
        const double mag = std::abs(r);
        if (mag > 1e-14 && mag < 1.0 - 1e-10) {
            r = 1.0 / std::conj(r);
            changed = true;
        }
    }
    if (!changed) return false;

    // theta(z) = prod_i (1 - z / r_i); expand and take real parts.
    std::vector<std::complex<double>> poly{1.0};
    for (const auto& r : roots) {
        std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i];
            next[i + 1] -= poly[i] / r;
        }
        poly = std::move(next);
    }
    for (std::size_t i = 0; i < theta.size(); ++i) {
        theta[i] = i + 1 < poly.size() ? poly[i + 1].real() : 0.0;
    }
    return true;
}

struct Gradients {
    std::vector<double> d_phi, d_theta;
    double d_c = 0.0;
};

/// Analytic CSS gradient: the residual derivatives follow the same MA
/// recursion as the residuals themselves.
Gradients css_gradient(const std::vector<double>& w, const std::vector<double>& phi,
                       const std::vector<double>& theta, double c, bool fit_intercept,
                       const std::vector<double>& eps) {
    const std::size_t p = phi.size(), q = theta.size(), n = w.size();
    Gradients g;
    g.d_phi.assign(p, 0.0);
    g.d_theta.assign(q, 0.0);

    // One derivative stream per parameter, each of length n (zero before t=p).
    std::vector<std::vector<double>> de_phi(p, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> de_theta(q, std::vector<double>(n, 0.0));
    std::vector<double> de_c(n, 0.0);

    for (std::size_t t = p; t < n; ++t) {
        for (std::size_t i = 0; i < p; ++i) {
            double v = -w[t - 1 - i];
            for (std::size_t k = 0; k < q && k < t; ++k) v -= theta[k] * de_phi[i][t - 1 - k];
            de_phi[i][t] = v;
            g.d_phi[i] += 2.0 * eps[t] * v;
        }
        for (std::size_t j = 0; j < q; ++j) {
            double v = (j < t) ? -eps[t - 1 - j] : 0.0;
            for (std::size_t k = 0; k < q && k < t; ++k) v -= theta[k] * de_theta[j][t - 1 - k];
            de_theta[j][t] = v;
            g.d_theta[j] += 2.0 * eps[t] * v;
        }
        if (fit_intercept) {
            double v = -1.0;
            for (std::size_t k = 0; k < q && k < t; ++k) v -= theta[k] * de_c[t - 1 - k];
            de_c[t] = v;
            g.d_c += 2.0 * eps[t] * v;
        }
    }
    return g;
}

/// Plain Adam on the packed parameter vector (no tensor machinery needed for
/// a handful of scalars).
struct ScalarAdam {
    explicit ScalarAdam(std::size_t n, double lr) : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

    void step(std::vector<double>& x, const std::vector<double>& grad) {
        ++t_;
        const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(t_));
        for (std::size_t i = 0; i < x.size(); ++i) {
            m_[i] = 0.9 * m_[i] + 0.1 * grad[i];
            v_[i] = 0.999 * v_[i] + 0.001 * grad[i] * grad[i];
            x[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + 1e-8);
        }
    }

    double lr_;
    std::uint64_t t_ = 0;
    std::vector<double> m_, v_;
};

void require_finite(const std::vector<double>& series) {
    for (double v : series) {
        if (!std::isfinite(v)) throw DataError("series contains a non-finite value");
    }
}

}  // namespace

void validate(const ArimaOrder& order) {
    if (order.p + order.q == 0 && order.d == 0) {
        throw ConfigError("ARIMA order (0,0,0) names no model; need p + q >= 1 or d >= 1");
    }
}

ArimaModel fit_arima(const std::vector<double>& series, ArimaOrder order, ArimaFitConfig config) {
    validate(order);
    require_finite(series);
    const std::size_t p = order.p, d = order.d, q = order.q;
    if (series.size() <= p + d + q + 10) {
        throw DataError("series too short to fit ARIMA(" + std::to_string(p) + "," +
                        std::to_string(d) + "," + std::to_string(q) + "): need more than " +
                        std::to_string(p + d + q + 10) + " points, got " +
                        std::to_string(series.size()));
    }

    const std::vector<double> w = difference(series, d);
    const bool fit_intercept = (d == 0);

    ArimaModel model;
    model.order = order;
    model.ar.assign(p, 0.0);
    model.ma.assign(q, 0.0);
    model.n_obs = w.size();
    if (fit_intercept) {
        double mean = 0.0;
        for (double v : w) mean += v;
        model.intercept = mean / static_cast<double>(w.size());
    }

    std::vector<double> eps;
    if (p + q == 0 && !fit_intercept) {
        model.css = css_residuals(w, model.ar, model.ma, 0.0, eps);
        return model;  // pure differencing: nothing to estimate
    }

    const std::size_t n_params = p + q + (fit_intercept ? 1 : 0);
    std::vector<double> x(n_params, 0.0);
    if (fit_intercept) x[p + q] = model.intercept;

    const double denom = static_cast<double>(w.size() > p ? w.size() - p : 1);
    auto unpack = [&](const std::vector<double>& v, std::vector<double>& phi,
                      std::vector<double>& theta, double& c) {
        phi.assign(v.begin(), v.begin() + p);
        theta.assign(v.begin() + p, v.begin() + p + q);
        c = fit_intercept ? v[p + q] : 0.0;
    };

    ScalarAdam adam(n_params, config.learning_rate);
    std::vector<double> phi, theta;
    double c = 0.0;
    std::vector<double> best_x = x;
    double best_css = std::numeric_limits<double>::infinity();
    double prev_css = std::numeric_limits<double>::infinity();
    std::size_t stall = 0;
    bool converged = false;

    std::vector<double> grad(n_params);
    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        unpack(x, phi, theta, c);
        const double css = css_residuals(w, phi, theta, c, eps);
        if (std::isfinite(css) && css < best_css) {
            best_css = css;
            best_x = x;
        }
        if (!std::isfinite(css)) {  // diverged: restart softer from the best point
            x = best_x;
            adam = ScalarAdam(n_params, adam.lr_ * 0.5);
            prev_css = std::numeric_limits<double>::infinity();
            stall = 0;
            continue;
        }
        if (prev_css - css <= config.tol * std::max(1.0, prev_css)) {
            if (++stall >= 25) {
                converged = true;
                break;
            }
        } else {
            stall = 0;
        }
        prev_css = css;

        const Gradients g = css_gradient(w, phi, theta, c, fit_intercept, eps);
        for (std::size_t i = 0; i < p; ++i) grad[i] = g.d_phi[i] / denom;
        for (std::size_t j = 0; j < q; ++j) grad[p + j] = g.d_theta[j] / denom;
        if (fit_intercept) grad[p + q] = g.d_c / denom;
        adam.step(x, grad);
    }

    unpack(best_x, model.ar, model.ma, model.intercept);
    if (!fit_intercept) model.intercept = 0.0;
    model.converged = converged;

    bool reflected = enforce_invertibility(model.ma);
    reflected |= enforce_stability(model.ar);
    if (reflected) {
        // Re-settle the parameters around the reflected polynomials.
        std::vector<double> y = best_x;
        for (std::size_t i = 0; i < p; ++i) y[i] = model.ar[i];
        for (std::size_t j = 0; j < q; ++j) y[p + j] = model.ma[j];
        ScalarAdam polish(n_params, config.learning_rate * 0.5);
        double polish_best = css_residuals(w, model.ar, model.ma, model.intercept, eps);
        std::vector<double> polish_best_x = y;
        for (std::size_t iter = 0; iter < config.max_iters / 4; ++iter) {
            unpack(y, phi, theta, c);
            const double css = css_residuals(w, phi, theta, c, eps);
            if (std::isfinite(css) && css < polish_best) {
                polish_best = css;
                polish_best_x = y;
            }
            if (!std::isfinite(css)) break;
            const Gradients g = css_gradient(w, phi, theta, c, fit_intercept, eps);
            for (std::size_t i = 0; i < p; ++i) grad[i] = g.d_phi[i] / denom;
            for (std::size_t j = 0; j < q; ++j) grad[p + j] = g.d_theta[j] / denom;
            if (fit_intercept) grad[p + q] = g.d_c / denom;
            polish.step(y, grad);
        }
        unpack(polish_best_x, model.ar, model.ma, model.intercept);
        if (!fit_intercept) model.intercept = 0.0;
        enforce_invertibility(model.ma);  // keep the final polynomials in-region
        enforce_stability(model.ar);
    }

    model.css = css_residuals(w, model.ar, model.ma, model.intercept, eps);
    return model;
}

std::vector<double> forecast_arima(const ArimaModel& model, const std::vector<double>& context,
                                   std::size_t horizon) {
    const std::size_t p = model.order.p, d = model.order.d, q = model.order.q;
    require_finite(context);
    if (context.size() < p + d) {
        throw DataError("ARIMA context needs at least p + d = " + std::to_string(p + d) +
                        " points, got " + std::to_string(context.size()));
    }

    // Tails of every differencing level, needed to undo the differencing.
    std::vector<std::vector<double>> levels(d + 1);
    levels[0] = context;
    for (std::size_t pass = 1; pass <= d; ++pass) levels[pass] = difference(levels[pass - 1], 1);
    const std::vector<double>& w = levels[d];

    std::vector<double> eps;
    css_residuals(w, model.ar, model.ma, model.intercept, eps);

    // Forecast on the differenced scale with future shocks at zero.
    std::vector<double> extended = w;
    extended.reserve(w.size() + horizon);
    const std::size_t n = w.size();
    for (std::size_t h = 0; h < horizon; ++h) {
        const std::size_t t = n + h;
        double value = model.intercept;
        for (std::size_t i = 0; i < p; ++i) {
            if (t >= i + 1) value += model.ar[i] * extended[t - 1 - i];
        }
        for (std::size_t k = 0; k < q; ++k) {
            if (t >= k + 1 && t - 1 - k < n) value += model.ma[k] * eps[t - 1 - k];
        }
        extended.push_back(value);
    }

    // Undo the differencing passes from the innermost level outwards.
    std::vector<double> forecast(extended.begin() + n, extended.end());
    for (std::size_t pass = d; pass-- > 0;) {
        double last = levels[pass].back();
        for (double& f : forecast) {
            last += f;
            f = last;
        }
    }
    return forecast;
}

ArimaOrder select_arima_order(const std::vector<double>& series, ArimaFitConfig config) {
    double best_aic = std::numeric_limits<double>::infinity();
    ArimaOrder best;
    bool found = false;
    for (std::size_t d = 0; d <= 1; ++d) {
        for (std::size_t p = 0; p <= 3; ++p) {
            for (std::size_t q = 0; q <= 3; ++q) {
                if (p + q == 0 && d == 0) continue;
                const ArimaOrder order{p, d, q};
                if (series.size() <= p + d + q + 10) continue;
                ArimaModel model;
                try {
                    model = fit_arima(series, order, config);
                } catch (const Error&) {
                    continue;
                }
                const double n = static_cast<double>(model.n_obs > p ? model.n_obs - p : 1);
                const double k = static_cast<double>(p + q + (d == 0 ? 1 : 0)) + 1.0;
                const double aic =
                    n * std::log(std::max(model.css / n, 1e-300)) + 2.0 * k;
                if (aic < best_aic - 1e-9) {
                    best_aic = aic;
                    best = order;
                    found = true;
                }
            }
        }
    }
    if (!found) throw DataError("series too short for ARIMA order selection");
    return best;
}

std::string arima_to_json(const ArimaModel& model) {
    nlohmann::json j;
    j["order"] = {model.order.p, model.order.d, model.order.q};
    j["ar"] = model.ar;
    j["ma"] = model.ma;
    j["intercept"] = model.intercept;
    j["converged"] = model.converged;
    j["css"] = model.css;
    j["n_obs"] = model.n_obs;
    return j.dump(2);
}

ArimaModel arima_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid ARIMA parameter document: ") + e.what());
    }
    try {
        ArimaModel model;
        const auto& order = j.at("order");
        if (!order.is_array() || order.size() != 3) {
            throw DataError("ARIMA order must be a 3-element array [p, d, q]");
        }
        model.order.p = order[0].get<std::size_t>();
        model.order.d = order[1].get<std::size_t>();
        model.order.q = order[2].get<std::size_t>();
        model.ar = j.at("ar").get<std::vector<double>>();
        model.ma = j.at("ma").get<std::vector<double>>();
        model.intercept = j.at("intercept").get<double>();
        model.converged = j.value("converged", true);
        model.css = j.value("css", 0.0);
        model.n_obs = j.value("n_obs", std::size_t{0});
        if (model.ar.size() != model.order.p || model.ma.size() != model.order.q) {
            throw DataError("ARIMA coefficient counts do not match the order");
        }
        validate(model.order);
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid ARIMA parameter document: ") + e.what());
    }
}

}  // namespace gridcast::models
