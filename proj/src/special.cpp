#include "gridcast/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridcast {

namespace {

// Both evaluations share the prefactor x^s e^{-x} / Gamma(s), computed in log
// space to survive large s or x.
double log_prefactor(double s, double x) {
    return s * std::log(x) - x - std::lgamma(s);
}

// Series expansion of P(s, x); converges fast for x < s + 1.
double gamma_p_series(double s, double x) {
    double term = 1.0 / s;
    double sum = term;
    double a = s;
    for (int n = 0; n < 1000; ++n) {
        a += 1.0;
        term *= x / a;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) {
            return sum * std::exp(log_prefactor(s, x));
        }
    }
    throw std::runtime_error("incomplete gamma series failed to converge");
}

// Modified Lentz continued fraction for Q(s, x); converges fast for x >= s + 1.
double gamma_q_continued_fraction(double s, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) {
            return h * std::exp(log_prefactor(s, x));
        }
    }
    throw std::runtime_error("incomplete gamma continued fraction failed to converge");
}

}  // namespace

double regularized_gamma_p(double s, double x) {
    if (s <= 0.0) throw std::invalid_argument("gamma shape must be positive");
    if (x < 0.0) throw std::invalid_argument("gamma argument must be nonnegative");
    if (x == 0.0) return 0.0;
    if (x < s + 1.0) return gamma_p_series(s, x);
    return 1.0 - gamma_q_continued_fraction(s, x);
}

double regularized_gamma_q(double s, double x) {
    if (s <= 0.0) throw std::invalid_argument("gamma shape must be positive");
    if (x < 0.0) throw std::invalid_argument("gamma argument must be nonnegative");
    if (x == 0.0) return 1.0;
    if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
    return gamma_q_continued_fraction(s, x);
}

double chi_square_survival(double x, double df) {
    if (df <= 0.0) throw std::invalid_argument("degrees of freedom must be positive");
    if (x <= 0.0) return 1.0;
    if (!std::isfinite(x)) return 0.0;
    return regularized_gamma_q(df / 2.0, x / 2.0);
}

}  // namespace gridcast
