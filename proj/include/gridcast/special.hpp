#pragma once

namespace gridcast {

/// Regularized lower incomplete gamma P(s, x), absolute error < 1e-10.
double regularized_gamma_p(double s, double x);

/// Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x).
double regularized_gamma_q(double s, double x);

/// Chi-square survival function: probability that a chi-square variable with
/// `df` degrees of freedom exceeds x. Equals Q(df/2, x/2).
double chi_square_survival(double x, double df);

}  // namespace gridcast
