#pragma once

namespace gammix {

/// log Gamma(x) for x > 0. Lanczos below 15, Stirling series above.
/// Throws std::domain_error for x <= 0 or NaN.
double log_gamma(double x);

/// log Gamma(x) - [(x - 1/2) log x - x + log(2 pi) / 2], x > 0. Accurate to
/// rounding for large x, where subtracting from log_gamma would cancel.
double log_gamma_remainder(double x);

/// psi(x) = d/dx log Gamma(x), x > 0.
double digamma(double x);

/// psi_1(x) = d^2/dx^2 log Gamma(x), x > 0.
double trigamma(double x);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

/// log B(a, b)
double log_beta(double a, double b);

/// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b);

}  // namespace gammix
