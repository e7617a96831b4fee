#pragma once

namespace srvf {
namespace mathfn {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double reg_incomplete_beta(double a, double b, double x);

/// CDF of the central Student t distribution with nu degrees of freedom.
double student_t_cdf(double t, double nu);

/// Standard normal CDF (via erfc).
double normal_cdf(double x);

/// Standard normal quantile; rational approximation polished with one
/// Halley step, absolute error well below 1e-9.
double normal_quantile(double p);

}  // namespace mathfn
}  // namespace srvf
