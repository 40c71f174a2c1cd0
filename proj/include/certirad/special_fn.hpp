#pragma once

#include <span>
#include <vector>

// Error function, Gaussian quantile, the truncated Taylor surrogate of the
// quantile, and the inverse regularized incomplete Beta function.
// All functions here are pure and thread-safe.
namespace certirad::special {

inline constexpr int kDefaultTaylorOrder = 15;

double erf(double x);
double erfc(double x);

// Standard normal CDF and its quantile. gaussian_quantile throws
// std::domain_error for p outside (0,1).
double gaussian_cdf(double x);
double gaussian_quantile(double p);

// Coefficients c_0..c_M of the inverse-erf power series,
//   c_0 = 1,  c_k = sum_{m=0}^{k-1} c_m c_{k-1-m} / ((m+1)(2m+1)).
std::vector<double> erf_inv_coeffs(int order);

// Order-M truncation of the quantile series,
//   sqrt(2) * sum_{k<=M} c_k/(2k+1) * (sqrt(pi)/2 * (2p-1))^(2k+1).
// Polynomial in p, total on [0,1]. One-sided: below the true quantile for
// p >= 1/2, above it for p <= 1/2.
double gaussian_quantile_taylor(double p, int order = kDefaultTaylorOrder);

// Value at p = 1; the surrogate maps [0,1] into [-this, this].
double taylor_quantile_max(int order = kDefaultTaylorOrder);

// Regularized incomplete Beta I_x(a,b) and its inverse in x.
double regularized_incomplete_beta(double x, double a, double b);
double beta_inv_cdf(double target, double a, double b);

}  // namespace certirad::special
