#pragma once

#include <span>

namespace taildep::special {

/// Natural log of the Gamma function. Domain x > 0.
double ln_gamma(double x);

/// Modified Bessel function of the second kind K_nu(x), real order.
/// Uses the symmetry K_nu = K_{-nu}; domain x > 0.
double bessel_k(double nu, double x);

double norm_pdf(double x);
double norm_cdf(double x);
double norm_quantile(double p);

/// Student-t (unstandardized, nu degrees of freedom).
double t_pdf(double x, double nu);
double t_cdf(double x, double nu);
double t_quantile(double p, double nu);

/// Survival function of the chi-squared distribution with k df.
double chi2_sf(double x, double k);

/// Regularized lower incomplete gamma P(a,x) and its inverse in x.
double gamma_p(double a, double x);
double gamma_p_inv(double a, double p);

/// Kolmogorov distribution survival function Q(lambda) = P(K > lambda).
double kolmogorov_sf(double lambda);

/// Debye function of order one, D1(x) = (1/x) * integral_0^x t/(e^t-1) dt.
/// Defined for all real x via D1(-x) = D1(x) + x/2.
double debye1(double x);

/// Bivariate standard normal CDF P(X <= h, Y <= k) with correlation rho.
/// Genz/Drezner-Wesolowsky hybrid, absolute error below 1e-14.
double bvn_cdf(double h, double k, double rho);

/// Bivariate Student-t CDF P(X <= x, Y <= y), correlation rho, nu df,
/// by adaptive quadrature of the conditional-t representation.
double bvt_cdf(double x, double y, double rho, double nu);

}  // namespace taildep::special
