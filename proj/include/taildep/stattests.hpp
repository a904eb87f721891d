#pragma once

#include <span>
#include <string>
#include <vector>

namespace taildep::stats {

struct TestResult {
    double statistic = 0.0;
    double p_value = 0.0;
    int lag = 0;             ///< lags used (or df, for chi-squared tests)
    std::string method;
};

/// Sample autocorrelations rho_0..rho_max_lag (rho_0 == 1).
/// Rejects series whose observations are all equal except at most one.
std::vector<double> acf(std::span<const double> x, int max_lag);

/// Ljung-Box portmanteau Q test against chi^2(lags).
TestResult ljung_box(std::span<const double> x, int lags);

/// Two-sided Kolmogorov-Smirnov test of U(0,1) uniformity; exact sup over
/// the jump points, p-value from the asymptotic Kolmogorov distribution at
/// Stephens' finite-sample-adjusted argument.
TestResult ks_uniform(std::span<const double> y);

enum class AdfTrend { None, Constant, ConstantTrend };

/// Augmented Dickey-Fuller unit-root t-test with `lags` lagged differences.
/// P-values by MacKinnon (1994) response-surface interpolation.
TestResult adf(std::span<const double> x, int lags, AdfTrend trend = AdfTrend::Constant);

/// Engle-Granger two-step cointegration test: OLS of y on x with intercept,
/// then ADF (no deterministics) on the residuals with residual-based
/// (N = 2) MacKinnon p-values.
TestResult engle_granger(std::span<const double> x, std::span<const double> y, int lags = 1);

}  // namespace taildep::stats
