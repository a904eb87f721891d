#include "taildep/stattests.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "taildep/common.hpp"
#include "taildep/special.hpp"

namespace taildep::stats {

namespace {

void check_series(std::span<const double> x, const char* who) {
    if (x.size() < 2) throw DataError(std::string(who) + ": series too short");
    if (!all_finite(x)) throw DataError(std::string(who) + ": non-finite values in input");
    // degenerate: all observations equal except at most one
    std::size_t n_diff = 0;
    for (std::size_t t = 1; t < x.size(); ++t)
        if (x[t] != x[0]) ++n_diff;
    if (n_diff <= 1)
        throw DataError(std::string(who) + ": degenerate series (at most one distinct value)");
}

}  // namespace

std::vector<double> acf(std::span<const double> x, int max_lag) {
    check_series(x, "acf");
    const int T = static_cast<int>(x.size());
    if (max_lag < 0 || max_lag >= T) throw DomainError("acf: max_lag must be in [0, T)");
    const double m = mean_of(x);
    double denom = 0.0;
    for (double v : x) denom += (v - m) * (v - m);
    if (denom <= 0.0) throw DataError("acf: zero-variance series");
    std::vector<double> rho(static_cast<std::size_t>(max_lag) + 1, 0.0);
    rho[0] = 1.0;
    for (int h = 1; h <= max_lag; ++h) {
        double num = 0.0;
        for (int t = h; t < T; ++t) num += (x[t] - m) * (x[t - h] - m);
        rho[h] = num / denom;
    }
    return rho;
}

TestResult ljung_box(std::span<const double> x, int lags) {
    if (lags < 1) throw DomainError("ljung_box: lags must be >= 1");
    const auto rho = acf(x, lags);
    const double T = static_cast<double>(x.size());
    double q = 0.0;
    for (int h = 1; h <= lags; ++h) q += rho[h] * rho[h] / (T - h);
    q *= T * (T + 2.0);
    TestResult r;
    r.statistic = q;
    r.p_value = special::chi2_sf(q, lags);
    r.lag = lags;
    r.method = "ljung_box";
    return r;
}

TestResult ks_uniform(std::span<const double> y) {
    if (y.empty()) throw DataError("ks_uniform: empty input");
    std::vector<double> s(y.begin(), y.end());
    for (double v : s)
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("ks_uniform: values must lie in [0,1]");
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double fn_hi = static_cast<double>(i + 1) / n;
        const double fn_lo = static_cast<double>(i) / n;
        d = std::max({d, fn_hi - s[i], s[i] - fn_lo});
    }
    const double sqn = std::sqrt(n);
    TestResult r;
    r.statistic = d;
    r.p_value = special::kolmogorov_sf((sqn + 0.12 + 0.11 / sqn) * d);
    r.lag = static_cast<int>(s.size());
    r.method = "ks";
    return r;
}

namespace {

// MacKinnon (1994) p-value response surfaces and (2010) critical-value
// surfaces for the Dickey-Fuller tau distribution. Rows are indexed by the
// number of I(1) series N (N=1: plain ADF, N=2: Engle-Granger residuals).
// Values reproduce the published tables bit-for-bit.
struct MacKinnonSurface {
    double tau_max[2];
    double tau_min[2];
    double tau_star[2];
    double smallp[2][3];   // cubic in the statistic
    double largep[2][4];   // quartic in the statistic (scaled coefficients)
};

const MacKinnonSurface mk_none = {
    {1e308, 1.51},
    {-19.04, -19.62},
    {-1.04, -1.53},
    {{0.6344, 1.2378, 3.2496e-2}, {1.9129, 1.3857, 3.5322e-2}},
    {{0.4797, 9.3557e-1, -0.6999e-1, 3.3066e-2}, {1.5578, 8.558e-1, -2.083e-1, -3.3549e-2}},
};
const MacKinnonSurface mk_const = {
    {2.74, 0.92},
    {-18.83, -18.86},
    {-1.61, -2.62},
    {{2.1659, 1.4412, 3.8269e-2}, {2.92, 1.5012, 3.9796e-2}},
    {{1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2}, {2.1945, 6.4695e-1, -2.9198e-1, -4.2377e-2}},
};
const MacKinnonSurface mk_trend = {
    {0.7, 0.63},
    {-16.18, -21.15},
    {-2.89, -3.19},
    {{3.2512, 1.6047, 4.9588e-2}, {3.6646, 1.5419, 3.6448e-2}},
    {{2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2}, {2.85, 5.272e-1, -3.6622e-1, -5.1695e-2}},
};

double mackinnon_pvalue(double stat, AdfTrend trend, int n_series) {
    const MacKinnonSurface& s = trend == AdfTrend::None      ? mk_none
                                : trend == AdfTrend::Constant ? mk_const
                                                              : mk_trend;
    const int i = n_series - 1;
    if (stat > s.tau_max[i]) return 1.0;
    if (stat < s.tau_min[i]) return 0.0;
    double z;
    if (stat <= s.tau_star[i]) {
        const auto& c = s.smallp[i];
        z = c[0] + stat * (c[1] + stat * c[2]);
    } else {
        const auto& c = s.largep[i];
        z = c[0] + stat * (c[1] + stat * (c[2] + stat * c[3]));
    }
    return special::norm_cdf(z);
}

struct Ols {
    Eigen::VectorXd beta;
    Eigen::VectorXd se;
    Eigen::VectorXd resid;
    double sigma2;
};

Ols ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const char* who) {
    const auto qr = X.colPivHouseholderQr();
    if (qr.rank() < X.cols())
        throw NumericError(std::string(who) + ": singular regression");
    Ols o;
    o.beta = qr.solve(y);
    o.resid = y - X * o.beta;
    const double dof = static_cast<double>(X.rows() - X.cols());
    if (dof <= 0) throw DataError(std::string(who) + ": not enough observations");
    o.sigma2 = o.resid.squaredNorm() / dof;
    const double yscale = y.squaredNorm() / static_cast<double>(y.size()) + 1e-300;
    if (o.sigma2 <= 1e-24 * yscale)
        throw NumericError(std::string(who) + ": degenerate regression (zero residual variance)");
    const Eigen::MatrixXd xtx_inv =
        (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(X.cols(), X.cols()));
    o.se = (o.sigma2 * xtx_inv.diagonal().array()).sqrt();
    return o;
}

double adf_tstat(std::span<const double> x, int lags, AdfTrend trend, const char* who) {
    const int T = static_cast<int>(x.size());
    if (lags < 0) throw DomainError("adf: lags must be >= 0");
    if (T <= lags + 10) throw DataError("adf: series too short for requested lags");

    const int nobs = T - 1 - lags;          // usable rows
    const int ndet = trend == AdfTrend::None ? 0 : (trend == AdfTrend::Constant ? 1 : 2);
    const int ncol = 1 + lags + ndet;
    Eigen::MatrixXd X(nobs, ncol);
    Eigen::VectorXd y(nobs);
    for (int i = 0; i < nobs; ++i) {
        const int t = i + lags + 1;          // index into x of the Delta x_t row
        y(i) = x[t] - x[t - 1];
        int c = 0;
        X(i, c++) = x[t - 1];
        for (int j = 1; j <= lags; ++j) X(i, c++) = x[t - j] - x[t - j - 1];
        if (ndet >= 1) X(i, c++) = 1.0;
        if (ndet >= 2) X(i, c++) = static_cast<double>(i + 1);
    }
    const Ols o = ols(X, y, who);
    return o.beta(0) / o.se(0);
}

}  // namespace

TestResult adf(std::span<const double> x, int lags, AdfTrend trend) {
    check_series(x, "adf");
    const double tstat = adf_tstat(x, lags, trend, "adf");
    TestResult r;
    r.statistic = tstat;
    r.p_value = mackinnon_pvalue(tstat, trend, 1);
    r.lag = lags;
    r.method = "adf";
    return r;
}

TestResult engle_granger(std::span<const double> x, std::span<const double> y, int lags) {
    if (x.size() != y.size()) throw DataError("engle_granger: length mismatch");
    check_series(x, "engle_granger");
    check_series(y, "engle_granger");
    const int T = static_cast<int>(x.size());

    Eigen::MatrixXd X(T, 2);
    Eigen::VectorXd Y(T);
    for (int t = 0; t < T; ++t) {
        X(t, 0) = 1.0;
        X(t, 1) = x[t];
        Y(t) = y[t];
    }
    const Ols o = ols(X, Y, "engle_granger");

    std::vector<double> resid(o.resid.data(), o.resid.data() + o.resid.size());
    double rvar = variance_of(resid);
    double yvar = variance_of(y);
    if (rvar <= 1e-20 * (yvar + 1e-300))
        throw NumericError("engle_granger: degenerate residuals (exact linear relation)");

    const double tstat = adf_tstat(resid, lags, AdfTrend::None, "engle_granger");
    TestResult r;
    r.statistic = tstat;
    r.p_value = mackinnon_pvalue(tstat, AdfTrend::Constant, 2);
    r.lag = lags;
    r.method = "engle_granger";
    return r;
}

}  // namespace taildep::stats
