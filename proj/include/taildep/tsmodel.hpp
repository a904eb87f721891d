#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "taildep/dists.hpp"

namespace taildep::ts {

/// Model orders and innovation family. The default search space keeps all
/// lag orders at or below 2; larger orders are accepted when set explicitly.
struct ModelSpec {
    int p = 0;  ///< AR order
    int q = 0;  ///< MA order
    int k = 0;  ///< GARCH order (lags of sigma^2)
    int l = 0;  ///< ARCH order (lags of a^2)
    bool fractional = false;
    dists::Family dist = dists::Family::Normal;
};

struct ArmaGarchParams {
    double mu = 0.0;
    std::vector<double> ar;     ///< phi_1..phi_p
    std::vector<double> ma;     ///< theta_1..theta_q
    double omega = 0.0;         ///< variance intercept, >= 0
    std::vector<double> arch;   ///< alpha_1..alpha_l on lagged a^2, >= 0
    std::vector<double> garch;  ///< beta_1..beta_k on lagged sigma^2, >= 0
    double d = 0.0;             ///< fractional order in [0, 0.5)
    std::vector<double> dist_params;
};

struct FilterOutput {
    std::vector<double> a;      ///< shocks
    std::vector<double> sigma;  ///< conditional volatility, > 0
    std::vector<double> eps;    ///< standardized residuals a/sigma
    double loglik = 0.0;
};

struct FittedModel {
    ModelSpec spec;
    ArmaGarchParams params;
    double loglik = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    std::vector<std::string> param_names;
    std::vector<double> std_errors;  ///< NaN when the Hessian is not invertible
    FilterOutput filter;
    bool converged = false;
};

/// Coefficients pi_0..pi_{n-1} of the fractional difference operator (1-B)^d,
/// pi_0 = 1, pi_j = pi_{j-1} * (j-1-d)/j.
std::vector<double> fracdiff_coeffs(double d, int n);

/// Number of free parameters implied by a spec.
int n_free_params(const ModelSpec& spec);

dists::InnovationDist make_dist(dists::Family f, const std::vector<double>& dist_params);

/// Run the ARMA(-fractional)-GARCH recursions and accumulate the
/// log-likelihood sum_t [ln f(eps_t) - ln sigma_t]. Pre-sample sigma^2 is the
/// sample variance of r; pre-sample shocks and mean-adjusted values are zero.
FilterOutput filter(const ModelSpec& spec, const ArmaGarchParams& params,
                    std::span<const double> r);

struct FitOptions {
    double loglik_tol = 1e-8;
    int max_eval_per_start = 60000;
};

/// Constrained maximum likelihood via transformed Nelder-Mead from three
/// documented starting points; ties broken by higher log-likelihood, then by
/// smaller parameter norm. Standard errors from the inverse numerical Hessian.
FittedModel fit(const ModelSpec& spec, std::span<const double> r, const FitOptions& opt = {});

/// Generate a series by running the model recursions forward with innovations
/// drawn from the spec's distribution; 500 burn-in observations discarded.
std::vector<double> simulate(const ModelSpec& spec, const ArmaGarchParams& params, int T,
                             std::uint64_t seed);

/// Probability integral transform y_t = F(eps_t).
std::vector<double> pit_series(const dists::InnovationDist& d, std::span<const double> eps);

}  // namespace taildep::ts
