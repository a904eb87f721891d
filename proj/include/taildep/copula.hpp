#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "taildep/common.hpp"
#include "taildep/stattests.hpp"

namespace taildep::copula {

/// Paired normalized ranks (u_t, v_t) in (0,1)^2.
struct PseudoSample {
    std::vector<double> u, v;
    int size() const { return static_cast<int>(u.size()); }
};

/// Rank transform u_t = rank(x_t)/(T+1) with ties averaged.
PseudoSample pseudo_obs(std::span<const double> x, std::span<const double> y);

/// Sample Kendall tau (tau-b tie correction), O(T log T) merge counting.
double kendall_tau(const PseudoSample& s);

/// Pearson correlation of the rank vectors.
double spearman_rho(const PseudoSample& s);

/// Elliptical-copula relations between rank and linear correlation.
double tau_to_rho(double tau);        ///< rho = sin(pi*tau/2)
double rho_s_to_rho(double rho_s);    ///< rho = 2*sin(pi*rho_s/6)

enum class Family { Independent, Gaussian, StudentT, Clayton, Gumbel, Frank, Joe };

/// Bivariate copula model: theta is the dependence parameter (rho for the
/// elliptical families); nu is used by StudentT only.
struct CopulaModel {
    Family family = Family::Independent;
    double theta = 0.0;
    double nu = 0.0;
};

const char* family_name(Family f);
Family family_from_name(const std::string& name);
int family_n_params(Family f);

void validate_model(const CopulaModel& m);

double copula_cdf(const CopulaModel& m, double u, double v);
double copula_pdf(const CopulaModel& m, double u, double v);

/// Analytic Kendall tau of the family at its parameter.
double analytic_tau(const CopulaModel& m);

/// Draws with uniform margins; conditional-distribution method for the
/// Archimedean families, correlation transform for the elliptical ones.
PseudoSample copula_sample(const CopulaModel& m, int n, std::uint64_t seed);

/// Inverse-tau estimator. Closed form for Gaussian/StudentT/Clayton/Gumbel;
/// bracketed root of the analytic tau(theta) for Frank and Joe (tolerance
/// 1e-10 in tau). For StudentT, nu is profiled by likelihood on (2, 10].
CopulaModel fit_inverse_tau(Family f, const PseudoSample& s);

/// Maximum pseudo-likelihood estimator over the family's parameter domain.
CopulaModel fit_mle(Family f, const PseudoSample& s);

double copula_loglik(const CopulaModel& m, const PseudoSample& s);

/// AIC/BIC from the copula log-likelihood with 0/1/2 parameters per family.
struct AicBic {
    double aic, bic;
};
AicBic copula_aic_bic(const CopulaModel& m, const PseudoSample& s);

struct TailEstimate {
    double lambda_lower = 0.0;
    double lambda_upper = 0.0;
    int k = 0;  ///< scaling factor of the empirical estimator (0 for analytic)
    enum class Source { Analytic, Empirical } source = Source::Analytic;
};

/// Closed-form tail-dependence coefficients of the fitted family.
TailEstimate tail_coeffs_analytic(const CopulaModel& m);

/// Empirical copula (1/T) sum 1(U_t < u, V_t < v)  — strict inequalities.
double empirical_copula(const PseudoSample& s, double u, double v);
/// Empirical survival copula (1/T) sum 1(U_t >= u, V_t >= v).
double empirical_survival(const PseudoSample& s, double u, double v);

/// Non-parametric tail copulas at scaling factor k:
///   lower: (1/k) sum 1(u_t <= kx/(T+1), v_t <= ky/(T+1))
///   upper: (1/k) sum 1(u_t > (T-kx)/(T+1), v_t > (T-ky)/(T+1))
double tail_copula_lower(const PseudoSample& s, double x, double y, int k);
double tail_copula_upper(const PseudoSample& s, double x, double y, int k);

/// Both tail copulas evaluated at (1,1).
TailEstimate tail_coeff_estimates(const PseudoSample& s, int k);

/// Cramer-von-Mises distance sum_t (C_emp(u_t,v_t) - C_theta(u_t,v_t))^2.
double cvm_statistic(const PseudoSample& s, const CopulaModel& m);

struct GofResult {
    double statistic = 0.0;
    double p_value = 0.0;
    int n_bootstrap = 0;   ///< valid bootstrap replicates
    int n_infeasible = 0;  ///< replicates whose re-fit was infeasible
};

enum class FitMethod { InverseTau, Mle };

/// Parametric bootstrap goodness-of-fit p-value (fit, simulate, re-rank,
/// re-fit, recompute); p = (1 + #{S* >= S_obs}) / (n_valid + 1).
GofResult gof_bootstrap_pvalue(Family f, const PseudoSample& s, int n_boot, std::uint64_t seed,
                               FitMethod method = FitMethod::InverseTau, int n_threads = 1);

/// Permutation test of independence on |tau|; v-ranks permuted n_perm times.
stats::TestResult independence_permutation_test(const PseudoSample& s, int n_perm,
                                                std::uint64_t seed);

/// Empirical copula evaluated at every sample point (the atoms), computed by
/// O(T log T) dominance counting. Equals per-point evaluation exactly.
std::vector<double> empirical_copula_at_atoms(const PseudoSample& s);

}  // namespace taildep::copula
