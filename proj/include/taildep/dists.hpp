#pragma once

#include <cstdint>
#include <vector>

#include "taildep/common.hpp"

namespace taildep::dists {

enum class Family { Normal, StudentT, Ged, Sghyd };

/// Classical generalized-hyperbolic parameter set.
struct GHParams {
    double lambda;  ///< index
    double alpha;   ///< shape, > 0
    double beta;    ///< asymmetry, |beta| < alpha
    double delta;   ///< scale, > 0
    double mu;      ///< location
};

/// Map the (shape, skew) pair onto a classical GH parameter set with
/// analytic mean 0 and variance 1.
///
/// Convention: `shape` is the scale-invariant Barndorff-Nielsen parameter
/// zeta = delta*sqrt(alpha^2-beta^2) (> 0), `skew` is rho = beta/alpha in
/// (-1,1), and the GH index lambda is held fixed (default -1/2, the
/// normal-inverse-Gaussian subfamily). For fixed (lambda, zeta, rho) the
/// family is closed under affine maps, so delta and mu are pinned by the
/// closed-form GH moment expressions in Bessel-function ratios.
GHParams standardize_gh(double shape, double skew, double lambda = -0.5);

/// Innovation law for GARCH standardized residuals. Every variant has mean 0
/// and variance 1. Immutable after construction; safe for shared reads.
class InnovationDist {
public:
    static InnovationDist normal();
    static InnovationDist student_t(double nu);     ///< nu > 2
    static InnovationDist ged(double shape);        ///< shape > 0
    static InnovationDist sghyd(double shape, double skew);

    Family family() const { return family_; }
    /// Free parameters of the variant (empty, {nu}, {shape} or {shape, skew}).
    const std::vector<double>& params() const { return params_; }
    int n_params() const { return static_cast<int>(params_.size()); }
    /// GH parameter set backing the Sghyd variant.
    const GHParams& gh_params() const;

    double pdf(double x) const;
    double log_pdf(double x) const;
    double cdf(double x) const;
    /// Inverse CDF. Closed form for Normal/StudentT; bracketed root search on
    /// the CDF (tolerance 1e-10 in probability) for Ged/Sghyd.
    double quantile(double p) const;

    std::vector<double> sample(int n, std::uint64_t seed) const;
    double sample_one(Rng& rng) const;

private:
    InnovationDist(Family f, std::vector<double> params);
    double quantile_root(double p, double x0) const;

    Family family_;
    std::vector<double> params_;
    // cached derived quantities
    double t_scale_ = 0.0;       // sqrt(nu/(nu-2))
    double ged_lambda_ = 0.0;    // GED scale for unit variance
    GHParams gh_{};              // standardized GH parameters (Sghyd)
    double gh_gamma_ = 0.0;      // sqrt(alpha^2-beta^2)
    double mode_ = 0.0;          // used as the quadrature cut-point
};

}  // namespace taildep::dists
