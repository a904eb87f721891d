#include "taildep/dists.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "taildep/special.hpp"

namespace taildep::dists {

using special::bessel_k;

GHParams standardize_gh(double shape, double skew, double lambda) {
    if (!(shape > 0.0)) throw DomainError("standardize_gh: shape must be > 0");
    if (!(std::fabs(skew) < 1.0)) throw DomainError("standardize_gh: |skew| must be < 1");

    const double zeta = shape, rho = skew;
    const double k_l = bessel_k(lambda, zeta);
    const double k_l1 = bessel_k(lambda + 1.0, zeta);
    const double k_l2 = bessel_k(lambda + 2.0, zeta);
    if (!std::isfinite(k_l) || !std::isfinite(k_l1) || !std::isfinite(k_l2) || k_l <= 0.0)
        throw NumericError("standardize_gh: no solution in search domain");

    // Mixture moments: X | W ~ N(mu + beta W, W), W ~ GIG(lambda, delta^2, g^2).
    // With R = K_{l+1}/K_l and S = K_{l+2}/K_l:
    //   Var[X] = delta^2 * [ R/zeta + rho^2/(1-rho^2) * (S - R^2) ]
    const double r1 = k_l1 / k_l;
    const double s2 = k_l2 / k_l;
    const double bracket = r1 / zeta + rho * rho / (1.0 - rho * rho) * (s2 - r1 * r1);
    if (!(bracket > 0.0) || !std::isfinite(bracket))
        throw NumericError("standardize_gh: no solution in search domain");

    GHParams g;
    g.lambda = lambda;
    g.delta = 1.0 / std::sqrt(bracket);
    const double gamma = zeta / g.delta;
    g.alpha = gamma / std::sqrt(1.0 - rho * rho);
    g.beta = rho * g.alpha;
    g.mu = -g.beta * g.delta * r1 / gamma;  // cancels E[X] = mu + beta E[W]
    return g;
}

namespace {

double gh_log_pdf(const GHParams& g, double gamma, double x) {
    // log density of GH(lambda, alpha, beta, delta, mu)
    const double l = g.lambda;
    const double q = std::sqrt(g.delta * g.delta + (x - g.mu) * (x - g.mu));
    const double zeta = g.delta * gamma;
    double c = l * std::log(gamma / g.delta) - 0.5 * std::log(2.0 * M_PI)
               - (l - 0.5) * std::log(g.alpha) - std::log(bessel_k(l, zeta));
    const double arg = g.alpha * q;
    double logk = std::log(bessel_k(l - 0.5, arg));
    return c + (l - 0.5) * std::log(q) + logk + g.beta * (x - g.mu);
}

}  // namespace

InnovationDist::InnovationDist(Family f, std::vector<double> params)
    : family_(f), params_(std::move(params)) {
    switch (family_) {
        case Family::Normal:
            break;
        case Family::StudentT: {
            const double nu = params_[0];
            if (!(nu > 2.0)) throw DomainError("student_t: nu must be > 2");
            t_scale_ = std::sqrt(nu / (nu - 2.0));
            break;
        }
        case Family::Ged: {
            const double k = params_[0];
            if (!(k > 0.0)) throw DomainError("ged: shape must be > 0");
            ged_lambda_ = std::sqrt(std::pow(2.0, -2.0 / k) * std::exp(special::ln_gamma(1.0 / k) - special::ln_gamma(3.0 / k)));
            break;
        }
        case Family::Sghyd: {
            gh_ = standardize_gh(params_[0], params_[1]);
            gh_gamma_ = std::sqrt(gh_.alpha * gh_.alpha - gh_.beta * gh_.beta);
            // golden-section search for the mode, used as the CDF cut-point
            double a = -6.0, b = 6.0;
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            double c = b - gr * (b - a), d = a + gr * (b - a);
            double fc = gh_log_pdf(gh_, gh_gamma_, c), fd = gh_log_pdf(gh_, gh_gamma_, d);
            for (int it = 0; it < 80; ++it) {
                if (fc > fd) {
                    b = d;
                    d = c, fd = fc;
                    c = b - gr * (b - a), fc = gh_log_pdf(gh_, gh_gamma_, c);
                } else {
                    a = c;
                    c = d, fc = fd;
                    d = a + gr * (b - a), fd = gh_log_pdf(gh_, gh_gamma_, d);
                }
            }
            mode_ = 0.5 * (a + b);
            break;
        }
    }
}

InnovationDist InnovationDist::normal() { return InnovationDist(Family::Normal, {}); }
InnovationDist InnovationDist::student_t(double nu) { return InnovationDist(Family::StudentT, {nu}); }
InnovationDist InnovationDist::ged(double shape) { return InnovationDist(Family::Ged, {shape}); }
InnovationDist InnovationDist::sghyd(double shape, double skew) {
    return InnovationDist(Family::Sghyd, {shape, skew});
}

const GHParams& InnovationDist::gh_params() const {
    if (family_ != Family::Sghyd) throw DomainError("gh_params: not an Sghyd distribution");
    return gh_;
}

double InnovationDist::pdf(double x) const {
    return std::exp(log_pdf(x));
}

double InnovationDist::log_pdf(double x) const {
    switch (family_) {
        case Family::Normal:
            return -0.5 * x * x - 0.9189385332046727418;
        case Family::StudentT: {
            const double nu = params_[0];
            const double z = t_scale_ * x;
            const double c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)
                             - 0.5 * std::log(nu * M_PI) + std::log(t_scale_);
            return c - 0.5 * (nu + 1.0) * std::log1p(z * z / nu);
        }
        case Family::Ged: {
            const double k = params_[0];
            const double az = std::fabs(x / ged_lambda_);
            const double logc = std::log(k) - std::log(ged_lambda_) - (1.0 + 1.0 / k) * M_LN2
                                - special::ln_gamma(1.0 / k);
            return logc - 0.5 * std::pow(az, k);
        }
        case Family::Sghyd:
            return gh_log_pdf(gh_, gh_gamma_, x);
    }
    return -std::numeric_limits<double>::infinity();
}

double InnovationDist::cdf(double x) const {
    switch (family_) {
        case Family::Normal:
            return special::norm_cdf(x);
        case Family::StudentT:
            return special::t_cdf(t_scale_ * x, params_[0]);
        case Family::Ged: {
            const double k = params_[0];
            if (x == 0.0) return 0.5;
            const double p = special::gamma_p(1.0 / k, 0.5 * std::pow(std::fabs(x) / ged_lambda_, k));
            return x > 0.0 ? 0.5 + 0.5 * p : 0.5 - 0.5 * p;
        }
        case Family::Sghyd: {
            // adaptive quadrature of the density over the tail on the near
            // side of the mode, so the integrand is monotone-decaying
            auto f = [this](double t) { return pdf(t); };
            boost::math::quadrature::exp_sinh<double> integrator;
            if (x <= mode_) {
                const double tail = integrator.integrate(
                    [&](double s) { return f(x - s); }, 1e-12);
                return std::clamp(tail, 0.0, 1.0);
            }
            const double tail = integrator.integrate(
                [&](double s) { return f(x + s); }, 1e-12);
            return std::clamp(1.0 - tail, 0.0, 1.0);
        }
    }
    return 0.0;
}

double InnovationDist::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must be in (0,1)");
    switch (family_) {
        case Family::Normal:
            return special::norm_quantile(p);
        case Family::StudentT:
            return special::t_quantile(p, params_[0]) / t_scale_;
        case Family::Ged: {
            // seed from the inverse incomplete gamma, then polish on the CDF
            const double k = params_[0];
            const double q = special::gamma_p_inv(1.0 / k, std::fabs(2.0 * p - 1.0));
            double x0 = ged_lambda_ * std::pow(2.0 * q, 1.0 / k);
            if (p < 0.5) x0 = -x0;
            return quantile_root(p, x0);
        }
        case Family::Sghyd: {
            // bracket expansion from the mode, then bisection/Newton
            return quantile_root(p, mode_);
        }
    }
    return 0.0;
}

double InnovationDist::quantile_root(double p, double x0) const {
    // expand a bracket around the seed until it straddles p
    double lo = x0 - 1.0, hi = x0 + 1.0;
    double flo = cdf(lo), fhi = cdf(hi);
    double step = 1.0;
    for (int it = 0; it < 200 && flo > p; ++it) {
        hi = lo, fhi = flo;
        step *= 2.0;
        lo -= step;
        flo = cdf(lo);
    }
    for (int it = 0; it < 200 && fhi < p; ++it) {
        lo = hi, flo = fhi;
        step *= 2.0;
        hi += step;
        fhi = cdf(hi);
    }
    if (flo > p || fhi < p) throw NumericError("quantile: bracket expansion failed");

    double x = std::clamp(x0, lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double f = cdf(x);
        const double err = f - p;
        if (std::fabs(err) <= 1e-10) return x;
        if (err > 0.0) hi = x; else lo = x;
        const double d = pdf(x);
        double xn = d > 0.0 ? x - err / d : x;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);  // bisection fallback
        if (xn == x) xn = 0.5 * (lo + hi);
        x = xn;
        if (hi - lo < 1e-15 * (1.0 + std::fabs(x))) return x;
    }
    return x;
}

std::vector<double> InnovationDist::sample(int n, std::uint64_t seed) const {
    if (n < 0) throw DomainError("sample: n must be >= 0");
    Rng rng(seed);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& v : out) v = sample_one(rng);
    return out;
}

double InnovationDist::sample_one(Rng& rng) const {
    switch (family_) {
        case Family::Normal:
            return rng.normal();
        case Family::StudentT: {
            // t = Z / sqrt(V/nu), V ~ chi^2_nu via inverse gamma CDF
            const double nu = params_[0];
            const double z = rng.normal();
            const double v = 2.0 * special::gamma_p_inv(0.5 * nu, rng.uniform());
            return z / std::sqrt(v / nu) / t_scale_;
        }
        case Family::Ged:
            return quantile(rng.uniform());
        case Family::Sghyd: {
            // NIG mixture: W ~ InverseGaussian(delta/gamma, delta^2), then
            // X | W ~ N(mu + beta W, W). Michael-Schucany-Haas IG sampler.
            const double mu_ig = gh_.delta / gh_gamma_;
            const double lam_ig = gh_.delta * gh_.delta;
            const double z = rng.normal();
            const double y = z * z;
            double w = mu_ig + mu_ig * mu_ig * y / (2.0 * lam_ig)
                       - mu_ig / (2.0 * lam_ig)
                             * std::sqrt(4.0 * mu_ig * lam_ig * y + mu_ig * mu_ig * y * y);
            if (rng.uniform() > mu_ig / (mu_ig + w)) w = mu_ig * mu_ig / w;
            return gh_.mu + gh_.beta * w + std::sqrt(w) * rng.normal();
        }
    }
    return 0.0;
}

}  // namespace taildep::dists
