#include "taildep/tsmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "taildep/optim.hpp"
#include "taildep/special.hpp"

namespace taildep::ts {

namespace {

constexpr double kMaxPersistence = 0.999;
constexpr double kSigma2Cap = 1e100;

void validate_spec(const ModelSpec& spec) {
    if (spec.p < 0 || spec.q < 0 || spec.k < 0 || spec.l < 0)
        throw DomainError("tsmodel: negative lag order");
    if (spec.k > 0 && spec.l == 0)
        throw DomainError("tsmodel: GARCH(k,0) with k>0 is not identifiable");
}

void validate_params(const ModelSpec& spec, const ArmaGarchParams& par, bool strict) {
    if (static_cast<int>(par.ar.size()) != spec.p || static_cast<int>(par.ma.size()) != spec.q
        || static_cast<int>(par.arch.size()) != spec.l
        || static_cast<int>(par.garch.size()) != spec.k)
        throw DomainError("tsmodel: parameter vector sizes do not match spec");
    if (!(par.omega >= 0.0)) throw DomainError("tsmodel: omega must be >= 0");
    double s = 0.0;
    for (double v : par.arch) {
        if (!(v >= 0.0)) throw DomainError("tsmodel: arch coefficients must be >= 0");
        s += v;
    }
    for (double v : par.garch) {
        if (!(v >= 0.0)) throw DomainError("tsmodel: garch coefficients must be >= 0");
        s += v;
    }
    if (strict && s >= 1.0)
        throw DomainError("tsmodel: covariance stationarity requires sum(arch)+sum(garch) < 1");
    if (!(std::fabs(par.d) < 0.5) && par.d != 0.0)
        throw DomainError("tsmodel: fractional order must satisfy |d| < 0.5");
}

struct Work {
    std::vector<double> x;    // mean-adjusted (and fractionally differenced) series
    std::vector<double> a;    // shocks
    std::vector<double> s2;   // conditional variances
    std::vector<double> eps;  // standardized residuals
};

// Core recursion shared by the public filter() and the MLE objective.
// Returns the log-likelihood; false via NumericError on explosive variance.
double run_filter(const ModelSpec& spec, const ArmaGarchParams& par,
                  std::span<const double> r, const dists::InnovationDist& dist, Work& w) {
    const int T = static_cast<int>(r.size());
    w.x.resize(T);
    w.a.resize(T);
    w.s2.resize(T);
    w.eps.resize(T);

    for (int t = 0; t < T; ++t) w.x[t] = r[t] - par.mu;
    if (spec.fractional && par.d != 0.0) {
        // full-length expansion of (1-B)^d, exact at data scale
        const auto pi = fracdiff_coeffs(par.d, T);
        for (int t = T - 1; t >= 0; --t) {
            double acc = 0.0;
            for (int j = 0; j <= t; ++j) acc += pi[j] * w.x[t - j];
            w.x[t] = acc;
        }
    }

    for (int t = 0; t < T; ++t) {
        double a = w.x[t];
        for (int i = 1; i <= spec.p; ++i)
            if (t - i >= 0) a -= par.ar[i - 1] * w.x[t - i];
        for (int j = 1; j <= spec.q; ++j)
            if (t - j >= 0) a -= par.ma[j - 1] * w.a[t - j];
        w.a[t] = a;
    }

    const double s2_pre = variance_of(r);
    double loglik = 0.0;
    for (int t = 0; t < T; ++t) {
        double s2 = par.omega;
        for (int n = 1; n <= spec.l; ++n) {
            const double a2 = t - n >= 0 ? w.a[t - n] * w.a[t - n] : 0.0;
            s2 += par.arch[n - 1] * a2;
        }
        for (int m = 1; m <= spec.k; ++m)
            s2 += par.garch[m - 1] * (t - m >= 0 ? w.s2[t - m] : s2_pre);
        if (!std::isfinite(s2) || s2 > kSigma2Cap)
            throw NumericError("filter: explosive variance recursion");
        if (!(s2 > 0.0)) throw NumericError("filter: non-positive conditional variance");
        w.s2[t] = s2;
        const double sig = std::sqrt(s2);
        const double e = w.a[t] / sig;
        w.eps[t] = e;
        loglik += dist.log_pdf(e) - 0.5 * std::log(s2);
    }
    return loglik;
}

}  // namespace

std::vector<double> fracdiff_coeffs(double d, int n) {
    if (!(std::fabs(d) < 1.0)) throw DomainError("fracdiff_coeffs: |d| must be < 1");
    if (n < 1) throw DomainError("fracdiff_coeffs: n must be >= 1");
    std::vector<double> pi(static_cast<std::size_t>(n));
    pi[0] = 1.0;
    for (int j = 1; j < n; ++j)
        pi[j] = pi[j - 1] * (static_cast<double>(j) - 1.0 - d) / static_cast<double>(j);
    return pi;
}

int n_free_params(const ModelSpec& spec) {
    int n = 1 /*mu*/ + spec.p + spec.q + 1 /*omega*/ + spec.l + spec.k;
    if (spec.fractional) ++n;
    switch (spec.dist) {
        case dists::Family::Normal: break;
        case dists::Family::StudentT:
        case dists::Family::Ged: n += 1; break;
        case dists::Family::Sghyd: n += 2; break;
    }
    return n;
}

dists::InnovationDist make_dist(dists::Family f, const std::vector<double>& dp) {
    switch (f) {
        case dists::Family::Normal:
            return dists::InnovationDist::normal();
        case dists::Family::StudentT:
            if (dp.size() != 1) throw DomainError("make_dist: StudentT needs {nu}");
            return dists::InnovationDist::student_t(dp[0]);
        case dists::Family::Ged:
            if (dp.size() != 1) throw DomainError("make_dist: Ged needs {shape}");
            return dists::InnovationDist::ged(dp[0]);
        case dists::Family::Sghyd:
            if (dp.size() != 2) throw DomainError("make_dist: Sghyd needs {shape, skew}");
            return dists::InnovationDist::sghyd(dp[0], dp[1]);
    }
    throw DomainError("make_dist: unknown family");
}

FilterOutput filter(const ModelSpec& spec, const ArmaGarchParams& par,
                    std::span<const double> r) {
    validate_spec(spec);
    validate_params(spec, par, /*strict=*/true);
    const int maxlag = std::max({spec.p, spec.q, spec.k, spec.l});
    if (static_cast<int>(r.size()) <= maxlag)
        throw DataError("filter: series shorter than the maximum lag order");
    if (!all_finite(r)) throw DataError("filter: non-finite input");

    const auto dist = make_dist(spec.dist, par.dist_params);
    Work w;
    FilterOutput out;
    out.loglik = run_filter(spec, par, r, dist, w);
    const int T = static_cast<int>(r.size());
    out.a.resize(T);
    out.sigma.resize(T);
    out.eps = std::move(w.eps);
    for (int t = 0; t < T; ++t) {
        out.sigma[t] = std::sqrt(w.s2[t]);
        out.a[t] = out.eps[t] * out.sigma[t];  // closes eps*sigma == a bit-exactly
    }
    return out;
}

namespace {

// Packing of the free parameters in reporting order. The same order is used
// for std_errors and the numerical Hessian.
std::vector<std::string> param_names_for(const ModelSpec& spec) {
    std::vector<std::string> n;
    n.push_back("mu");
    for (int i = 1; i <= spec.p; ++i) n.push_back("ar" + std::to_string(i));
    for (int j = 1; j <= spec.q; ++j) n.push_back("ma" + std::to_string(j));
    n.push_back("omega");
    for (int i = 1; i <= spec.l; ++i) n.push_back("alpha" + std::to_string(i));
    for (int i = 1; i <= spec.k; ++i) n.push_back("beta" + std::to_string(i));
    if (spec.fractional) n.push_back("d");
    switch (spec.dist) {
        case dists::Family::Normal: break;
        case dists::Family::StudentT: n.push_back("nu"); break;
        case dists::Family::Ged: n.push_back("shape"); break;
        case dists::Family::Sghyd:
            n.push_back("shape");
            n.push_back("skew");
            break;
    }
    return n;
}

std::vector<double> pack(const ModelSpec& spec, const ArmaGarchParams& p) {
    std::vector<double> v;
    v.push_back(p.mu);
    v.insert(v.end(), p.ar.begin(), p.ar.end());
    v.insert(v.end(), p.ma.begin(), p.ma.end());
    v.push_back(p.omega);
    v.insert(v.end(), p.arch.begin(), p.arch.end());
    v.insert(v.end(), p.garch.begin(), p.garch.end());
    if (spec.fractional) v.push_back(p.d);
    v.insert(v.end(), p.dist_params.begin(), p.dist_params.end());
    return v;
}

ArmaGarchParams unpack(const ModelSpec& spec, const std::vector<double>& v) {
    ArmaGarchParams p;
    std::size_t i = 0;
    p.mu = v[i++];
    p.ar.assign(v.begin() + i, v.begin() + i + spec.p), i += spec.p;
    p.ma.assign(v.begin() + i, v.begin() + i + spec.q), i += spec.q;
    p.omega = v[i++];
    p.arch.assign(v.begin() + i, v.begin() + i + spec.l), i += spec.l;
    p.garch.assign(v.begin() + i, v.begin() + i + spec.k), i += spec.k;
    if (spec.fractional) p.d = v[i++];
    p.dist_params.assign(v.begin() + i, v.end());
    return p;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// Unconstrained optimizer coordinates -> constrained model parameters.
// arch/garch use a joint map with sum < kMaxPersistence by construction.
ArmaGarchParams from_unconstrained(const ModelSpec& spec, const std::vector<double>& z) {
    ArmaGarchParams p;
    std::size_t i = 0;
    p.mu = z[i++];
    for (int j = 0; j < spec.p; ++j) p.ar.push_back(0.999 * std::tanh(z[i++]));
    for (int j = 0; j < spec.q; ++j) p.ma.push_back(0.999 * std::tanh(z[i++]));
    p.omega = std::exp(z[i++]);
    const int nv = spec.l + spec.k;
    if (nv > 0) {
        double s = 0.0;
        std::vector<double> e(nv);
        for (int j = 0; j < nv; ++j) {
            e[j] = std::exp(std::min(z[i++], 30.0));
            s += e[j];
        }
        const double scale = kMaxPersistence / (1.0 + s);
        for (int j = 0; j < spec.l; ++j) p.arch.push_back(e[j] * scale);
        for (int j = 0; j < spec.k; ++j) p.garch.push_back(e[spec.l + j] * scale);
    }
    if (spec.fractional) p.d = 0.499 * sigmoid(z[i++]);
    switch (spec.dist) {
        case dists::Family::Normal: break;
        case dists::Family::StudentT: p.dist_params = {2.01 + std::exp(z[i++])}; break;
        case dists::Family::Ged: p.dist_params = {std::exp(z[i++])}; break;
        case dists::Family::Sghyd: {
            const double sh = std::exp(z[i++]);
            const double sk = 0.99 * std::tanh(z[i++]);
            p.dist_params = {sh, sk};
            break;
        }
    }
    return p;
}

std::vector<double> to_unconstrained(const ModelSpec& spec, const ArmaGarchParams& p) {
    std::vector<double> z;
    z.push_back(p.mu);
    for (double v : p.ar) z.push_back(std::atanh(std::clamp(v / 0.999, -0.999999, 0.999999)));
    for (double v : p.ma) z.push_back(std::atanh(std::clamp(v / 0.999, -0.999999, 0.999999)));
    z.push_back(std::log(std::max(p.omega, 1e-300)));
    const int nv = spec.l + spec.k;
    if (nv > 0) {
        double s = 0.0;
        for (double v : p.arch) s += v;
        for (double v : p.garch) s += v;
        s = std::min(s, kMaxPersistence * 0.999);
        const double es = s / (kMaxPersistence - s);  // total exp mass
        const double scale = kMaxPersistence / (1.0 + es);
        for (double v : p.arch) z.push_back(std::log(std::max(v, 1e-8) / scale));
        for (double v : p.garch) z.push_back(std::log(std::max(v, 1e-8) / scale));
    }
    if (spec.fractional) z.push_back(logit(std::clamp(p.d / 0.499, 1e-6, 1.0 - 1e-6)));
    switch (spec.dist) {
        case dists::Family::Normal: break;
        case dists::Family::StudentT:
            z.push_back(std::log(std::max(p.dist_params[0] - 2.01, 1e-6)));
            break;
        case dists::Family::Ged: z.push_back(std::log(p.dist_params[0])); break;
        case dists::Family::Sghyd:
            z.push_back(std::log(p.dist_params[0]));
            z.push_back(std::atanh(std::clamp(p.dist_params[1] / 0.99, -0.999999, 0.999999)));
            break;
    }
    return z;
}

// Three documented starting points spanning low/medium/high volatility
// persistence; the AR(1) start is seeded from the lag-1 autocorrelation.
std::vector<ArmaGarchParams> starting_points(const ModelSpec& spec, std::span<const double> r) {
    const double m = mean_of(r);
    const double v = variance_of(r);
    double acf1 = 0.0;
    {
        double num = 0.0, den = 0.0;
        for (std::size_t t = 0; t < r.size(); ++t) {
            den += (r[t] - m) * (r[t] - m);
            if (t > 0) num += (r[t] - m) * (r[t - 1] - m);
        }
        acf1 = den > 0.0 ? std::clamp(num / den, -0.9, 0.9) : 0.0;
    }

    const double profiles[3][2] = {{0.05, 0.90}, {0.10, 0.80}, {0.05, 0.50}};
    std::vector<ArmaGarchParams> starts;
    for (int s = 0; s < 3; ++s) {
        ArmaGarchParams p;
        p.mu = m;
        p.ar.assign(spec.p, 0.0);
        if (spec.p > 0) p.ar[0] = s == 1 ? 0.0 : 0.8 * acf1;
        p.ma.assign(spec.q, 0.0);
        const double alpha = spec.l > 0 ? profiles[s][0] : 0.0;
        const double beta = spec.k > 0 ? profiles[s][1] : 0.0;
        p.arch.assign(spec.l, 0.0);
        if (spec.l > 0) p.arch[0] = alpha;
        p.garch.assign(spec.k, 0.0);
        if (spec.k > 0) p.garch[0] = beta;
        // match the sample variance through the unconditional-variance identity
        p.omega = std::max(v * (1.0 - alpha - beta), 1e-12);
        if (spec.fractional) p.d = s == 2 ? 0.25 : 0.1;
        switch (spec.dist) {
            case dists::Family::Normal: break;
            case dists::Family::StudentT: p.dist_params = {s == 0 ? 8.0 : (s == 1 ? 5.0 : 15.0)}; break;
            case dists::Family::Ged: p.dist_params = {s == 2 ? 1.2 : (s == 1 ? 2.0 : 1.5)}; break;
            case dists::Family::Sghyd:
                p.dist_params = {s == 2 ? 2.0 : (s == 1 ? 0.5 : 1.0), 0.0};
                break;
        }
        starts.push_back(std::move(p));
    }
    return starts;
}

}  // namespace

FittedModel fit(const ModelSpec& spec, std::span<const double> r, const FitOptions& opt) {
    validate_spec(spec);
    if (r.size() < 50) throw DataError("fit: need at least 50 observations");
    if (!all_finite(r)) throw DataError("fit: non-finite values in input");
    if (variance_of(r) <= 0.0) throw DataError("fit: degenerate (zero-variance) series");

    Work w;
    auto objective = [&](const std::vector<double>& z) -> double {
        const ArmaGarchParams p = from_unconstrained(spec, z);
        try {
            const auto dist = make_dist(spec.dist, p.dist_params);
            return -run_filter(spec, p, r, dist, w);
        } catch (const Error&) {
            return std::numeric_limits<double>::max();
        }
    };

    std::vector<std::vector<double>> starts;
    for (const auto& s : starting_points(spec, r)) starts.push_back(to_unconstrained(spec, s));

    optim::NmOptions nm;
    nm.f_tol = opt.loglik_tol * 1e-2;
    nm.max_eval = opt.max_eval_per_start;
    nm.n_restarts = 1;
    const auto best = optim::nelder_mead_multistart(objective, starts, nm);

    FittedModel fm;
    fm.spec = spec;
    fm.params = from_unconstrained(spec, best.x);
    fm.converged = best.converged && best.fval < std::numeric_limits<double>::max();
    fm.param_names = param_names_for(spec);
    fm.filter = filter(spec, fm.params, r);
    fm.loglik = fm.filter.loglik;
    const int np = n_free_params(spec);
    const double T = static_cast<double>(r.size());
    fm.aic = 2.0 * np - 2.0 * fm.loglik;
    fm.bic = np * std::log(T) - 2.0 * fm.loglik;

    // standard errors: inverse numerical Hessian of -loglik in the original
    // parameter space (central differences)
    const auto theta = pack(spec, fm.params);
    const int n = static_cast<int>(theta.size());
    auto nll_at = [&](const std::vector<double>& t) -> double {
        const ArmaGarchParams p = unpack(spec, t);
        try {
            const auto dist = make_dist(spec.dist, p.dist_params);
            return -run_filter(spec, p, r, dist, w);
        } catch (const Error&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    Eigen::MatrixXd H(n, n);
    bool hess_ok = true;
    std::vector<double> h(n);
    for (int i = 0; i < n; ++i) h[i] = std::max(1e-4 * std::fabs(theta[i]), 1e-6);
    const double f0 = nll_at(theta);
    for (int i = 0; i < n && hess_ok; ++i) {
        for (int j = i; j < n && hess_ok; ++j) {
            auto t = theta;
            double val;
            if (i == j) {
                t[i] = theta[i] + h[i];
                const double fp = nll_at(t);
                t[i] = theta[i] - h[i];
                const double fm_ = nll_at(t);
                val = (fp - 2.0 * f0 + fm_) / (h[i] * h[i]);
            } else {
                t[i] = theta[i] + h[i], t[j] = theta[j] + h[j];
                const double fpp = nll_at(t);
                t[j] = theta[j] - h[j];
                const double fpm = nll_at(t);
                t[i] = theta[i] - h[i], t[j] = theta[j] + h[j];
                const double fmp = nll_at(t);
                t[j] = theta[j] - h[j];
                const double fmm = nll_at(t);
                val = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            }
            if (!std::isfinite(val)) hess_ok = false;
            H(i, j) = H(j, i) = val;
        }
    }
    fm.std_errors.assign(n, std::numeric_limits<double>::quiet_NaN());
    if (hess_ok) {
        const auto ldlt = H.ldlt();
        if (ldlt.info() == Eigen::Success) {
            const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
            for (int i = 0; i < n; ++i)
                if (cov(i, i) > 0.0) fm.std_errors[i] = std::sqrt(cov(i, i));
        }
    }
    return fm;
}

std::vector<double> simulate(const ModelSpec& spec, const ArmaGarchParams& par, int T,
                             std::uint64_t seed) {
    validate_spec(spec);
    validate_params(spec, par, /*strict=*/true);
    if (T < 1) throw DomainError("simulate: T must be >= 1");
    constexpr int burn = 500;
    const int n = T + burn;

    const auto dist = make_dist(spec.dist, par.dist_params);
    Rng rng(seed);

    double persist = 0.0;
    for (double v : par.arch) persist += v;
    for (double v : par.garch) persist += v;
    const double s2_uncond = persist < 1.0 ? par.omega / (1.0 - persist) : par.omega;
    if (!(s2_uncond > 0.0)) throw DomainError("simulate: zero unconditional variance");

    std::vector<double> a(n), s2(n), x(n);
    for (int t = 0; t < n; ++t) {
        double v = par.omega;
        for (int i = 1; i <= spec.l; ++i)
            v += par.arch[i - 1] * (t - i >= 0 ? a[t - i] * a[t - i] : s2_uncond);
        for (int m = 1; m <= spec.k; ++m) v += par.garch[m - 1] * (t - m >= 0 ? s2[t - m] : s2_uncond);
        s2[t] = v;
        a[t] = dist.sample_one(rng) * std::sqrt(v);
        double xt = a[t];
        for (int i = 1; i <= spec.p; ++i)
            if (t - i >= 0) xt += par.ar[i - 1] * x[t - i];
        for (int j = 1; j <= spec.q; ++j)
            if (t - j >= 0) xt += par.ma[j - 1] * a[t - j];
        x[t] = xt;
    }

    std::vector<double> out(T);
    if (spec.fractional && par.d != 0.0) {
        // invert the fractional difference with the expansion of (1-B)^{-d}
        const auto psi = fracdiff_coeffs(-par.d, n);
        for (int t = burn; t < n; ++t) {
            double acc = 0.0;
            for (int j = 0; j <= t; ++j) acc += psi[j] * x[t - j];
            out[t - burn] = par.mu + acc;
        }
    } else {
        for (int t = burn; t < n; ++t) out[t - burn] = par.mu + x[t];
    }
    return out;
}

std::vector<double> pit_series(const dists::InnovationDist& d, std::span<const double> eps) {
    if (!all_finite(eps)) throw DataError("pit_series: non-finite residuals");
    std::vector<double> y(eps.size());
    for (std::size_t t = 0; t < eps.size(); ++t) y[t] = d.cdf(eps[t]);
    return y;
}

}  // namespace taildep::ts
