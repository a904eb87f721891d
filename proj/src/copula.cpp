#include "taildep/copula.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "taildep/optim.hpp"
#include "taildep/special.hpp"

namespace taildep::copula {

namespace sp = special;

namespace {

constexpr double kRhoCap = 1.0 - 1e-6;

void check_uv(double u, double v) {
    if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0))
        throw DomainError("copula: (u,v) must lie in [0,1]^2");
}

double joe_tau(double theta) {
    // tau = 1 + 4 * int_0^1 phi/phi' via the generator of the Joe family,
    // integrand written in s = 1-t with the s->0 limit made explicit
    boost::math::quadrature::tanh_sinh<double> integ;
    auto f = [theta](double s) {
        const double st = std::pow(s, theta);
        if (st < 1e-280) return -s / theta;  // ln(1-x)*(1-x) ~ -x as x->0
        return std::log1p(-st) * (1.0 - st) * std::pow(s, 1.0 - theta) / theta;
    };
    return 1.0 + 4.0 * integ.integrate(f, 0.0, 1.0, 1e-12);
}

double frank_tau(double theta) {
    if (std::fabs(theta) < 1e-5) return theta / 9.0 - theta * theta * theta / 900.0;
    return 1.0 - 4.0 / theta * (1.0 - sp::debye1(theta));
}

}  // namespace

PseudoSample pseudo_obs(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DataError("pseudo_obs: length mismatch");
    const int T = static_cast<int>(x.size());
    if (T < 2) throw DataError("pseudo_obs: need at least 2 observations");
    if (!all_finite(x) || !all_finite(y)) throw DataError("pseudo_obs: non-finite values");

    auto ranks = [T](std::span<const double> z) {
        std::vector<int> idx(T);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return z[a] < z[b]; });
        std::vector<double> r(T);
        int i = 0;
        while (i < T) {
            int j = i;
            while (j + 1 < T && z[idx[j + 1]] == z[idx[i]]) ++j;
            const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
            for (int t = i; t <= j; ++t) r[idx[t]] = avg;  // ties get the average rank
            i = j + 1;
        }
        return r;
    };

    PseudoSample s;
    s.u.resize(T);
    s.v.resize(T);
    const auto rx = ranks(x), ry = ranks(y);
    const double denom = static_cast<double>(T) + 1.0;
    for (int t = 0; t < T; ++t) {
        s.u[t] = rx[t] / denom;
        s.v[t] = ry[t] / denom;
    }
    return s;
}

namespace {

// inversion count (strict) by iterative bottom-up merge sort
std::int64_t merge_count(std::vector<double>& y) {
    const std::size_t n = y.size();
    std::vector<double> buf(n);
    std::int64_t swaps = 0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
            const std::size_t mid = lo + width;
            const std::size_t hi = std::min(lo + 2 * width, n);
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (y[j] < y[i]) {
                    swaps += static_cast<std::int64_t>(mid - i);
                    buf[k++] = y[j++];
                } else {
                    buf[k++] = y[i++];
                }
            }
            while (i < mid) buf[k++] = y[i++];
            while (j < hi) buf[k++] = y[j++];
            std::copy(buf.begin() + lo, buf.begin() + hi, y.begin() + lo);
        }
    }
    return swaps;
}

std::int64_t tie_pairs(const std::vector<double>& sorted) {
    std::int64_t s = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const std::int64_t t = static_cast<std::int64_t>(j - i + 1);
        s += t * (t - 1) / 2;
        i = j + 1;
    }
    return s;
}

}  // namespace

double kendall_tau(const PseudoSample& s) {
    const int n = s.size();
    if (n < 2) throw DataError("kendall_tau: need at least 2 observations");
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (s.u[a] != s.u[b]) return s.u[a] < s.u[b];
        return s.v[a] < s.v[b];
    });
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = s.v[idx[i]];

    // tie counts: within-u, within-v, joint
    std::int64_t xtie = 0, ntie = 0;
    {
        std::size_t i = 0;
        while (i < y.size()) {
            std::size_t j = i;
            while (j + 1 < y.size() && s.u[idx[j + 1]] == s.u[idx[i]]) ++j;
            const std::int64_t t = static_cast<std::int64_t>(j - i + 1);
            xtie += t * (t - 1) / 2;
            // joint ties inside the u-group (v values are sorted there)
            std::size_t a = i;
            while (a <= j) {
                std::size_t b = a;
                while (b + 1 <= j && y[b + 1] == y[a]) ++b;
                const std::int64_t m = static_cast<std::int64_t>(b - a + 1);
                ntie += m * (m - 1) / 2;
                a = b + 1;
            }
            i = j + 1;
        }
    }
    std::vector<double> ysorted(s.v.begin(), s.v.end());
    std::sort(ysorted.begin(), ysorted.end());
    const std::int64_t ytie = tie_pairs(ysorted);

    const std::int64_t dis = merge_count(y);
    const std::int64_t tot = static_cast<std::int64_t>(n) * (n - 1) / 2;
    const double con_minus_dis =
        static_cast<double>(tot - xtie - ytie + ntie) - 2.0 * static_cast<double>(dis);
    const double denom = std::sqrt(static_cast<double>(tot - xtie))
                         * std::sqrt(static_cast<double>(tot - ytie));
    if (denom <= 0.0) throw DataError("kendall_tau: a margin is constant");
    return con_minus_dis / denom;
}

double spearman_rho(const PseudoSample& s) {
    const int n = s.size();
    if (n < 2) throw DataError("spearman_rho: need at least 2 observations");
    const double mu = mean_of(s.u), mv = mean_of(s.v);
    double suv = 0.0, suu = 0.0, svv = 0.0;
    for (int t = 0; t < n; ++t) {
        const double du = s.u[t] - mu, dv = s.v[t] - mv;
        suv += du * dv;
        suu += du * du;
        svv += dv * dv;
    }
    if (suu <= 0.0 || svv <= 0.0) throw DataError("spearman_rho: a margin is constant");
    return suv / std::sqrt(suu * svv);
}

double tau_to_rho(double tau) {
    if (!(tau >= -1.0 && tau <= 1.0)) throw DomainError("tau_to_rho: tau must be in [-1,1]");
    return std::sin(0.5 * M_PI * tau);
}

double rho_s_to_rho(double rho_s) {
    if (!(rho_s >= -1.0 && rho_s <= 1.0))
        throw DomainError("rho_s_to_rho: rho_s must be in [-1,1]");
    return 2.0 * std::sin(M_PI * rho_s / 6.0);
}

const char* family_name(Family f) {
    switch (f) {
        case Family::Independent: return "independent";
        case Family::Gaussian: return "gaussian";
        case Family::StudentT: return "t";
        case Family::Clayton: return "clayton";
        case Family::Gumbel: return "gumbel";
        case Family::Frank: return "frank";
        case Family::Joe: return "joe";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    if (name == "independent") return Family::Independent;
    if (name == "gaussian") return Family::Gaussian;
    if (name == "t" || name == "student_t") return Family::StudentT;
    if (name == "clayton") return Family::Clayton;
    if (name == "gumbel") return Family::Gumbel;
    if (name == "frank") return Family::Frank;
    if (name == "joe") return Family::Joe;
    throw ConfigError("unknown copula family: " + name);
}

int family_n_params(Family f) {
    switch (f) {
        case Family::Independent: return 0;
        case Family::StudentT: return 2;
        default: return 1;
    }
}

void validate_model(const CopulaModel& m) {
    switch (m.family) {
        case Family::Independent:
            break;
        case Family::Gaussian:
            if (!(m.theta > -1.0 && m.theta < 1.0))
                throw DomainError("gaussian copula: rho must be in (-1,1)");
            break;
        case Family::StudentT:
            if (!(m.theta > -1.0 && m.theta < 1.0))
                throw DomainError("t copula: rho must be in (-1,1)");
            if (!(m.nu > 0.0)) throw DomainError("t copula: nu must be > 0");
            break;
        case Family::Clayton:
            if (!(m.theta > 0.0)) throw DomainError("clayton copula: theta must be > 0");
            break;
        case Family::Gumbel:
            if (!(m.theta >= 1.0)) throw DomainError("gumbel copula: theta must be >= 1");
            break;
        case Family::Frank:
            if (m.theta == 0.0) throw DomainError("frank copula: theta must be nonzero");
            break;
        case Family::Joe:
            if (!(m.theta >= 1.0)) throw DomainError("joe copula: theta must be >= 1");
            break;
    }
}

double copula_cdf(const CopulaModel& m, double u, double v) {
    validate_model(m);
    check_uv(u, v);
    if (u == 0.0 || v == 0.0) return 0.0;
    if (u == 1.0) return v;
    if (v == 1.0) return u;
    const double th = m.theta;
    switch (m.family) {
        case Family::Independent:
            return u * v;
        case Family::Gaussian:
            return sp::bvn_cdf(sp::norm_quantile(u), sp::norm_quantile(v), th);
        case Family::StudentT:
            return sp::bvt_cdf(sp::t_quantile(u, m.nu), sp::t_quantile(v, m.nu), th, m.nu);
        case Family::Clayton:
            return std::pow(std::pow(u, -th) + std::pow(v, -th) - 1.0, -1.0 / th);
        case Family::Gumbel: {
            const double x = -std::log(u), y = -std::log(v);
            return std::exp(-std::pow(std::pow(x, th) + std::pow(y, th), 1.0 / th));
        }
        case Family::Frank: {
            const double em = std::expm1(-th);
            const double t = std::expm1(-th * u) * std::expm1(-th * v) / em;
            return -std::log1p(t) / th;
        }
        case Family::Joe: {
            const double a = std::pow(1.0 - u, th), b = std::pow(1.0 - v, th);
            return 1.0 - std::pow(a + b - a * b, 1.0 / th);
        }
    }
    return 0.0;
}

double copula_pdf(const CopulaModel& m, double u, double v) {
    validate_model(m);
    check_uv(u, v);
    if (u == 0.0 || v == 0.0 || u == 1.0 || v == 1.0)
        throw DomainError("copula_pdf: density evaluated on the open square only");
    const double th = m.theta;
    switch (m.family) {
        case Family::Independent:
            return 1.0;
        case Family::Gaussian: {
            const double x = sp::norm_quantile(u), y = sp::norm_quantile(v);
            const double r2 = 1.0 - th * th;
            return std::exp(-(th * th * (x * x + y * y) - 2.0 * th * x * y) / (2.0 * r2))
                   / std::sqrt(r2);
        }
        case Family::StudentT: {
            const double nu = m.nu;
            const double x = sp::t_quantile(u, nu), y = sp::t_quantile(v, nu);
            const double r2 = 1.0 - th * th;
            const double q = (x * x - 2.0 * th * x * y + y * y) / r2;
            double logc = std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu)
                          - 2.0 * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * std::log(r2);
            logc -= 0.5 * (nu + 2.0) * std::log1p(q / nu);
            logc += 0.5 * (nu + 1.0) * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
            return std::exp(logc);
        }
        case Family::Clayton: {
            const double s = std::pow(u, -th) + std::pow(v, -th) - 1.0;
            return (1.0 + th) * std::pow(u * v, -th - 1.0) * std::pow(s, -1.0 / th - 2.0);
        }
        case Family::Gumbel: {
            const double x = -std::log(u), y = -std::log(v);
            const double xs = std::pow(x, th), ys = std::pow(y, th);
            const double S = std::pow(xs + ys, 1.0 / th);
            const double logc = -S + x + y + (th - 1.0) * std::log(x * y)
                                + (1.0 - 2.0 * th) * std::log(S) + std::log(S + th - 1.0);
            return std::exp(logc);
        }
        case Family::Frank: {
            const double em = -std::expm1(-th);  // 1 - e^{-theta}
            const double a = -std::expm1(-th * u), b = -std::expm1(-th * v);
            const double den = em - a * b;
            return th * em * std::exp(-th * (u + v)) / (den * den);
        }
        case Family::Joe: {
            const double a = std::pow(1.0 - u, th), b = std::pow(1.0 - v, th);
            const double s = a + b - a * b;
            const double logc = (1.0 / th - 2.0) * std::log(s)
                                + (th - 1.0) * std::log((1.0 - u) * (1.0 - v))
                                + std::log(th - 1.0 + s);
            return std::exp(logc);
        }
    }
    return 0.0;
}

double analytic_tau(const CopulaModel& m) {
    validate_model(m);
    switch (m.family) {
        case Family::Independent: return 0.0;
        case Family::Gaussian:
        case Family::StudentT: return 2.0 * std::asin(m.theta) / M_PI;
        case Family::Clayton: return m.theta / (m.theta + 2.0);
        case Family::Gumbel: return 1.0 - 1.0 / m.theta;
        case Family::Frank: return frank_tau(m.theta);
        case Family::Joe: return joe_tau(m.theta);
    }
    return 0.0;
}

namespace {

// conditional CDF h(v | u) = dC/du, used by the conditional sampling method
double cond_cdf(const CopulaModel& m, double u, double v) {
    const double th = m.theta;
    switch (m.family) {
        case Family::Gumbel: {
            const double x = -std::log(u), y = -std::log(v);
            const double S = std::pow(std::pow(x, th) + std::pow(y, th), 1.0 / th);
            return std::exp(-S + (th - 1.0) * std::log(x / S) + x);
        }
        case Family::Joe: {
            const double a = std::pow(1.0 - u, th), b = std::pow(1.0 - v, th);
            const double s = a + b - a * b;
            return std::pow(s, 1.0 / th - 1.0) * std::pow(1.0 - u, th - 1.0) * (1.0 - b);
        }
        default:
            throw DomainError("cond_cdf: unsupported family");
    }
}

}  // namespace

PseudoSample copula_sample(const CopulaModel& m, int n, std::uint64_t seed) {
    validate_model(m);
    if (n < 1) throw DomainError("copula_sample: n must be >= 1");
    Rng rng(seed);
    PseudoSample out;
    out.u.resize(n);
    out.v.resize(n);
    const double th = m.theta;
    for (int i = 0; i < n; ++i) {
        double u, v;
        switch (m.family) {
            case Family::Independent:
                u = rng.uniform();
                v = rng.uniform();
                break;
            case Family::Gaussian: {
                const double z1 = rng.normal(), z2 = rng.normal();
                u = sp::norm_cdf(z1);
                v = sp::norm_cdf(th * z1 + std::sqrt(1.0 - th * th) * z2);
                break;
            }
            case Family::StudentT: {
                const double z1 = rng.normal(), z2 = rng.normal();
                const double w = 2.0 * sp::gamma_p_inv(0.5 * m.nu, rng.uniform());
                const double g = std::sqrt(m.nu / w);
                u = sp::t_cdf(z1 * g, m.nu);
                v = sp::t_cdf((th * z1 + std::sqrt(1.0 - th * th) * z2) * g, m.nu);
                break;
            }
            case Family::Clayton: {
                u = rng.uniform();
                const double w = rng.uniform();
                v = std::pow((std::pow(w, -th / (1.0 + th)) - 1.0) * std::pow(u, -th) + 1.0,
                             -1.0 / th);
                break;
            }
            case Family::Frank: {
                u = rng.uniform();
                const double w = rng.uniform();
                const double a = std::exp(-th * u);
                v = -std::log1p(w * std::expm1(-th) / (a - w * (a - 1.0))) / th;
                break;
            }
            case Family::Gumbel:
            case Family::Joe: {
                u = rng.uniform();
                const double w = rng.uniform();
                const CopulaModel& mm = m;
                const double uu = u;
                v = optim::find_root(
                    [&](double t) { return cond_cdf(mm, uu, t) - w; }, 1e-13, 1.0 - 1e-13,
                    1e-11, 300);
                break;
            }
            default:
                u = rng.uniform();
                v = rng.uniform();
        }
        out.u[i] = std::clamp(u, 1e-15, 1.0 - 1e-15);
        out.v[i] = std::clamp(v, 1e-15, 1.0 - 1e-15);
    }
    return out;
}

double copula_loglik(const CopulaModel& m, const PseudoSample& s) {
    validate_model(m);
    double ll = 0.0;
    for (int t = 0; t < s.size(); ++t) {
        const double c = copula_pdf(m, s.u[t], s.v[t]);
        if (!(c > 0.0) || !std::isfinite(c)) return -std::numeric_limits<double>::infinity();
        ll += std::log(c);
    }
    return ll;
}

namespace {

// profile likelihood in nu for the t copula at fixed rho; crude grid plus
// one Brent refinement, mirroring the common inverse-tau convention of
// bounding the degrees of freedom on (2, 10]
double profile_t_nu(const PseudoSample& s, double rho, double nu_lo, double nu_hi) {
    const double grid[] = {2.2, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 7.0, 8.5, 10.0,
                           12.0, 15.0, 20.0, 30.0};
    double best_nu = nu_lo, best_ll = -std::numeric_limits<double>::infinity();
    for (double nu : grid) {
        if (nu < nu_lo || nu > nu_hi) continue;
        const double ll = copula_loglik({Family::StudentT, rho, nu}, s);
        if (ll > best_ll) {
            best_ll = ll;
            best_nu = nu;
        }
    }
    const double lo = std::max(nu_lo, best_nu * 0.7), hi = std::min(nu_hi, best_nu * 1.5);
    return optim::brent_min(
        [&](double nu) { return -copula_loglik({Family::StudentT, rho, nu}, s); }, lo, hi,
        1e-4);
}

}  // namespace

CopulaModel fit_inverse_tau(Family f, const PseudoSample& s) {
    const double tau = kendall_tau(s);
    CopulaModel m;
    m.family = f;
    switch (f) {
        case Family::Independent:
            return m;
        case Family::Gaussian:
            m.theta = std::clamp(tau_to_rho(tau), -kRhoCap, kRhoCap);
            return m;
        case Family::StudentT:
            m.theta = std::clamp(tau_to_rho(tau), -kRhoCap, kRhoCap);
            m.nu = profile_t_nu(s, m.theta, 2.05, 10.0);
            return m;
        case Family::Clayton:
            if (tau <= 0.0) throw InfeasibleFitError("clayton inverse-tau: sample tau <= 0");
            if (tau >= 1.0 - 1e-12)
                throw InfeasibleFitError("clayton inverse-tau: degenerate sample tau");
            m.theta = 2.0 * tau / (1.0 - tau);
            return m;
        case Family::Gumbel:
            if (tau < 0.0) throw InfeasibleFitError("gumbel inverse-tau: sample tau < 0");
            if (tau >= 1.0 - 1e-12)
                throw InfeasibleFitError("gumbel inverse-tau: degenerate sample tau");
            m.theta = 1.0 / (1.0 - tau);
            return m;
        case Family::Frank: {
            if (std::fabs(tau) < 1e-10) {
                m.theta = 9.0 * tau;
                if (m.theta == 0.0) m.theta = 1e-10;
                return m;
            }
            const double at = std::fabs(tau);
            double hi = 1.0;
            while (frank_tau(hi) < at && hi < 1e4) hi *= 2.0;
            if (frank_tau(hi) < at)
                throw InfeasibleFitError("frank inverse-tau: tau out of reachable range");
            const double th =
                optim::find_root([&](double t) { return frank_tau(t) - at; }, 1e-10, hi,
                                 1e-10, 300);
            m.theta = tau > 0.0 ? th : -th;
            return m;
        }
        case Family::Joe: {
            if (tau < 0.0) throw InfeasibleFitError("joe inverse-tau: sample tau < 0");
            if (tau >= 1.0 - 1e-12)
                throw InfeasibleFitError("joe inverse-tau: degenerate sample tau");
            if (tau == 0.0) {
                m.theta = 1.0;
                return m;
            }
            double hi = 2.0;
            while (joe_tau(hi) < tau && hi < 1e4) hi *= 2.0;
            m.theta = optim::find_root([&](double t) { return joe_tau(t) - tau; }, 1.0, hi,
                                       1e-10, 300);
            return m;
        }
    }
    return m;
}

CopulaModel fit_mle(Family f, const PseudoSample& s) {
    CopulaModel m;
    m.family = f;
    switch (f) {
        case Family::Independent:
            return m;
        case Family::Gaussian: {
            const double z = optim::brent_min(
                [&](double z_) {
                    return -copula_loglik({f, std::tanh(z_), 0.0}, s);
                },
                -7.25, 7.25, 1e-9);
            m.theta = std::clamp(std::tanh(z), -kRhoCap, kRhoCap);
            return m;
        }
        case Family::StudentT: {
            // profile over nu on (2, 30]; rho by Brent at each nu
            const double nu_grid[] = {2.2, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 15.0, 20.0, 30.0};
            double best_ll = -std::numeric_limits<double>::infinity();
            double best_nu = 4.0, best_rho = 0.0;
            for (double nu : nu_grid) {
                const double z = optim::brent_min(
                    [&](double z_) {
                        return -copula_loglik({f, std::tanh(z_), nu}, s);
                    },
                    -7.25, 7.25, 1e-7);
                const double rho = std::clamp(std::tanh(z), -kRhoCap, kRhoCap);
                const double ll = copula_loglik({f, rho, nu}, s);
                if (ll > best_ll) {
                    best_ll = ll;
                    best_nu = nu;
                    best_rho = rho;
                }
            }
            const double nu = optim::brent_min(
                [&](double nu_) {
                    return -copula_loglik({f, best_rho, nu_}, s);
                },
                std::max(2.05, best_nu * 0.7), std::min(30.0, best_nu * 1.5), 1e-4);
            const double z = optim::brent_min(
                [&](double z_) {
                    return -copula_loglik({f, std::tanh(z_), nu}, s);
                },
                -7.25, 7.25, 1e-9);
            m.theta = std::clamp(std::tanh(z), -kRhoCap, kRhoCap);
            m.nu = nu;
            return m;
        }
        case Family::Clayton: {
            const double z = optim::brent_min(
                [&](double lt) { return -copula_loglik({f, std::exp(lt), 0.0}, s); },
                std::log(1e-4), std::log(200.0), 1e-9);
            m.theta = std::exp(z);
            return m;
        }
        case Family::Gumbel:
        case Family::Joe: {
            const double z = optim::brent_min(
                [&](double lt) { return -copula_loglik({f, 1.0 + std::exp(lt), 0.0}, s); },
                std::log(1e-8), std::log(50.0), 1e-9);
            m.theta = 1.0 + std::exp(z);
            return m;
        }
        case Family::Frank: {
            const double th = optim::brent_min(
                [&](double t) {
                    if (t == 0.0) return 0.0;
                    return -copula_loglik({f, t, 0.0}, s);
                },
                -80.0, 80.0, 1e-9);
            m.theta = th == 0.0 ? 1e-10 : th;
            return m;
        }
    }
    return m;
}

AicBic copula_aic_bic(const CopulaModel& m, const PseudoSample& s) {
    const double ll = copula_loglik(m, s);
    const int k = family_n_params(m.family);
    const double T = static_cast<double>(s.size());
    return {2.0 * k - 2.0 * ll, k * std::log(T) - 2.0 * ll};
}

TailEstimate tail_coeffs_analytic(const CopulaModel& m) {
    validate_model(m);
    TailEstimate e;
    e.source = TailEstimate::Source::Analytic;
    switch (m.family) {
        case Family::Independent:
        case Family::Gaussian:
        case Family::Frank:
            break;  // asymptotically independent in both tails
        case Family::StudentT: {
            const double lam = 2.0
                               * sp::t_cdf(-std::sqrt((m.nu + 1.0) * (1.0 - m.theta)
                                                      / (1.0 + m.theta)),
                                           m.nu + 1.0);
            e.lambda_lower = e.lambda_upper = lam;
            break;
        }
        case Family::Clayton:
            e.lambda_lower = std::pow(2.0, -1.0 / m.theta);
            break;
        case Family::Gumbel:
        case Family::Joe:
            e.lambda_upper = 2.0 - std::pow(2.0, 1.0 / m.theta);
            break;
    }
    return e;
}

double empirical_copula(const PseudoSample& s, double u, double v) {
    check_uv(u, v);
    int c = 0;
    for (int t = 0; t < s.size(); ++t)
        if (s.u[t] < u && s.v[t] < v) ++c;
    return static_cast<double>(c) / static_cast<double>(s.size());
}

double empirical_survival(const PseudoSample& s, double u, double v) {
    check_uv(u, v);
    int c = 0;
    for (int t = 0; t < s.size(); ++t)
        if (s.u[t] >= u && s.v[t] >= v) ++c;
    return static_cast<double>(c) / static_cast<double>(s.size());
}

double tail_copula_lower(const PseudoSample& s, double x, double y, int k) {
    const int T = s.size();
    if (k < 1 || k > T) throw DomainError("tail_copula_lower: scaling factor out of range");
    if (!(x > 0.0) || !(y > 0.0)) throw DomainError("tail_copula_lower: x,y must be > 0");
    const double ux = k * x / (T + 1.0), vy = k * y / (T + 1.0);
    if (ux > 1.0 || vy > 1.0)
        throw DomainError("tail_copula_lower: kx/(T+1) must not exceed 1");
    int c = 0;
    for (int t = 0; t < T; ++t)
        if (s.u[t] <= ux && s.v[t] <= vy) ++c;
    return static_cast<double>(c) / static_cast<double>(k);
}

double tail_copula_upper(const PseudoSample& s, double x, double y, int k) {
    const int T = s.size();
    if (k < 1 || k > T) throw DomainError("tail_copula_upper: scaling factor out of range");
    if (!(x > 0.0) || !(y > 0.0)) throw DomainError("tail_copula_upper: x,y must be > 0");
    if (k * x / (T + 1.0) > 1.0 || k * y / (T + 1.0) > 1.0)
        throw DomainError("tail_copula_upper: kx/(T+1) must not exceed 1");
    const double ux = (T - k * x) / (T + 1.0), vy = (T - k * y) / (T + 1.0);
    int c = 0;
    for (int t = 0; t < T; ++t)
        if (s.u[t] > ux && s.v[t] > vy) ++c;
    return static_cast<double>(c) / static_cast<double>(k);
}

TailEstimate tail_coeff_estimates(const PseudoSample& s, int k) {
    TailEstimate e;
    e.lambda_lower = tail_copula_lower(s, 1.0, 1.0, k);
    e.lambda_upper = tail_copula_upper(s, 1.0, 1.0, k);
    e.k = k;
    e.source = TailEstimate::Source::Empirical;
    return e;
}

namespace {

struct Fenwick {
    std::vector<int> t;
    explicit Fenwick(int n) : t(n + 1, 0) {}
    void add(int i) {
        for (++i; i < static_cast<int>(t.size()); i += i & -i) ++t[i];
    }
    int prefix(int i) const {  // count of inserted values with index < i
        int s = 0;
        for (; i > 0; i -= i & -i) s += t[i];
        return s;
    }
};

}  // namespace

std::vector<double> empirical_copula_at_atoms(const PseudoSample& s) {
    const int T = s.size();
    // compress v
    std::vector<double> vs(s.v.begin(), s.v.end());
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    auto vrank = [&](double v) {
        return static_cast<int>(std::lower_bound(vs.begin(), vs.end(), v) - vs.begin());
    };
    std::vector<int> idx(T);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return s.u[a] < s.u[b]; });

    Fenwick bit(static_cast<int>(vs.size()));
    std::vector<double> out(T);
    int i = 0;
    while (i < T) {
        int j = i;
        while (j + 1 < T && s.u[idx[j + 1]] == s.u[idx[i]]) ++j;
        for (int t = i; t <= j; ++t)
            out[idx[t]] = static_cast<double>(bit.prefix(vrank(s.v[idx[t]]))) / T;
        for (int t = i; t <= j; ++t) bit.add(vrank(s.v[idx[t]]));
        i = j + 1;
    }
    return out;
}

double cvm_statistic(const PseudoSample& s, const CopulaModel& m) {
    validate_model(m);
    const auto emp = empirical_copula_at_atoms(s);
    double stat = 0.0;
    for (int t = 0; t < s.size(); ++t) {
        const double d = emp[t] - copula_cdf(m, s.u[t], s.v[t]);
        stat += d * d;
    }
    return stat;
}

namespace {

CopulaModel fit_by(Family f, const PseudoSample& s, FitMethod method) {
    return method == FitMethod::InverseTau ? fit_inverse_tau(f, s) : fit_mle(f, s);
}

}  // namespace

GofResult gof_bootstrap_pvalue(Family f, const PseudoSample& s, int n_boot, std::uint64_t seed,
                               FitMethod method, int n_threads) {
    if (n_boot < 1) throw DomainError("gof_bootstrap_pvalue: n_boot must be >= 1");
    const int n = s.size();
    const CopulaModel fitted = fit_by(f, s, method);
    const double s_obs = cvm_statistic(s, fitted);

    std::vector<double> stats(n_boot, std::numeric_limits<double>::quiet_NaN());
    auto run_one = [&](int r) {
        const auto draw = copula_sample(fitted, n, derive_seed(seed, r + 1));
        const auto ranked = pseudo_obs(draw.u, draw.v);
        try {
            const CopulaModel refit = fit_by(f, ranked, method);
            stats[r] = cvm_statistic(ranked, refit);
        } catch (const InfeasibleFitError&) {
            // left as NaN, counted below
        }
    };
    if (n_threads <= 1) {
        for (int r = 0; r < n_boot; ++r) run_one(r);
    } else {
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int r = next.fetch_add(1); r < n_boot; r = next.fetch_add(1)) run_one(r);
        };
        std::vector<std::thread> pool;
        const int nt = std::min(n_threads, n_boot);
        pool.reserve(nt);
        for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    GofResult g;
    g.statistic = s_obs;
    int n_exceed = 0, n_valid = 0;
    for (double v : stats) {
        if (std::isnan(v)) {
            ++g.n_infeasible;
            continue;
        }
        ++n_valid;
        if (v >= s_obs) ++n_exceed;
    }
    if (n_valid == 0) throw NumericError("gof_bootstrap_pvalue: no valid bootstrap replicate");
    g.n_bootstrap = n_valid;
    g.p_value = (1.0 + n_exceed) / (n_valid + 1.0);
    return g;
}

stats::TestResult independence_permutation_test(const PseudoSample& s, int n_perm,
                                                std::uint64_t seed) {
    if (n_perm < 1) throw DomainError("independence_permutation_test: n_perm must be >= 1");
    const double t_obs = std::fabs(kendall_tau(s));
    Rng rng(seed);
    PseudoSample p = s;
    int n_exceed = 0;
    const int n = s.size();
    for (int r = 0; r < n_perm; ++r) {
        for (int i = n - 1; i > 0; --i) {  // Fisher-Yates on the v margin
            const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
            std::swap(p.v[i], p.v[j]);
        }
        if (std::fabs(kendall_tau(p)) >= t_obs) ++n_exceed;
    }
    stats::TestResult r;
    r.statistic = t_obs;
    r.p_value = (1.0 + n_exceed) / (n_perm + 1.0);
    r.lag = n_perm;
    r.method = "perm_independence";
    return r;
}

}  // namespace taildep::copula
