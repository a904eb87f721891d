#include "taildep/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "taildep/common.hpp"

namespace taildep::special {

double ln_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("ln_gamma: x must be > 0");
    return std::lgamma(x);
}

double bessel_k(double nu, double x) {
    if (!(x > 0.0)) throw DomainError("bessel_k: x must be > 0");
    return boost::math::cyl_bessel_k(std::fabs(nu), x);
}

double norm_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("norm_quantile: p must be in (0,1)");
    return -M_SQRT2 * boost::math::erfc_inv(2.0 * p);
}

double t_pdf(double x, double nu) {
    if (!(nu > 0.0)) throw DomainError("t_pdf: nu must be > 0");
    const double c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)
                     - 0.5 * std::log(nu * M_PI);
    return std::exp(c - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

double t_cdf(double x, double nu) {
    if (!(nu > 0.0)) throw DomainError("t_cdf: nu must be > 0");
    boost::math::students_t_distribution<double> d(nu);
    return boost::math::cdf(d, x);
}

double t_quantile(double p, double nu) {
    if (!(nu > 0.0)) throw DomainError("t_quantile: nu must be > 0");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("t_quantile: p must be in (0,1)");
    boost::math::students_t_distribution<double> d(nu);
    return boost::math::quantile(d, p);
}

double chi2_sf(double x, double k) {
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * k, 0.5 * x);
}

double gamma_p(double a, double x) {
    return boost::math::gamma_p(a, x);
}

double gamma_p_inv(double a, double p) {
    return boost::math::gamma_p_inv(a, p);
}

double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // theta-function form, fast for small arguments
        const double y = std::exp(-M_PI * M_PI / (8.0 * lambda * lambda));
        const double cdf = std::sqrt(2.0 * M_PI) / lambda
                           * (y + std::pow(y, 9.0) + std::pow(y, 25.0) + std::pow(y, 49.0));
        return 1.0 - cdf;
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

double debye1(double x) {
    if (x == 0.0) return 1.0;
    if (x < 0.0) return debye1(-x) - 0.5 * x;  // D1(-y) = D1(y) + y/2
    if (x < 1e-4) {
        // t/(e^t-1) = 1 - t/2 + t^2/12 + O(t^4), integrated termwise
        return 1.0 - x / 4.0 + x * x / 36.0;
    }
    auto f = [](double t) { return t <= 1e-12 ? 1.0 - 0.5 * t : t / std::expm1(t); };
    const double integral = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, 0.0, x, 12, 1e-13);
    return integral / x;
}

namespace {

// Gauss-Legendre abscissas/weights used by the Genz bivariate normal routine.
constexpr std::array<double, 3> gl6_x = {-0.9324695142031522, -0.6612093864662647,
                                         -0.2386191860831970};
constexpr std::array<double, 3> gl6_w = {0.1713244923791705, 0.3607615730481384,
                                         0.4679139345726904};
constexpr std::array<double, 6> gl12_x = {-0.9815606342467191, -0.9041172563704750,
                                          -0.7699026741943050, -0.5873179542866171,
                                          -0.3678314989981802, -0.1252334085114692};
constexpr std::array<double, 6> gl12_w = {0.04717533638651177, 0.1069393259953183,
                                          0.1600783285433464,  0.2031674267230659,
                                          0.2334925365383547,  0.2491470458134029};
constexpr std::array<double, 10> gl20_x = {
    -0.9931285991850949, -0.9639719272779138, -0.9122344282513259, -0.8391169718222188,
    -0.7463319064601508, -0.6360536807265150, -0.5108670019508271, -0.3737060887154196,
    -0.2277858511416451, -0.07652652113349733};
constexpr std::array<double, 10> gl20_w = {
    0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475,
    0.1019301198172404,  0.1181945319615184,  0.1316886384491766,  0.1420961093183821,
    0.1491729864726037,  0.1527533871307259};

// Upper-orthant probability P(X > dh, Y > dk) for standard bivariate normal.
// Translation of Alan Genz's BVND (Drezner-Wesolowsky with tail expansion).
double bvn_upper(double dh, double dk, double r) {
    const double tp = 2.0 * M_PI;
    const double inf = std::numeric_limits<double>::infinity();
    if (dh == inf || dk == inf) return 0.0;
    if (dh == -inf) return dk == -inf ? 1.0 : norm_cdf(-dk);
    if (dk == -inf) return norm_cdf(-dh);
    if (r == 0.0) return norm_cdf(-dh) * norm_cdf(-dk);

    const double* xs = gl20_x.data();
    const double* ws = gl20_w.data();
    int ng = 10;
    if (std::fabs(r) < 0.3) {
        xs = gl6_x.data();
        ws = gl6_w.data();
        ng = 3;
    } else if (std::fabs(r) < 0.75) {
        xs = gl12_x.data();
        ws = gl12_w.data();
        ng = 6;
    }

    double h = dh, k = dk;
    double hk = h * k;
    double bvn = 0.0;

    if (std::fabs(r) < 0.925) {
        const double hs = 0.5 * (h * h + k * k);
        const double asr = std::asin(r);
        for (int i = 0; i < ng; ++i) {
            for (int sign = -1; sign <= 1; sign += 2) {
                const double sn = std::sin(0.5 * asr * (1.0 + sign * xs[i]));
                bvn += ws[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        bvn = bvn * asr / (2.0 * tp) + norm_cdf(-h) * norm_cdf(-k);
        return std::clamp(bvn, 0.0, 1.0);
    }

    if (r < 0.0) {
        k = -k;
        hk = -hk;
    }
    if (std::fabs(r) < 1.0) {
        const double as = (1.0 - r) * (1.0 + r);
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 16.0;
        double asr = -0.5 * (bs / as + hk);
        if (asr > -100.0) {
            bvn = a * std::exp(asr)
                  * (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
        }
        if (-hk < 100.0) {
            const double b = std::sqrt(bs);
            const double sp = std::sqrt(tp) * norm_cdf(-b / a);
            bvn -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a *= 0.5;
        for (int i = 0; i < ng; ++i) {
            for (int sign = -1; sign <= 1; sign += 2) {
                const double x = a * (1.0 + sign * xs[i]);
                const double xsq = x * x;
                const double rs = std::sqrt(1.0 - xsq);
                asr = -0.5 * (bs / xsq + hk);
                if (asr > -100.0) {
                    const double sp = 1.0 + c * xsq * (1.0 + d * xsq);
                    const double ep = std::exp(-0.5 * hk * xsq / ((1.0 + rs) * (1.0 + rs))) / rs;
                    bvn += a * ws[i] * std::exp(asr) * (ep - sp);
                }
            }
        }
        bvn = -bvn / tp;
    }
    if (r > 0.0) {
        bvn += norm_cdf(-std::max(h, k));
    } else {
        bvn = -bvn;
        if (k > h) bvn += h < 0.0 ? norm_cdf(k) - norm_cdf(h) : norm_cdf(-h) - norm_cdf(-k);
    }
    return std::clamp(bvn, 0.0, 1.0);
}

}  // namespace

double bvn_cdf(double h, double k, double rho) {
    if (!(rho > -1.0 && rho < 1.0)) {
        if (rho == 1.0) return norm_cdf(std::min(h, k));
        if (rho == -1.0) {
            const double p = norm_cdf(h) + norm_cdf(k) - 1.0;
            return std::max(0.0, p);
        }
        throw DomainError("bvn_cdf: rho must be in [-1,1]");
    }
    return bvn_upper(-h, -k, rho);
}

double bvt_cdf(double x, double y, double rho, double nu) {
    if (!(nu > 0.0)) throw DomainError("bvt_cdf: nu must be > 0");
    if (!(rho > -1.0 && rho < 1.0)) {
        if (rho == 1.0) return t_cdf(std::min(x, y), nu);
        if (rho == -1.0) return std::max(0.0, t_cdf(x, nu) + t_cdf(y, nu) - 1.0);
        throw DomainError("bvt_cdf: rho must be in [-1,1]");
    }
    // P(X<=x, Y<=y) = E_s[ F_{nu+1}((y - rho s)/scale(s)) ] over s ~ t_nu truncated at x,
    // written as an integral in p = F_nu(s) so the domain is the unit interval.
    const double px = t_cdf(x, nu);
    if (px <= 0.0) return 0.0;
    const double om = (1.0 - rho * rho) / (nu + 1.0);
    auto integrand = [&](double p) {
        const double s = t_quantile(p, nu);
        const double scale = std::sqrt((nu + s * s) * om);
        return t_cdf((y - rho * s) / scale, nu + 1.0);
    };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, 0.0, px, 10, 1e-11);
}

}  // namespace taildep::special

namespace taildep {

double Rng::normal() {
    return special::norm_quantile(uniform());
}

}  // namespace taildep
