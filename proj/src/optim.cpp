#include "taildep/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taildep/common.hpp"

namespace taildep::optim {

namespace {

double safe_eval(const std::function<double(const std::vector<double>&)>& f,
                 const std::vector<double>& x, int& n_eval) {
    ++n_eval;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
}

NmResult nm_single(const std::function<double(const std::vector<double>&)>& f,
                   const std::vector<double>& x0, const NmOptions& opt, int& n_eval) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        double step = opt.initial_step * std::max(std::fabs(x0[i]), 0.1);
        simplex[i + 1][i] += step;
    }
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = safe_eval(f, simplex[i], n_eval);

    std::vector<std::size_t> order(n + 1);
    NmResult res;
    while (n_eval < opt.max_eval) {
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];

        if (fv[worst] - fv[best] <= opt.f_tol * (1.0 + std::fabs(fv[best]))) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j)
                p[j] = centroid[j] + t * (simplex[worst][j] - centroid[j]);
            return p;
        };

        auto xr = blend(-1.0);
        const double fr = safe_eval(f, xr, n_eval);
        if (fr < fv[order[0]]) {
            auto xe = blend(-2.0);
            const double fe = safe_eval(f, xe, n_eval);
            if (fe < fr) {
                simplex[worst] = std::move(xe);
                fv[worst] = fe;
            } else {
                simplex[worst] = std::move(xr);
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            simplex[worst] = std::move(xr);
            fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            auto xc = blend(outside ? -0.5 : 0.5);
            const double fc = safe_eval(f, xc, n_eval);
            if (fc < std::min(fr, fv[worst])) {
                simplex[worst] = std::move(xc);
                fv[worst] = fc;
            } else {
                // shrink toward the best vertex
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < n; ++j)
                        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
                    fv[i] = safe_eval(f, simplex[i], n_eval);
                }
            }
        }
    }
    std::size_t ib = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (fv[i] < fv[ib]) ib = i;
    res.x = simplex[ib];
    res.fval = fv[ib];
    res.n_eval = n_eval;
    return res;
}

double norm2(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

}  // namespace

NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                     std::vector<double> x0, const NmOptions& opt) {
    int n_eval = 0;
    NmResult best = nm_single(f, x0, opt, n_eval);
    for (int r = 0; r < opt.n_restarts && n_eval < opt.max_eval; ++r) {
        NmOptions o = opt;
        o.initial_step = opt.initial_step * 0.1;
        NmResult again = nm_single(f, best.x, o, n_eval);
        if (again.fval < best.fval) best = again;
        best.n_eval = n_eval;
    }
    return best;
}

NmResult nelder_mead_multistart(const std::function<double(const std::vector<double>&)>& f,
                                const std::vector<std::vector<double>>& starts,
                                const NmOptions& opt) {
    if (starts.empty()) throw DomainError("nelder_mead_multistart: no starting points");
    NmResult best;
    bool have = false;
    for (const auto& s : starts) {
        NmResult r = nelder_mead(f, s, opt);
        if (!have || r.fval < best.fval
            || (r.fval == best.fval && norm2(r.x) < norm2(best.x))) {
            best = r;
            have = true;
        }
    }
    return best;
}

double brent_min(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_iter) {
    const double gold = 0.3819660112501051;
    double x = a + gold * (b - a), w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const double m = 0.5 * (a + b);
        const double tol1 = tol * std::fabs(x) + 1e-12;
        const double tol2 = 2.0 * tol1;
        if (std::fabs(x - m) <= tol2 - 0.5 * (b - a)) break;
        double p = 0.0, q = 0.0, r = 0.0;
        bool parabolic = false;
        if (std::fabs(e) > tol1) {
            r = (x - w) * (fx - fv);
            q = (x - v) * (fx - fw);
            p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::fabs(q);
            if (std::fabs(p) < std::fabs(0.5 * q * e) && p > q * (a - x) && p < q * (b - x)) {
                e = d;
                d = p / q;
                parabolic = true;
            }
        }
        if (!parabolic) {
            e = (x < m) ? b - x : a - x;
            d = gold * e;
        }
        const double u = (std::fabs(d) >= tol1) ? x + d : x + (d > 0 ? tol1 : -tol1);
        const double fu = f(u);
        if (fu <= fx) {
            if (u < x) b = x; else a = x;
            v = w, fv = fw;
            w = x, fw = fx;
            x = u, fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w, fv = fw;
                w = u, fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u, fv = fu;
            }
        }
    }
    return x;
}

double find_root(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_iter) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw NumericError("find_root: endpoints do not bracket a root");
    for (int it = 0; it < max_iter; ++it) {
        // secant proposal clipped into the bracket, bisection fallback
        double x = b - fb * (b - a) / (fb - fa);
        if (!(x > std::min(a, b) && x < std::max(a, b))) x = 0.5 * (a + b);
        const double fx = f(x);
        if (std::fabs(fx) <= tol || std::fabs(b - a) <= 1e-15 * (1.0 + std::fabs(x))) return x;
        if (fa * fx < 0.0) {
            b = x, fb = fx;
        } else {
            a = x, fa = fx;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace taildep::optim
