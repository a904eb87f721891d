#pragma once

#include <functional>
#include <vector>

namespace taildep::optim {

struct NmResult {
    std::vector<double> x;
    double fval = 0.0;
    int n_eval = 0;
    bool converged = false;
};

struct NmOptions {
    double f_tol = 1e-10;     ///< stop when the simplex f-spread is below this
    int max_eval = 40000;
    int n_restarts = 1;       ///< re-seed a fresh simplex at the best point
    double initial_step = 0.25;
};

/// Nelder-Mead simplex minimization. Deterministic for fixed inputs.
NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                     std::vector<double> x0, const NmOptions& opt = {});

/// Run Nelder-Mead from several starting points; keep the best final value,
/// ties broken by the smaller parameter norm.
NmResult nelder_mead_multistart(const std::function<double(const std::vector<double>&)>& f,
                                const std::vector<std::vector<double>>& starts,
                                const NmOptions& opt = {});

/// Brent minimization of a univariate function on [a, b].
double brent_min(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-10, int max_iter = 200);

/// Bisection/Newton hybrid root bracketing for monotone functions;
/// finds x in [a,b] with |f(x)| <= tol given f(a), f(b) of opposite sign.
double find_root(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12, int max_iter = 200);

}  // namespace taildep::optim
