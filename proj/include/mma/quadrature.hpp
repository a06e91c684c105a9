#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mma/special.hpp"

namespace mma::quad {

struct Options {
    double rel_tol = 1e-9;
    std::size_t max_evals = 1'000'000;
    int max_shells = 360;       // geometric decades explored toward 0 / infinity
    double shell_ratio = 10.0;  // fixed decade shells; the divergence fit assumes this
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    bool diverged = false;
    int divergent_end = 0; // -1: lower endpoint, +1: upper endpoint
    bool budget_exceeded = false;
    std::size_t evals = 0;

    bool finite() const { return !diverged; }
    bool ok() const { return !diverged && !budget_exceeded; }
    double value_or_inf() const { return diverged ? inf : value; }
};

namespace detail {

// 15-point Kronrod rule with the embedded 7-point Gauss rule and the
// QUADPACK-style damped error estimate.
template <class F>
double gk15(F& f, double a, double b, double* err, std::size_t* evals) {
    static constexpr double xgk[8] = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.0};
    static constexpr double wgk[8] = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr double wg[4] = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    double resk = 0.0, resg = 0.0;
    for (int j = 0; j < 7; ++j) {
        const double f1 = f(c - h * xgk[j]);
        const double f2 = f(c + h * xgk[j]);
        fv[j] = f1;
        fv[14 - j] = f2;
        resk += wgk[j] * (f1 + f2);
        if (j % 2 == 1) resg += wg[j / 2] * (f1 + f2);
    }
    const double fc = f(c);
    fv[7] = fc;
    resk += wgk[7] * fc;
    resg += wg[3] * fc;
    *evals += 15;

    const double reskh = 0.5 * resk;
    double resasc = wgk[7] * std::fabs(fc - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += wgk[j] * (std::fabs(fv[j] - reskh) + std::fabs(fv[14 - j] - reskh));
    resasc *= std::fabs(h);
    double e = std::fabs((resk - resg) * h);
    if (resasc != 0.0 && e != 0.0)
        e = resasc * std::min(1.0, std::pow(200.0 * e / resasc, 1.5));
    *err = e;
    return resk * h;
}

// Adaptive bisection on top of the 15-point Gauss-Kronrod rule. Panels whose
// absolute contribution is below `abs_floor` are accepted immediately, which
// keeps noise-floor tails from eating the evaluation budget.
template <class F>
double panel(F& f, double a, double b, double rel_tol, double abs_floor, int depth,
             double* err, std::size_t* evals, std::size_t max_evals) {
    double e = 0.0;
    const double v = gk15(f, a, b, &e, evals);
    if (e <= rel_tol * std::fabs(v) + abs_floor || depth <= 0 || *evals >= max_evals) {
        *err += e;
        return v;
    }
    const double mid = 0.5 * (a + b);
    return panel(f, a, mid, rel_tol, 0.5 * abs_floor, depth - 1, err, evals, max_evals) +
           panel(f, mid, b, rel_tol, 0.5 * abs_floor, depth - 1, err, evals, max_evals);
}

// Fitted log10 slope of shell masses in acquisition order (toward the
// endpoint); least squares over the trailing window.
inline double shell_slope(const std::vector<double>& logm, int window) {
    const int n = std::min<int>(window, static_cast<int>(logm.size()));
    const int off = static_cast<int>(logm.size()) - n;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = i, y = logm[off + i];
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

} // namespace detail

// Integrate f over (a, b). a == 0 and b == inf are treated as improper
// endpoints and resolved by decade shells; an improper integral is declared
// divergent when the trailing shell contributions stop decaying
// (fitted log10 slope per decade toward the endpoint >= -0.01).
// `breaks` marks interior points where the integrand kinks or jumps.
template <class F>
Result integrate(F&& f, double a, double b, Options opt = {},
                 std::vector<double> breaks = {}) {
    Result res;
    if (!(b > a)) return res;

    const bool improper_lo = (a == 0.0);
    const bool improper_hi = (b == inf);

    double lo_anchor = a, hi_anchor = b;
    if (improper_lo) lo_anchor = std::min(improper_hi ? 1.0 : b, 1.0);
    if (improper_hi) hi_anchor = std::max(improper_lo ? 1.0 : a, 1.0);
    if (lo_anchor > hi_anchor) lo_anchor = hi_anchor;

    const double ptol = opt.rel_tol * 0.1;
    double abs_floor = 0.0; // grows with the accumulated value
    std::sort(breaks.begin(), breaks.end());

    auto run_panel = [&](double x0, double x1, int depth) {
        double v = 0.0;
        double lo = x0;
        for (double c : breaks) { // split at interior kinks
            if (c > lo && c < x1) {
                v += detail::panel(f, lo, c, ptol, abs_floor + 1e-305, depth, &res.error,
                                   &res.evals, opt.max_evals);
                lo = c;
            }
        }
        v += detail::panel(f, lo, x1, ptol, abs_floor + 1e-305, depth, &res.error,
                           &res.evals, opt.max_evals);
        res.value += v;
        abs_floor = 1e-3 * opt.rel_tol * std::fabs(res.value);
        if (res.evals >= opt.max_evals) res.budget_exceeded = true;
        return v;
    };

    // proper middle: split at breaks and at decades when the range is wide
    {
        std::vector<double> cuts{lo_anchor};
        for (double c : breaks)
            if (c > lo_anchor && c < hi_anchor) cuts.push_back(c);
        if (lo_anchor > 0.0 && hi_anchor / lo_anchor > 100.0) {
            for (double c = lo_anchor * opt.shell_ratio; c < hi_anchor; c *= opt.shell_ratio)
                cuts.push_back(c);
        }
        cuts.push_back(hi_anchor);
        std::sort(cuts.begin(), cuts.end());
        const int depth = cuts.size() > 8 ? 8 : 14;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (cuts[i + 1] <= cuts[i]) continue;
            run_panel(cuts[i], cuts[i + 1], depth);
            if (res.budget_exceeded) return res;
        }
    }

    // shell cascade toward one improper endpoint
    auto cascade = [&](int direction) { // -1 toward 0, +1 toward inf
        std::vector<double> logm;
        double edge = (direction < 0) ? lo_anchor : hi_anchor;
        int flat = 0;
        for (int k = 0; k < opt.max_shells; ++k) {
            const double nxt = (direction < 0) ? edge / opt.shell_ratio : edge * opt.shell_ratio;
            const double s0 = (direction < 0) ? nxt : edge;
            const double s1 = (direction < 0) ? edge : nxt;
            const double m = run_panel(s0, s1, 8);
            edge = nxt;
            if (res.budget_exceeded) return;
            if (!std::isfinite(m)) { // overflowed shell: divergent in practice
                res.diverged = true;
                res.divergent_end = direction;
                return;
            }

            const double scale = std::fabs(res.value) + 1e-300;
            const double am = std::fabs(m);
            if (am <= opt.rel_tol * scale * 0.1 || am < 1e-290) {
                if (++flat >= 2) return; // converged: shells negligible
            } else {
                flat = 0;
            }
            logm.push_back(std::log10(am + 1e-300));
            if (k >= 7) {
                const double slope = detail::shell_slope(logm, 6);
                if (slope >= -0.01 && am > opt.rel_tol * scale) {
                    res.diverged = true;
                    res.divergent_end = direction;
                    return;
                }
            }
        }
        // shells exhausted while contributions still significant
        res.budget_exceeded = true;
    };

    if (improper_lo && !res.diverged) cascade(-1);
    if (improper_hi && !res.diverged && !res.budget_exceeded) cascade(+1);
    return res;
}

// Convenience: value of the integral with +inf substituted on divergence.
template <class F>
double integrate_value(F&& f, double a, double b, Options opt = {}) {
    return integrate(std::forward<F>(f), a, b, opt).value_or_inf();
}

} // namespace mma::quad
