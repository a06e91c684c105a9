#pragma once

#include <cmath>
#include <limits>

namespace mma {

inline constexpr double inf = std::numeric_limits<double>::infinity();

namespace detail {

// Lower regularized incomplete gamma P(s,x) by its power series, s > 0,
// converges fast for x < s + 1.
inline double gamma_p_series(double s, double x) {
    double ap = s;
    double sum = 1.0 / s;
    double del = sum;
    for (int n = 0; n < 800; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16)
            break;
    }
    return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Upper incomplete gamma continued fraction (modified Lentz):
// Gamma(s,x) = e^{-x} x^s * cf. Reliable for x >= ~1 at any real s,
// and for x >= s+1 when s > 0.
inline double upper_gamma_cf(double s, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / (std::fabs(b) < tiny ? tiny : b);
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -static_cast<double>(i) * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16)
            break;
    }
    return std::exp(-x + s * std::log(x)) * h;
}

// Gamma(s,x) for x < 1 and s in [0, 1): uses
//   Gamma(s,x) = (Gamma(s+1) - x^s)/s - x^s * sum_{n>=1} (-x)^n / ((s+n) n!)
// with the head written via expm1 so s -> 0 stays stable
// (limit -gamma_E - log x).
inline double upper_gamma_small_base(double s, double x) {
    const double lx = std::log(x);
    double head;
    if (s == 0.0) {
        head = -0.57721566490153286060651209008240 - lx;
    } else if (s < 0.5) {
        head = (std::expm1(std::lgamma(s + 1.0)) - std::expm1(s * lx)) / s;
    } else {
        head = (std::tgamma(s + 1.0) - std::exp(s * lx)) / s;
    }
    double sum = 0.0;
    double term = 1.0; // (-x)^n / n!
    for (int n = 1; n <= 200; ++n) {
        term *= -x / n;
        const double del = term / (s + n);
        sum += del;
        if (std::fabs(del) < 1e-17 * (std::fabs(sum) + 1e-30))
            break;
    }
    return head - std::exp(s * lx) * sum;
}

} // namespace detail

// Upper incomplete gamma Gamma(s,x) = int_x^inf t^{s-1} e^{-t} dt for x > 0
// and any real s (x = 0 allowed when s > 0). Shapes s <= 0 are reached by
// walking the recurrence Gamma(s,x) = (Gamma(s+1,x) - x^s e^{-x}) / s down
// from a base shape in [0,1).
inline double upper_gamma(double s, double x) {
    if (std::isnan(s) || std::isnan(x) || x < 0.0)
        return std::numeric_limits<double>::quiet_NaN();
    if (x == 0.0)
        return s > 0.0 ? std::tgamma(s) : inf;
    if (s > 0.0) {
        if (x < s + 1.0)
            return std::tgamma(s) * (1.0 - detail::gamma_p_series(s, x));
        return detail::upper_gamma_cf(s, x);
    }
    if (x >= 1.0)
        return detail::upper_gamma_cf(s, x);
    // s <= 0, x < 1: base at the fractional part of s (0 for integer s)
    const double fl = std::floor(s);
    double frac = s - fl;              // in [0,1)
    if (frac > 1.0 - 1e-12) frac = 0.0; // guard against roundoff at integers
    const int steps = static_cast<int>(std::lround(frac - s));
    double g = detail::upper_gamma_small_base(frac, x);
    double sc = frac;
    for (int i = 0; i < steps; ++i) {
        sc -= 1.0;
        g = (g - std::exp(sc * std::log(x) - x)) / sc;
    }
    return g;
}

// Regularized lower incomplete gamma P(s,x), s > 0.
inline double gamma_p(double s, double x) {
    if (x <= 0.0) return 0.0;
    if (x < s + 1.0)
        return detail::gamma_p_series(s, x);
    return 1.0 - detail::upper_gamma_cf(s, x) / std::tgamma(s);
}

// Regularized upper incomplete gamma Q(s,x) = 1 - P(s,x), s > 0.
inline double gamma_q(double s, double x) {
    if (x <= 0.0) return 1.0;
    if (x < s + 1.0)
        return 1.0 - detail::gamma_p_series(s, x);
    return detail::upper_gamma_cf(s, x) / std::tgamma(s);
}

// Inverse of y -> Gamma(s, y) for s > 0, w in (0, Gamma(s)]. Bracketed
// bisection plus a Newton polish; the log(1/w) asymptote seeds the bracket.
inline double upper_gamma_inverse(double s, double w) {
    const double total = std::tgamma(s);
    if (!(w > 0.0))
        return inf;
    if (w >= total)
        return 0.0;
    double lo = 0.0;
    double hi = std::fmax(2.0 * s + 4.0, 2.0 * std::log(total / w) + 4.0);
    while (upper_gamma(s, hi) > w)
        hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (upper_gamma(s, mid) > w)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-16 * (1.0 + hi))
            break;
    }
    double y = 0.5 * (lo + hi);
    for (int i = 0; i < 4; ++i) {
        const double fy = upper_gamma(s, y) - w;
        const double dy = -std::exp((s - 1.0) * std::log(y) - y);
        if (dy == 0.0) break;
        const double yn = y - fy / dy;
        if (yn > lo && yn < hi) y = yn; else break;
    }
    return y;
}

// Inverse of the regularized lower gamma: solve P(s,x) = p for x, s > 0.
inline double gamma_p_inverse(double s, double p) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return inf;
    double lo = 0.0, hi = s + 4.0;
    while (gamma_p(s, hi) < p)
        hi *= 2.0;
    for (int i = 0; i < 400; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (gamma_p(s, mid) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * hi)
            break;
    }
    return 0.5 * (lo + hi);
}

// Exact Poisson upper tail P(N_ell >= n) for integer n >= 0; equals the
// regularized lower incomplete gamma P(n, ell).
inline double poisson_tail_exact(double ell, unsigned n) {
    if (n == 0) return 1.0;
    return gamma_p(static_cast<double>(n), ell);
}

// Chi-square upper tail (p-value) with k degrees of freedom.
inline double chi_square_tail(double k, double x) {
    return gamma_q(0.5 * k, 0.5 * x);
}

} // namespace mma
