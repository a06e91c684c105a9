#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mma/kernels.hpp"
#include "mma/measures.hpp"

namespace mma {

// ---------------------------------------------------------------------------
// Growth moment condition:
//   C(gamma) = int_V int_R |z|^gamma f1(x)^gamma 1(|z| f1(x) > 1) lambda(dz) pi(dx)

struct ConditionReport {
    double gamma = 0.0;
    double value = 0.0; // +inf when divergent
    bool convergent = true;
    std::string diagnosis; // which term / endpoint drives divergence
    double quad_error = 0.0;
    bool quality_ok = true;

    double value_or_inf() const { return convergent ? value : inf; }
};

namespace detail {
// reciprocal capped inside the double range: 1/y multiplied by powers of y
// later, so the capping error is below 1e-450
inline double inv_cap(double y) { return y > 1e-300 ? 1.0 / y : 1e300; }

// pi-integral of g over (lo,hi) folded into a ConditionReport-style triple
struct PiInt {
    double value = 0.0;
    bool finite = true;
    int end = 0;
    double error = 0.0;
    bool quality = true;
};

template <class G>
PiInt pi_integral(const MixingMeasure& pi, G&& g, double lo, double hi,
                  std::vector<double> breaks = {}) {
    auto r = pi.integrate(std::forward<G>(g), lo, hi, {}, std::move(breaks));
    PiInt p;
    p.value = r.value;
    p.finite = !r.diverged;
    p.end = r.divergent_end;
    p.error = r.error;
    p.quality = !r.budget_exceeded;
    return p;
}
} // namespace detail

// Evaluates the condition by the three-term split
//   {f1 > 1} x {1/f1 < |z| <= 1},  {f1 > 1} x {|z| > 1},  {f1 <= 1} x {|z| > 1/f1}.
inline ConditionReport evaluate_c_gamma(const LevyMeasure& levy, const MixingMeasure& pi,
                                        const Kernel& k, double gamma) {
    if (!(gamma >= 0.0) || !(gamma <= 2.0))
        throw std::invalid_argument("gamma: must be in [0,2]");
    ConditionReport rep;
    rep.gamma = gamma;
    if (levy.is_zero()) return rep;

    const auto [slo, shi] = pi.support();
    const double xstar = std::min(k.f1_threshold(1.0), shi); // f1 > 1 iff x < xstar

    const double m_above_1 = levy.moment_abs(gamma, 1.0, inf);
    const bool m1_inf = !std::isfinite(m_above_1);

    // term 2: int_{f1>1} f1^gamma dpi * int_{|z|>1} |z|^gamma lambda
    auto w1 = detail::pi_integral(
        pi,
        [&](double x) {
            const double f1 = k.total_mass(x);
            return f1 > 1.0 ? std::pow(f1, gamma) : 0.0;
        },
        slo, shi, {xstar});
    if (!w1.finite) {
        rep.convergent = false;
        rep.diagnosis = std::string("pi-integral of f1^gamma over {f1 > 1} diverges at x ") +
                        (w1.end < 0 ? "-> 0" : "-> infinity") + " (gamma > 1 + alpha)";
        rep.value = inf;
        return rep;
    }
    const double mass_low_f1 = detail::pi_integral(
                                   pi,
                                   [&](double x) { return k.total_mass(x) <= 1.0 ? 1.0 : 0.0; },
                                   slo, shi, {xstar})
                                   .value;
    if (m1_inf && w1.value > 0.0) {
        rep.convergent = false;
        rep.diagnosis = "z-moment int_{|z|>1} |z|^gamma lambda(dz) diverges at z -> infinity "
                        "(gamma > eta)";
        rep.value = inf;
        return rep;
    }
    if (m1_inf && mass_low_f1 > 0.0) {
        rep.convergent = false;
        rep.diagnosis = "term over {f1 <= 1} diverges: int_{|z|>1/f1} |z|^gamma lambda "
                        "infinite at z -> infinity (gamma > eta)";
        rep.value = inf;
        return rep;
    }

    const double t2 = w1.value * (w1.value > 0.0 ? m_above_1 : 0.0);

    // term 1: small jumps against large f1
    auto t1 = detail::pi_integral(
        pi,
        [&](double x) {
            const double f1 = k.total_mass(x);
            if (f1 <= 1.0) return 0.0;
            return std::pow(f1, gamma) * levy.moment_abs(gamma, 1.0 / f1, 1.0);
        },
        slo, shi, {xstar});
    if (!t1.finite) {
        rep.convergent = false;
        rep.diagnosis = std::string("term over {f1 > 1} x {|z| <= 1} diverges at x ") +
                        (t1.end < 0 ? "-> 0" : "-> infinity");
        rep.value = inf;
        return rep;
    }

    // term 3: large jumps against small f1
    auto t3 = detail::pi_integral(
        pi,
        [&](double x) {
            const double f1 = k.total_mass(x);
            if (f1 > 1.0) return 0.0;
            return std::pow(f1, gamma) * levy.moment_abs(gamma, 1.0 / f1, inf);
        },
        slo, shi, {xstar});
    if (!t3.finite) {
        rep.convergent = false;
        rep.diagnosis = std::string("term over {f1 <= 1} diverges at x ") +
                        (t3.end < 0 ? "-> 0" : "-> infinity");
        rep.value = inf;
        return rep;
    }

    rep.value = t1.value + t2 + t3.value;
    rep.quad_error = t1.error + t3.error + w1.error;
    rep.quality_ok = t1.quality && t3.quality && w1.quality;
    return rep;
}

// single-pass route without the three-term split (cross-check in tests)
inline ConditionReport evaluate_c_gamma_direct(const LevyMeasure& levy, const MixingMeasure& pi,
                                               const Kernel& k, double gamma) {
    ConditionReport rep;
    rep.gamma = gamma;
    if (levy.is_zero()) return rep;
    if (!std::isfinite(levy.moment_abs(gamma, 1.0, inf))) {
        rep.convergent = false;
        rep.value = inf;
        rep.diagnosis = "z -> infinity";
        return rep;
    }
    const auto [slo, shi] = pi.support();
    auto r = detail::pi_integral(
        pi,
        [&](double x) {
            const double f1 = k.total_mass(x);
            return std::pow(f1, gamma) * levy.moment_abs(gamma, 1.0 / f1, inf);
        },
        slo, shi, {std::min(k.f1_threshold(1.0), shi)});
    rep.value = r.value;
    rep.convergent = r.finite;
    rep.quad_error = r.error;
    rep.quality_ok = r.quality;
    if (!r.finite) {
        rep.value = inf;
        rep.diagnosis = r.end < 0 ? "x -> 0" : "x -> infinity";
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Model indices: alpha (mixing), beta (small-jump activity), eta (jump tail).

struct IndexReport {
    IndexEstimate alpha; // value may be +inf
    IndexEstimate beta;
    IndexEstimate eta;
    bool f1_integrable = true;
    double f1_integral = 0.0;
};

inline IndexReport compute_indices(const LevyMeasure& levy, const MixingMeasure& pi,
                                   const Kernel& k, double slack = 0.01) {
    IndexReport rep;
    const auto [slo, shi] = pi.support();

    auto f1_int = detail::pi_integral(pi, [&](double x) { return k.total_mass(x); }, slo, shi);
    rep.f1_integrable = f1_int.finite;
    rep.f1_integral = f1_int.value;
    if (!f1_int.finite)
        throw std::invalid_argument(
            "compute_indices: f1 is not pi-integrable; the moving average does not exist");

    const double xstar = std::min(k.f1_threshold(1.0), shi);
    // scale-family kernels have f1 = 1/x: the region moment is an exact
    // closed-form mixing moment; otherwise bisect on the divergence scan
    auto finite_at = [&](double ap) {
        if (k.scale_family())
            return std::isfinite(pi.moment_closed(-(1.0 + ap), 0.0, xstar));
        if (k.singleton_domain())
            return k.total_mass(1.0) <= 1.0 || pi.finite_mass();
        return detail::pi_integral(
                   pi,
                   [&](double x) {
                       const double f1 = k.total_mass(x);
                       return f1 > 1.0 ? std::pow(f1, 1.0 + ap) : 0.0;
                   },
                   slo, shi, {xstar})
            .finite;
    };
    if (finite_at(64.0)) {
        rep.alpha = {inf, true, inf};
    } else {
        double lo = 0.0, hi = 64.0;
        for (int i = 0; i < 50; ++i) {
            const double mid = 0.5 * (lo + hi);
            (finite_at(mid) ? lo : hi) = mid;
        }
        double a0 = 0.5 * (lo + hi);
        // probe the boundary moment at the exact critical value when the
        // bisection landed within roundoff of a representable one
        const double snap = std::round(a0 * 1e9) / 1e9;
        if (std::fabs(snap - a0) < 1e-10) a0 = snap;
        rep.alpha.value = a0;
        rep.alpha.attained = finite_at(a0);
        rep.alpha.usable = rep.alpha.attained ? a0 : std::max(0.0, a0 - slack);
    }
    rep.beta = levy.bg_index(slack);
    rep.eta = levy.tail_index(slack);
    return rep;
}

// ---------------------------------------------------------------------------
// Rate classification.

enum class Regime {
    half,            // alpha >= 1, eta >= 2
    inv_eta,         // eta-driven
    inv_one_plus_alpha,
    open_beta,       // 1/gamma > 1 - alpha/beta
    inv_eta_heavy,   // eta-driven with beta > 1 + alpha
    open_beta_heavy, // open bound with eta >= (1 - alpha/beta)^{-1}
    gaussian_lil,
    finite_var_lil,
};

inline const char* regime_label(Regime r) {
    switch (r) {
    case Regime::half: return "alpha >= 1, eta >= 2";
    case Regime::inv_eta: return "1/gamma = 1/eta";
    case Regime::inv_one_plus_alpha: return "1/gamma = 1/(1+alpha)";
    case Regime::open_beta: return "1/gamma > 1 - alpha/beta";
    case Regime::inv_eta_heavy: return "1/gamma = 1/eta (beta > 1+alpha)";
    case Regime::open_beta_heavy: return "1/gamma > 1 - alpha/beta (eta large)";
    case Regime::gaussian_lil: return "gaussian-LIL";
    case Regime::finite_var_lil: return "finite-var-LIL";
    }
    return "";
}

enum class Normalizer { power, power_log, loglog };

inline const char* normalizer_label(Normalizer n) {
    switch (n) {
    case Normalizer::power: return "t^{1/gamma}";
    case Normalizer::power_log: return "t^{1/gamma} log t";
    case Normalizer::loglog: return "sqrt(2 t loglog t)";
    }
    return "";
}

struct ModelFlags {
    bool pi_finite = true;
    bool finite_variation = true; // int_{|z|<=1} |z| lambda < inf and b = 0
    bool gaussian_only = false;   // b > 0 and lambda == 0
    bool c2_attained = false;     // growth condition holds at gamma = 2
};

struct RateReport {
    double alpha = 0.0, beta = 0.0, eta = 0.0;
    bool alpha_attained = true, beta_attained = true, eta_attained = true;
    double gamma_max = 2.0;
    bool gamma_open = false;
    double inv_gamma = 0.5;
    Regime regime = Regime::half;
    Normalizer normalizer = Normalizer::power;
    bool centering_required = true;
    bool partial = false; // infinite-mass pi: only partially certified
    std::vector<double> candidates; // alternates in the disputed regime
};

// Classification of the minimal growth exponent 1/gamma from the indices.
// Inputs are the usable values (slack already applied by compute_indices).
inline RateReport classify_rate(double alpha, double beta, double eta, ModelFlags flags,
                                double slack = 0.01) {
    RateReport r;
    r.alpha = alpha;
    r.beta = beta;
    r.eta = eta;
    r.partial = !flags.pi_finite;

    if (flags.gaussian_only) {
        r.regime = Regime::gaussian_lil;
        r.normalizer = Normalizer::loglog;
        r.inv_gamma = 0.5;
        r.gamma_max = 2.0;
        r.centering_required = true;
        return r;
    }

    if (alpha >= 1.0 && eta >= 2.0) {
        r.regime = Regime::half;
        r.inv_gamma = 0.5;
        r.gamma_max = 2.0;
    } else if ((alpha >= 1.0 && eta < 2.0) ||
               (alpha < 1.0 && eta <= 1.0 + alpha && beta <= 1.0 + alpha)) {
        r.regime = Regime::inv_eta;
        r.inv_gamma = 1.0 / eta;
        r.gamma_max = eta;
    } else if (alpha < 1.0 && eta > 1.0 + alpha && beta <= 1.0 + alpha) {
        r.regime = Regime::inv_one_plus_alpha;
        r.inv_gamma = 1.0 / (1.0 + alpha);
        r.gamma_max = 1.0 + alpha;
    } else if (alpha < 1.0 && eta > 1.0 + alpha && beta > 1.0 + alpha) {
        r.regime = Regime::open_beta;
        r.gamma_open = true;
        r.inv_gamma = 1.0 - alpha / beta + slack;
        r.gamma_max = 1.0 / (1.0 - alpha / beta);
    } else {
        // alpha < 1, eta <= 1 + alpha < beta
        const double crit = 1.0 / (1.0 - alpha / beta);
        r.candidates = {1.0 / eta, 1.0 - alpha / beta};
        if (eta < crit) {
            r.regime = Regime::inv_eta_heavy;
            r.inv_gamma = 1.0 / eta;
            r.gamma_max = eta;
        } else {
            r.regime = Regime::open_beta_heavy;
            r.gamma_open = true;
            r.inv_gamma = 1.0 - alpha / beta + slack;
            r.gamma_max = crit;
        }
    }

    if (flags.finite_variation) {
        const bool lil = r.regime == Regime::half && flags.c2_attained;
        r.normalizer = lil ? Normalizer::loglog : Normalizer::power;
    } else {
        r.normalizer = (beta <= 1.0 + alpha) ? Normalizer::power_log : Normalizer::power;
    }
    r.centering_required = r.inv_gamma <= 1.0;
    return r;
}

// ---------------------------------------------------------------------------
// Existence of the driving integral (integrability of f against the basis).

struct ExistenceReport {
    bool exists = false;
    MomentResult u_integral;   // int |U(f)| dv dpi
    MomentResult b_integral;   // b int f^2 dv dpi
    MomentResult v0_integral;  // int V0(f) dv dpi
    MomentResult f1_integral;  // int f1 dpi (f in L1 requirement)
    std::string note;
};

namespace detail {

inline MomentResult to_moment(const quad::Result& r) {
    MomentResult m;
    m.value = r.value;
    m.finite = !r.diverged;
    m.divergent_end = r.divergent_end;
    m.error = r.error;
    m.quality_ok = !r.budget_exceeded;
    return m;
}

inline MomentResult product(const MomentResult& a, const MomentResult& b) {
    MomentResult m;
    m.finite = a.finite && b.finite;
    m.value = m.finite ? a.value * b.value : inf;
    if (!a.finite) m.divergent_end = a.divergent_end;
    if (!b.finite) m.divergent_end = b.divergent_end;
    m.error = a.error * std::fabs(b.value) + b.error * std::fabs(a.value);
    m.quality_ok = a.quality_ok && b.quality_ok;
    return m;
}

// int over v in (0, inf) of G(f(x_eff, v)) dv for the three kernel shapes:
// scale family reduces to x^{-1} int G(profile(y)) dy, trawl indicator to
// G(1) f1(x), singleton domains are integrated directly.
template <class G>
MomentResult kernel_v_integral(const Kernel& k, const MixingMeasure& pi, G&& g) {
    const auto [slo, shi] = pi.support();
    if (k.scale_family()) {
        auto m1 = pi.moment(-1.0, 0.0, inf);
        auto y_int = quad::integrate([&](double y) { return g(k.profile(y)); }, 0.0, inf);
        auto res = product(m1, to_moment(y_int));
        return res;
    }
    if (k.indicator()) {
        auto lint = pi_integral(pi, [&](double x) { return k.total_mass(x); }, slo, shi);
        MomentResult l;
        l.value = lint.value;
        l.finite = lint.finite;
        l.divergent_end = lint.end;
        l.error = lint.error;
        l.quality_ok = lint.quality;
        MomentResult gval;
        gval.value = g(1.0);
        gval.finite = std::isfinite(gval.value);
        return product(gval, l);
    }
    // singleton mixing domain
    const double mass = pi.total_mass();
    const double vend = k.v_support_end(1.0);
    std::vector<double> breaks;
    if (std::isfinite(vend)) breaks.push_back(vend);
    auto v_int = quad::integrate([&](double v) { return g(k.value(1.0, v)); }, 0.0,
                                 std::isfinite(vend) ? vend : inf, {}, breaks);
    auto m = to_moment(v_int);
    m.value *= mass;
    return m;
}

} // namespace detail

inline ExistenceReport check_existence(double a, double b, const LevyMeasure& levy,
                                       const MixingMeasure& pi, const Kernel& k) {
    ExistenceReport rep;
    const auto [slo, shi] = pi.support();

    auto f1i = detail::pi_integral(pi, [&](double x) { return k.total_mass(x); }, slo, shi);
    rep.f1_integral.value = f1i.value;
    rep.f1_integral.finite = f1i.finite;
    rep.f1_integral.divergent_end = f1i.end;

    auto U = [&](double y) {
        if (y <= 0.0) return 0.0;
        double s = 0.0;
        if (y > 1.0)
            s = -levy.signed_moment1(1.0 / y, 1.0);
        else if (y < 1.0)
            s = levy.signed_moment1(1.0, detail::inv_cap(y));
        return std::fabs(a * y + y * s);
    };
    auto V0 = [&](double y) {
        if (y <= 0.0) return 0.0;
        const double r = detail::inv_cap(y);
        return y * y * levy.moment_abs(2.0, 0.0, r) + levy.tail_mass(r);
    };
    auto F2 = [&](double y) { return b * y * y; };

    rep.u_integral = detail::kernel_v_integral(k, pi, U);
    rep.b_integral = (b == 0.0) ? MomentResult{} : detail::kernel_v_integral(k, pi, F2);
    rep.v0_integral = levy.is_zero() ? MomentResult{} : detail::kernel_v_integral(k, pi, V0);

    rep.exists = rep.u_integral.finite && rep.b_integral.finite && rep.v0_integral.finite &&
                 rep.f1_integral.finite;
    if (!rep.f1_integral.finite)
        rep.note = "f1 not integrable against the mixing measure";
    else if (!rep.u_integral.finite)
        rep.note = "drift/compensator integral diverges";
    else if (!rep.b_integral.finite)
        rep.note = "gaussian integral diverges (needs int f^2 < inf)";
    else if (!rep.v0_integral.finite)
        rep.note = "jump integral diverges";
    return rep;
}

// ---------------------------------------------------------------------------
// Existence for the fractional-OU superposition kernel (shape-dependent
// small-jump condition).

struct SupfouExistenceReport {
    bool exists = false;
    int clause = 0; // 1: kappa > 1/2, 2: kappa = 1/2, 3: kappa < 1/2
    MomentResult m_minus1;    // int x^{-1} pi(dx)
    MomentResult log_moment;  // int_{|z|>1} log|z| lambda(dz)
    MomentResult small_jump;  // clause-specific small-jump moment
};

inline SupfouExistenceReport check_supfou_existence(double kappa, const LevyMeasure& levy,
                                                    const MixingMeasure& pi) {
    if (!(kappa > 0.0))
        throw std::invalid_argument("kappa: must be > 0");
    SupfouExistenceReport rep;
    rep.m_minus1 = pi.moment(-1.0, 0.0, inf);
    rep.log_moment = levy.log_moment_above(1.0);
    if (kappa > 0.5 + 1e-12) {
        rep.clause = 1;
        rep.small_jump.finite = true;
    } else if (kappa >= 0.5 - 1e-12) {
        rep.clause = 2;
        rep.small_jump = levy.small_log_moment(2.0);
    } else {
        rep.clause = 3;
        rep.small_jump = levy.partial_moment(1.0 / (1.0 - kappa), 0.0, 1.0);
    }
    rep.exists = rep.m_minus1.finite && rep.log_moment.finite && rep.small_jump.finite;
    return rep;
}

// ---------------------------------------------------------------------------
// Integral-interchange (Fubini) conditions for the time integral.

struct FubiniReport {
    bool holds = false;
    bool via_mean = false;      // E|X(1)| < inf shortcut applied
    MomentResult mean_abs_cond; // the moment integral deciding E|X(1)| < inf
    MomentResult cond1, cond2, cond3;
    std::string route1, route2, route3;
    std::optional<MomentResult> supou_suff; // weaker large-jump condition
    bool supou_suff_required = false;       // binding for supOU/supfOU kernels
};

inline FubiniReport check_fubini(double a, double b, const LevyMeasure& levy,
                                 const MixingMeasure& pi, const Kernel& k) {
    (void)a;
    (void)b;
    FubiniReport rep;
    const auto [slo, shi] = pi.support();

    if (levy.is_zero()) { // Gaussian/drift only: mean exists trivially
        rep.holds = true;
        rep.via_mean = true;
        rep.route1 = rep.route2 = rep.route3 = "no jump component";
        return rep;
    }

    // E|X(1)| < inf  iff  int int |z| f 1(|z| f > 1) < inf
    auto mean_w = [&](double y) {
        if (y <= 0.0) return 0.0;
        return y * levy.moment_abs(1.0, detail::inv_cap(y), inf);
    };
    if (std::isfinite(levy.moment_abs(1.0, 1.0, inf))) {
        rep.mean_abs_cond = detail::kernel_v_integral(k, pi, mean_w);
    } else {
        rep.mean_abs_cond.finite = false;
        rep.mean_abs_cond.divergent_end = +1;
    }
    if (rep.mean_abs_cond.finite) {
        rep.holds = true;
        rep.via_mean = true;
        rep.route1 = rep.route2 = rep.route3 = "E|X(1)| < inf";
        return rep;
    }

    // condition 1: small jumps against large kernel values
    auto w1 = [&](double y) {
        if (y <= 1.0) return 0.0;
        return y * levy.moment_abs(1.0, 1.0 / y, 1.0);
    };
    if (k.bounded() && k.max_value(1.0) <= 1.0) {
        rep.cond1.value = 0.0;
        rep.route1 = "kernel bounded by 1: indicator empty";
    } else {
        rep.cond1 = detail::kernel_v_integral(k, pi, w1);
        rep.route1 = k.bounded() ? "kernel bounded: sufficient condition" : "direct quadrature";
    }

    // condition 2: large jumps against small total mass
    auto tail1_fn = [&](double g) { // int_{|z|>1} (1 ^ |z| g) lambda(dz)
        if (g <= 0.0) return 0.0;
        if (g >= 1.0) return levy.tail_mass(1.0);
        const double r = detail::inv_cap(g);
        return levy.tail_mass(r) + g * levy.moment_abs(1.0, 1.0, r);
    };
    if (pi.finite_mass()) {
        rep.cond2.value = 0.0;
        rep.route2 = "finite mixing mass";
    } else {
        const double xstar = std::min(k.f1_threshold(1.0), shi);
        auto c2 = detail::pi_integral(
            pi,
            [&](double x) {
                const double f1 = k.total_mass(x);
                return f1 <= 1.0 ? tail1_fn(f1) : 0.0;
            },
            slo, shi, {xstar});
        rep.cond2.value = c2.value;
        rep.cond2.finite = c2.finite;
        rep.cond2.divergent_end = c2.end;
        rep.route2 = "direct quadrature over {f1 <= 1}";
    }

    // condition 3: time-average majorant against large jumps
    if (k.nonincreasing_in_v()) {
        rep.route3 = "kernel non-increasing: majorant g = f";
        rep.cond3.value = 0.0;
    } else if (k.has_majorant()) {
        rep.route3 = "plateau majorant, scale-reduced quadrature";
        // g(x, s) = g(1, x s) for the hump-shaped gamma kernels, so the
        // s-integral is evaluated once at x = 1: plateau in closed form plus
        // quadrature over the decaying part.
        const double pe1 = k.majorant_plateau_end(1.0);
        const double plateau = pe1 > 0.0 ? tail1_fn(k.time_avg_majorant(1.0, 0.5 * pe1)) * pe1
                                         : 0.0;
        auto decay = quad::integrate(
            [&](double u) { return tail1_fn(k.time_avg_majorant(1.0, pe1 + u)); }, 0.0, inf);
        MomentResult I1;
        I1.value = plateau + decay.value;
        I1.finite = !decay.diverged;
        if (k.scale_family()) {
            rep.cond3 = detail::product(pi.moment(-1.0, 0.0, inf), I1);
        } else {
            rep.cond3 = I1;
            rep.cond3.value *= pi.total_mass();
        }
        rep.cond3.finite = rep.cond3.finite && std::isfinite(rep.cond3.value);
    } else {
        rep.cond3.finite = false;
        rep.route3 = "no majorant available";
    }

    // weaker sufficient large-jump condition for the x^{-1} kernels
    const bool inv_kernel =
        k.variant() == Kernel::Variant::supou || k.variant() == Kernel::Variant::supfou;
    auto ss = detail::pi_integral(
        pi, [&](double x) { return x > 1.0 ? tail1_fn(1.0 / x) : 0.0; }, slo, shi, {1.0});
    MomentResult ssm;
    ssm.value = ss.value;
    ssm.finite = ss.finite;
    ssm.divergent_end = ss.end;
    rep.supou_suff = ssm;
    rep.supou_suff_required = inv_kernel;

    const bool c2ok = rep.cond2.finite || (inv_kernel && ssm.finite);
    rep.holds = rep.cond1.finite && c2ok && rep.cond3.finite;
    return rep;
}

// ---------------------------------------------------------------------------
// Subordinator tail of the window-jump component:
//   eta-bar(r) = int_V lambda-bar(r / f1(x)) pi(dx)

inline MomentResult subordinator_tail(const LevyMeasure& levy, const MixingMeasure& pi,
                                      const Kernel& k, double r) {
    if (!(r > 0.0))
        throw std::invalid_argument("subordinator_tail: r must be > 0");
    const auto [slo, shi] = pi.support();
    auto res = detail::pi_integral(
        pi, [&](double x) { return levy.tail_mass(r / k.total_mass(x)); }, slo, shi);
    MomentResult m;
    m.value = res.value;
    m.finite = res.finite;
    m.divergent_end = res.end;
    m.error = res.error;
    m.quality_ok = res.quality;
    return m;
}

// ---------------------------------------------------------------------------
// Mean and variance of the integrated process.

enum class Centering { finite_variation, raw };

struct MeanVarianceReport {
    bool mean_finite = false;
    double mean = 0.0;       // E X*(t)
    double mean_rate = 0.0;  // E X*(t) / t
    bool var_finite = false;
    double variance = 0.0;   // Var X*(t)
    double q_t = 0.0;        // Gaussian part: Q(t) = (b/2) * kernel L2 integral
    double f1_integral = 0.0;
    double subordinator_var_rate = 0.0; // m2(lambda) int f1^2 dpi
};

// kernel L2 increment integral: int_{-inf}^0 (f2(-s)-f2(t-s))^2 ds
//                              + int_0^t (f1 - f2(u))^2 du, integrated over pi
inline double kernel_l2_integral(const MixingMeasure& pi, const Kernel& k, double t) {
    const auto [slo, shi] = pi.support();
    auto res = detail::pi_integral(
        pi,
        [&](double x) {
            const double f1 = k.total_mass(x);
            const double umax = k.tail_mass_inverse(x, 1e-13 * f1);
            const double vend = k.v_support_end(x);
            std::vector<double> past_breaks, ramp_breaks;
            if (std::isfinite(vend)) {
                past_breaks = {std::max(0.0, vend - t), vend};
                ramp_breaks = {vend};
            }
            auto past = quad::integrate(
                [&](double u) {
                    const double d = k.tail_mass(x, u) - k.tail_mass(x, t + u);
                    return d * d;
                },
                0.0, umax, {}, past_breaks);
            auto ramp = quad::integrate(
                [&](double u) {
                    const double d = f1 - k.tail_mass(x, u);
                    return d * d;
                },
                0.0, std::min(t, 2.0 * umax), {}, ramp_breaks);
            const double rest = t > 2.0 * umax ? (t - 2.0 * umax) * f1 * f1 : 0.0;
            return past.value + ramp.value + rest;
        },
        slo, shi);
    return res.finite ? res.value : inf;
}

inline MeanVarianceReport mean_variance(double a, double b, const LevyMeasure& levy,
                                        const MixingMeasure& pi, const Kernel& k, double t,
                                        Centering centering = Centering::finite_variation) {
    MeanVarianceReport rep;
    const auto [slo, shi] = pi.support();
    auto f1i = detail::pi_integral(pi, [&](double x) { return k.total_mass(x); }, slo, shi);
    rep.f1_integral = f1i.finite ? f1i.value : inf;

    double mu = 0.0;
    bool mu_ok = f1i.finite;
    if (centering == Centering::finite_variation) {
        const double p = levy.moment_abs(1.0, 0.0, inf, Side::pos);
        const double n = levy.moment_abs(1.0, 0.0, inf, Side::neg);
        mu_ok = mu_ok && std::isfinite(p) && std::isfinite(n);
        mu = mu_ok ? p - n : 0.0;
    } else {
        const double p = levy.moment_abs(1.0, 1.0, inf, Side::pos);
        const double n = levy.moment_abs(1.0, 1.0, inf, Side::neg);
        mu_ok = mu_ok && std::isfinite(p) && std::isfinite(n);
        mu = mu_ok ? a + p - n : 0.0;
    }
    rep.mean_finite = mu_ok;
    rep.mean_rate = mu_ok ? mu * rep.f1_integral : 0.0;
    rep.mean = rep.mean_rate * t;

    const double m2 = levy.moment_abs(2.0, 0.0, inf);
    const double l2 = kernel_l2_integral(pi, k, t);
    rep.var_finite = std::isfinite(m2) && std::isfinite(l2);
    rep.variance = rep.var_finite ? (b + m2) * l2 : inf;
    rep.q_t = std::isfinite(l2) ? 0.5 * b * l2 : inf;

    auto f1sq = detail::pi_integral(
        pi, [&](double x) { return k.total_mass(x) * k.total_mass(x); }, slo, shi);
    rep.subordinator_var_rate =
        (std::isfinite(m2) && f1sq.finite) ? m2 * f1sq.value : inf;
    return rep;
}

// ---------------------------------------------------------------------------
// Full classification pipeline for a model.

struct ClassifyResult {
    IndexReport indices;
    ModelFlags flags;
    RateReport rate;
    ConditionReport c2;
};

inline ClassifyResult classify_model(double b, const LevyMeasure& levy,
                                     const MixingMeasure& pi, const Kernel& k,
                                     double slack = 0.01) {
    ClassifyResult res;
    res.indices = compute_indices(levy, pi, k, slack);
    res.flags.pi_finite = pi.finite_mass();
    res.flags.finite_variation = levy.finite_variation() && b == 0.0;
    res.flags.gaussian_only = levy.is_zero() && b > 0.0;
    res.c2 = evaluate_c_gamma(levy, pi, k, 2.0);
    res.flags.c2_attained = res.c2.convergent;
    res.rate = classify_rate(res.indices.alpha.usable, res.indices.beta.usable,
                             res.indices.eta.usable, res.flags, slack);
    res.rate.alpha_attained = res.indices.alpha.attained;
    res.rate.beta_attained = res.indices.beta.attained;
    res.rate.eta_attained = res.indices.eta.attained;
    return res;
}

} // namespace mma
