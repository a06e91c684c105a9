#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mma/quadrature.hpp"
#include "mma/rng.hpp"
#include "mma/special.hpp"

namespace mma {

enum class Side { pos, neg, both };

struct MomentResult {
    double value = 0.0;
    bool finite = true;
    int divergent_end = 0; // -1: endpoint 0, +1: endpoint infinity
    double error = 0.0;
    bool quality_ok = true;

    double value_or_inf() const { return finite ? value : inf; }
};

struct IndexEstimate {
    double value = 0.0;  // the critical exponent itself
    bool attained = false; // boundary moment finite
    double usable = 0.0; // value with the slack rule applied when not attained
};

namespace detail {

// one-sided power integral: int_l^h z^{e-1} dz (e = p - a etc.), exact with
// divergence bookkeeping
inline MomentResult power_integral(double coef, double e, double l, double h) {
    MomentResult r;
    if (coef == 0.0 || h <= l) return r;
    if (h == inf && e >= 0.0) {
        r.finite = false;
        r.divergent_end = +1;
        return r;
    }
    if (l == 0.0 && e <= 0.0) {
        r.finite = false;
        r.divergent_end = -1;
        return r;
    }
    if (e == 0.0)
        r.value = coef * std::log(h / l);
    else
        r.value = coef * (std::pow(h, e) - (l == 0.0 ? 0.0 : std::pow(l, e))) / e;
    return r;
}

// int_l^h z^{s-1} e^{-theta z} dz = theta^{-s} (Gamma(s,theta l) - Gamma(s,theta h))
inline MomentResult exp_power_integral(double coef, double s, double theta, double l, double h) {
    MomentResult r;
    if (coef == 0.0 || h <= l) return r;
    if (l == 0.0 && s <= 0.0) {
        r.finite = false;
        r.divergent_end = -1;
        return r;
    }
    const double gl = upper_gamma(s, theta * l);
    const double gh = (h == inf) ? 0.0 : upper_gamma(s, theta * h);
    r.value = coef * std::pow(theta, -s) * (gl - gh);
    if (r.value < 0.0) r.value = 0.0; // roundoff guard, integrand nonnegative
    return r;
}

} // namespace detail

// Jump measure of the driving random measure. Two-sided measures carry a
// common radial profile split by a sign mix; every query is side-aware.
// Immutable after construction.
class LevyMeasure {
public:
    enum class Family { none, atoms, power, tempered, gamma_type, tabulated };

    LevyMeasure() : family_(Family::none) {}

    static LevyMeasure none() { return LevyMeasure(); }

    // density c |z|^{-a-1} on lo < |z| < hi, split sign_mix : 1-sign_mix
    static LevyMeasure power(double exponent, double scale = 1.0, double lo = 0.0,
                             double hi = inf, double sign_mix = 1.0) {
        LevyMeasure m;
        m.family_ = Family::power;
        m.a_ = exponent;
        m.coef_ = std::pow(scale, exponent);
        m.lo_ = lo;
        m.hi_ = hi;
        m.set_mix(sign_mix);
        if (!(exponent > 0.0))
            throw std::invalid_argument("levy.exponent: must be > 0 for power-density");
        if (lo == 0.0 && exponent >= 2.0)
            throw std::invalid_argument(
                "levy.exponent: must be < 2 when support reaches 0 (Levy condition)");
        if (!(lo >= 0.0) || !(hi > lo))
            throw std::invalid_argument("levy.support: need 0 <= lo < hi");
        m.validate();
        return m;
    }

    // density c |z|^{-a-1} e^{-theta |z|} on |z| > 0
    static LevyMeasure tempered_power(double exponent, double tempering, double scale = 1.0,
                                      double sign_mix = 1.0) {
        LevyMeasure m;
        m.family_ = Family::tempered;
        m.a_ = exponent;
        m.theta_ = tempering;
        m.coef_ = std::pow(scale, exponent);
        m.lo_ = 0.0;
        m.hi_ = inf;
        m.set_mix(sign_mix);
        if (!(exponent > 0.0) || exponent >= 2.0)
            throw std::invalid_argument("levy.exponent: must be in (0,2) for tempered-power");
        if (!(tempering > 0.0))
            throw std::invalid_argument("levy.tempering: must be > 0");
        m.validate();
        return m;
    }

    // density c |z|^{shape-1} e^{-decay |z|} on |z| > 0 (shape 0 gives the
    // gamma-subordinator profile z^{-1} e^{-decay z})
    static LevyMeasure gamma_type(double shape_at_0, double decay, double scale = 1.0,
                                  double sign_mix = 1.0) {
        LevyMeasure m;
        m.family_ = Family::gamma_type;
        m.cg_ = shape_at_0;
        m.theta_ = decay;
        m.coef_ = scale;
        m.lo_ = 0.0;
        m.hi_ = inf;
        m.set_mix(sign_mix);
        if (!(shape_at_0 > -2.0))
            throw std::invalid_argument("levy.shape: must be > -2 (Levy condition)");
        if (!(decay > 0.0))
            throw std::invalid_argument("levy.decay: must be > 0");
        m.validate();
        return m;
    }

    // finite list of signed atoms (z_i, mass_i)
    static LevyMeasure atoms(std::vector<std::pair<double, double>> zm) {
        LevyMeasure m;
        m.family_ = Family::atoms;
        for (auto& [z, w] : zm) {
            if (z == 0.0)
                throw std::invalid_argument("levy.atoms: atom at 0 not allowed");
            if (!(w >= 0.0))
                throw std::invalid_argument("levy.atoms: mass must be >= 0");
        }
        m.atoms_ = std::move(zm);
        std::sort(m.atoms_.begin(), m.atoms_.end(),
                  [](auto& l, auto& r) { return std::fabs(l.first) > std::fabs(r.first); });
        return m;
    }

    // monotone tail samples (r_i, tailmass_i), interpolated linearly in log-log
    // coordinates and extrapolated by the boundary slopes
    static LevyMeasure tabulated(std::vector<std::pair<double, double>> tail_samples,
                                 double sign_mix = 1.0) {
        LevyMeasure m;
        m.family_ = Family::tabulated;
        m.tab_ = std::move(tail_samples);
        std::sort(m.tab_.begin(), m.tab_.end());
        if (m.tab_.size() < 2)
            throw std::invalid_argument("levy.tail_samples: need >= 2 samples");
        for (std::size_t i = 0; i < m.tab_.size(); ++i) {
            if (!(m.tab_[i].first > 0.0) || !(m.tab_[i].second > 0.0))
                throw std::invalid_argument("levy.tail_samples: need r > 0 and tail > 0");
            if (i > 0 && m.tab_[i].second > m.tab_[i - 1].second)
                throw std::invalid_argument("levy.tail_samples: tail must be non-increasing");
        }
        m.set_mix(sign_mix);
        if (m.tab_slope_first() >= 2.0)
            throw std::invalid_argument("levy.tail_samples: slope at 0 must be < 2 (Levy condition)");
        if (m.tab_slope_last() <= 0.0)
            throw std::invalid_argument("levy.tail_samples: slope at infinity must be > 0");
        m.validate();
        return m;
    }

    // compound Poisson: jump distribution given as any finite measure, scaled
    // so that the total mass equals `rate`
    static LevyMeasure compound_poisson(LevyMeasure jumps, double rate) {
        const double tot = jumps.total_mass();
        if (!std::isfinite(tot) || tot <= 0.0)
            throw std::invalid_argument(
                "levy.jumps: compound-poisson jump distribution must have finite positive mass");
        jumps.rescale(rate / tot);
        return jumps;
    }

    Family family() const { return family_; }
    bool is_zero() const { return family_ == Family::none; }

    // ------------------------------------------------------------------ tails

    // mass of { |z| > r } restricted to a sign side; exact closed form
    double tail_mass(double r, Side side = Side::both) const {
        if (!(r > 0.0))
            throw std::invalid_argument("tail_mass: r must be > 0");
        if (family_ == Family::atoms) {
            double acc = 0.0;
            for (auto& [z, w] : atoms_)
                if (on_side(z, side) && std::fabs(z) > r) acc += w;
            return acc;
        }
        return side_weight(side) * radial_tail(r);
    }

    double total_mass() const { // may be +inf
        switch (family_) {
        case Family::none: return 0.0;
        case Family::atoms: {
            double s = 0;
            for (auto& [z, w] : atoms_) s += w;
            return s;
        }
        case Family::tabulated:
            // extrapolated toward 0 with slope s0 > 0 => infinite activity
            return tab_slope_first() > 0.0 ? inf : tab_.front().second;
        case Family::gamma_type:
            if (cg_ > 0.0) return coef_ * std::pow(theta_, -cg_) * std::tgamma(cg_);
            return inf;
        default:
            if (lo_ > 0.0) return radial_tail(lo_ * 0.5 + 1e-300);
            return inf;
        }
    }

    // ---------------------------------------------------------------- moments

    // int_{lo < |z| <= hi} |z|^p lambda(dz) by adaptive quadrature on the
    // density with divergence detection (atoms and tabulated are exact).
    MomentResult partial_moment(double p, double lo, double hi, Side side = Side::both,
                                quad::Options opt = {}) const {
        if (!(hi > lo) || hi <= 0.0) return {};
        lo = std::max(lo, 0.0);
        switch (family_) {
        case Family::none: return {};
        case Family::atoms: {
            MomentResult r;
            for (auto& [z, w] : atoms_) {
                if (!on_side(z, side)) continue;
                const double az = std::fabs(z);
                if (az > lo && az <= hi) r.value += w * std::pow(az, p);
            }
            return r;
        }
        case Family::tabulated: return tab_moment(p, lo, hi, side);
        default: {
            const double wsum = side_weight(side);
            if (wsum == 0.0) return {};
            const double l = std::max(lo, lo_), h = std::min(hi, hi_);
            if (!(h > l)) return {};
            auto f = [&](double z) { return wsum * radial_density(z) * std::pow(z, p); };
            auto q = quad::integrate(f, l, h == inf ? inf : h, opt);
            MomentResult r;
            r.value = q.value;
            r.finite = !q.diverged;
            r.divergent_end = q.divergent_end;
            r.error = q.error;
            r.quality_ok = !q.budget_exceeded;
            return r;
        }
        }
    }

    // closed-form |z|^p moment over lo < |z| <= hi (value is +inf on divergence)
    double moment_abs(double p, double lo, double hi, Side side = Side::both) const {
        if (!(hi > lo) || hi <= 0.0) return 0.0;
        lo = std::max(lo, 0.0);
        const double wsum = side_weight(side);
        switch (family_) {
        case Family::none: return 0.0;
        case Family::atoms: return partial_moment(p, lo, hi, side).value;
        case Family::tabulated: return tab_moment(p, lo, hi, side).value_or_inf();
        case Family::power: {
            const double l = std::max(lo, lo_), h = std::min(hi, hi_);
            if (!(h > l)) return 0.0;
            auto r = detail::power_integral(wsum * coef_, p - a_, l, h);
            return r.value_or_inf();
        }
        case Family::tempered: {
            const double l = std::max(lo, lo_), h = std::min(hi, hi_);
            if (!(h > l)) return 0.0;
            return detail::exp_power_integral(wsum * coef_, p - a_, theta_, l, h).value_or_inf();
        }
        case Family::gamma_type: {
            const double l = std::max(lo, lo_), h = std::min(hi, hi_);
            if (!(h > l)) return 0.0;
            return detail::exp_power_integral(wsum * coef_, p + cg_, theta_, l, h).value_or_inf();
        }
        }
        return 0.0;
    }

    // int_{lo < |z| <= hi} z lambda(dz); finite whenever lo > 0
    double signed_moment1(double lo, double hi) const {
        return moment_abs(1.0, lo, hi, Side::pos) - moment_abs(1.0, lo, hi, Side::neg);
    }

    // int_{|z| > r} log|z| lambda(dz), r >= 1
    MomentResult log_moment_above(double r, quad::Options opt = {}) const {
        MomentResult res;
        switch (family_) {
        case Family::none: return res;
        case Family::atoms:
            for (auto& [z, w] : atoms_)
                if (std::fabs(z) > r) res.value += w * std::log(std::fabs(z));
            return res;
        default: {
            auto f = [&](double z) {
                return (coef_pos_ + coef_neg_) * radial_density(z) * std::log(z);
            };
            const double l = std::max(r, lo_);
            if (hi_ <= l) return res;
            auto q = quad::integrate(f, l, hi_ == inf ? inf : hi_, opt);
            res.value = q.value;
            res.finite = !q.diverged;
            res.divergent_end = q.divergent_end;
            res.error = q.error;
            res.quality_ok = !q.budget_exceeded;
            return res;
        }
        }
    }

    // int_{|z| <= 1} |z|^p log(1/|z|) lambda(dz)
    MomentResult small_log_moment(double p, quad::Options opt = {}) const {
        MomentResult res;
        switch (family_) {
        case Family::none: return res;
        case Family::atoms:
            for (auto& [z, w] : atoms_)
                if (std::fabs(z) <= 1.0)
                    res.value += w * std::pow(std::fabs(z), p) * std::log(1.0 / std::fabs(z));
            return res;
        default: {
            auto f = [&](double z) {
                return (coef_pos_ + coef_neg_) * radial_density(z) * std::pow(z, p) *
                       std::log(1.0 / z);
            };
            const double l = lo_, h = std::min(1.0, hi_);
            if (!(h > l)) return res;
            auto q = quad::integrate(f, l, h, opt, {std::min(0.999999, h)});
            res.value = q.value;
            res.finite = !q.diverged;
            res.divergent_end = q.divergent_end;
            res.error = q.error;
            res.quality_ok = !q.budget_exceeded;
            return res;
        }
        }
    }

    // --------------------------------------------------------------- indices

    // Blumenthal-Getoor index: inf{ b >= 0 : int_{|z|<=1} |z|^b lambda < inf }
    IndexEstimate bg_index(double slack = 0.01) const {
        IndexEstimate e;
        switch (family_) {
        case Family::none:
        case Family::atoms: e = {0.0, true, 0.0}; return e;
        case Family::power:
        case Family::tempered:
            if (lo_ > 0.0) { e = {0.0, true, 0.0}; return e; }
            e.value = a_;
            e.attained = false; // boundary moment int z^{a} z^{-a-1} = int z^{-1} diverges
            break;
        case Family::gamma_type:
            if (cg_ > 0.0) { e = {0.0, true, 0.0}; return e; }
            e.value = -cg_;
            e.attained = false;
            break;
        case Family::tabulated: {
            auto finite_at = [&](double p) { return tab_moment(p, 0.0, 1.0, Side::both).finite; };
            if (finite_at(0.0)) { e = {0.0, true, 0.0}; return e; }
            double lo = 0.0, hi = 2.0;
            for (int i = 0; i < 50; ++i) {
                const double mid = 0.5 * (lo + hi);
                (finite_at(mid) ? hi : lo) = mid;
            }
            e.value = 0.5 * (lo + hi);
            e.attained = finite_at(e.value);
            break;
        }
        }
        e.usable = e.attained ? e.value : std::min(2.0, e.value + slack);
        return e;
    }

    // tail index: sup{ h >= 0 : int_{|z|>1} |z|^h lambda < inf }
    IndexEstimate tail_index(double slack = 0.01) const {
        IndexEstimate e;
        switch (family_) {
        case Family::none:
        case Family::atoms: e = {inf, true, inf}; return e;
        case Family::tempered:
        case Family::gamma_type: e = {inf, true, inf}; return e;
        case Family::power:
            if (hi_ < inf) { e = {inf, true, inf}; return e; }
            e.value = a_;
            e.attained = false;
            break;
        case Family::tabulated: {
            auto finite_at = [&](double p) { return tab_moment(p, 1.0, inf, Side::both).finite; };
            if (!finite_at(0.0)) { e = {0.0, false, 0.0}; return e; }
            if (finite_at(64.0)) { e = {inf, true, inf}; return e; }
            double lo = 0.0, hi = 64.0;
            for (int i = 0; i < 50; ++i) {
                const double mid = 0.5 * (lo + hi);
                (finite_at(mid) ? lo : hi) = mid;
            }
            e.value = 0.5 * (lo + hi);
            e.attained = finite_at(e.value);
            break;
        }
        }
        e.usable = e.attained ? e.value : std::max(0.0, e.value - slack);
        return e;
    }

    // int_{|z|<=1} |z| lambda(dz) < inf
    bool finite_variation() const {
        switch (family_) {
        case Family::none:
        case Family::atoms: return true;
        case Family::power:
        case Family::tempered: return lo_ > 0.0 || a_ < 1.0;
        case Family::gamma_type: return cg_ > -1.0;
        case Family::tabulated: return tab_moment(1.0, 0.0, 1.0, Side::both).finite;
        }
        return true;
    }

    // |a| + b + int (1 ^ z^2) lambda(dz): constant of the control measure
    double control_constant(double a, double b) const {
        return std::fabs(a) + b + moment_abs(2.0, 0.0, 1.0) + tail_mass_or_zero(1.0);
    }

    // -------------------------------------------------------------- sampling

    // one signed jump with |z| > eps from the normalized tail, u in [0,1)
    double sample_tail_one(double eps, double u) const {
        const double tp = tail_mass(eps, Side::pos);
        const double tn = tail_mass(eps, Side::neg);
        const double tot = tp + tn;
        if (!(tot > 0.0))
            throw std::invalid_argument("sample_tail_one: no mass above threshold");
        const double m = u * tot;
        if (family_ == Family::atoms) {
            const Side side = (m < tp) ? Side::pos : Side::neg;
            double target = (m < tp) ? m : m - tp;
            double last = 0.0;
            for (auto& [z, w] : atoms_) { // sorted by |z| descending
                if (!on_side(z, side) || std::fabs(z) <= eps) continue;
                last = z;
                if (target < w) return z;
                target -= w;
            }
            return last;
        }
        if (m < tp)
            return inverse_radial_tail(eps, m / coef_pos_);
        return -inverse_radial_tail(eps, (m - tp) / coef_neg_);
    }

    // list of jumps with |z| > eps for a window of total pi x Leb mass
    // `rate_window`; count is Poisson(tail_mass(eps) * rate_window)
    std::vector<double> sample_jumps(double eps, double rate_window, RngStream& rng) const {
        const double lam = tail_mass(eps) * rate_window;
        if (!std::isfinite(lam))
            throw std::invalid_argument("sample_jumps: infinite tail mass at threshold");
        std::vector<double> out;
        if (lam <= 0.0) return out;
        const std::uint64_t n = rng.poisson(lam);
        out.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i)
            out.push_back(sample_tail_one(eps, rng.uniform()));
        return out;
    }

    // per-side density of the radial profile at z > 0 (0 for atom families)
    double density_side(double z, Side side) const {
        if (family_ == Family::atoms || family_ == Family::none) return 0.0;
        return side_weight(side) * radial_density(z);
    }
    bool has_density() const {
        return family_ != Family::atoms && family_ != Family::none;
    }

    const std::vector<std::pair<double, double>>& atom_list() const { return atoms_; }
    std::pair<double, double> radial_support() const {
        if (family_ == Family::atoms) {
            double lo = inf, hi = 0.0;
            for (auto& [z, w] : atoms_) {
                lo = std::min(lo, std::fabs(z));
                hi = std::max(hi, std::fabs(z));
            }
            return {lo, hi};
        }
        if (family_ == Family::tabulated) return {0.0, inf};
        return {lo_, hi_};
    }

private:
    Family family_;
    double a_ = 1.0, cg_ = 0.0, theta_ = 1.0, coef_ = 1.0;
    double lo_ = 0.0, hi_ = inf;
    double coef_pos_ = 1.0, coef_neg_ = 0.0; // sign mix weights (sum 1)
    std::vector<std::pair<double, double>> atoms_;
    std::vector<std::pair<double, double>> tab_;

    void set_mix(double sign_mix) {
        if (!(sign_mix >= 0.0) || !(sign_mix <= 1.0))
            throw std::invalid_argument("levy.sign_mix: must be in [0,1]");
        coef_pos_ = sign_mix;
        coef_neg_ = 1.0 - sign_mix;
    }

    void rescale(double s) {
        coef_ *= s;
        for (auto& [z, w] : atoms_) w *= s;
        for (auto& [r, t] : tab_) t *= s;
    }

    double side_weight(Side s) const {
        switch (s) {
        case Side::pos: return coef_pos_;
        case Side::neg: return coef_neg_;
        case Side::both: return coef_pos_ + coef_neg_;
        }
        return 0.0;
    }

    static bool on_side(double z, Side s) {
        return s == Side::both || (s == Side::pos ? z > 0.0 : z < 0.0);
    }

    // radial density (unsigned profile, weight 1)
    double radial_density(double z) const {
        switch (family_) {
        case Family::power:
            return (z >= lo_ && z < hi_) ? coef_ * std::pow(z, -a_ - 1.0) : 0.0;
        case Family::tempered:
            return coef_ * std::pow(z, -a_ - 1.0) * std::exp(-theta_ * z);
        case Family::gamma_type:
            return coef_ * std::pow(z, cg_ - 1.0) * std::exp(-theta_ * z);
        case Family::tabulated: { // derivative of the log-log linear tail
            const auto [A, s] = tab_segment(z);
            return s * A * std::pow(z, -s - 1.0);
        }
        default: return 0.0;
        }
    }

    // tail of the radial (unsigned) profile with weight 1
    double radial_tail(double r) const {
        switch (family_) {
        case Family::none: return 0.0;
        case Family::atoms: {
            double acc = 0.0;
            for (auto& [z, w] : atoms_)
                if (std::fabs(z) > r) acc += w;
            return acc;
        }
        case Family::power: {
            const double l = std::max(r, lo_);
            if (l >= hi_) return 0.0;
            const double top = (hi_ == inf) ? 0.0 : std::pow(hi_, -a_);
            return coef_ * (std::pow(l, -a_) - top) / a_;
        }
        case Family::tempered:
            return coef_ * std::pow(theta_, a_) * upper_gamma(-a_, theta_ * std::max(r, lo_));
        case Family::gamma_type:
            return coef_ * std::pow(theta_, -cg_) * upper_gamma(cg_, theta_ * std::max(r, lo_));
        case Family::tabulated: {
            const auto [A, s] = tab_segment(r);
            return A * std::pow(r, -s);
        }
        }
        return 0.0;
    }

    double tail_mass_or_zero(double r) const {
        if (family_ == Family::atoms) {
            double acc = 0.0;
            for (auto& [z, w] : atoms_)
                if (std::fabs(z) > r) acc += w;
            return acc;
        }
        return radial_tail(r);
    }

    // invert the radial tail: z >= eps with radial_tail(z) = m
    double inverse_radial_tail(double eps, double m) const {
        switch (family_) {
        case Family::power: {
            const double l = std::max(eps, lo_);
            const double top = (hi_ == inf) ? 0.0 : std::pow(hi_, -a_);
            const double v = m * a_ / coef_ + top;
            return std::pow(v, -1.0 / a_);
        }
        default: { // tempered / gamma_type / tabulated: monotone bisection
            double lo = std::max(eps, lo_), hi = std::max(2.0 * lo, 2.0);
            while (radial_tail(hi) > m) hi *= 2.0;
            for (int i = 0; i < 120; ++i) {
                const double mid = 0.5 * (lo + hi);
                (radial_tail(mid) > m ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        }
    }

    // tabulated helpers: tail(z) = A z^{-s} per log-log segment
    std::pair<double, double> tab_segment(double z) const {
        const auto& t = tab_;
        std::size_t i;
        if (z <= t.front().first) i = 0;
        else if (z >= t.back().first) i = t.size() - 2;
        else {
            i = std::upper_bound(t.begin(), t.end(), std::make_pair(z, inf)) - t.begin() - 1;
            if (i >= t.size() - 1) i = t.size() - 2;
        }
        const double s = tab_slope(i);
        const double A = t[i].second * std::pow(t[i].first, s);
        return {A, s};
    }
    double tab_slope(std::size_t i) const {
        return std::log(tab_[i].second / tab_[i + 1].second) /
               std::log(tab_[i + 1].first / tab_[i].first);
    }
    double tab_slope_first() const { return tab_slope(0); }
    double tab_slope_last() const { return tab_slope(tab_.size() - 2); }

    MomentResult tab_moment(double p, double lo, double hi, Side side) const {
        // exact piecewise power integration of |z|^p against the density
        MomentResult r;
        const double w = side_weight(side);
        if (w == 0.0) return r;
        std::vector<double> knots{lo > 0.0 ? lo : 0.0};
        for (auto& [rr, tt] : tab_)
            if (rr > lo && rr < hi) knots.push_back(rr);
        knots.push_back(hi);
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
            const double l = knots[i], h = knots[i + 1];
            if (!(h > l)) continue;
            const double mid = (h == inf) ? knots[i] * 2.0 : 0.5 * (l + h);
            const auto [A, s] = tab_segment(mid);
            auto seg = detail::power_integral(w * A * s, p - s, l, h);
            r.value += seg.value;
            if (!seg.finite) {
                r.finite = false;
                r.divergent_end = seg.divergent_end;
                return r;
            }
        }
        return r;
    }

    // construction-time check of the Levy condition int (1 ^ z^2) < inf,
    // run through the generic quadrature machinery
    void validate() const {
        if (family_ == Family::none || family_ == Family::atoms) return;
        auto small2 = partial_moment(2.0, 0.0, 1.0);
        if (!small2.finite)
            throw std::invalid_argument("levy: int_{|z|<=1} z^2 lambda(dz) diverges");
        if (!std::isfinite(tail_mass_or_zero(1.0)))
            throw std::invalid_argument("levy: tail mass at 1 not finite");
    }
};

inline double control_constant(double a, double b, const LevyMeasure& levy) {
    return levy.control_constant(a, b);
}

// --------------------------------------------------------------------------
// Mixing measure pi on (0, infinity): finite atom lists, two-regime power
// densities, or gamma densities. Immutable after construction.
class MixingMeasure {
public:
    enum class Family { atoms, density, gamma_density };

    static MixingMeasure atoms(std::vector<std::pair<double, double>> xm) {
        MixingMeasure m;
        m.family_ = Family::atoms;
        for (auto& [x, w] : xm)
            if (!(x > 0.0) || !(w >= 0.0))
                throw std::invalid_argument("mixing.atoms: need x > 0 and mass >= 0");
        m.atoms_ = std::move(xm);
        std::sort(m.atoms_.begin(), m.atoms_.end());
        return m;
    }

    // w(x) = coef * x^{p0} for x <= 1, coef * x^{-p_inf} for x > 1, on (lo, hi)
    static MixingMeasure density(double p0, double p_inf, double coef, double lo, double hi) {
        MixingMeasure m;
        m.family_ = Family::density;
        m.p0_ = p0;
        m.pinf_ = p_inf;
        m.coef_ = coef;
        m.lo_ = lo;
        m.hi_ = hi;
        if (!(coef > 0.0))
            throw std::invalid_argument("mixing.coef: must be > 0");
        if (!(lo >= 0.0) || !(hi > lo))
            throw std::invalid_argument("mixing.support: need 0 <= lo < hi");
        m.verify_declared_exponents();
        return m;
    }

    // normalized Gamma(shape, rate) density scaled by total mass `coef`
    static MixingMeasure gamma_density(double shape, double rate, double coef = 1.0) {
        MixingMeasure m;
        m.family_ = Family::gamma_density;
        m.k_ = shape;
        m.theta_ = rate;
        m.coef_ = coef;
        m.lo_ = 0.0;
        m.hi_ = inf;
        if (!(shape > 0.0) || !(rate > 0.0) || !(coef > 0.0))
            throw std::invalid_argument("mixing.gamma: shape, rate, coef must be > 0");
        m.verify_declared_exponents();
        return m;
    }

    Family family() const { return family_; }
    bool is_atoms() const { return family_ == Family::atoms; }
    const std::vector<std::pair<double, double>>& atom_list() const { return atoms_; }

    double total_mass() const {
        switch (family_) {
        case Family::atoms: {
            double s = 0;
            for (auto& [x, w] : atoms_) s += w;
            return s;
        }
        case Family::gamma_density: return coef_;
        case Family::density: return mass(lo_, hi_);
        }
        return 0.0;
    }
    bool finite_mass() const { return std::isfinite(total_mass()); }

    double mass(double lo, double hi) const { return moment_closed(0.0, lo, hi); }

    // int_{lo < x <= hi} x^p pi(dx), closed form (+inf on divergence)
    double moment_closed(double p, double lo, double hi) const {
        lo = std::max(lo, lo_);
        hi = std::min(hi, hi_);
        if (!(hi > lo)) return 0.0;
        switch (family_) {
        case Family::atoms: {
            double s = 0;
            for (auto& [x, w] : atoms_)
                if (x > lo && x <= hi) s += w * std::pow(x, p);
            return s;
        }
        case Family::gamma_density:
            return coef_ * std::pow(theta_, -p) / std::tgamma(k_) *
                   detail::exp_power_integral(1.0, p + k_, 1.0, theta_ * lo,
                                              hi == inf ? inf : theta_ * hi)
                       .value_or_inf();
        case Family::density: {
            double v = 0.0;
            if (lo < 1.0) {
                auto r = detail::power_integral(coef_, p + p0_ + 1.0, lo, std::min(hi, 1.0));
                if (!r.finite) return inf;
                v += r.value;
            }
            if (hi > 1.0) {
                auto r = detail::power_integral(coef_, p - pinf_ + 1.0, std::max(lo, 1.0), hi);
                if (!r.finite) return inf;
                v += r.value;
            }
            return v;
        }
        }
        return 0.0;
    }

    // quadrature route with divergence detection (spec contract for m_p)
    MomentResult moment(double p, double lo, double hi, quad::Options opt = {}) const {
        if (family_ == Family::atoms) {
            MomentResult r;
            r.value = moment_closed(p, lo, hi);
            return r;
        }
        auto q = integrate([&](double x) { return std::pow(x, p); }, lo, hi, opt);
        MomentResult r;
        r.value = q.value;
        r.finite = !q.diverged;
        r.divergent_end = q.divergent_end;
        r.error = q.error;
        r.quality_ok = !q.budget_exceeded;
        return r;
    }

    double density_at(double x) const {
        switch (family_) {
        case Family::atoms: return 0.0;
        case Family::gamma_density:
            return coef_ * std::pow(theta_, k_) * std::pow(x, k_ - 1.0) * std::exp(-theta_ * x) /
                   std::tgamma(k_);
        case Family::density:
            if (x <= lo_ || x >= hi_) return 0.0;
            return coef_ * (x <= 1.0 ? std::pow(x, p0_) : std::pow(x, -pinf_));
        }
        return 0.0;
    }

    // int g(x) pi(dx) over (lo, hi); atoms sum exactly
    template <class F>
    quad::Result integrate(F&& g, double lo, double hi, quad::Options opt = {},
                           std::vector<double> breaks = {}) const {
        lo = std::max(lo, lo_);
        hi = std::min(hi, hi_);
        quad::Result r;
        if (!(hi > lo)) return r;
        if (family_ == Family::atoms) {
            for (auto& [x, w] : atoms_) {
                if (x > lo && x <= hi) {
                    r.value += w * g(x);
                    ++r.evals;
                }
            }
            return r;
        }
        if (family_ == Family::density && lo < 1.0 && hi > 1.0) breaks.push_back(1.0);
        auto f = [&](double x) { return g(x) * density_at(x); };
        return quad::integrate(f, lo, hi == inf ? inf : hi, opt, std::move(breaks));
    }

    // inverse-CDF sample restricted to (lo, hi); requires finite mass there
    double sample(double lo, double hi, double u) const {
        lo = std::max(lo, lo_);
        hi = std::min(hi, hi_);
        switch (family_) {
        case Family::atoms: {
            double tot = 0;
            for (auto& [x, w] : atoms_)
                if (x > lo && x <= hi) tot += w;
            double target = u * tot;
            for (auto& [x, w] : atoms_) {
                if (x <= lo || x > hi) continue;
                if (target < w) return x;
                target -= w;
            }
            return atoms_.back().first;
        }
        case Family::gamma_density: {
            const double flo = gamma_p(k_, theta_ * lo);
            const double fhi = (hi == inf) ? 1.0 : gamma_p(k_, theta_ * hi);
            return gamma_p_inverse(k_, flo + u * (fhi - flo)) / theta_;
        }
        case Family::density: {
            const double tot = mass(lo, hi);
            if (!std::isfinite(tot) || tot <= 0.0)
                throw std::invalid_argument("mixing.sample: window mass not finite/positive");
            double target = u * tot;
            if (lo < 1.0) {
                const double m1 = mass(lo, std::min(hi, 1.0));
                if (target < m1) return invert_power_piece(p0_, lo, std::min(hi, 1.0), target);
                target -= m1;
            }
            return invert_power_piece(-pinf_, std::max(lo, 1.0), hi, target);
        }
        }
        return lo;
    }

    // enclosing interval (lo, hi] carrying all mass
    std::pair<double, double> support() const {
        if (family_ == Family::atoms)
            return {0.0, atoms_.back().first};
        return {lo_, hi_};
    }

private:
    Family family_ = Family::atoms;
    std::vector<std::pair<double, double>> atoms_;
    double p0_ = 0.0, pinf_ = 0.0, coef_ = 1.0;
    double k_ = 1.0, theta_ = 1.0;
    double lo_ = 0.0, hi_ = inf;

    double invert_power_piece(double e, double l, double h, double target) const {
        // solve coef * int_l^x t^e dt = target
        if (e == -1.0) {
            return l * std::exp(target / coef_);
        }
        const double q = e + 1.0;
        const double base = std::pow(l, q);
        return std::pow(base + target * q / coef_, 1.0 / q);
    }

    // declared power behavior must match integrated moment finiteness on a
    // probe grid around the critical exponents (each endpoint in isolation)
    void verify_declared_exponents() const {
        auto probe = [&](double p, double lo, double hi, bool expect_finite, const char* where) {
            auto m = moment(p, lo, hi);
            if (m.finite != expect_finite)
                throw std::invalid_argument(std::string("mixing: declared exponent near ") +
                                            where + " contradicts integrated moments");
        };
        if (family_ == Family::density) {
            if (lo_ == 0.0) {
                probe(-1.0 - p0_ + 0.4, 0.0, 1.0, true, "0");
                probe(-1.0 - p0_ - 0.4, 0.0, 1.0, false, "0");
            }
            if (hi_ == inf) {
                probe(pinf_ - 1.0 - 0.4, 1.0, inf, true, "infinity");
                probe(pinf_ - 1.0 + 0.4, 1.0, inf, false, "infinity");
            }
        } else if (family_ == Family::gamma_density) {
            probe(-k_ + 0.4, 0.0, 1.0, true, "0");
            probe(-k_ - 0.4, 0.0, 1.0, false, "0");
        }
    }
};

} // namespace mma
