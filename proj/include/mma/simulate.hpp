#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mma/conditions.hpp"
#include "mma/kernels.hpp"
#include "mma/measures.hpp"
#include "mma/rng.hpp"

namespace mma {

struct Windows {
    double s_min = 0.0;    // left end of the simulated time window, <= 0
    bool s_min_auto = true;
    double eps = 0.01;     // jumps with |z| <= eps are not simulated
    double v_lo = 0.0, v_hi = inf; // V window (resolved against the mixing support)
};

struct TimeGridSpec {
    double t_max = 1.0;
    int points_per_decade = 16;
    int decades = 4;
    std::vector<double> explicit_points; // overrides the composite grid when set
};

struct Model {
    double a = 0.0;
    double b = 0.0;
    LevyMeasure levy;
    MixingMeasure mixing = MixingMeasure::atoms({{1.0, 1.0}});
    Kernel kernel;
    Windows windows;
    TimeGridSpec grid;
    Centering centering = Centering::finite_variation;
    std::uint64_t seed = 0;
};

struct PoissonPoint {
    double x, s, z;
};

struct PathSample {
    std::uint64_t seed = 0;
    std::uint64_t path_id = 0;
    std::vector<double> t;
    std::vector<double> value;
    std::vector<double> drift, gaussian, past_jumps, window_jumps, compensator;
    std::vector<double> sub_increasing, sub_residual; // window split z*f1 vs z*f2 parts
    double truncation_bound = 0.0;
    double residual_variance = 0.0; // variance of the dropped sub-threshold jumps
};

// dyadic-plus-log composite grid: dense near zero, log-spaced out to t_max
inline std::vector<double> make_time_grid(const TimeGridSpec& g) {
    if (!g.explicit_points.empty()) {
        std::vector<double> ts = g.explicit_points;
        std::sort(ts.begin(), ts.end());
        if (ts.front() != 0.0) ts.insert(ts.begin(), 0.0);
        if (ts.back() > g.t_max * (1.0 + 1e-12))
            throw std::invalid_argument("grid: explicit points exceed t_max");
        return ts;
    }
    if (!(g.t_max > 0.0) || g.points_per_decade < 1 || g.decades < 1)
        throw std::invalid_argument("grid: t_max > 0, points_per_decade >= 1, decades >= 1");
    std::vector<double> ts{0.0};
    const double t_lo = g.t_max * std::pow(10.0, -g.decades);
    const int n = g.points_per_decade * g.decades;
    for (int i = 0; i <= n; ++i)
        ts.push_back(t_lo * std::pow(10.0, static_cast<double>(i) / g.points_per_decade));
    for (double t = 0.5 * g.t_max; t > t_lo; t *= 0.5)
        ts.push_back(t);
    std::sort(ts.begin(), ts.end());
    std::vector<double> out;
    for (double t : ts)
        if (out.empty() || t > out.back() * (1.0 + 1e-12))
            out.push_back(t);
    out.back() = g.t_max;
    return out;
}

// mean of the neglected past contribution (jumps with s < s_min):
//   m1(simulated tail) * int_V int_{|s_min|}^inf f2(x,u) du pi(dx)
struct TruncationBound {
    bool available = false;
    double bound = inf;
    std::string why;
};

inline TruncationBound truncation_error_bound(const Model& m, double s_min) {
    TruncationBound tb;
    if (m.levy.is_zero()) {
        tb.available = true;
        tb.bound = 0.0;
        return tb;
    }
    const double m1 = m.levy.moment_abs(1.0, m.windows.eps, inf);
    if (!std::isfinite(m1)) {
        tb.why = "first moment of the simulated jump tail is infinite";
        return tb;
    }
    const double w = -s_min;
    auto f3 = detail::pi_integral(
        m.mixing, [&](double x) { return m.kernel.tail_tail_integral(x, w); },
        m.windows.v_lo, m.windows.v_hi);
    if (!f3.finite || !std::isfinite(f3.value)) {
        tb.why = "kernel tail integral not available for this kernel";
        return tb;
    }
    tb.available = true;
    tb.bound = m1 * f3.value;
    return tb;
}

// Resolve windows in place: V window clipped where f1 is numerically zero,
// s_min chosen so the truncation bound is below 1e-6 * t_max when automatic.
inline void resolve_windows(Model& m) {
    auto [slo, shi] = m.mixing.support();
    const double clip = m.kernel.f1_threshold(1e-16);
    m.windows.v_lo = slo;
    m.windows.v_hi = std::min(shi, clip);
    if (!(m.windows.eps > 0.0))
        throw std::invalid_argument("windows.eps: must be > 0");

    if (m.levy.is_zero()) {
        m.windows.s_min = 0.0;
        return;
    }
    const double window_mass = m.mixing.mass(m.windows.v_lo, m.windows.v_hi);
    if (!std::isfinite(window_mass))
        throw std::invalid_argument(
            "windows: mixing mass of the V window is infinite; restrict the mixing measure");

    if (m.windows.s_min_auto) {
        auto cert = certify_inverse_envelope(m.kernel);
        if (!cert.holds)
            throw std::invalid_argument(
                "windows.s_min: automatic choice needs an inverse-envelope witness; "
                "set s_min explicitly");
        const double target = 1e-6 * m.grid.t_max;
        double w = 1.0;
        for (int i = 0; i < 64; ++i) {
            auto tb = truncation_error_bound(m, -w);
            if (!tb.available)
                throw std::invalid_argument("windows.s_min: truncation bound unavailable (" +
                                            tb.why + "); set s_min explicitly");
            if (tb.bound < target) {
                m.windows.s_min = -w;
                return;
            }
            w *= 2.0;
        }
        throw std::invalid_argument(
            "windows.s_min: automatic window exceeds 2^64; set s_min explicitly "
            "(long-memory mixing measures need a user-chosen window)");
    }
    if (m.windows.s_min > 0.0)
        throw std::invalid_argument("windows.s_min: must be <= 0");
}

// --------------------------------------------------------------------------
// Path engine.

class Engine {
public:
    explicit Engine(Model m) : m_(std::move(m)) {
        resolve_windows(m_);
        grid_ = make_time_grid(m_.grid);
        tb_ = truncation_error_bound(m_, m_.windows.s_min);
        precompute_deterministic();
        if (m_.b > 0.0) build_gaussian_factor();
    }

    const Model& model() const { return m_; }
    const std::vector<double>& time_grid() const { return grid_; }
    double truncation_bound() const { return tb_.available ? tb_.bound : inf; }
    double residual_variance() const { return resid_var_; }

    // Poisson random measure on the truncated window: count ~ Poisson(mass),
    // coordinates independent (s uniform, x from pi restricted, z from the
    // normalized jump tail).
    std::vector<PoissonPoint> sample_prm(double horizon, RngStream count_rng,
                                         RngStream s_rng, RngStream x_rng,
                                         RngStream z_rng) const {
        std::vector<PoissonPoint> pts;
        if (m_.levy.is_zero()) return pts;
        const double len = horizon - m_.windows.s_min;
        if (len <= 0.0) return pts;
        const double rate_z = m_.levy.tail_mass(m_.windows.eps);
        if (!std::isfinite(rate_z))
            throw std::invalid_argument("sample_prm: jump tail mass infinite at eps");
        const double mass_x = m_.mixing.mass(m_.windows.v_lo, m_.windows.v_hi);
        if (!std::isfinite(mass_x))
            throw std::invalid_argument("sample_prm: mixing window mass infinite");
        const double mass = rate_z * len * mass_x;
        if (!std::isfinite(mass))
            throw std::invalid_argument("sample_prm: time window mass infinite");
        const std::uint64_t n = count_rng.poisson(mass);
        pts.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            PoissonPoint p;
            p.s = m_.windows.s_min + len * s_rng.uniform();
            p.x = m_.mixing.sample(m_.windows.v_lo, m_.windows.v_hi, x_rng.uniform());
            p.z = m_.levy.sample_tail_one(m_.windows.eps, z_rng.uniform());
            pts.push_back(p);
        }
        std::sort(pts.begin(), pts.end(),
                  [](const PoissonPoint& a, const PoissonPoint& b) { return a.s < b.s; });
        return pts;
    }

    // jump components of the integrated path on the time grid
    void path_from_points(const std::vector<PoissonPoint>& pts, PathSample& out) const {
        const std::size_t g = grid_.size();
        out.t = grid_;
        out.past_jumps.assign(g, 0.0);
        out.window_jumps.assign(g, 0.0);
        out.sub_increasing.assign(g, 0.0);
        out.sub_residual.assign(g, 0.0);
        if (pts.empty()) return;
        if (m_.kernel.variant() == Kernel::Variant::supou && m_.mixing.is_atoms())
            supou_atom_fast_path(pts, out);
        else
            generic_path(pts, out);
        for (std::size_t i = 0; i < g; ++i)
            out.window_jumps[i] = out.sub_increasing[i] - out.sub_residual[i];
    }

    // deterministic components shared by all paths
    const std::vector<double>& drift_component() const { return drift_; }
    const std::vector<double>& compensator_correction() const { return comp_; }

    // one correlated draw of the Gaussian part of the integrated process
    std::vector<double> gaussian_component(RngStream rng) const {
        std::vector<double> out(grid_.size(), 0.0);
        if (m_.b <= 0.0) return out;
        const Eigen::Index n = chol_.rows();
        Eigen::VectorXd xi(n);
        for (Eigen::Index i = 0; i < n; ++i) xi[i] = rng.normal();
        Eigen::VectorXd s = chol_ * xi;
        for (Eigen::Index i = 0; i < n; ++i) out[i + 1] = s[i]; // grid_[0] == 0
        return out;
    }

    // covariance of the Gaussian component on the positive grid points
    const Eigen::MatrixXd& gaussian_covariance() const { return cov_; }

    PathSample simulate_path(std::uint64_t path_id) const {
        auto path_rng = RngStream::root(m_.seed).split(path_id);
        PathSample out;
        out.seed = m_.seed;
        out.path_id = path_id;
        auto pts = sample_prm(m_.grid.t_max, path_rng.split(substream::count),
                              path_rng.split(substream::time),
                              path_rng.split(substream::space),
                              path_rng.split(substream::jump));
        path_from_points(pts, out);
        out.gaussian = gaussian_component(path_rng.split(substream::gaussian));
        out.drift = drift_;
        out.compensator = comp_;
        out.truncation_bound = truncation_bound();
        out.residual_variance = resid_var_;
        const std::size_t g = grid_.size();
        out.value.assign(g, 0.0);
        for (std::size_t i = 0; i < g; ++i)
            out.value[i] = out.drift[i] + out.gaussian[i] + out.past_jumps[i] +
                           out.window_jumps[i] + out.compensator[i];
        return out;
    }

    // embarrassingly parallel: per-path streams, results in path-index order
    std::vector<PathSample> simulate(std::size_t n_paths, int workers = 0) const {
        if (workers <= 0)
            workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        std::vector<PathSample> out(n_paths);
        std::atomic<std::size_t> next{0};
        auto run = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n_paths) return;
                out[i] = simulate_path(i);
            }
        };
        if (workers == 1 || n_paths <= 1) {
            run();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(run);
            for (auto& th : pool) th.join();
        }
        return out;
    }

private:
    Model m_;
    std::vector<double> grid_;
    std::vector<double> drift_, comp_;
    TruncationBound tb_;
    double resid_var_ = 0.0;
    Eigen::MatrixXd cov_, chol_;

    // window kernel double integral D(t) = int_V int_{s_min}^t h_t(x,s) ds dpi
    // with h_t the integrated-kernel weight; equals t f1 minus the part beyond
    // the window
    double window_weight_integral(double t) const {
        auto r = detail::pi_integral(
            m_.mixing,
            [&](double x) {
                const double w = -m_.windows.s_min;
                const double beyond = m_.kernel.tail_mass_integral(x, w + t) -
                                      m_.kernel.tail_mass_integral(x, w);
                return t * m_.kernel.total_mass(x) - beyond;
            },
            m_.windows.v_lo, m_.windows.v_hi);
        return r.value;
    }

    void precompute_deterministic() {
        const std::size_t g = grid_.size();
        drift_.assign(g, 0.0);
        comp_.assign(g, 0.0);

        double drift_rate_small = 0.0, comp_rate = 0.0, a_eff = 0.0;
        if (!m_.levy.is_zero()) {
            const double eps = m_.windows.eps;
            if (m_.centering == Centering::finite_variation) {
                if (!m_.levy.finite_variation())
                    throw std::invalid_argument(
                        "centering: finite-variation mode needs int_{|z|<=1} |z| lambda < inf");
                // dropped sub-threshold jumps contribute their mean through the drift
                drift_rate_small = m_.levy.moment_abs(1.0, 0.0, eps, Side::pos) -
                                   m_.levy.moment_abs(1.0, 0.0, eps, Side::neg);
            } else {
                a_eff = m_.a;
                if (eps < 1.0)
                    comp_rate = -(m_.levy.moment_abs(1.0, eps, 1.0, Side::pos) -
                                  m_.levy.moment_abs(1.0, eps, 1.0, Side::neg));
                const double m2_small = m_.levy.moment_abs(2.0, 0.0, eps);
                resid_var_ = m2_small * kernel_l2_integral(m_.mixing, m_.kernel, m_.grid.t_max);
            }
        } else {
            a_eff = m_.a;
        }

        auto f1_int = detail::pi_integral(
            m_.mixing, [&](double x) { return m_.kernel.total_mass(x); }, m_.windows.v_lo,
            m_.windows.v_hi);

        for (std::size_t i = 1; i < g; ++i) {
            const double t = grid_[i];
            const double d = (drift_rate_small != 0.0 || comp_rate != 0.0)
                                 ? window_weight_integral(t)
                                 : 0.0;
            drift_[i] = a_eff * t * f1_int.value + drift_rate_small * d;
            comp_[i] = comp_rate * d;
        }
    }

    void generic_path(const std::vector<PoissonPoint>& pts, PathSample& out) const {
        const std::size_t g = grid_.size();
        // past points: s <= 0
        std::size_t first_window = 0;
        while (first_window < pts.size() && pts[first_window].s <= 0.0) ++first_window;
        for (std::size_t i = 1; i < g; ++i) {
            const double t = grid_[i];
            double past = 0.0;
            for (std::size_t kp = 0; kp < first_window; ++kp) {
                const auto& p = pts[kp];
                past += p.z * (m_.kernel.tail_mass(p.x, -p.s) -
                               m_.kernel.tail_mass(p.x, t - p.s));
            }
            out.past_jumps[i] = past;
            double inc = 0.0, res = 0.0;
            for (std::size_t kp = first_window; kp < pts.size(); ++kp) {
                const auto& p = pts[kp];
                if (p.s > t) break;
                inc += p.z * m_.kernel.total_mass(p.x);
                res += p.z * m_.kernel.tail_mass(p.x, t - p.s);
            }
            out.sub_increasing[i] = inc;
            out.sub_residual[i] = res;
        }
    }

    // supOU with atomic mixing: exponential recurrences give O(N + G) per atom
    void supou_atom_fast_path(const std::vector<PoissonPoint>& pts, PathSample& out) const {
        const std::size_t g = grid_.size();
        for (const auto& [x, mass] : m_.mixing.atom_list()) {
            if (mass <= 0.0 || x < m_.windows.v_lo || x > m_.windows.v_hi) continue;
            double pastP = 0.0; // sum z e^{x s} over s <= 0 (exponents <= 0)
            std::size_t first_window = 0;
            for (const auto& p : pts) {
                if (p.s > 0.0) break;
                ++first_window;
                if (p.x == x) pastP += p.z * std::exp(x * p.s);
            }
            for (std::size_t i = 1; i < g; ++i)
                out.past_jumps[i] += (1.0 - std::exp(-x * grid_[i])) / x * pastP;

            double w2 = 0.0, csum = 0.0;
            std::size_t kp = first_window;
            double t_prev = 0.0;
            for (std::size_t i = 1; i < g; ++i) {
                const double t = grid_[i];
                w2 *= std::exp(-x * (t - t_prev));
                while (kp < pts.size() && pts[kp].s <= t) {
                    if (pts[kp].x == x) {
                        w2 += pts[kp].z * std::exp(-x * (t - pts[kp].s));
                        csum += pts[kp].z;
                    }
                    ++kp;
                }
                out.sub_increasing[i] += csum / x;
                out.sub_residual[i] += w2 / x;
                t_prev = t;
            }
        }
    }

    // covariance of the integrated Gaussian component over positive grid times
    void build_gaussian_factor() {
        const std::size_t g = grid_.size();
        const Eigen::Index n = static_cast<Eigen::Index>(g - 1);
        cov_.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i; j < n; ++j) {
                const double ti = grid_[i + 1], tj = grid_[j + 1];
                cov_(i, j) = cov_(j, i) = m_.b * covariance_entry(ti, tj);
            }
        }
        // symmetric PSD factorization with an escalating diagonal jitter
        const double trace = cov_.trace();
        double jitter = 0.0;
        for (int attempt = 0; attempt < 8; ++attempt) {
            Eigen::MatrixXd c = cov_;
            if (jitter > 0.0)
                c.diagonal().array() += jitter;
            Eigen::LLT<Eigen::MatrixXd> llt(c);
            if (llt.info() == Eigen::Success) {
                chol_ = llt.matrixL();
                return;
            }
            jitter = (jitter == 0.0) ? 1e-14 * trace / n : jitter * 10.0;
            if (jitter > 1e-10 * trace) break;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_);
        throw std::runtime_error(
            "gaussian covariance not PSD within the jitter budget; eigenvalue range [" +
            std::to_string(es.eigenvalues().minCoeff()) + ", " +
            std::to_string(es.eigenvalues().maxCoeff()) + "]");
    }

    double covariance_entry(double ti, double tj) const {
        if (ti > tj) std::swap(ti, tj);
        auto r = detail::pi_integral(
            m_.mixing,
            [&](double x) {
                const double f1 = m_.kernel.total_mass(x);
                const double umax = m_.kernel.tail_mass_inverse(x, 1e-13 * f1);
                auto past = quad::integrate(
                    [&](double u) {
                        return (m_.kernel.tail_mass(x, u) - m_.kernel.tail_mass(x, ti + u)) *
                               (m_.kernel.tail_mass(x, u) - m_.kernel.tail_mass(x, tj + u));
                    },
                    0.0, umax);
                const double tau = tj - ti;
                auto win = quad::integrate(
                    [&](double u) {
                        return (f1 - m_.kernel.tail_mass(x, u)) *
                               (f1 - m_.kernel.tail_mass(x, u + tau));
                    },
                    0.0, std::min(ti, 2.0 * umax));
                double rest = 0.0;
                if (ti > 2.0 * umax) {
                    // both factors have flattened to f1 here
                    rest = (ti - 2.0 * umax) * f1 * f1;
                }
                return past.value + win.value + rest;
            },
            m_.windows.v_lo, m_.windows.v_hi);
        return r.value;
    }
};

// Brute-force oracle: evaluate X(u) = sum z f(x, u - s) on a fine grid and
// integrate by breakpoint-aligned composite trapezoid. Finite-activity jump
// parts only; independent of the f1/f2 path used by the engine.
inline std::vector<double> oracle_time_integral(const Model& m,
                                                const std::vector<PoissonPoint>& pts,
                                                const std::vector<double>& t_grid,
                                                double quad_step) {
    auto X = [&](double u) {
        double s = 0.0;
        for (const auto& p : pts)
            s += p.z * m.kernel.value(p.x, u - p.s);
        return s;
    };
    const double t_max = t_grid.back();
    std::vector<double> nodes;
    nodes.reserve(static_cast<std::size_t>(t_max / quad_step) + t_grid.size() + 4 * pts.size());
    for (double u = 0.0; u < t_max; u += quad_step) nodes.push_back(u);
    nodes.push_back(t_max);
    for (double t : t_grid)
        if (t > 0.0 && t < t_max) nodes.push_back(t);
    for (const auto& p : pts) {
        if (p.s > 0.0 && p.s < t_max) nodes.push_back(p.s);
        const double vend = m.kernel.v_support_end(p.x);
        if (std::isfinite(vend)) {
            const double edge = p.s + vend;
            if (edge > 0.0 && edge < t_max) nodes.push_back(edge);
        }
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    std::vector<double> out(t_grid.size(), 0.0);
    double acc = 0.0;
    double f_prev = X(nodes.front());
    std::size_t gi = 0;
    while (gi < t_grid.size() && t_grid[gi] <= nodes.front()) ++gi;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double f_cur = X(nodes[i]);
        acc += 0.5 * (f_prev + f_cur) * (nodes[i] - nodes[i - 1]);
        f_prev = f_cur;
        while (gi < t_grid.size() && std::fabs(t_grid[gi] - nodes[i]) < 1e-15 * (1.0 + t_max)) {
            out[gi] = acc;
            ++gi;
        }
    }
    while (gi < t_grid.size()) out[gi++] = acc;
    return out;
}

} // namespace mma
