#include <catch2/catch_amalgamated.hpp>

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <vector>

#include "mma/kernels.hpp"
#include "mma/quadrature.hpp"

using namespace mma;
using Catch::Approx;

namespace {
std::vector<Kernel> all_kernels() {
    return {
        Kernel::supou(),
        Kernel::trawl_exp(1.0, 1.0),
        Kernel::trawl_power(1.0, 2.0),
        Kernel::supfou(2.0),
        Kernel::supfou(0.6),
        Kernel::ma_exponential(0.8),
        Kernel::ma_gamma(1.0, 1.5),
        Kernel::ma_box(3.0),
        Kernel::ma_triangle(2.0),
    };
}
std::vector<double> probe_x(const Kernel& k) {
    if (k.singleton_domain()) return {1.0};
    const auto [lo, hi] = k.v_domain();
    const double top = std::isfinite(hi) ? hi : 5.0;
    return {lo + 0.1 * (top - lo), lo + 0.5 * (top - lo), lo + 0.9 * (top - lo)};
}
} // namespace

TEST_CASE("kernel values: frozen examples") {
    REQUIRE(Kernel::supou().value(2.0, 0.0) == 1.0);
    // psi(v) = e^{-v}: f(0.5, 0.6) = 1 iff 0.5 <= e^{-0.6}
    REQUIRE(Kernel::trawl_exp(1.0, 1.0).value(0.5, 0.6) == 1.0);
    REQUIRE(Kernel::trawl_exp(1.0, 1.0).value(0.6, 0.6) == 0.0);
    REQUIRE(Kernel::supfou(2.0).value(1.0, 1.0) == Approx(std::exp(-1.0)).epsilon(1e-12));
    REQUIRE(Kernel::supou().value(2.0, -0.1) == 0.0); // causal
}

TEST_CASE("total mass: frozen examples") {
    REQUIRE(Kernel::supou().total_mass(4.0) == Approx(0.25));
    REQUIRE(Kernel::ma_box(3.0).total_mass(1.0) == Approx(3.0));
    // psi(v) = (1+v)^{-2}: psi^{<-}(0.25) = 1
    REQUIRE(Kernel::trawl_power(1.0, 2.0).total_mass(0.25) == Approx(1.0).epsilon(1e-12));
    REQUIRE(Kernel::ma_triangle(2.0).total_mass(1.0) == Approx(1.0));
    REQUIRE(Kernel::supfou(0.6).total_mass(2.0) == Approx(0.5));
}

TEST_CASE("tail mass: frozen examples") {
    REQUIRE(Kernel::supou().tail_mass(2.0, 0.5) == Approx(0.5 * std::exp(-1.0)).epsilon(1e-12));
    for (const auto& k : all_kernels())
        for (double x : probe_x(k))
            REQUIRE(k.tail_mass(x, 0.0) == Approx(k.total_mass(x)).epsilon(1e-12));
    auto tr = Kernel::trawl_exp(1.0, 1.0);
    const double x_l1 = std::exp(-1.0); // psi^{<-} = 1 there
    REQUIRE(tr.tail_mass(x_l1, 2.0) == 0.0);
}

TEST_CASE("tail mass inverse: frozen examples and errors") {
    auto so = Kernel::supou();
    REQUIRE(so.tail_mass_inverse(2.0, 0.5 * std::exp(-1.0)) == Approx(0.5).epsilon(1e-12));
    for (const auto& k : all_kernels())
        for (double x : probe_x(k))
            REQUIRE(k.tail_mass_inverse(x, k.total_mass(x)) == 0.0);
    auto tr = Kernel::trawl_exp(1.0, 1.0);
    REQUIRE(tr.tail_mass_inverse(std::exp(-1.0), 0.3) == Approx(0.7).epsilon(1e-12));
    REQUIRE_THROWS(so.tail_mass_inverse(1.0, 1.5)); // above f1
    REQUIRE_THROWS(so.tail_mass_inverse(1.0, 0.0)); // at zero
}

TEST_CASE("supfou gamma inversion matches an independent oracle at 1e-10") {
    auto k = Kernel::supfou(1.7);
    const double x = 0.9;
    for (double wf = 1e-8; wf < 1.0; wf *= 3.7) {
        const double w = wf * k.total_mass(x);
        const double mine = k.tail_mass_inverse(x, w);
        // oracle: f2^{<-}(x,w) = x^{-1} * Q^{-1}(kappa, x w) via boost
        const double ref = boost::math::gamma_q_inv(1.7, x * w) / x;
        REQUIRE(mine == Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("round trip and generalized-inverse law on probe grids") {
    for (const auto& k : all_kernels()) {
        for (double x : probe_x(k)) {
            const double f1 = k.total_mass(x);
            for (double uf = 1e-3; uf < 1e2; uf *= 3.0) {
                const double u = uf * f1;
                const double f2 = k.tail_mass(x, u);
                if (f2 > 0.0 && f2 <= f1) {
                    REQUIRE(k.tail_mass_inverse(x, f2) <= u * (1.0 + 1e-8) + 1e-12);
                    REQUIRE(k.tail_mass(x, k.tail_mass_inverse(x, f2)) ==
                            Approx(f2).epsilon(1e-8));
                }
            }
            for (double wf : {1e-6, 1e-3, 0.1, 0.5, 0.9}) {
                const double w = wf * f1;
                const double ui = k.tail_mass_inverse(x, w);
                // h(u) > w iff u < h^{<-}(w)
                if (ui > 0.0) {
                    REQUIRE(k.tail_mass(x, ui * 0.999) >= w * (1.0 - 1e-9));
                    REQUIRE(k.tail_mass(x, ui * 1.001) <= w * (1.0 + 1e-6) + 1e-15);
                }
            }
        }
    }
}

TEST_CASE("f1 consistency: quadrature of f matches closed form, all variants") {
    for (const auto& k : all_kernels()) {
        for (double x : probe_x(k)) {
            std::vector<double> breaks;
            const double vend = k.v_support_end(x);
            if (std::isfinite(vend)) breaks.push_back(vend);
            auto r = quad::integrate([&](double v) { return k.value(x, v); }, 0.0,
                                     std::isfinite(vend) ? vend : inf, {}, breaks);
            REQUIRE(r.ok());
            REQUIRE(r.value == Approx(k.total_mass(x)).epsilon(1e-8));
        }
    }
}

TEST_CASE("tail integrals match quadrature") {
    for (const auto& k : all_kernels()) {
        for (double x : probe_x(k)) {
            const double f1 = k.total_mass(x);
            const double vend = k.v_support_end(x);
            std::vector<double> breaks;
            if (std::isfinite(vend)) breaks.push_back(vend);
            for (double T : {0.3 * f1, 2.0 * f1, 20.0 * f1}) {
                auto r = quad::integrate([&](double u) { return k.tail_mass(x, u); }, 0.0, T,
                                         {}, breaks);
                REQUIRE(k.tail_mass_integral(x, T) == Approx(r.value).epsilon(1e-7).margin(1e-12));
            }
            for (double w : {0.0, 0.5 * f1, 3.0 * f1}) {
                auto r = quad::integrate([&](double u) { return k.tail_mass(x, u); },
                                         std::max(w, 1e-300), inf, {}, breaks);
                REQUIRE(k.tail_tail_integral(x, w) ==
                        Approx(r.value).epsilon(1e-7).margin(1e-12));
            }
        }
    }
}

TEST_CASE("time-average majorant: frozen values and verification") {
    auto so = Kernel::supou();
    REQUIRE(so.time_avg_majorant(1.0, 2.0) == Approx(std::exp(-2.0)).epsilon(1e-12));
    auto sf = Kernel::supfou(2.0);
    // plateau value (kappa-1)^{kappa-1} e^{-(kappa-1)} / Gamma(kappa) = e^{-1}
    REQUIRE(sf.time_avg_majorant(1.0, 0.5) == Approx(std::exp(-1.0)).epsilon(1e-12));
    REQUIRE(sf.time_avg_majorant(1.0, 2.0) == Approx(2.0 * std::exp(-2.0)).epsilon(1e-12));
    for (const auto& k : all_kernels())
        REQUIRE(verify_time_avg_majorant(k));
    auto tt = Kernel::tail_table(1.0, {{1.0, 1.0}, {100.0, 0.1}});
    REQUIRE_FALSE(tt.has_majorant());
    REQUIRE_THROWS(tt.time_avg_majorant(1.0, 1.0));
}

TEST_CASE("psi table conventions: interpolation and flat segments") {
    auto k = Kernel::trawl_table({{0.0, 1.0}, {1.0, 0.5}, {2.0, 0.5}, {3.0, 0.0}});
    REQUIRE(k.psi_eval(0.5) == Approx(0.75));
    // flat segment at 0.5 takes the right endpoint
    REQUIRE(k.psi_inverse(0.5) == Approx(2.0));
    REQUIRE(k.psi_inverse(0.75) == Approx(0.5));
    REQUIRE(k.psi_inverse(1.0) == 0.0);
    REQUIRE(k.total_mass(0.25) == Approx(2.5)); // crossing inside (2,3): 0.5 - x/2... v = 2 + (0.5-0.25)/0.5
    REQUIRE_THROWS(Kernel::trawl_table({{0.0, 1.0}, {1.0, 0.2}})); // no terminal zero
}

TEST_CASE("inverse envelope certificates: canonical witnesses") {
    auto so = certify_inverse_envelope(Kernel::supou());
    REQUIRE(so.holds);
    REQUIRE(so.N == 1);
    REQUIRE(so.K > std::exp(-1.0));
    REQUIRE(so.eps == Approx(0.2));
    REQUIRE(so.margin > 0.0);

    auto tr = certify_inverse_envelope(Kernel::trawl_exp(1.0, 1.0));
    REQUIRE(tr.holds);
    REQUIRE(tr.N == 1);
    REQUIRE(tr.K > 1.0);
    REQUIRE(tr.eps > 0.0);
    REQUIRE(tr.eps < 1.0);

    for (const auto& k : all_kernels()) {
        auto c = certify_inverse_envelope(k);
        INFO("variant " << static_cast<int>(k.variant()));
        REQUIRE(c.holds);
        // derived decay: f2(x,s) <= K s^{-1} f1(x)^2 for s >= K N f1(x)
        for (double x : probe_x(k)) {
            const double f1 = k.total_mass(x);
            for (double sf = 1.0; sf < 300.0; sf *= 2.7) {
                const double s = sf * c.K * c.N * f1;
                REQUIRE(k.tail_mass(x, s) <= c.K / s * f1 * f1 * (1.0 + 1e-9));
            }
        }
    }
}

TEST_CASE("inverse envelope certificate fails for a heavy tail table") {
    // f2^{<-}(u f1) = u^{-3/2} f1 exceeds K u^{eps-1} for every eps < 1
    std::vector<std::pair<double, double>> samples;
    for (int j = 0; j <= 8; ++j) {
        const double u = std::pow(10.0, j);
        samples.emplace_back(u, std::pow(u, -2.0 / 3.0));
    }
    auto k = Kernel::tail_table(1.0, samples);
    REQUIRE(k.tail_mass_inverse(1.0, 1e-3) == Approx(std::pow(10.0, 4.5)).epsilon(1e-6));
    auto c = certify_inverse_envelope(k);
    REQUIRE_FALSE(c.holds);
    REQUIRE(c.worst_u == Approx(1e-3).epsilon(1e-6));
    REQUIRE(c.required_K > 16.0);
}

TEST_CASE("increment bound certificates") {
    auto so = certify_increment_bounds(Kernel::supou());
    REQUIRE(so.holds);
    for (auto [p, cp] : so.c_p)
        REQUIRE(cp <= 1.0 + 1e-6);

    auto tr = certify_increment_bounds(Kernel::trawl_exp(1.0, 1.0));
    REQUIRE(tr.holds);
    for (auto [p, cp] : tr.c_p)
        REQUIRE(cp <= 1.0 + 1e-6);

    auto sf_bad = certify_increment_bounds(Kernel::supfou(0.6));
    REQUIRE_FALSE(sf_bad.holds);
    REQUIRE(sf_bad.unbounded_small_t);
    REQUIRE(sf_bad.failing_integral == 2);

    auto sf_ok = certify_increment_bounds(Kernel::supfou(1.5));
    REQUIRE(sf_ok.holds);

    auto box = certify_increment_bounds(Kernel::ma_box(1.0));
    REQUIRE(box.holds);
    auto tri = certify_increment_bounds(Kernel::ma_triangle(1.0));
    REQUIRE(tri.holds);
}

TEST_CASE("kernel construction rejects invalid parameters") {
    REQUIRE_THROWS(Kernel::supfou(0.0));
    REQUIRE_THROWS(Kernel::ma_gamma(1.0, 0.9)); // needs kappa > 1
    REQUIRE_THROWS(Kernel::trawl_power(1.0, 0.8));
    REQUIRE_THROWS(Kernel::ma_box(-1.0));
}
