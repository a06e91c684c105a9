#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mma/conditions.hpp"

using namespace mma;
using Catch::Approx;

namespace {
MixingMeasure unit_atom() { return MixingMeasure::atoms({{1.0, 1.0}}); }
} // namespace

TEST_CASE("growth condition: frozen examples") {
    // bounded jumps, f1 <= 1 everywhere: indicator never fires
    auto r0 = evaluate_c_gamma(LevyMeasure::atoms({{0.5, 1.0}, {-0.8, 0.5}}), unit_atom(),
                               Kernel::ma_box(1.0), 1.0);
    REQUIRE(r0.convergent);
    REQUIRE(r0.value == 0.0);

    // single-atom evaluation: 0.3 * 2 * 1(2 > 1)
    auto r1 = evaluate_c_gamma(LevyMeasure::atoms({{2.0, 0.3}}), unit_atom(), Kernel::supou(),
                               1.0);
    REQUIRE(r1.convergent);
    REQUIRE(r1.value == Approx(0.6).epsilon(1e-9));

    // gamma above the jump tail index: divergent at z -> infinity
    auto pi = MixingMeasure::density(0.5, 0.0, 1.0, 0.0, 1.0);
    auto r2 = evaluate_c_gamma(LevyMeasure::power(1.2), pi, Kernel::supou(), 1.3);
    REQUIRE_FALSE(r2.convergent);
    REQUIRE(r2.diagnosis.find("z -> infinity") != std::string::npos);
}

TEST_CASE("growth condition: split equals the direct route when finite") {
    struct Case {
        LevyMeasure levy;
        MixingMeasure pi;
        Kernel k;
        double gamma;
    };
    std::vector<Case> cases;
    cases.push_back({LevyMeasure::atoms({{2.0, 0.3}}), unit_atom(), Kernel::supou(), 1.0});
    cases.push_back({LevyMeasure::power(1.5), MixingMeasure::density(0.5, 0.0, 1.0, 0.0, 1.0),
                     Kernel::supou(), 1.0});
    cases.push_back({LevyMeasure::tempered_power(1.2, 1.0),
                     MixingMeasure::gamma_density(2.0, 1.0), Kernel::supfou(1.5), 1.4});
    cases.push_back({LevyMeasure::power(1.8), MixingMeasure::density(0.0, 0.0, 1.0, 0.0, 1.0),
                     Kernel::trawl_exp(1.0, 1.0), 1.1});
    for (auto& c : cases) {
        auto split = evaluate_c_gamma(c.levy, c.pi, c.k, c.gamma);
        auto direct = evaluate_c_gamma_direct(c.levy, c.pi, c.k, c.gamma);
        REQUIRE(split.convergent == direct.convergent);
        if (split.convergent)
            REQUIRE(split.value == Approx(direct.value).epsilon(1e-6).margin(1e-12));
    }
}

TEST_CASE("growth condition: monotone in gamma and bounded by the indices") {
    struct Case {
        LevyMeasure levy;
        MixingMeasure pi;
        Kernel k;
    };
    std::vector<Case> cases;
    cases.push_back({LevyMeasure::atoms({{2.0, 0.3}}), unit_atom(), Kernel::supou()});
    cases.push_back({LevyMeasure::power(1.2), unit_atom(), Kernel::supou()});
    cases.push_back({LevyMeasure::power(1.5), MixingMeasure::density(0.5, 0.0, 1.0, 0.0, 1.0),
                     Kernel::supou()});
    cases.push_back({LevyMeasure::atoms({{3.0, 0.5}}),
                     MixingMeasure::density(0.5, 0.0, 1.0, 0.0, 1.0), Kernel::supou()});
    cases.push_back({LevyMeasure::tempered_power(0.8, 2.0),
                     MixingMeasure::gamma_density(2.0, 1.0), Kernel::supfou(1.2)});
    cases.push_back({LevyMeasure::power(1.7), MixingMeasure::density(0.0, 0.0, 1.0, 0.0, 1.0),
                     Kernel::trawl_power(1.0, 2.0)});
    for (auto& c : cases) {
        auto idx = compute_indices(c.levy, c.pi, c.k);
        bool was_convergent = true;
        for (double g = 0.0; g <= 2.0 + 1e-9; g += 0.25) {
            auto rep = evaluate_c_gamma(c.levy, c.pi, c.k, std::min(g, 2.0));
            if (!was_convergent)
                REQUIRE_FALSE(rep.convergent); // once divergent, stays divergent
            was_convergent = rep.convergent;
            if (rep.convergent && g > 0.0) {
                REQUIRE(g <= 1.0 + idx.alpha.usable + 0.05);
                REQUIRE(g <= idx.eta.usable + 0.05);
            }
        }
    }
}

TEST_CASE("indices: frozen examples") {
    // finite atoms: f1 bounded, alpha = +inf convention
    auto i1 = compute_indices(LevyMeasure::atoms({{2.0, 0.3}}), unit_atom(), Kernel::supou());
    REQUIRE(i1.alpha.value == inf);
    REQUIRE(i1.alpha.attained);

    // moving-average kernel: I_f finite constant, alpha0 = inf
    auto i2 = compute_indices(LevyMeasure::power(1.5), unit_atom(), Kernel::ma_box(2.0));
    REQUIRE(i2.alpha.value == inf);

    // supou with pi density x^{0.5} on (0,1): alpha = 0.5, not attained
    auto i3 = compute_indices(LevyMeasure::atoms({{1.0, 1.0}}),
                              MixingMeasure::density(0.5, 0.0, 1.0, 0.0, 1.0), Kernel::supou());
    REQUIRE(i3.alpha.value == Approx(0.5).margin(1e-6));
    REQUIRE_FALSE(i3.alpha.attained);
    REQUIRE(i3.alpha.usable == Approx(0.49).margin(1e-6));

    // f1 not pi-integrable: existence error
    REQUIRE_THROWS(compute_indices(LevyMeasure::atoms({{1.0, 1.0}}),
                                   MixingMeasure::gamma_density(1.0, 1.0), Kernel::supou()));
}

TEST_CASE("classification: frozen examples") {
    ModelFlags fv;
    fv.finite_variation = true;

    auto r1 = classify_rate(1.5, 0.5, 2.5, fv);
    REQUIRE(r1.inv_gamma == Approx(0.5));
    REQUIRE(r1.regime == Regime::half);

    auto r2 = classify_rate(0.5, 1.2, 2.0, fv);
    REQUIRE(r2.inv_gamma == Approx(2.0 / 3.0));
    REQUIRE(r2.regime == Regime::inv_one_plus_alpha);

    ModelFlags iv;
    iv.finite_variation = false;
    auto r3 = classify_rate(0.5, 1.8, 1.2, iv);
    REQUIRE(r3.regime == Regime::inv_eta_heavy);
    REQUIRE(r3.inv_gamma == Approx(5.0 / 6.0));
    REQUIRE(r3.candidates.size() == 2);

    // eta at/above the critical value flips to the open bound
    auto r4 = classify_rate(0.5, 1.8, 1.5, iv); // crit = 1/(1-0.5/1.8) = 1.3846 < 1.5
    REQUIRE(r4.regime == Regime::open_beta_heavy);
    REQUIRE(r4.gamma_open);
    REQUIRE(r4.inv_gamma == Approx(1.0 - 0.5 / 1.8 + 0.01));

    auto r5 = classify_rate(0.5, 1.8, 2.0, iv);
    REQUIRE(r5.regime == Regime::open_beta);
    REQUIRE(r5.gamma_open);

    ModelFlags g;
    g.gaussian_only = true;
    auto r6 = classify_rate(inf, 0.0, inf, g);
    REQUIRE(r6.regime == Regime::gaussian_lil);
    REQUIRE(r6.normalizer == Normalizer::loglog);

    // normalizers: LIL for attained gamma=2 finite variation, log factor for
    // infinite variation with beta <= 1+alpha
    ModelFlags fv2 = fv;
    fv2.c2_attained = true;
    REQUIRE(classify_rate(2.0, 0.0, inf, fv2).normalizer == Normalizer::loglog);
    REQUIRE(classify_rate(2.0, 0.0, inf, fv).normalizer == Normalizer::power);
    REQUIRE(classify_rate(2.0, 1.5, 1.5, iv).normalizer == Normalizer::power_log);
    REQUIRE(classify_rate(0.5, 1.8, 2.0, iv).normalizer == Normalizer::power);

    ModelFlags part = fv;
    part.pi_finite = false;
    REQUIRE(classify_rate(0.5, 0.5, 2.0, part).partial);

    // centering iff gamma >= 1
    REQUIRE(classify_rate(1.5, 0.5, 2.5, fv).centering_required);
    REQUIRE_FALSE(classify_rate(0.2, 0.5, 0.8, fv).centering_required); // 1/gamma = 1.25
}

TEST_CASE("existence: frozen examples") {
    // gaussian-only supou over an atom: exists
    auto g = check_existence(0.0, 2.0, LevyMeasure::none(), unit_atom(), Kernel::supou());
    REQUIRE(g.exists);

    // supou needs m_{-1}(pi) < inf: Gamma(1,1) mixing fails
    auto bad = check_existence(0.0, 2.0, LevyMeasure::none(),
                               MixingMeasure::gamma_density(1.0, 1.0), Kernel::supou());
    REQUIRE_FALSE(bad.exists);

    // zero model trivially exists
    auto z = check_existence(0.0, 0.0, LevyMeasure::none(), unit_atom(), Kernel::supou());
    REQUIRE(z.exists);
    REQUIRE(z.u_integral.value == 0.0);

    auto jump = check_existence(0.0, 0.0, LevyMeasure::power(1.5), unit_atom(), Kernel::supou());
    REQUIRE(jump.exists);
}

TEST_CASE("supfou existence: frozen examples and agreement with the generic route") {
    // clause (i): kappa > 1/2
    auto r1 = check_supfou_existence(0.6, LevyMeasure::tempered_power(1.2, 1.0),
                                     MixingMeasure::gamma_density(2.0, 1.0));
    REQUIRE(r1.exists);
    REQUIRE(r1.clause == 1);

    // clause (iii) violated: int_0^1 z^{1/0.7} z^{-2.5} dz diverges
    auto r2 = check_supfou_existence(0.3, LevyMeasure::power(1.5), unit_atom());
    REQUIRE_FALSE(r2.exists);
    REQUIRE(r2.clause == 3);
    REQUIRE_FALSE(r2.small_jump.finite);

    // clause (ii): kappa = 1/2 with finite atom measure
    auto r3 = check_supfou_existence(0.5, LevyMeasure::atoms({{2.0, 0.3}}), unit_atom());
    REQUIRE(r3.exists);
    REQUIRE(r3.clause == 2);

    // the generic integrability check agrees with the shape-specific one
    struct Case {
        double kappa;
        LevyMeasure levy;
    };
    std::vector<Case> cases;
    cases.push_back({0.3, LevyMeasure::power(1.5)});
    cases.push_back({0.3, LevyMeasure::power(1.2)}); // 1/(1-0.3) = 1.43 > 1.2: exists
    cases.push_back({0.8, LevyMeasure::power(1.5)});
    cases.push_back({1.4, LevyMeasure::tempered_power(1.1, 1.0)});
    for (auto& c : cases) {
        auto gen = check_existence(0.0, 0.0, c.levy, unit_atom(), Kernel::supfou(c.kappa));
        auto spc = check_supfou_existence(c.kappa, c.levy, unit_atom());
        INFO("kappa " << c.kappa);
        REQUIRE(gen.exists == spc.exists);
    }
}

TEST_CASE("fubini: frozen examples") {
    // trawl with finite psi(0), finite mixing mass: bounded + finite-mass routes
    auto tr = check_fubini(0.0, 0.0, LevyMeasure::power(1.5),
                           MixingMeasure::density(0.0, 0.0, 1.0, 0.0, 1.0),
                           Kernel::trawl_exp(1.0, 1.0));
    REQUIRE(tr.holds);

    // supou with an infinite-mean jump part: majorant route g = f
    auto so = check_fubini(0.0, 0.0, LevyMeasure::power(0.8),
                           MixingMeasure::density(0.5, 0.0, 1.0, 0.0, 1.0), Kernel::supou());
    REQUIRE(so.holds);
    REQUIRE_FALSE(so.via_mean);
    REQUIRE(so.route3.find("non-increasing") != std::string::npos);

    // single-atom mean: E|X(1)| = 3 * (1/2) finite, shortcut applies
    auto mean = check_fubini(0.0, 0.0, LevyMeasure::atoms({{3.0, 1.0}}),
                             MixingMeasure::atoms({{2.0, 1.0}}), Kernel::supou());
    REQUIRE(mean.holds);
    REQUIRE(mean.via_mean);

    // supfou kappa > 1 with an infinite-mean jump part uses the plateau majorant
    auto sf = check_fubini(0.0, 0.0, LevyMeasure::power(0.8),
                           MixingMeasure::gamma_density(2.0, 1.0), Kernel::supfou(1.5));
    REQUIRE(sf.holds);
    REQUIRE_FALSE(sf.via_mean);
    REQUIRE(sf.route3.find("plateau") != std::string::npos);
}

TEST_CASE("subordinator tail: frozen examples") {
    auto at = LevyMeasure::atoms({{2.0, 0.3}});
    REQUIRE(subordinator_tail(at, unit_atom(), Kernel::supou(), 1.0).value == Approx(0.3));
    REQUIRE(subordinator_tail(at, unit_atom(), Kernel::supou(), 3.0).value == 0.0);

    // lambda-bar(s) = s^{-1.5}, pi = Leb on (1,2]: eta-bar(1) = 2 - sqrt(2)
    std::vector<std::pair<double, double>> tab;
    for (double r = 1e-8; r <= 1e8; r *= 10.0)
        tab.emplace_back(r, std::pow(r, -1.5));
    auto lv = LevyMeasure::tabulated(tab);
    auto pi12 = MixingMeasure::density(0.0, 0.0, 1.0, 1.0, 2.0);
    auto sb = subordinator_tail(lv, pi12, Kernel::supou(), 1.0);
    REQUIRE(sb.finite);
    REQUIRE(sb.value == Approx(2.0 - std::sqrt(2.0)).epsilon(1e-6));

    double prev = inf;
    for (double r = 0.25; r <= 16.0; r *= 2.0) {
        const double v = subordinator_tail(lv, pi12, Kernel::supou(), r).value;
        REQUIRE(v <= prev + 1e-12);
        prev = v;
    }
}

TEST_CASE("mean and variance: frozen examples") {
    auto at = LevyMeasure::atoms({{2.0, 0.3}});
    auto mv = mean_variance(0.0, 0.0, at, unit_atom(), Kernel::supou(), 1.0,
                            Centering::finite_variation);
    REQUIRE(mv.mean_finite);
    REQUIRE(mv.mean_rate == Approx(0.6).epsilon(1e-9));
    REQUIRE(mv.mean == Approx(0.6).epsilon(1e-9));
    REQUIRE(mv.subordinator_var_rate == Approx(1.2).epsilon(1e-9));
    // Var X*(1) = m2(lambda) * e^{-1} for the unit-rate exponential kernel
    REQUIRE(mv.var_finite);
    REQUIRE(mv.variance == Approx(1.2 * std::exp(-1.0)).epsilon(1e-6));

    // Gaussian supou b=2 over an atom: Q(t)/t -> (b/2) int f1^2 dpi = 1
    auto mg = mean_variance(0.0, 2.0, LevyMeasure::none(), unit_atom(), Kernel::supou(), 1e3,
                            Centering::raw);
    REQUIRE(mg.q_t / 1e3 == Approx(1.0).epsilon(0.01));

    // heavy tail: variance flagged infinite
    auto mh = mean_variance(0.0, 0.0, LevyMeasure::power(1.5), unit_atom(), Kernel::supou(),
                            1.0, Centering::raw);
    REQUIRE_FALSE(mh.var_finite);
}

TEST_CASE("classify_model end to end on the finite-variance atom model") {
    auto res = classify_model(0.0, LevyMeasure::atoms({{1.0, 1.0}}), unit_atom(),
                              Kernel::supou());
    REQUIRE(res.rate.regime == Regime::half);
    REQUIRE(res.rate.inv_gamma == Approx(0.5));
    REQUIRE(res.flags.c2_attained);
    REQUIRE(res.rate.normalizer == Normalizer::loglog);
}
