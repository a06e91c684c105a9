#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mma/rng.hpp"
#include "mma/special.hpp"

using namespace mma;
using Catch::Approx;

TEST_CASE("streams are reproducible and independent of sibling consumption") {
    auto root = RngStream::root(42);
    auto a1 = root.split(1);
    auto b1 = root.split(2);
    (void)b1.uniform(); // consuming b must not affect a
    auto root2 = RngStream::root(42);
    auto a2 = root2.split(1);
    for (int i = 0; i < 16; ++i)
        REQUIRE(a1.next_u64() == a2.next_u64());
}

TEST_CASE("distinct seeds and ids give distinct streams") {
    auto a = RngStream::root(1).split(7);
    auto b = RngStream::root(2).split(7);
    auto c = RngStream::root(1).split(8);
    REQUIRE(a.next_u64() != b.next_u64());
    auto a2 = RngStream::root(1).split(7);
    (void)a2.next_u64();
    REQUIRE(a2.next_u64() != c.next_u64());
}

TEST_CASE("uniform moments") {
    auto g = RngStream::root(7).split(0);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = g.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        s += u;
        s2 += u * u;
    }
    REQUIRE(s / n == Approx(0.5).margin(3.0 / std::sqrt(12.0 * n)));
    REQUIRE(s2 / n == Approx(1.0 / 3.0).margin(0.005));
}

TEST_CASE("normal moments") {
    auto g = RngStream::root(11).split(substream::gaussian);
    const int n = 200000;
    double s = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = g.normal();
        s += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    REQUIRE(s / n == Approx(0.0).margin(3.0 / std::sqrt(double(n))));
    REQUIRE(s2 / n == Approx(1.0).margin(0.02));
    REQUIRE(s4 / n == Approx(3.0).margin(0.15));
}

TEST_CASE("poisson mean/variance across regimes") {
    for (double lam : {0.3, 3.0, 25.0, 400.0}) {
        auto g = RngStream::root(5).split(static_cast<std::uint64_t>(lam * 100));
        const int n = 60000;
        double s = 0, s2 = 0;
        for (int i = 0; i < n; ++i) {
            const double k = static_cast<double>(g.poisson(lam));
            s += k;
            s2 += k * k;
        }
        const double mean = s / n;
        const double var = s2 / n - mean * mean;
        REQUIRE(mean == Approx(lam).margin(4.0 * std::sqrt(lam / n)));
        REQUIRE(var == Approx(lam).epsilon(0.05));
    }
}
