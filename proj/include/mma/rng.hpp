#pragma once

#include <cstdint>
#include <cmath>

namespace mma {

// Counter-based stream: draw i is finalize(key + i*PHI), so a stream is a pure
// function of (key, counter). Streams for paths / components are derived by
// folding ids into the key; draws in one stream never depend on how many draws
// another stream consumed, which keeps runs byte-identical across worker counts.
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t key) : key_(key) {}

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    static RngStream root(std::uint64_t seed) {
        return RngStream(mix(seed ^ 0x9E3779B97F4A7C15ull));
    }

    // Independent child stream; id spacing uses the 64-bit golden ratio so
    // nearby ids land far apart in key space.
    RngStream split(std::uint64_t id) const {
        return RngStream(mix(key_ ^ (0xD1B54A32D192ED03ull + id * 0x9E3779B97F4A7C15ull)));
    }

    std::uint64_t next_u64() { return mix(key_ + (++ctr_) * 0x9E3779B97F4A7C15ull); }

    // uniform on [0,1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0,1], safe under log()
    double uniform_pos() { return 1.0 - uniform(); }

    // Box-Muller, cosine branch only: exactly two uniforms per call.
    double normal() {
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double th = 6.283185307179586476925286766559 * uniform();
        return r * std::cos(th);
    }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    // Poisson draw: multiplication method for small means, Hormann's PTRS
    // transformed rejection for mean >= 10.
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 10.0) {
            const double emu = std::exp(-mean);
            std::uint64_t k = 0;
            double prod = uniform_pos();
            while (prod > emu) {
                ++k;
                prod *= uniform_pos();
            }
            return k;
        }
        const double slam = std::sqrt(mean), loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform_pos();
            const double us = 0.5 - std::fabs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
                kf * loglam - mean - std::lgamma(kf + 1.0))
                return static_cast<std::uint64_t>(kf);
        }
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return ctr_; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t ctr_ = 0;
};

// Substream ids used by the path engine. Adding a component never perturbs
// draws of the others.
namespace substream {
inline constexpr std::uint64_t count = 0;
inline constexpr std::uint64_t time = 1;
inline constexpr std::uint64_t space = 2;
inline constexpr std::uint64_t jump = 3;
inline constexpr std::uint64_t gaussian = 4;
} // namespace substream

} // namespace mma
