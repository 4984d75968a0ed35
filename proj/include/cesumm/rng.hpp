#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "cesumm/errors.hpp"

namespace cesumm {

/// Deterministic pseudo-random stream built on splitmix64.
///
/// The standard library's distributions are implementation-defined, so every
/// draw here is hand-rolled. Two streams constructed from the same key yield
/// the same sequence on any platform, which is what makes seeded runs
/// reproducible independently of thread count: each unit of work derives its
/// own stream key instead of sharing one generator.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key) : state_(key) {}

    /// Combines two keys into a new stream key. Used to derive per-iteration
    /// and per-sample streams from a base seed.
    static std::uint64_t derive(std::uint64_t key, std::uint64_t salt) {
        // Feed the salt through one splitmix64 step so that derive(k, 0),
        // derive(k, 1), ... are scattered rather than adjacent states.
        std::uint64_t z = key + 0x9e3779b97f4a7c15ULL * (salt + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Rejection sampling keeps the draw exactly
    /// uniform instead of tolerating modulo bias.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw UsageError("next_below: n must be positive");
        const std::uint64_t limit = n * (std::numeric_limits<std::uint64_t>::max() / n);
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r < limit) return r % n;
        }
    }

    /// In-place Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Poisson draw. Knuth's product method below the crossover, Hormann's
    /// PTRS transformed rejection above it, where the product method would
    /// need too many uniforms and starts losing precision.
    std::uint64_t next_poisson(double mean) {
        if (!(mean >= 0.0)) throw UsageError("next_poisson: mean must be non-negative");
        if (mean == 0.0) return 0;
        if (mean < 30.0) return poisson_knuth(mean);
        return poisson_ptrs(mean);
    }

private:
    std::uint64_t poisson_knuth(double mean) {
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= next_unit();
        } while (p > limit);
        return k - 1;
    }

    std::uint64_t poisson_ptrs(double mean) {
        const double slam = std::sqrt(mean);
        const double loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = next_unit() - 0.5;
            const double v = next_unit();
            const double us = 0.5 - std::fabs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
                kf * loglam - mean - std::lgamma(kf + 1.0)) {
                return static_cast<std::uint64_t>(kf);
            }
        }
    }

    std::uint64_t state_;
};

} // namespace cesumm
