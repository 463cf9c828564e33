#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qeml {

/// Root of a deterministic seed tree.
struct Seed {
    std::uint64_t value{};

    friend bool operator==(Seed, Seed) = default;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed for the index-th object generated under `base`.
constexpr Seed derive_seed(Seed base, std::uint64_t index) noexcept {
    return Seed{mix64(mix64(base.value) ^ mix64(index + 0x632be59bd9b4e019ULL))};
}

/// Portable random source. The engine's output sequence is fixed by the
/// standard; uniforms and normals are derived here rather than through
/// <random> distributions, whose algorithms are implementation-defined.
class Rng {
public:
    explicit Rng(Seed seed) : engine_(seed.value) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        // Rejection keeps the draw unbiased.
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % bound;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace qeml
