#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace balsim {

// Labeled substream derivation: every randomized component draws its seed
// from the master seed plus a role label, so adding or removing one
// consumer never shifts the randomness seen by the others.
namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

inline std::uint64_t substream_seed(std::uint64_t master, std::string_view label) {
    return detail::splitmix64(master ^ detail::fnv1a64(label));
}

inline std::uint64_t substream_seed(std::uint64_t master, std::string_view label,
                                    std::uint64_t index) {
    return detail::splitmix64(substream_seed(master, label) ^
                              detail::splitmix64(index + 0x51ed2701u));
}

// Thin deterministic wrapper over mt19937_64. All variate transforms are
// spelled out here (inverse CDF, Box-Muller) so a stream consumes a fixed
// number of engine outputs per call on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(detail::splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on the open interval (0,1); never returns an endpoint.
    double uniform01() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
    }

    double exponential(double rate) { return -std::log(uniform01()) / rate; }

    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Uniform integer in [lo, hi], endpoints included. Unbiased rejection.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = (~std::uint64_t{0} / span) * span;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return lo + static_cast<int>(x % span);
    }

    bool bernoulli(double p) { return uniform01() < p; }

  private:
    std::mt19937_64 engine_;
};

} // namespace balsim
