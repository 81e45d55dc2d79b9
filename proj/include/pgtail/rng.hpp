#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace pgtail {

// FNV-1a 64-bit. Used for config hashing and for deriving named RNG streams.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Counter-based splitmix64 stream. The whole generator state is one 64-bit
// word, so checkpoints can capture and restore the exact stream position.
struct Rng {
    std::uint64_t state = 0;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    Rng() = default;
    explicit Rng(std::uint64_t seed) : state(mix(seed ^ 0x6a09e667f3bcc909ull)) {}

    // Independent stream for (seed, purpose). Diagnostic code uses its own
    // streams so enabling capture never shifts the training stream.
    static Rng stream(std::uint64_t seed, std::string_view purpose) {
        return Rng(mix(seed) ^ fnv1a64(purpose));
    }

    std::uint64_t next_u64() {
        state += 0x9e3779b97f4a7c15ull;
        return mix(state);
    }

    // Uniform on [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased integer in [0, bound).
    std::uint64_t next_below(std::uint64_t bound) {
        for (;;) {
            std::uint64_t x = next_u64();
            std::uint64_t r = x % bound;
            if (x - r <= ~std::uint64_t{0} - (bound - 1)) return r;
        }
    }

    // Box-Muller, cosine branch only: every call consumes exactly two draws so
    // the stream position is a pure function of the call count.
    double gaussian() {
        double u1 = 1.0 - uniform01();  // (0, 1]
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Fisher-Yates permutation of 0..n-1.
    std::vector<int> permutation(int n) {
        std::vector<int> p(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
        for (int i = n - 1; i > 0; --i) {
            int j = static_cast<int>(next_below(static_cast<std::uint64_t>(i) + 1));
            std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
        }
        return p;
    }
};

}  // namespace pgtail
