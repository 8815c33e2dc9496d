#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace subtraj {

/// Deterministic random source. Wraps std::mt19937_64 (whose output stream
/// is fully specified by the standard) and derives all draws from raw bits,
/// so sequences do not depend on library-specific distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound) {
        // rejection sampling to avoid modulo bias
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % bound;
    }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

    /// First n elements of a seeded partial Fisher-Yates pass over v.
    template <typename T>
    std::vector<T> sample(std::vector<T> v, std::size_t n) {
        if (n > v.size()) n = v.size();
        for (std::size_t i = 0; i < n; ++i)
            std::swap(v[i], v[i + below(v.size() - i)]);
        v.resize(n);
        return v;
    }

private:
    std::mt19937_64 gen_;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}
} // namespace detail

/// Stable sub-seed derivation: one base seed fans out into independent
/// streams keyed by a usage tag and a salt (node slot, query ordinal, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t salt) {
    std::uint64_t h = 0xCBF29CE484222325ull; // FNV-1a over the tag
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return detail::splitmix64(base ^ detail::splitmix64(h ^ detail::splitmix64(salt)));
}

/// FNV-1a over a string, for salting per-id randomness.
inline std::uint64_t stable_hash(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

} // namespace subtraj
