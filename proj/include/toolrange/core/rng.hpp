#pragma once
// Deterministic RNG with explicit integer/real mappings.
//
// std::uniform_*_distribution output is implementation-defined, so seeded
// runs would not reproduce across standard libraries. This engine
// (splitmix64) plus hand-rolled mappings gives identical streams everywhere.

#include <cstdint>
#include <string_view>
#include <vector>

#include "toolrange/core/json.hpp"

namespace toolrange {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Derives an independent stream from a parent seed and a label,
    // e.g. (policy seed, task_id) or (master seed, task ordinal).
    static Rng derive(std::uint64_t seed, std::string_view label) {
        return Rng(fnv1a(label, seed ^ 0x9e3779b97f4a7c15ull));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform on [0, n). Modulo bias is negligible for the small n used here.
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    // Uniform on [lo, hi] inclusive.
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // Uniform on [0, 1).
    double real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return real() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(below(v.size()))];
    }

    // k distinct indices from [0, n), order randomized.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        shuffle(idx);
        if (k < n) idx.resize(k);
        return idx;
    }

private:
    std::uint64_t state_;
};

} // namespace toolrange
