#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace hsom {

// SplitMix64 finalizer. Used for seed derivation so that node seeds are a
// stable function of (root seed, tree path) on every platform.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for the node reached by following `path` (neuron indices from the
/// root) when the whole tree is seeded with `root_seed`. A left fold, so
/// extending a path by one index equals one more derive_child_seed step.
inline std::uint64_t derive_child_seed(std::uint64_t node_seed, std::size_t neuron) noexcept {
    return mix64(node_seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(neuron) + 1)));
}

inline std::uint64_t derive_node_seed(std::uint64_t root_seed,
                                      std::span<const std::size_t> path) noexcept {
    std::uint64_t h = mix64(root_seed);
    for (std::size_t idx : path) h = derive_child_seed(h, idx);
    return h;
}

/// Seeded generator with draw helpers that are bit-stable across platforms.
/// std::mt19937_64 itself is specified exactly by the standard; the
/// distributions are not, so the reductions are done by hand here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform index in [0, n). Multiply-shift reduction; the bias of at
    /// most n / 2^64 is irrelevant at the sizes used here.
    std::size_t uniform_index(std::size_t n) {
        const unsigned __int128 wide =
            static_cast<unsigned __int128>(engine_()) * static_cast<unsigned __int128>(n);
        return static_cast<std::size_t>(wide >> 64);
    }

    /// Uniform double in [0, 1) with 53 random mantissa bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (no rejection, so the consumed stream
    /// length is fixed and results stay reproducible).
    double gaussian() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log1p(-u1));
        return radius * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace hsom
