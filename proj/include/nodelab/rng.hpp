#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace nodelab {

/// Seedable random source used everywhere in the project.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are implementation-defined, so all
/// derived draws (uniform reals, bounded integers, shuffles) are implemented
/// here on top of the raw 64-bit output. Results are therefore bit-identical
/// across compilers and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform in [0, bound). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t bound);

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(items[i - 1], items[j]);
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        shuffle(std::span<T>(items));
    }

private:
    std::mt19937_64 engine_;
};

// SplitMix64 finalizer; derives independent stream seeds from (seed, tags...).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) { return mix_seed(seed, a); }

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(seed, a), b);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    return mix_seed(mix_seed(mix_seed(seed, a), b), c);
}

}  // namespace nodelab
