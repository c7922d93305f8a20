#pragma once

#include <cstdint>
#include <random>

namespace dictrnn {

/// splitmix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

/// Uniform doubles from raw 64-bit engine output. Unlike
/// std::uniform_real_distribution the mapping is fixed, so the same seed
/// yields the same values with every standard library.
class Uniform {
public:
    explicit Uniform(std::uint64_t seed) : engine_{seed} {}

    /// [0, 1)
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// [lo, hi)
    double operator()(double lo, double hi) { return lo + (hi - lo) * unit(); }

private:
    std::mt19937_64 engine_;
};

} // namespace dictrnn
