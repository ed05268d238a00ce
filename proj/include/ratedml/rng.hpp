#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace ratedml {

/// Portable seeded generator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distribution layer is implemented here rather than through
/// <random> distributions (which are implementation-defined):
///   uniform  = top 53 bits of one engine draw scaled by 2^-53, in [0, 1)
///   normal   = Marsaglia polar method, both variates of each accepted pair used
///   below(b) = rejection sampling on the top bits (unbiased)
class Rng {
public:
    static constexpr std::string_view kName = "mt19937_64+polar-normal";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    /// Uniform integer in [0, bound); bound > 0.
    std::uint64_t below(std::uint64_t bound);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer over (base, stream); used to derive independent
/// child seeds (per fold, per task) from one user seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

}  // namespace ratedml
