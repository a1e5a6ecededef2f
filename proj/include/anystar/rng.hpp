#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace anystar {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Fold any number of 64-bit words into one stream key.
inline constexpr std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x6A09E667F3BCC909ULL;
    for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
    return h;
}

/// Key for one pipeline stage of one sample. Stages draw from their own
/// streams so adding or removing a stage leaves the others untouched.
inline constexpr std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t sample_index,
                                          std::string_view stage) {
    return derive_key({master_seed, sample_index, fnv1a(stage)});
}

inline constexpr std::uint64_t substream(std::uint64_t seed, std::string_view tag) {
    return derive_key({seed, fnv1a(tag)});
}

inline constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
    return derive_key({seed, index});
}

/// Counter-based generator: the n-th draw is a pure function of (key, n).
/// Distributions are implemented here rather than taken from <random> so the
/// draws do not depend on the standard library vendor.
class Rng {
public:
    explicit Rng(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() {
        ++counter_;
        return splitmix64(key_ ^ splitmix64(counter_));
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    bool bernoulli(double p) { return uniform() < p; }
    double log_uniform(double lo, double hi);
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    std::int64_t poisson(double mean);

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace anystar
