#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace dsm {

// All randomness in the project flows through these generators. Distribution
// sampling is implemented by hand (std::normal_distribution and friends are
// implementation-defined, which would break reproducibility guarantees if the
// standard library ever changes).

/// splitmix64: tiny counter-style generator, also used to derive substream
/// seeds from a master seed.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

/// FNV-1a over a label, for deriving named substreams.
inline std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derives an independent substream seed from (seed, label, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                                 std::uint64_t index = 0) {
    SplitMix64 s(seed ^ hash_label(label) ^ (index * 0x9e3779b97f4a7c15ULL));
    s.next();
    return s.next();
}

/// Deterministic uniform/normal sampler over a splitmix64 stream.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_.next(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(gen_.next() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        // Multiply-shift rejection-free mapping; bias is < 2^-64 * n which is
        // irrelevant at our scales.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(gen_.next()) * n) >> 64);
    }

    /// Standard normal via Box-Muller (cached second value).
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        // Guard against log(0).
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Deterministic Fisher-Yates shuffle.
    template <class Vec>
    void shuffle(Vec& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    SplitMix64 gen_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace dsm
