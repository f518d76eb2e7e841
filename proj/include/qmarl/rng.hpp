#pragma once

#include <cstdint>
#include <random>

namespace qmarl {

/// splitmix64 step, used to derive independent stream seeds from a master
/// seed and an index. Stable across platforms, unlike std::seed_seq.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream. Wraps mt19937_64 with hand-rolled
/// conversions so draws do not depend on libstdc++ distribution internals.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    int uniform_int(int n) { return static_cast<int>(uniform() * n); }

    /// Index sampled from a (normalized) probability vector.
    template <class Vec>
    int sample_categorical(const Vec& probs) {
        const double u = uniform();
        double acc = 0.0;
        const int n = static_cast<int>(probs.size());
        for (int i = 0; i < n; ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return n - 1;
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace qmarl
