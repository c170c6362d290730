#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "fouest/types.hpp"

namespace fouest {

// splitmix64 (Steele/Lea/Flood). Used only for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Documented seed derivation: sub-streams are obtained by folding counters
// into the base seed one at a time with splitmix64. Derivation depends only
// on (base, counters), never on how many other streams exist, so path k of
// a batch is reproducible regardless of batch size or scheduling.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a) {
    return splitmix64(base ^ (a + 0x9e3779b97f4a7c15ULL));
}
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(base, a), b);
}
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    return derive_seed(derive_seed(base, a, b), c);
}

// N(0,1) stream: mt19937_64 (fully specified by the standard) feeding the
// Marsaglia polar method. Both pieces are pinned here rather than taken from
// std::normal_distribution, whose output is implementation-defined; this way
// a seed reproduces the same path on any platform.
class GaussianStream {
  public:
    explicit GaussianStream(RngSeed seed) : eng_(seed.value) {}

    // uniform in [0,1), 53 random bits
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace fouest
