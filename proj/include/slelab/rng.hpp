#pragma once

#include <cmath>
#include <cstdint>

namespace slelab {

// Counter-based generator: output j of stream s under seed k is a pure
// function of (k, s, j), so ensembles parallelize over streams with no
// shared state and runs are bit-reproducible across platforms. Mixing is
// two rounds of the splitmix64 finalizer.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(mix(seed + 0x9e3779b97f4a7c15ULL) ^ mix(stream + 0xbf58476d1ce4e5b9ULL))),
          ctr_(0) {}

    std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * (++ctr_)); }

    // Uniform in (0, 1): never returns 0, safe for log().
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Standard normal via Box-Muller; avoids std::normal_distribution, whose
    // output is implementation-defined.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = 2.0 * M_PI * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t ctr_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace slelab
