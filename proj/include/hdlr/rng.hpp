#pragma once

#include <cmath>
#include <cstdint>

namespace hdlr {

// Counter-seeded splitmix64 stream. Trial streams are derived as
// Rng(master_seed, trial_index); the golden-ratio increment keeps distinct
// trial states well separated, so trials are reproducible under any
// parallel schedule.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    Rng(std::uint64_t master_seed, std::uint64_t stream)
        : state_(master_seed + 0x9E3779B97F4A7C15ULL * (stream + 1)) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform on (0,1), never hitting the endpoints
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; second value cached
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // +1 or -1 with probability 1/2 each
    double next_sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace hdlr
