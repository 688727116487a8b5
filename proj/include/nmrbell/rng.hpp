#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "nmrbell/constants.hpp"

namespace nmrbell::rng {

// Deterministic random stream. std::mt19937_64 has a portable, standardized
// output sequence; the Gaussian transform is written out by hand because
// std::normal_distribution is implementation-defined. Identical seeds give
// byte-identical draws on every platform.
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : gen_(seed) {}

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; draws two uniforms per pair.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace nmrbell::rng
