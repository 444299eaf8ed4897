#pragma once

/**
 * @file rng.hpp
 * @brief Counter-based per-path random substreams for reproducible parallel
 *        Monte Carlo.
 *
 * Every simulated path owns its own stream derived from (seed, path index):
 * draw k of path i is a pure function of (seed, i, k). Estimates are therefore
 * bit-identical however paths are split across batches or worker threads.
 */

#include <cmath>
#include <cstdint>

namespace wwr {

/// SplitMix64 avalanche function.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Independent random substream for one simulation path.
///
/// Outputs are SplitMix64 values along a Weyl sequence whose origin is a hash
/// of (seed, path index); successive draws just advance the counter.
class PathRng {
public:
    static constexpr std::uint64_t weyl = 0x9E3779B97F4A7C15ull;

    PathRng(std::uint64_t seed, std::uint64_t path_index)
        : ctr_(mix64(mix64(seed ^ weyl) + weyl * path_index)) {}

    std::uint64_t next_u64() {
        ctr_ += weyl;
        return mix64(ctr_);
    }

    /// Uniform draw in the open interval (0,1).
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    /// Two independent standard normals from one Box-Muller transform.
    void next_normal_pair(double& z0, double& z1) {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586477 * u2;
        z0 = r * std::cos(a);
        z1 = r * std::sin(a);
    }

    /// Single standard normal; the unused half of each Box-Muller pair is
    /// cached, so draws alternate between one and zero uniform consumptions.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double z0, z1;
        next_normal_pair(z0, z1);
        spare_ = z1;
        have_spare_ = true;
        return z0;
    }

    /// Poisson count by sequential inversion; intended for small means.
    int next_poisson(double mean) {
        const double limit = std::exp(-mean);
        double prod = 1.0;
        int k = -1;
        do {
            ++k;
            prod *= next_uniform();
        } while (prod > limit);
        return k;
    }

    /// Exponential draw with the given mean.
    double next_exponential(double mean) {
        return -mean * std::log(next_uniform());
    }

private:
    std::uint64_t ctr_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace wwr
