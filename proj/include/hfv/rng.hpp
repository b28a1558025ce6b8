// Reproducible random streams. A SeedSpec names a stream by master seed plus
// a path of 32-bit indices (experiment -> replication -> block); the derived
// generator state depends only on that name, never on scheduling, so parallel
// Monte Carlo is bit-stable for any worker count.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hfv/distributions.hpp"

namespace hfv {

struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::vector<std::uint32_t> stream_path;

    SeedSpec child(std::uint32_t index) const {
        SeedSpec s = *this;
        s.stream_path.push_back(index);
        return s;
    }
};

namespace detail {

inline std::uint64_t splitmix_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_key(const SeedSpec& seed) {
    std::uint64_t k = splitmix_mix(seed.master_seed + 0x9E3779B97F4A7C15ULL);
    for (std::uint32_t e : seed.stream_path) {
        k = splitmix_mix(k ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(e) + 1)));
    }
    return splitmix_mix(k ^ (0xD1B54A32D192ED03ULL * (seed.stream_path.size() + 1)));
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// xoshiro256++ seeded through splitmix64 from the derived stream key.
class Rng {
  public:
    explicit Rng(const SeedSpec& seed) {
        std::uint64_t k = detail::derive_key(seed);
        for (auto& w : s_) {
            k += 0x9E3779B97F4A7C15ULL;
            w = detail::splitmix_mix(k);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl64(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl64(s_[3], 45);
        return result;
    }

    // uniform on [0,1)
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0,1), safe under log transforms
    double u01_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Marsaglia polar method; exact normal marginals, second draw cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * u01() - 1.0;
            v = 2.0 * u01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    double exponential(double rate = 1.0) { return -std::log1p(-u01()) / rate; }

    double laplace(double scale) {
        const double u = u01_open();
        return (u < 0.5) ? scale * std::log(2.0 * u) : -scale * std::log(2.0 * (1.0 - u));
    }

    double gumbel() { return -std::log(-std::log(u01_open())); }

    double pareto_shifted(double shape, double slope_at_zero) {
        return shape * (std::pow(1.0 - u01(), -1.0 / shape) - 1.0) / slope_at_zero;
    }

    double draw(const DistributionId& dist) {
        switch (dist.family) {
            case Family::StdNormal: return normal();
            case Family::HalfNormal: return dist.params[0] * std::fabs(normal());
            case Family::Exponential: return exponential(dist.params[0]);
            case Family::Gumbel: return gumbel();
            case Family::Laplace: return laplace(dist.params[0]);
            case Family::ParetoShifted: return pareto_shifted(dist.params[0], dist.params[1]);
            case Family::Uniform:
                return dist.params[0] + (dist.params[1] - dist.params[0]) * u01();
            case Family::DeheuvelsTwoSided:
            case Family::DeheuvelsOneSided:
                throw std::domain_error("sample: no sampler for the Deheuvels family");
        }
        throw std::domain_error("sample: unsupported family");
    }

  private:
    std::uint64_t s_[4] = {};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline std::vector<double> sample(const DistributionId& dist, std::size_t n,
                                  const SeedSpec& seed) {
    if (n < 1) throw std::domain_error("sample: n must be at least 1");
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = rng.draw(dist);
    return out;
}

}  // namespace hfv
