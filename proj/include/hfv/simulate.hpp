// Path and observation simulators: Euler diffusions, Heston, compound Poisson
// jumps, exact fractional Brownian motion (circulant embedding), fractional
// log-volatility, and one-sided (lower/upper) microstructure noise.
#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hfv/rng.hpp"

namespace hfv {

struct GridSpec {
    std::size_t n;
    double horizon = 1.0;

    GridSpec(std::size_t n_, double horizon_ = 1.0) : n(n_), horizon(horizon_) {
        if (n < 2) throw std::domain_error("GridSpec: need at least two increments");
        if (!(horizon > 0.0)) throw std::domain_error("GridSpec: horizon must be positive");
    }
    double dt() const { return horizon / static_cast<double>(n); }
    double time(std::size_t j) const { return dt() * static_cast<double>(j); }
};

struct PathSample {
    GridSpec grid;
    std::vector<double> x;               // log-price at t_0..t_n
    std::vector<double> sigma;           // spot volatility at t_0..t_n
    std::vector<std::pair<double, double>> jumps;  // exact (time, size)
    std::string model_tag;
};

struct JumpSpec {
    double intensity = 0.0;
    DistributionId size_dist = DistributionId::laplace(0.05);
    std::optional<std::vector<std::pair<double, double>>> fixed_jumps;
};

enum class NoiseKind { None, RegularMMN, LOMN };
enum class NoiseSide { Lower, Upper };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::None;
    DistributionId dist = DistributionId::exponential(10.0);
    NoiseSide side = NoiseSide::Lower;

    static NoiseSpec none() { return {NoiseKind::None, DistributionId::exponential(1.0), NoiseSide::Lower}; }
    static NoiseSpec lomn(DistributionId d, NoiseSide s = NoiseSide::Lower) {
        return {NoiseKind::LOMN, std::move(d), s};
    }
};

struct ObservationSeries {
    std::vector<double> times;
    std::vector<double> y;
    NoiseSpec noise_spec;
    std::optional<PathSample> latent;
};

// Euler scheme for dX = mu dt + sigma dW; exact in law when both are constant.
inline PathSample simulate_diffusion(const GridSpec& grid,
                                     const std::function<double(double)>& mu,
                                     const std::function<double(double)>& sigma_fn,
                                     const SeedSpec& seed) {
    const double dt = grid.dt();
    const double sqdt = std::sqrt(dt);
    Rng rng(seed);
    PathSample p{grid, {}, {}, {}, "diffusion"};
    p.x.resize(grid.n + 1);
    p.sigma.resize(grid.n + 1);
    p.x[0] = 0.0;
    for (std::size_t j = 0; j <= grid.n; ++j) {
        p.sigma[j] = sigma_fn(grid.time(j));
        if (!(p.sigma[j] > 0.0))
            throw std::domain_error("simulate_diffusion: volatility must be positive");
    }
    for (std::size_t j = 1; j <= grid.n; ++j) {
        const double t0 = grid.time(j - 1);
        p.x[j] = p.x[j - 1] + mu(t0) * dt + p.sigma[j - 1] * sqdt * rng.normal();
    }
    return p;
}

inline PathSample simulate_diffusion(const GridSpec& grid, double mu, double sigma,
                                     const SeedSpec& seed) {
    return simulate_diffusion(
        grid, [mu](double) { return mu; }, [sigma](double) { return sigma; }, seed);
}

inline PathSample simulate_bm(const GridSpec& grid, double sigma, const SeedSpec& seed) {
    PathSample p = simulate_diffusion(grid, 0.0, sigma, seed);
    p.model_tag = "bm";
    return p;
}

inline PathSample simulate_bm(const GridSpec& grid, const SeedSpec& seed) {
    return simulate_bm(grid, 1.0, seed);
}

struct HestonParams {
    double kappa = 5.0;
    double theta = 0.04;
    // Vol-of-vol kept moderate so one day of data stays inside the regime the
    // global truncation threshold assumes (spot vol within ~25% of its median).
    double xi = 0.3;
    double rho = -0.7;
    double v0 = 0.04;
    double mu = 0.05;
    double sigma_floor = 1e-6;
};

// Full-truncation Euler for the CIR variance; the sigma field carries the
// floored volatility actually used by the price recursion.
inline PathSample simulate_heston(const GridSpec& grid, const HestonParams& hp,
                                  const SeedSpec& seed) {
    if (!(hp.kappa > 0.0 && hp.theta > 0.0 && hp.xi >= 0.0 && hp.v0 > 0.0))
        throw std::domain_error("simulate_heston: kappa, theta, v0 must be positive, xi >= 0");
    if (!(std::fabs(hp.rho) <= 1.0))
        throw std::domain_error("simulate_heston: |rho| must be at most 1");
    const double dt = grid.dt();
    const double sqdt = std::sqrt(dt);
    const double rho_c = std::sqrt(1.0 - hp.rho * hp.rho);
    Rng rng(seed);
    PathSample p{grid, {}, {}, {}, "heston"};
    p.x.resize(grid.n + 1);
    p.sigma.resize(grid.n + 1);
    p.x[0] = 0.0;
    double v = hp.v0;
    p.sigma[0] = std::max(std::sqrt(std::max(v, 0.0)), hp.sigma_floor);
    for (std::size_t j = 1; j <= grid.n; ++j) {
        const double vp = std::max(v, 0.0);
        const double zv = rng.normal();
        const double zx = rng.normal();
        p.x[j] = p.x[j - 1] + hp.mu * dt +
                 p.sigma[j - 1] * sqdt * (hp.rho * zv + rho_c * zx);
        v = v + hp.kappa * (hp.theta - vp) * dt + hp.xi * std::sqrt(vp * dt) * zv;
        p.sigma[j] = std::max(std::sqrt(std::max(v, 0.0)), hp.sigma_floor);
    }
    return p;
}

// Discrete integrated variance of the sigma path the Euler recursion used.
inline double integrated_variance(const PathSample& p) {
    double s = 0.0;
    for (std::size_t j = 0; j < p.grid.n; ++j) s += p.sigma[j] * p.sigma[j];
    return s * p.grid.dt();
}

inline PathSample add_jumps(PathSample path, const JumpSpec& spec, const SeedSpec& seed) {
    std::vector<std::pair<double, double>> jumps;
    const double T = path.grid.horizon;
    if (spec.fixed_jumps) {
        jumps = *spec.fixed_jumps;
        for (const auto& [t, b] : jumps) {
            (void)b;
            if (!(t > 0.0 && t < T))
                throw std::domain_error("add_jumps: fixed jump time outside (0,T)");
        }
        std::sort(jumps.begin(), jumps.end());
        for (std::size_t i = 1; i < jumps.size(); ++i)
            if (jumps[i].first == jumps[i - 1].first)
                throw std::domain_error("add_jumps: duplicate fixed jump time");
    } else if (spec.intensity > 0.0) {
        Rng rng(seed);
        double t = rng.exponential(spec.intensity);
        while (t < T) {
            jumps.emplace_back(t, rng.draw(spec.size_dist));
            t += rng.exponential(spec.intensity);
        }
    }
    const double dt = path.grid.dt();
    for (const auto& [t, b] : jumps) {
        const auto first = static_cast<std::size_t>(std::ceil(t / dt - 1e-12));
        for (std::size_t j = std::max<std::size_t>(first, 1); j <= path.grid.n; ++j)
            path.x[j] += b;
        path.jumps.emplace_back(t, b);
    }
    std::sort(path.jumps.begin(), path.jumps.end());
    return path;
}

namespace detail {

// FFTW plans are not thread-safe to create; execution on private buffers is.
class FftCache {
  public:
    static FftCache& instance() {
        static FftCache c;
        return c;
    }

    // in-place forward c2c transform of length m on caller-owned buffer
    void forward(std::vector<std::complex<double>>& buf) {
        const std::size_t m = buf.size();
        fftw_plan plan;
        {
            std::lock_guard<std::mutex> lk(mu_);
            auto it = plans_.find(m);
            if (it == plans_.end()) {
                std::vector<std::complex<double>> tmp(m);
                plan = fftw_plan_dft_1d(static_cast<int>(m),
                                        reinterpret_cast<fftw_complex*>(tmp.data()),
                                        reinterpret_cast<fftw_complex*>(tmp.data()),
                                        FFTW_FORWARD, FFTW_ESTIMATE);
                plans_.emplace(m, plan);
            } else {
                plan = it->second;
            }
        }
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(buf.data()),
                         reinterpret_cast<fftw_complex*>(buf.data()));
    }

  private:
    FftCache() = default;
    std::mutex mu_;
    std::map<std::size_t, fftw_plan> plans_;
};

inline double fgn_autocov(std::size_t k, double H) {
    const double kk = static_cast<double>(k);
    return 0.5 * (std::pow(kk + 1.0, 2.0 * H) + std::pow(std::fabs(kk - 1.0), 2.0 * H) -
                  2.0 * std::pow(kk, 2.0 * H));
}

// Unit-spacing fractional Gaussian noise of length n by circulant embedding;
// falls back to Cholesky if the embedding spectrum goes negative.
inline std::vector<double> sample_fgn(std::size_t n, double H, Rng& rng) {
    const std::size_t m = 2 * n;
    std::vector<std::complex<double>> c(m);
    for (std::size_t j = 0; j <= n; ++j) c[j] = fgn_autocov(j, H);
    for (std::size_t j = n + 1; j < m; ++j) c[j] = c[m - j];
    FftCache::instance().forward(c);

    double min_ev = 0.0;
    for (const auto& ev : c) min_ev = std::min(min_ev, ev.real());
    if (min_ev < -1e-8) {
        // Toeplitz Cholesky on the increment covariance
        std::vector<std::vector<double>> L(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = fgn_autocov(i - j, H);
                for (std::size_t k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
                if (i == j) {
                    if (s <= 0.0)
                        throw std::runtime_error(
                            "sample_fgn: increment covariance not positive definite");
                    L[i][i] = std::sqrt(s);
                } else {
                    L[i][j] = s / L[j][j];
                }
            }
        }
        std::vector<double> z(n), out(n, 0.0);
        for (auto& v : z) v = rng.normal();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) out[i] += L[i][j] * z[j];
        return out;
    }

    std::vector<std::complex<double>> w(m);
    const double inv_m = 1.0 / static_cast<double>(m);
    w[0] = std::sqrt(std::max(c[0].real(), 0.0) * inv_m) * rng.normal();
    w[n] = std::sqrt(std::max(c[n].real(), 0.0) * inv_m) * rng.normal();
    for (std::size_t j = 1; j < n; ++j) {
        const double amp = std::sqrt(std::max(c[j].real(), 0.0) * inv_m * 0.5);
        const double re = amp * rng.normal();
        const double im = amp * rng.normal();
        w[j] = {re, im};
        w[m - j] = {re, -im};
    }
    FftCache::instance().forward(w);
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = w[j].real();
    return out;
}

}  // namespace detail

// Exact-in-distribution fBm on j/n, j = 0..n, with B^H_0 = 0.
inline std::vector<double> simulate_fbm(std::size_t n, double H, const SeedSpec& seed) {
    if (!(H > 0.0 && H < 1.0)) throw std::domain_error("simulate_fbm: H outside (0,1)");
    if (n < 1) throw std::domain_error("simulate_fbm: n must be at least 1");
    Rng rng(seed);
    std::vector<double> fgn = detail::sample_fgn(n, H, rng);
    std::vector<double> path(n + 1, 0.0);
    const double scale = std::pow(static_cast<double>(n), -H);
    for (std::size_t j = 1; j <= n; ++j) path[j] = path[j - 1] + scale * fgn[j - 1];
    return path;
}

inline std::vector<double> simulate_fractional_logvol(std::size_t n, double H, double vol_of_vol,
                                                      double base_level, const SeedSpec& seed) {
    if (!(vol_of_vol >= 0.0))
        throw std::domain_error("simulate_fractional_logvol: negative vol of vol");
    std::vector<double> sigma(n + 1);
    if (vol_of_vol == 0.0) {
        std::fill(sigma.begin(), sigma.end(), std::exp(base_level));
        return sigma;
    }
    const std::vector<double> fbm = simulate_fbm(n, H, seed);
    for (std::size_t j = 0; j <= n; ++j)
        sigma[j] = std::exp(base_level + vol_of_vol * fbm[j]);
    return sigma;
}

inline ObservationSeries observe(const PathSample& path, const NoiseSpec& noise,
                                 const SeedSpec& seed) {
    ObservationSeries obs;
    obs.noise_spec = noise;
    obs.latent = path;
    const std::size_t n = path.grid.n;
    obs.times.resize(n + 1);
    obs.y.resize(n + 1);
    for (std::size_t j = 0; j <= n; ++j) obs.times[j] = path.grid.time(j);

    if (noise.kind == NoiseKind::None) {
        obs.y = path.x;
        return obs;
    }
    if (noise.kind == NoiseKind::LOMN) {
        const Family f = noise.dist.family;
        const bool ok = (f == Family::Exponential) || (f == Family::ParetoShifted) ||
                        (f == Family::Uniform && noise.dist.params[0] == 0.0);
        if (!ok)
            throw std::domain_error(
                "observe: LOMN noise needs nonnegative support with linear CDF at 0 "
                "(Exponential, Uniform[0,b], or shifted Pareto)");
    } else {
        const Family f = noise.dist.family;
        const bool ok = (f == Family::StdNormal) || (f == Family::Laplace) ||
                        (f == Family::Uniform && noise.dist.params[0] == -noise.dist.params[1]);
        if (!ok)
            throw std::domain_error("observe: regular MMN noise must be centered");
    }
    Rng rng(seed);
    const double sgn = (noise.kind == NoiseKind::LOMN && noise.side == NoiseSide::Upper) ? -1.0 : 1.0;
    for (std::size_t j = 0; j <= n; ++j) obs.y[j] = path.x[j] + sgn * rng.draw(noise.dist);
    return obs;
}

// Perturbed-normal fixture Y_j = (1 + Delta^a U_j) Z_j; used only to
// illustrate that the perturbation exponent resists estimation.
inline std::vector<double> simulate_lb_submodel(std::size_t n, double alpha, double delta,
                                                const DistributionId& u_dist,
                                                const SeedSpec& seed) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::domain_error("simulate_lb_submodel: alpha outside (0,1]");
    if (delta < 0.0) throw std::domain_error("simulate_lb_submodel: negative delta");
    Rng rng(seed);
    std::vector<double> out(n);
    const double damp = std::pow(delta, alpha);
    for (auto& y : out) {
        const double u = rng.draw(u_dist);
        const double z = rng.normal();
        y = (1.0 + damp * u) * z;
    }
    return out;
}

inline std::vector<double> simulate_lb_submodel(std::size_t n, double alpha, double delta,
                                                const SeedSpec& seed) {
    return simulate_lb_submodel(n, alpha, delta, DistributionId::uniform(-1.0, 1.0), seed);
}

}  // namespace hfv
