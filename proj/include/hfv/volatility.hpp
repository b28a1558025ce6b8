// Volatility estimators: realized and truncated realized volatility, spot
// estimators with and without truncation, block minima and the local-minimum
// estimator for one-sided noise (with its Psi bias-correction table), and the
// boundary-model textbook estimators.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "hfv/simulate.hpp"

namespace hfv {

struct IncrementSeries {
    std::vector<double> increments;
    double dt = 0.0;
    double horizon = 0.0;
};

inline IncrementSeries increments_of(const ObservationSeries& obs) {
    if (obs.y.size() < 2)
        throw std::domain_error("increments_of: need at least two observations");
    const std::size_t n = obs.y.size() - 1;
    IncrementSeries out;
    out.horizon = obs.times.back() - obs.times.front();
    out.dt = out.horizon / static_cast<double>(n);
    for (std::size_t j = 0; j + 1 < obs.times.size(); ++j) {
        if (std::fabs(obs.times[j + 1] - obs.times[j] - out.dt) > 1e-9 * std::max(out.dt, 1e-12))
            throw std::domain_error("increments_of: non-equidistant grid");
    }
    out.increments.resize(n);
    for (std::size_t j = 0; j < n; ++j) out.increments[j] = obs.y[j + 1] - obs.y[j];
    return out;
}

struct TruncationSpec {
    double tau = 0.49;   // threshold exponent, in (0, 1/2)
    double c_u = 4.0;    // threshold multiplier

    TruncationSpec() = default;
    TruncationSpec(double tau_, double c_u_) : tau(tau_), c_u(c_u_) {
        if (!(tau > 0.0 && tau < 0.5))
            throw std::domain_error("TruncationSpec: tau outside (0, 1/2)");
        if (!(c_u > 0.0)) throw std::domain_error("TruncationSpec: c_u must be positive");
    }
};

// Robust pilot scale 1.4826 * median|dx| / sqrt(dt): approximates sigma on
// jump-free data, insensitive to a few large increments.
inline double pilot_scale(const IncrementSeries& inc) {
    std::vector<double> a(inc.increments.size());
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = std::fabs(inc.increments[j]);
    const std::size_t mid = a.size() / 2;
    std::nth_element(a.begin(), a.begin() + mid, a.end());
    double med = a[mid];
    if (a.size() % 2 == 0) {
        const double lo = *std::max_element(a.begin(), a.begin() + mid);
        med = 0.5 * (med + lo);
    }
    return 1.4826 * med / std::sqrt(inc.dt);
}

inline double truncation_threshold(const IncrementSeries& inc, const TruncationSpec& spec) {
    const double u = spec.c_u * pilot_scale(inc) * std::pow(inc.dt, spec.tau);
    if (!(u > 0.0)) throw std::domain_error("truncation_threshold: nonpositive threshold");
    return u;
}

inline double realized_volatility(const ObservationSeries& obs) {
    const IncrementSeries inc = increments_of(obs);
    double s = 0.0;
    for (double dx : inc.increments) s += dx * dx;
    return s / inc.horizon;
}

inline double truncated_rv(const ObservationSeries& obs, const TruncationSpec& spec = {}) {
    const IncrementSeries inc = increments_of(obs);
    const double u = truncation_threshold(inc, spec);
    double s = 0.0;
    for (double dx : inc.increments)
        if (std::fabs(dx) <= u) s += dx * dx;
    return s / inc.horizon;
}

struct SpotEstimate {
    double s = 0.0;        // evaluation time
    double value = 0.0;    // sigma^2 estimate
    std::size_t k_n = 0;   // window length used
    double alpha_used = 0.0;
    double raw = 0.0;      // pre-correction value where a correction applies
};

enum class WindowSide { Left, Right, Center };

inline std::size_t spot_window_length(std::size_t n, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::domain_error("spot_window_length: alpha outside (0,1]");
    const double e = 2.0 * alpha / (2.0 * alpha + 1.0);
    const auto k = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), e)));
    return std::clamp<std::size_t>(k, 2, n);
}

namespace detail {

// Sum of squared increments over a k-long window of 1-based increment indices
// anchored at floor(s n), clipped at the grid edges.
inline SpotEstimate spot_from_squares(const std::vector<double>& sq, double s_time,
                                      double horizon, std::size_t k, double alpha,
                                      WindowSide side) {
    const std::size_t n = sq.size();
    const auto anchor = static_cast<std::size_t>(std::floor(
        s_time / horizon * static_cast<double>(n)));
    std::ptrdiff_t lo, hi;  // 1-based inclusive window [lo, hi]
    const auto a = static_cast<std::ptrdiff_t>(anchor);
    const auto kk = static_cast<std::ptrdiff_t>(k);
    switch (side) {
        case WindowSide::Right: lo = a + 1; hi = a + kk; break;
        case WindowSide::Left: lo = a - kk + 1; hi = a; break;
        case WindowSide::Center: lo = a - kk / 2 + 1; hi = a + (kk - kk / 2); break;
        default: throw std::domain_error("spot_from_squares: bad side");
    }
    lo = std::max<std::ptrdiff_t>(lo, 1);
    hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(n));
    if (hi < lo) throw std::domain_error("spot_from_squares: empty window");
    double sum = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) sum += sq[static_cast<std::size_t>(j - 1)];
    const auto used = static_cast<std::size_t>(hi - lo + 1);
    SpotEstimate est;
    est.s = s_time;
    est.k_n = used;
    est.alpha_used = alpha;
    est.value = sum * static_cast<double>(n) / (static_cast<double>(used) * horizon);
    est.raw = est.value;
    return est;
}

}  // namespace detail

inline SpotEstimate spot_vol(const ObservationSeries& obs, double s, double alpha,
                             WindowSide side = WindowSide::Right) {
    const IncrementSeries inc = increments_of(obs);
    if (!(s > 0.0 && s < inc.horizon))
        throw std::domain_error("spot_vol: evaluation time outside (0,T)");
    const std::size_t k = spot_window_length(inc.increments.size(), alpha);
    std::vector<double> sq(inc.increments.size());
    for (std::size_t j = 0; j < sq.size(); ++j) sq[j] = inc.increments[j] * inc.increments[j];
    return detail::spot_from_squares(sq, s, inc.horizon, k, alpha, side);
}

inline SpotEstimate spot_vol_adaptive(const ObservationSeries& obs, double s, double alpha_hat,
                                      WindowSide side = WindowSide::Right) {
    return spot_vol(obs, s, alpha_hat, side);
}

inline SpotEstimate truncated_spot_vol(const ObservationSeries& obs, double s, double alpha,
                                       const TruncationSpec& spec = {},
                                       WindowSide side = WindowSide::Right) {
    const IncrementSeries inc = increments_of(obs);
    if (!(s > 0.0 && s < inc.horizon))
        throw std::domain_error("truncated_spot_vol: evaluation time outside (0,T)");
    const double u = truncation_threshold(inc, spec);
    const std::size_t k = spot_window_length(inc.increments.size(), alpha);
    std::vector<double> sq(inc.increments.size(), 0.0);
    for (std::size_t j = 0; j < sq.size(); ++j) {
        const double dx = inc.increments[j];
        if (std::fabs(dx) <= u) sq[j] = dx * dx;
    }
    return detail::spot_from_squares(sq, s, inc.horizon, k, alpha, side);
}

// Leave-one-out truncated spot variances (n/k * windowed sum of truncated
// squared increments, window of k neighbours excluding j itself; increments
// near the left edge use the mirrored right-side window). Scaled so that the
// result estimates sigma^2 at increment j's location.
inline std::vector<double> loo_truncated_spot(const IncrementSeries& inc, std::size_t k,
                                              double threshold) {
    const std::size_t n = inc.increments.size();
    if (n < k + 1)
        throw std::domain_error("loo_truncated_spot: need n >= k+1");
    std::vector<double> pref(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double dx = inc.increments[j];
        const double v = (std::fabs(dx) <= threshold) ? dx * dx : 0.0;
        pref[j + 1] = pref[j] + v;
    }
    std::vector<double> out(n);
    const double scale = static_cast<double>(n) / (static_cast<double>(k) * inc.horizon);
    for (std::size_t j = 0; j < n; ++j) {
        double wsum;
        if (j >= k)
            wsum = pref[j] - pref[j - k];          // increments j-k .. j-1 (0-based)
        else
            wsum = pref[j + k + 1] - pref[j + 1];  // increments j+1 .. j+k
        out[j] = wsum * scale;
    }
    return out;
}

// ============================================================================
// Block minima and the bandwidth rules for the one-sided-noise model
// ============================================================================

struct BlockMinima {
    double h_n = 0.0;
    std::size_t n = 0;
    std::size_t nh = 0;                 // observations per block
    std::vector<double> minima;         // m_{k,n}, k = 0 .. h^{-1}-1
};

inline BlockMinima block_minima(const ObservationSeries& obs, double h_n) {
    const std::size_t n = obs.y.size() - 1;
    const double hinv_real = 1.0 / h_n;
    const auto hinv = static_cast<std::size_t>(std::llround(hinv_real));
    if (hinv < 1 || std::fabs(hinv_real - static_cast<double>(hinv)) > 1e-9 ||
        n % hinv != 0)
        throw std::domain_error("block_minima: h_n does not induce an integer partition");
    const std::size_t nh = n / hinv;
    BlockMinima bm{h_n, n, nh, std::vector<double>(hinv)};
    for (std::size_t k = 0; k < hinv; ++k) {
        double m = obs.y[k * nh + 1];
        for (std::size_t i = k * nh + 2; i <= (k + 1) * nh; ++i) m = std::min(m, obs.y[i]);
        bm.minima[k] = m;
    }
    return bm;
}

enum class HnMode { Balanced, Test };

// Bandwidth before rounding: balanced h ~ n^{-2/3} up to the default constant,
// test mode solves h = 2 log(2/h - 2) n^{-2/3} by fixed-point iteration.
inline double choose_hn_unrounded(std::size_t n, HnMode mode) {
    const double n23 = std::pow(static_cast<double>(n), 2.0 / 3.0);
    if (mode == HnMode::Balanced) {
        const double c_h = 2.0 * std::log(2.0 * n23);
        return c_h / n23;
    }
    double h = 1.0 / n23;
    for (int it = 0; it < 25; ++it) h = 2.0 * std::log(2.0 / h - 2.0) / n23;
    return h;
}

inline double choose_hn(std::size_t n, HnMode mode) {
    const double h = choose_hn_unrounded(n, mode);
    const double target = 1.0 / h;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t d = 2; d * 2 <= n; ++d) {
        if (n % d != 0) continue;
        const double dist = std::fabs(static_cast<double>(d) - target);
        if (dist < best_d || (dist == best_d && d > best)) {
            best_d = dist;
            best = d;
        }
    }
    if (best == 0)
        throw std::domain_error(
            "choose_hn: no admissible block count divides n; choose n with a divisor near " +
            std::to_string(target));
    return 1.0 / static_cast<double>(best);
}

// ============================================================================
// Psi correction curve (Monte Carlo) for the local-minimum estimator
// ============================================================================

// One Monte Carlo evaluation of the expected squared difference of
// noisy-minimum functionals over adjacent unit blocks, scaled by 1/h.
inline double psi_n(double sigma2, std::size_t n, double h_n, const NoiseSpec& noise,
                    std::size_t mc_paths, const SeedSpec& seed) {
    if (sigma2 < 0.0) throw std::domain_error("psi_n: negative variance");
    const auto nh = static_cast<std::size_t>(std::llround(h_n * static_cast<double>(n)));
    if (nh < 1) throw std::domain_error("psi_n: empty block");
    const double sigma = std::sqrt(sigma2);
    const double sstep = std::sqrt(1.0 / static_cast<double>(n));
    Rng rng(seed);
    const bool noisy = noise.kind != NoiseKind::None;
    double acc = 0.0;
    std::vector<double> b1(nh), b2(nh), e1(nh), e2(nh);
    for (std::size_t p = 0; p < mc_paths; ++p) {
        double w = 0.0;
        for (std::size_t i = 0; i < nh; ++i) {
            w += sstep * rng.normal();
            b1[i] = w;  // B_{(i+1)/n}
        }
        w = 0.0;
        for (std::size_t i = 0; i < nh; ++i) {
            w += sstep * rng.normal();
            b2[i] = w;
        }
        for (std::size_t i = 0; i < nh; ++i) e1[i] = noisy ? rng.draw(noise.dist) : 0.0;
        for (std::size_t i = 0; i < nh; ++i) e2[i] = noisy ? rng.draw(noise.dist) : 0.0;
        // first min over i in {0..nh-1}: values sigma B_{i/n} + e_i, B_0 = 0
        double m1 = e1[0];
        for (std::size_t i = 1; i < nh; ++i) m1 = std::min(m1, sigma * b1[i - 1] + e1[i]);
        // second min over i in {1..nh}
        double m2 = sigma * b2[0] + e2[0];
        for (std::size_t i = 1; i < nh; ++i) m2 = std::min(m2, sigma * b2[i] + e2[i]);
        const double d = m1 - m2;
        acc += d * d;
    }
    return acc / (static_cast<double>(mc_paths) * h_n);
}

struct PsiTable {
    std::vector<double> sigma2_grid;
    std::vector<double> psi;

    double operator()(double sigma2) const {
        if (sigma2_grid.empty()) throw std::runtime_error("PsiTable: empty");
        if (sigma2 <= sigma2_grid.front()) return psi.front();
        if (sigma2 >= sigma2_grid.back()) return psi.back();
        const auto it = std::upper_bound(sigma2_grid.begin(), sigma2_grid.end(), sigma2);
        const auto i = static_cast<std::size_t>(it - sigma2_grid.begin());
        const double t = (sigma2 - sigma2_grid[i - 1]) / (sigma2_grid[i] - sigma2_grid[i - 1]);
        return psi[i - 1] + t * (psi[i] - psi[i - 1]);
    }

    // inverse of the piecewise-linear interpolant; clamps outside the range
    double invert(double target) const {
        if (sigma2_grid.empty()) throw std::runtime_error("PsiTable: empty");
        if (target <= psi.front()) return sigma2_grid.front();
        if (target >= psi.back()) return sigma2_grid.back();
        for (std::size_t i = 1; i < psi.size(); ++i) {
            if (target <= psi[i]) {
                const double t = (target - psi[i - 1]) / (psi[i] - psi[i - 1]);
                return sigma2_grid[i - 1] + t * (sigma2_grid[i] - sigma2_grid[i - 1]);
            }
        }
        return sigma2_grid.back();
    }
};

// 33-node table with common random numbers across nodes; nondecreasing by a
// final running-max cleanup (violations are at most MC jitter).
inline PsiTable build_psi_table(std::size_t n, double h_n, const NoiseSpec& noise,
                                std::size_t mc_paths, const SeedSpec& seed, double lo,
                                double hi, std::size_t nodes = 33) {
    if (!(lo >= 0.0 && hi > lo)) throw std::domain_error("build_psi_table: bad range");
    const auto nh = static_cast<std::size_t>(std::llround(h_n * static_cast<double>(n)));
    if (nh < 1) throw std::domain_error("build_psi_table: empty block");
    PsiTable tab;
    tab.sigma2_grid.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i)
        tab.sigma2_grid[i] = lo + (hi - lo) * static_cast<double>(i) /
                                      static_cast<double>(nodes - 1);
    tab.psi.assign(nodes, 0.0);
    const double sstep = std::sqrt(1.0 / static_cast<double>(n));
    Rng rng(seed);
    const bool noisy = noise.kind != NoiseKind::None;
    std::vector<double> b1(nh), b2(nh), e1(nh), e2(nh);
    for (std::size_t p = 0; p < mc_paths; ++p) {
        double w = 0.0;
        for (std::size_t i = 0; i < nh; ++i) { w += sstep * rng.normal(); b1[i] = w; }
        w = 0.0;
        for (std::size_t i = 0; i < nh; ++i) { w += sstep * rng.normal(); b2[i] = w; }
        for (std::size_t i = 0; i < nh; ++i) e1[i] = noisy ? rng.draw(noise.dist) : 0.0;
        for (std::size_t i = 0; i < nh; ++i) e2[i] = noisy ? rng.draw(noise.dist) : 0.0;
        for (std::size_t g = 0; g < nodes; ++g) {
            const double sg = std::sqrt(tab.sigma2_grid[g]);
            double m1 = e1[0];
            for (std::size_t i = 1; i < nh; ++i) m1 = std::min(m1, sg * b1[i - 1] + e1[i]);
            double m2 = sg * b2[0] + e2[0];
            for (std::size_t i = 1; i < nh; ++i) m2 = std::min(m2, sg * b2[i] + e2[i]);
            const double d = m1 - m2;
            tab.psi[g] += d * d;
        }
    }
    for (auto& v : tab.psi) v /= static_cast<double>(mc_paths) * h_n;
    for (std::size_t i = 1; i < tab.psi.size(); ++i)
        tab.psi[i] = std::max(tab.psi[i], tab.psi[i - 1]);
    return tab;
}

// ============================================================================
// Local-minimum volatility estimator (one-sided noise)
// ============================================================================

inline double lomn_kn_default(double h_n, double alpha = 0.5, double delta = 0.1,
                              double c_k = 1.0) {
    return c_k * std::pow(h_n, delta - 2.0 * alpha / (1.0 + 2.0 * alpha));
}

namespace detail {

inline SpotEstimate lomn_core(const BlockMinima& bm, double tau, std::size_t k_n,
                              const PsiTable& psi, double trunc_threshold) {
    if (k_n < 2) throw std::domain_error("lomn_spot_vol: K_n must be at least 2");
    if (!(tau > 0.0 && tau <= 1.0))
        throw std::domain_error("lomn_spot_vol: tau outside (0,1]");
    const auto hinv = bm.minima.size();
    const auto kend = static_cast<std::size_t>(std::floor(
        static_cast<double>(hinv) * tau + 1e-12));  // floor(h^{-1} tau)
    if (kend < 2 || kend > hinv)
        throw std::domain_error("lomn_spot_vol: too few blocks before tau");
    const std::size_t kstart = (kend > k_n) ? kend - k_n : 1;
    if (kend - 1 < kstart)
        throw std::domain_error("lomn_spot_vol: too few blocks before tau");
    const double factor = pi / (2.0 * (pi - 2.0));
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = kstart; k <= kend - 1; ++k) {
        const double d = bm.minima[k] - bm.minima[k - 1];
        const double scaled2 = d * d / bm.h_n;
        if (trunc_threshold > 0.0 && std::fabs(d) / std::sqrt(bm.h_n) > trunc_threshold)
            continue;
        sum += scaled2;
        ++count;
    }
    if (count == 0) {
        SpotEstimate z;
        z.s = tau;
        z.k_n = 0;
        return z;
    }
    SpotEstimate est;
    est.s = tau;
    est.k_n = count;
    est.raw = factor * sum / static_cast<double>(count);
    // remove the noisy-minimum bias: solve factor * Psi(v) = raw
    est.value = psi.invert(est.raw / factor);
    return est;
}

}  // namespace detail

// Raw estimate factor/K * sum over the K_n blocks before tau of
// h^{-1}(m_k - m_{k-1})^2, with the Psi-inverted value in .value and the
// uncorrected one in .raw. The sum is normalized by the number of terms it
// actually contains (the boundary can trim the window).
inline SpotEstimate lomn_spot_vol(const BlockMinima& bm, double tau, std::size_t k_n,
                                  const PsiTable& psi) {
    if (bm.minima.size() < 3)
        throw std::domain_error("lomn_spot_vol: need at least three blocks");
    const auto kend = static_cast<std::size_t>(std::floor(
        static_cast<double>(bm.minima.size()) * tau + 1e-12));
    if (kend < k_n + 1)
        throw std::domain_error("lomn_spot_vol: fewer than K_n+1 blocks before tau");
    return detail::lomn_core(bm, tau, k_n, psi, 0.0);
}

// Truncated variant: scaled differences h^{-1/2}|m_k - m_{k-1}| above the
// robust threshold are dropped before averaging. The threshold mirrors the
// increment recipe with h in place of dt: on the h^{-1/2}-scaled differences
// (already O(1)) the cut is c_u * robust * h^{tau - 1/2}, a c_u-sigma-style
// cut that tightens only slowly as h shrinks.
inline SpotEstimate lomn_truncated_spot_vol(const BlockMinima& bm, double tau, std::size_t k_n,
                                            const PsiTable& psi, const TruncationSpec& spec) {
    if (bm.minima.size() < 3)
        throw std::domain_error("lomn_truncated_spot_vol: need at least three blocks");
    std::vector<double> scaled(bm.minima.size() - 1);
    for (std::size_t k = 1; k < bm.minima.size(); ++k)
        scaled[k - 1] = std::fabs(bm.minima[k] - bm.minima[k - 1]) / std::sqrt(bm.h_n);
    std::vector<double> a = scaled;
    const std::size_t mid = a.size() / 2;
    std::nth_element(a.begin(), a.begin() + mid, a.end());
    double med = a[mid];
    if (a.size() % 2 == 0) med = 0.5 * (med + *std::max_element(a.begin(), a.begin() + mid));
    const double robust = 1.4826 * med;
    const double u = spec.c_u * robust * std::pow(bm.h_n, spec.tau - 0.5);
    return detail::lomn_core(bm, tau, k_n, psi, u);
}

inline double lomn_clt_variance_constant() {
    return (7.0 * pi * pi / 4.0 - 2.0 * pi / 3.0 - 12.0) / ((pi - 2.0) * (pi - 2.0));
}

// ============================================================================
// Boundary-model (taxi) estimators
// ============================================================================

struct TaxiEstimates {
    double mm = 0.0;    // moment estimator 2 * mean
    double ml = 0.0;    // maximum likelihood: the maximum
    double umvu = 0.0;  // (n+1)/n * maximum
};

inline TaxiEstimates taxi_estimators(const std::vector<double>& sample) {
    if (sample.empty()) throw std::domain_error("taxi_estimators: empty sample");
    double mx = sample[0], mean = 0.0;
    for (double v : sample) {
        if (v < 0.0) throw std::domain_error("taxi_estimators: negative observation");
        mx = std::max(mx, v);
        mean += v;
    }
    mean /= static_cast<double>(sample.size());
    const auto n = static_cast<double>(sample.size());
    return {2.0 * mean, mx, (n + 1.0) / n * mx};
}

}  // namespace hfv
