// Roughness analysis of a volatility series: q-th moment statistics of
// log-volatility increments across lags, log-log regressions for the zeta_q
// curve, the Hurst estimate, and the autocorrelation diagnostic.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "hfv/common.hpp"

namespace hfv {

struct VolSeries {
    std::vector<double> values;  // sigma or sigma^2 per grid point
    double delta = 1.0;          // spacing between points
    bool squared = false;        // true when values hold sigma^2

    VolSeries() = default;
    VolSeries(std::vector<double> v, double d, bool sq = false)
        : values(std::move(v)), delta(d), squared(sq) {
        if (values.size() < 3) throw std::domain_error("VolSeries: need at least 3 points");
        if (!(delta > 0.0)) throw std::domain_error("VolSeries: spacing must be positive");
        for (double x : values)
            if (!(x > 0.0)) throw std::domain_error("VolSeries: nonpositive volatility value");
    }
};

// mean of |log v_k - log v_{k-l}|^q over k = l..n
inline double m_stat(const VolSeries& vs, double q, std::size_t l) {
    if (!(q > 0.0)) throw std::domain_error("m_stat: moment order must be positive");
    const std::size_t n = vs.values.size() - 1;
    if (l < 1 || l > n - 1) throw std::domain_error("m_stat: lag outside [1, n-1]");
    double acc = 0.0;
    for (std::size_t k = l; k <= n; ++k) {
        const double d = std::log(vs.values[k]) - std::log(vs.values[k - l]);
        acc += std::pow(std::fabs(d), q);
    }
    return acc / static_cast<double>(n - l + 1);
}

// OLS of log m(q, l delta) on log(l delta), l = 1..L; slope estimates q H
inline OlsFit zeta_fit(const VolSeries& vs, double q, std::size_t max_lag) {
    if (max_lag < 2) throw std::domain_error("zeta_fit: need at least two lags");
    std::vector<double> lx(max_lag), ly(max_lag);
    for (std::size_t l = 1; l <= max_lag; ++l) {
        const double m = m_stat(vs, q, l);
        if (!(m > 0.0)) throw std::domain_error("zeta_fit: zero moment, log undefined");
        lx[l - 1] = std::log(static_cast<double>(l) * vs.delta);
        ly[l - 1] = std::log(m);
    }
    return ols(lx, ly);
}

struct RoughnessFit {
    std::vector<double> q_grid;
    std::size_t max_lag = 0;
    std::vector<std::vector<double>> m_table;  // [q][l-1]
    std::vector<double> zeta;                  // slope per q
    std::vector<double> intercept;
    std::vector<double> r2;
    double h_hat = 0.0;           // zero-intercept fit of zeta on q
    double h_free = 0.0;          // free-intercept fit, diagnostic
    double h_free_intercept = 0.0;
    bool in_range = false;        // h_hat in (0,1)
};

inline RoughnessFit hurst_estimate(const VolSeries& vs,
                                   std::vector<double> q_grid = {0.5, 1.0, 1.5, 2.0, 3.0},
                                   std::size_t max_lag = 100) {
    if (q_grid.size() < 2) throw std::domain_error("hurst_estimate: need at least two q values");
    if (vs.values.size() < max_lag + 2)
        throw std::domain_error("hurst_estimate: series shorter than the lag grid");
    RoughnessFit fit;
    fit.q_grid = std::move(q_grid);
    fit.max_lag = max_lag;
    for (double q : fit.q_grid) {
        std::vector<double> row(max_lag);
        for (std::size_t l = 1; l <= max_lag; ++l) row[l - 1] = m_stat(vs, q, l);
        fit.m_table.push_back(std::move(row));
        const OlsFit f = zeta_fit(vs, q, max_lag);
        fit.zeta.push_back(f.slope);
        fit.intercept.push_back(f.intercept);
        fit.r2.push_back(f.r2);
    }
    fit.h_hat = ols_through_origin(fit.q_grid, fit.zeta);
    const OlsFit free = ols(fit.q_grid, fit.zeta);
    fit.h_free = free.slope;
    fit.h_free_intercept = free.intercept;
    fit.in_range = fit.h_hat > 0.0 && fit.h_hat < 1.0;
    return fit;
}

// sample autocorrelation of the log-increments, lags 0..max_lag
inline std::vector<double> acf(const VolSeries& vs, std::size_t max_lag) {
    const std::size_t n = vs.values.size() - 1;
    if (max_lag >= n) throw std::domain_error("acf: max lag too large");
    std::vector<double> d(n);
    for (std::size_t k = 0; k < n; ++k)
        d[k] = std::log(vs.values[k + 1]) - std::log(vs.values[k]);
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(n);
    double denom = 0.0;
    for (double v : d) denom += (v - mean) * (v - mean);
    if (!(denom > 0.0)) throw std::domain_error("acf: constant series");
    std::vector<double> out(max_lag + 1);
    for (std::size_t l = 0; l <= max_lag; ++l) {
        double s = 0.0;
        for (std::size_t k = l; k < n; ++k) s += (d[k] - mean) * (d[k - l] - mean);
        out[l] = s / denom;
    }
    return out;
}

}  // namespace hfv
