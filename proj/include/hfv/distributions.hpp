// Limit-law distribution functions used by the jump tests and estimators:
// Gumbel, exponential, Deheuvels (maximal gap of normal order statistics),
// half-normal moments, plus a tagged-family dispatch for quantile/CDF work.
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfv/common.hpp"

namespace hfv {

enum class Family {
    StdNormal,
    HalfNormal,
    Exponential,
    Gumbel,
    DeheuvelsTwoSided,
    DeheuvelsOneSided,
    Laplace,
    ParetoShifted,
    Uniform,
};

inline const char* family_name(Family f) {
    switch (f) {
        case Family::StdNormal: return "std_normal";
        case Family::HalfNormal: return "half_normal";
        case Family::Exponential: return "exponential";
        case Family::Gumbel: return "gumbel";
        case Family::DeheuvelsTwoSided: return "deheuvels_two_sided";
        case Family::DeheuvelsOneSided: return "deheuvels_one_sided";
        case Family::Laplace: return "laplace";
        case Family::ParetoShifted: return "pareto_shifted";
        case Family::Uniform: return "uniform";
    }
    return "unknown";
}

// Tagged distribution family with validated parameter slots.
//   HalfNormal(sigma), Exponential(rate), Laplace(scale),
//   ParetoShifted(shape, slope_at_zero), Uniform(lo, hi).
struct DistributionId {
    Family family;
    std::vector<double> params;

    DistributionId(Family f, std::vector<double> p = {}) : family(f), params(std::move(p)) {
        validate();
    }

    static DistributionId std_normal() { return {Family::StdNormal}; }
    static DistributionId half_normal(double sigma = 1.0) { return {Family::HalfNormal, {sigma}}; }
    static DistributionId exponential(double rate) { return {Family::Exponential, {rate}}; }
    static DistributionId gumbel() { return {Family::Gumbel}; }
    static DistributionId deheuvels(bool one_sided = false) {
        return {one_sided ? Family::DeheuvelsOneSided : Family::DeheuvelsTwoSided};
    }
    static DistributionId laplace(double scale) { return {Family::Laplace, {scale}}; }
    static DistributionId pareto_shifted(double shape, double slope_at_zero) {
        return {Family::ParetoShifted, {shape, slope_at_zero}};
    }
    static DistributionId uniform(double lo, double hi) { return {Family::Uniform, {lo, hi}}; }

  private:
    void validate() const {
        const auto need = [&](std::size_t k) {
            if (params.size() != k)
                throw std::domain_error(std::string(family_name(family)) +
                                        ": expected " + std::to_string(k) + " parameter(s)");
        };
        const auto positive = [&](std::size_t i, const char* what) {
            if (!(params[i] > 0.0) || !std::isfinite(params[i]))
                throw std::domain_error(std::string(family_name(family)) + ": " + what +
                                        " must be positive and finite");
        };
        switch (family) {
            case Family::StdNormal:
            case Family::Gumbel:
            case Family::DeheuvelsTwoSided:
            case Family::DeheuvelsOneSided:
                need(0);
                break;
            case Family::HalfNormal: need(1); positive(0, "sigma"); break;
            case Family::Exponential: need(1); positive(0, "rate"); break;
            case Family::Laplace: need(1); positive(0, "scale"); break;
            case Family::ParetoShifted:
                need(2); positive(0, "shape"); positive(1, "slope at zero");
                break;
            case Family::Uniform:
                need(2);
                if (!(params[0] < params[1]))
                    throw std::domain_error("uniform: need lo < hi");
                break;
        }
    }
};

struct QuantileRequest {
    DistributionId dist;
    double p;
    double tol = 1e-10;
};

// ============================================================================
// Gumbel
// ============================================================================

inline double gumbel_cdf(double x) {
    if (!std::isfinite(x)) throw std::domain_error("gumbel_cdf: non-finite argument");
    return std::exp(-std::exp(-x));
}

inline double gumbel_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("gumbel_quantile: p outside (0,1)");
    return -std::log(-std::log(p));
}

// ============================================================================
// Deheuvels distribution: prod_{j>=1} (1 - e^{-jx})^s, s = 2 (two-sided
// maximal gap) or 1 (single tail).
// ============================================================================

// Log of the one-sided product, truncated once the geometric tail bound
// drops below 1e-13 in CDF units.
inline double deheuvels_log_product(double x, std::size_t forced_terms = 0) {
    const double emx = std::exp(-x);
    double log_sum = 0.0;
    double ejx = emx;
    const double tail_scale = 2.0 / (1.0 - emx);
    for (std::size_t j = 1;; ++j) {
        log_sum += std::log1p(-ejx);
        const double next = ejx * emx;
        const bool converged = tail_scale * next < 1e-13;
        if (forced_terms > 0 ? j >= forced_terms : converged) break;
        if (log_sum < -800.0) return -std::numeric_limits<double>::infinity();
        if (j > 2'000'000) break;
        ejx = next;
    }
    return log_sum;
}

inline double deheuvels_cdf(double x, bool one_sided = false, std::size_t terms = 0) {
    if (std::isnan(x)) throw std::domain_error("deheuvels_cdf: NaN argument");
    if (x <= 0.0) return 0.0;
    const double ls = deheuvels_log_product(x, terms);
    const double s = one_sided ? 1.0 : 2.0;
    return std::exp(s * ls);
}

// 1 - e^{-x} - e^{-2x}: the short approximation to the ONE-SIDED product.
// (The two-sided product is instead ~ 1 - 2 e^{-x} to leading order.)
inline double deheuvels_cdf_approx(double x) {
    if (!(x > 0.0)) throw std::domain_error("deheuvels_cdf_approx: x must be positive");
    const double v = 1.0 - std::exp(-x) - std::exp(-2.0 * x);
    return std::min(1.0, std::max(0.0, v));
}

inline double deheuvels_quantile(double p, bool one_sided = false, double tol = 1e-10) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("deheuvels_quantile: p outside (0,1)");
    double lo = 1e-8, hi = 60.0;
    if (deheuvels_cdf(lo, one_sided) > p || deheuvels_cdf(hi, one_sided) < p)
        throw std::runtime_error("deheuvels_quantile: bracketing failed");
    for (int it = 0; it < 200 && hi - lo > tol * 1e-3; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (deheuvels_cdf(mid, one_sided) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Central difference of the CDF with one Richardson step; the product has no
// tractable closed-form derivative.
inline double deheuvels_density(double x, bool one_sided = false) {
    if (!(x > 0.0)) throw std::domain_error("deheuvels_density: x must be positive");
    const double h = std::max(1e-4, 1e-4 * x);
    const auto diff = [&](double step) {
        const double up = deheuvels_cdf(x + step, one_sided);
        const double dn = (x - step > 0.0) ? deheuvels_cdf(x - step, one_sided) : 0.0;
        return (up - dn) / (2.0 * step);
    };
    const double d = (4.0 * diff(0.5 * h) - diff(h)) / 3.0;
    return std::max(0.0, d);
}

// ============================================================================
// Half-normal moments and family dispatch
// ============================================================================

inline std::pair<double, double> halfnormal_moments() {
    return {std::sqrt(2.0 / pi), 1.0 - 2.0 / pi};
}

inline double cdf(const DistributionId& dist, double x) {
    switch (dist.family) {
        case Family::StdNormal:
            return normal_cdf(x);
        case Family::HalfNormal:
            return (x <= 0.0) ? 0.0 : std::erf(x / (dist.params[0] * std::numbers::sqrt2));
        case Family::Exponential:
            return (x <= 0.0) ? 0.0 : -std::expm1(-dist.params[0] * x);
        case Family::Gumbel:
            return gumbel_cdf(x);
        case Family::DeheuvelsTwoSided:
            return deheuvels_cdf(x, false);
        case Family::DeheuvelsOneSided:
            return deheuvels_cdf(x, true);
        case Family::Laplace: {
            const double b = dist.params[0];
            return (x < 0.0) ? 0.5 * std::exp(x / b) : 1.0 - 0.5 * std::exp(-x / b);
        }
        case Family::ParetoShifted: {
            const double a = dist.params[0], eta = dist.params[1];
            return (x <= 0.0) ? 0.0 : 1.0 - std::pow(1.0 + eta * x / a, -a);
        }
        case Family::Uniform: {
            const double lo = dist.params[0], hi = dist.params[1];
            if (x <= lo) return 0.0;
            if (x >= hi) return 1.0;
            return (x - lo) / (hi - lo);
        }
    }
    throw std::domain_error("cdf: unsupported family");
}

inline double quantile(const QuantileRequest& req) {
    const double p = req.p;
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile: p outside (0,1)");
    const auto& d = req.dist;
    switch (d.family) {
        case Family::StdNormal:
            return normal_quantile(p);
        case Family::HalfNormal:
            return d.params[0] * normal_quantile(0.5 * (1.0 + p));
        case Family::Exponential:
            return -std::log1p(-p) / d.params[0];
        case Family::Gumbel:
            return gumbel_quantile(p);
        case Family::DeheuvelsTwoSided:
            return deheuvels_quantile(p, false, req.tol);
        case Family::DeheuvelsOneSided:
            return deheuvels_quantile(p, true, req.tol);
        case Family::Laplace: {
            const double b = d.params[0];
            return (p < 0.5) ? b * std::log(2.0 * p) : -b * std::log(2.0 * (1.0 - p));
        }
        case Family::ParetoShifted: {
            const double a = d.params[0], eta = d.params[1];
            return a * (std::pow(1.0 - p, -1.0 / a) - 1.0) / eta;
        }
        case Family::Uniform:
            return d.params[0] + (d.params[1] - d.params[0]) * p;
    }
    throw std::domain_error("quantile: unsupported family");
}

inline double quantile(const DistributionId& dist, double p) {
    return quantile(QuantileRequest{dist, p});
}

}  // namespace hfv
