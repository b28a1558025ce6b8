// Monte Carlo harness: deterministic parallel replication engine, limit-law
// fit studies for the three jump statistics, size/power tables, the
// reflection-principle and mixed half-normal checks, and the boundary-model
// sanity study. Aggregation is in replication-index order so results do not
// depend on the worker count.
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hfv/distributions.hpp"
#include "hfv/jump_tests.hpp"
#include "hfv/rng.hpp"
#include "hfv/simulate.hpp"
#include "hfv/volatility.hpp"

namespace hfv {

// ============================================================================
// Parallel replication engine
// ============================================================================

inline std::size_t& mc_worker_override() {
    static std::size_t v = 0;  // 0 = use hardware concurrency
    return v;
}

inline void set_mc_workers(std::size_t k) { mc_worker_override() = k; }

inline std::size_t mc_workers() {
    if (mc_worker_override() > 0) return mc_worker_override();
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? hc : 1;
}

// Runs f(rep) for rep = 0..reps-1 on a worker pool, storing each result in
// its replication slot; the returned vector is index-ordered regardless of
// scheduling.
template <class T, class F>
std::vector<T> parallel_reps(std::size_t reps, F&& f) {
    if (reps == 0) throw std::domain_error("parallel_reps: need at least one replication");
    std::vector<T> out(reps);
    const std::size_t nw = std::min<std::size_t>(mc_workers(), reps);
    if (nw <= 1) {
        for (std::size_t r = 0; r < reps; ++r) out[r] = f(r);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    pool.reserve(nw);
    for (std::size_t w = 0; w < nw; ++w) {
        pool.emplace_back([&]() {
            try {
                for (;;) {
                    const std::size_t r = next.fetch_add(1);
                    if (r >= reps) break;
                    out[r] = f(r);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

// ============================================================================
// Summary types
// ============================================================================

struct HistSpec {
    double lo = -4.0;
    double hi = 10.0;
    std::size_t bins = 70;
};

enum class StatKind { GumbelCentered, ExpGapR1, RenyiMaxgap };

inline const char* stat_kind_name(StatKind k) {
    switch (k) {
        case StatKind::GumbelCentered: return "gumbel_centered";
        case StatKind::ExpGapR1: return "exp_gap_r1";
        case StatKind::RenyiMaxgap: return "renyi_maxgap";
    }
    return "?";
}

inline StatKind stat_kind_from(const std::string& s) {
    if (s == "gumbel_centered") return StatKind::GumbelCentered;
    if (s == "exp_gap_r1") return StatKind::ExpGapR1;
    if (s == "renyi_maxgap") return StatKind::RenyiMaxgap;
    throw std::domain_error("unknown statistic selector: " + s);
}

struct ExperimentSpec {
    std::string experiment_id = "study";
    std::size_t n = 3600;
    std::size_t replications = 100000;
    SeedSpec seed;
    double alpha = 0.05;
    StatKind statistic = StatKind::GumbelCentered;
    std::vector<double> percentiles = {0.90, 0.91, 0.92, 0.93, 0.94,
                                       0.95, 0.96, 0.97, 0.98, 0.99};
    HistSpec hist;
};

struct MomentEstimate {
    std::string label;
    double value = 0.0;
    double std_error = 0.0;
    double theory = 0.0;  // 0 when no reference applies
};

struct McSummary {
    std::string experiment_id;
    std::size_t replications = 0;
    std::vector<double> percentile_grid;
    std::vector<double> empirical;
    std::vector<double> theoretical;
    std::vector<double> bin_edges;
    std::vector<std::size_t> counts;
    std::vector<MomentEstimate> moments;
    double wall_seconds = 0.0;
    std::string seed_lineage;
};

// everything but the timing field, which varies run to run
inline bool same_results(const McSummary& a, const McSummary& b) {
    auto same_moments = [](const std::vector<MomentEstimate>& x,
                           const std::vector<MomentEstimate>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i].label != y[i].label || x[i].value != y[i].value ||
                x[i].std_error != y[i].std_error || x[i].theory != y[i].theory)
                return false;
        return true;
    };
    return a.experiment_id == b.experiment_id && a.replications == b.replications &&
           a.percentile_grid == b.percentile_grid && a.empirical == b.empirical &&
           a.theoretical == b.theoretical && a.bin_edges == b.bin_edges &&
           a.counts == b.counts && same_moments(a.moments, b.moments) &&
           a.seed_lineage == b.seed_lineage;
}

namespace detail {

inline std::string lineage_string(const SeedSpec& seed) {
    std::ostringstream os;
    os << "master=" << seed.master_seed << " path=[";
    for (std::size_t i = 0; i < seed.stream_path.size(); ++i) {
        if (i) os << ",";
        os << seed.stream_path[i];
    }
    os << "]";
    return os.str();
}

inline void fill_histogram(McSummary& s, const std::vector<double>& v, const HistSpec& h) {
    if (h.bins < 1 || !(h.hi > h.lo)) throw std::domain_error("histogram: bad bin spec");
    s.bin_edges.resize(h.bins + 1);
    for (std::size_t i = 0; i <= h.bins; ++i)
        s.bin_edges[i] = h.lo + (h.hi - h.lo) * static_cast<double>(i) /
                                    static_cast<double>(h.bins);
    s.counts.assign(h.bins, 0);
    const double w = (h.hi - h.lo) / static_cast<double>(h.bins);
    for (double x : v) {
        auto idx = static_cast<std::ptrdiff_t>(std::floor((x - h.lo) / w));
        idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(h.bins) - 1);
        s.counts[static_cast<std::size_t>(idx)] += 1;  // edge bins absorb out-of-range
    }
}

inline MomentEstimate mean_with_se(const std::string& label, const std::vector<double>& v,
                                   double theory = 0.0) {
    const double m = sample_mean(v);
    const double var = v.size() > 1 ? sample_variance(v) : 0.0;
    return {label, m, std::sqrt(var / static_cast<double>(v.size())), theory};
}

}  // namespace detail

// ============================================================================
// Limit-law fit study for the three statistics
// ============================================================================

inline McSummary run_statistic_study(const ExperimentSpec& spec) {
    const auto t0 = std::chrono::steady_clock::now();
    if (spec.replications < 1) throw std::domain_error("run_statistic_study: R must be >= 1");
    const std::size_t n = spec.n;
    for (std::size_t i = 1; i < spec.percentiles.size(); ++i)
        if (!(spec.percentiles[i] > spec.percentiles[i - 1]))
            throw std::domain_error("run_statistic_study: percentiles not increasing");
    const StatKind kind = spec.statistic;
    std::vector<double> stats = parallel_reps<double>(spec.replications, [&](std::size_t r) {
        Rng rng(spec.seed.child(static_cast<std::uint32_t>(r)));
        std::vector<double> x(n);
        for (auto& v : x) v = rng.normal();
        switch (kind) {
            case StatKind::GumbelCentered: return stat_gumbel_centered(x);
            case StatKind::ExpGapR1: return stat_exp_gap_r1(x);
            case StatKind::RenyiMaxgap: return stat_renyi_maxgap(x);
        }
        return 0.0;
    });
    McSummary s;
    s.experiment_id = spec.experiment_id;
    s.replications = spec.replications;
    s.percentile_grid = spec.percentiles;
    s.seed_lineage = detail::lineage_string(spec.seed);
    for (double p : spec.percentiles) {
        s.empirical.push_back(percentile(stats, p));
        switch (kind) {
            case StatKind::GumbelCentered:
                s.theoretical.push_back(gumbel_quantile(p));
                break;
            case StatKind::ExpGapR1:
                s.theoretical.push_back(quantile(DistributionId::exponential(1.0), p));
                break;
            case StatKind::RenyiMaxgap:
                s.theoretical.push_back(deheuvels_quantile(p, /*one_sided=*/false));
                break;
        }
    }
    detail::fill_histogram(s, stats, spec.hist);
    double theory_mean = 0.0;
    if (kind == StatKind::ExpGapR1) theory_mean = 1.0;
    if (kind == StatKind::GumbelCentered) theory_mean = 0.5772156649015329;  // Euler gamma
    s.moments.push_back(detail::mean_with_se("mean", stats, theory_mean));
    const double var = stats.size() > 1 ? sample_variance(stats) : 0.0;
    s.moments.push_back({"variance", var, 0.0, 0.0});
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
}

// ============================================================================
// Size / power tables for the increment tests
// ============================================================================

enum class IncrementTest { Gumbel, Renyi, ExpGapR1 };

inline const char* increment_test_name(IncrementTest t) {
    switch (t) {
        case IncrementTest::Gumbel: return "gumbel";
        case IncrementTest::Renyi: return "renyi";
        case IncrementTest::ExpGapR1: return "exp_gap_r1";
    }
    return "?";
}

struct PowerRow {
    double jump_size = 0.0;
    std::size_t rejections = 0;
    std::size_t reps = 0;
    double rate = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
};

inline void wilson_interval(PowerRow& row, double z = 1.959963984540054) {
    const auto nn = static_cast<double>(row.reps);
    const double p = row.rate;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    row.wilson_lo = std::max(0.0, center - half);
    row.wilson_hi = std::min(1.0, center + half);
}

// One replication of the σ=1 Brownian pipeline with a single injected jump of
// the given size at a uniform time; the same seed reproduces path and jump
// position across jump sizes, coupling the power curve.
inline bool pipeline_reject(std::size_t n, double jump, double alpha, IncrementTest test,
                            const SeedSpec& rep_seed) {
    Rng pos_rng(rep_seed.child(1));
    const double tj = 0.05 + 0.9 * pos_rng.u01();  // keep clear of the edges
    PathSample path = simulate_bm(GridSpec{n, 1.0}, 1.0, rep_seed.child(0));
    if (jump != 0.0) {
        JumpSpec js;
        js.fixed_jumps = std::vector<std::pair<double, double>>{{tj, jump}};
        path = add_jumps(path, js, rep_seed.child(2));
    }
    const ObservationSeries obs = observe(path, NoiseSpec::none(), rep_seed.child(3));
    const NormalizedIncrements ni = normalize_increments(obs);
    switch (test) {
        case IncrementTest::Gumbel: return gumbel_test(ni, alpha).reject;
        case IncrementTest::Renyi: return renyi_test(ni, alpha).reject;
        case IncrementTest::ExpGapR1:
            return exp_gap_test(ni, alpha, 1, GapTail::Both).reject;
    }
    return false;
}

inline std::vector<PowerRow> run_size_power(const ExperimentSpec& spec, IncrementTest test,
                                            std::vector<double> jump_grid) {
    if (jump_grid.empty() || jump_grid.front() != 0.0)
        jump_grid.insert(jump_grid.begin(), 0.0);  // size row first
    std::vector<PowerRow> table;
    for (double b : jump_grid) {
        std::vector<char> rej = parallel_reps<char>(spec.replications, [&](std::size_t r) {
            return static_cast<char>(pipeline_reject(
                spec.n, b, spec.alpha, test, spec.seed.child(static_cast<std::uint32_t>(r))));
        });
        PowerRow row;
        row.jump_size = b;
        row.reps = spec.replications;
        for (char c : rej) row.rejections += static_cast<std::size_t>(c);
        row.rate = static_cast<double>(row.rejections) / static_cast<double>(row.reps);
        wilson_interval(row);
        table.push_back(row);
    }
    return table;
}

// ============================================================================
// Reflection-principle check (discretized Brownian minima)
// ============================================================================

// P(min B <= x) against 2 Phi(x), and P(min B <= x, B_1 <= y) against
// 2 Phi(x) - Phi(2x - y). Discrete minima over n steps are biased upward by
// O(n^{-1/2}); tolerances on the caller's side must allow for it.
inline McSummary check_reflection(std::size_t reps, const std::vector<double>& xs,
                                  const std::vector<std::pair<double, double>>& joint,
                                  const SeedSpec& seed, std::size_t n_steps = 10000) {
    const auto t0 = std::chrono::steady_clock::now();
    for (double x : xs)
        if (!(x < 0.0)) throw std::domain_error("check_reflection: x must be negative");
    for (auto [x, y] : joint)
        if (!(x < 0.0) || x > y) throw std::domain_error("check_reflection: need x < 0, x <= y");
    struct Row { double mn, b1; };
    std::vector<Row> rows = parallel_reps<Row>(reps, [&](std::size_t r) {
        Rng rng(seed.child(static_cast<std::uint32_t>(r)));
        const double sdt = std::sqrt(1.0 / static_cast<double>(n_steps));
        double w = 0.0, mn = 0.0;
        for (std::size_t i = 0; i < n_steps; ++i) {
            w += sdt * rng.normal();
            mn = std::min(mn, w);
        }
        return Row{mn, w};
    });
    McSummary s;
    s.experiment_id = "reflection";
    s.replications = reps;
    s.seed_lineage = detail::lineage_string(seed);
    for (double x : xs) {
        std::size_t hit = 0;
        for (const Row& r : rows) hit += (r.mn <= x) ? 1 : 0;
        const double p = static_cast<double>(hit) / static_cast<double>(reps);
        MomentEstimate m;
        m.label = "P(min<=x) x=" + std::to_string(x);
        m.value = p;
        m.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
        m.theory = 2.0 * normal_cdf(x);
        s.moments.push_back(m);
    }
    for (auto [x, y] : joint) {
        std::size_t hit = 0;
        for (const Row& r : rows) hit += (r.mn <= x && r.b1 <= y) ? 1 : 0;
        const double p = static_cast<double>(hit) / static_cast<double>(reps);
        MomentEstimate m;
        m.label = "P(min<=x,B1<=y) x=" + std::to_string(x) + " y=" + std::to_string(y);
        m.value = p;
        m.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
        m.theory = 2.0 * normal_cdf(x) - normal_cdf(2.0 * x - y);
        s.moments.push_back(m);
    }
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
}

// ============================================================================
// Mixed half-normal check for scaled block-minima errors
// ============================================================================

inline McSummary check_mixed_halfnormal(std::size_t reps, std::size_t n, double h_n,
                                        double sigma, const NoiseSpec& noise,
                                        const SeedSpec& seed) {
    const auto t0 = std::chrono::steady_clock::now();
    if (static_cast<double>(n) * std::pow(h_n, 1.5) < 50.0)
        throw std::domain_error("check_mixed_halfnormal: n h^{3/2} below 50");
    const auto hinv = static_cast<std::size_t>(std::llround(1.0 / h_n));
    std::vector<std::vector<double>> per_rep =
        parallel_reps<std::vector<double>>(reps, [&](std::size_t r) {
            const SeedSpec rs = seed.child(static_cast<std::uint32_t>(r));
            PathSample path = simulate_bm(GridSpec{n, 1.0}, sigma, rs.child(0));
            const ObservationSeries obs = observe(path, noise, rs.child(1));
            const BlockMinima bm = block_minima(obs, h_n);
            std::vector<double> err(bm.minima.size());
            for (std::size_t k = 0; k < bm.minima.size(); ++k) {
                const double x_start = path.x[k * bm.nh];
                err[k] = -(bm.minima[k] - x_start) / std::sqrt(h_n);
            }
            return err;
        });
    std::vector<double> pooled;
    pooled.reserve(reps * hinv);
    for (const auto& v : per_rep) pooled.insert(pooled.end(), v.begin(), v.end());
    const auto [hn_mean, hn_var] = halfnormal_moments();
    McSummary s;
    s.experiment_id = "mixed_halfnormal";
    s.replications = reps;
    s.seed_lineage = detail::lineage_string(seed);
    s.moments.push_back(detail::mean_with_se("mean", pooled, sigma * hn_mean));
    const MomentSummary ms = moments(pooled);
    s.moments.push_back({"variance", ms.variance, 0.0, sigma * sigma * hn_var});
    s.moments.push_back({"variance/mean^2", ms.variance / (ms.mean * ms.mean), 0.0,
                         hn_var / (hn_mean * hn_mean)});
    detail::fill_histogram(s, pooled, HistSpec{0.0, 4.0 * sigma, 60});
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
}

// ============================================================================
// Boundary-model sanity study
// ============================================================================

inline McSummary run_taxi(std::size_t reps, double theta, std::size_t n, const SeedSpec& seed) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!(theta > 0.0)) throw std::domain_error("run_taxi: theta must be positive");
    if (n < 1) throw std::domain_error("run_taxi: need at least one observation");
    struct Row { double mm, ml, umvu; };
    std::vector<Row> rows = parallel_reps<Row>(reps, [&](std::size_t r) {
        Rng rng(seed.child(static_cast<std::uint32_t>(r)));
        std::vector<double> x(n);
        for (auto& v : x) v = theta * rng.u01();
        const TaxiEstimates e = taxi_estimators(x);
        return Row{e.mm, e.ml, e.umvu};
    });
    std::vector<double> err_mm(reps), err_ml(reps), err_umvu(reps), scaled_ml(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        err_mm[r] = rows[r].mm - theta;
        err_ml[r] = rows[r].ml - theta;
        err_umvu[r] = rows[r].umvu - theta;
        scaled_ml[r] = static_cast<double>(n) * (theta - rows[r].ml);
    }
    auto mse = [&](const std::vector<double>& e) {
        double s2 = 0.0;
        for (double v : e) s2 += v * v;
        return s2 / static_cast<double>(e.size());
    };
    McSummary s;
    s.experiment_id = "taxi";
    s.replications = reps;
    s.seed_lineage = detail::lineage_string(seed);
    s.moments.push_back(detail::mean_with_se("bias_mm", err_mm, 0.0));
    s.moments.push_back(detail::mean_with_se("bias_ml", err_ml, 0.0));
    s.moments.push_back(detail::mean_with_se("bias_umvu", err_umvu, 0.0));
    const auto nn = static_cast<double>(n);
    s.moments.push_back({"mse_mm", mse(err_mm), 0.0, theta * theta / (3.0 * nn)});
    s.moments.push_back(
        {"mse_ml", mse(err_ml), 0.0, 2.0 * theta * theta / ((nn + 1.0) * (nn + 2.0))});
    s.moments.push_back({"mse_umvu", mse(err_umvu), 0.0,
                         theta * theta / (nn * (nn + 2.0))});
    const DistributionId lim = DistributionId::exponential(1.0 / theta);
    s.percentile_grid = {0.5, 0.9, 0.95};
    for (double p : s.percentile_grid) {
        s.empirical.push_back(percentile(scaled_ml, p));
        s.theoretical.push_back(quantile(lim, p));
    }
    detail::fill_histogram(s, scaled_ml, HistSpec{0.0, 6.0 * theta, 60});
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
}

// ============================================================================
// Fixtures shared by studies, demos and the acceptance harness
// ============================================================================

// five jumps, mixed signs, all of absolute size >= 0.1, away from the edges
inline std::vector<std::pair<double, double>> five_jump_fixture() {
    return {{0.15, 0.12}, {0.35, -0.15}, {0.55, 0.20}, {0.70, -0.11}, {0.90, 0.10}};
}

}  // namespace hfv
