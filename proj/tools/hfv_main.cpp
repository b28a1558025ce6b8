// Command-line front end: simulate | estimate | test | rough | mc.
// A flat key=value config file supplies model and study parameters; flags
// given on the command line override the file.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hfv/io.hpp"
#include "hfv/mc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string out_path(const hfv::RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out);
    return (fs::path(cfg.out) / name).string();
}

hfv::NoiseSpec noise_from_config(const hfv::RunConfig& cfg) {
    const std::string kind = hfv::extra_or(cfg, "noise", std::string("none"));
    if (kind == "none") return hfv::NoiseSpec::none();
    const double rate = hfv::extra_or(cfg, "noise_rate", 10.0);
    const std::string side_s = hfv::extra_or(cfg, "noise_side", std::string("lower"));
    const hfv::NoiseSide side =
        side_s == "upper" ? hfv::NoiseSide::Upper : hfv::NoiseSide::Lower;
    if (kind == "exp")
        return hfv::NoiseSpec::lomn(hfv::DistributionId::exponential(rate), side);
    if (kind == "uniform")
        return hfv::NoiseSpec::lomn(hfv::DistributionId::uniform(0.0, 1.0 / rate), side);
    if (kind == "pareto")
        return hfv::NoiseSpec::lomn(hfv::DistributionId::pareto_shifted(3.0, rate), side);
    throw std::runtime_error("unknown noise kind: " + kind);
}

std::vector<std::pair<double, double>> jumps_from_config(const hfv::RunConfig& cfg) {
    // jumps=t1:s1;t2:s2;...
    std::vector<std::pair<double, double>> out;
    const std::string spec = hfv::extra_or(cfg, "jumps", std::string());
    std::size_t pos = 0;
    while (pos < spec.size()) {
        auto semi = spec.find(';', pos);
        if (semi == std::string::npos) semi = spec.size();
        const std::string item = spec.substr(pos, semi - pos);
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw std::runtime_error("bad jumps entry (want time:size): " + item);
        out.emplace_back(std::strtod(item.substr(0, colon).c_str(), nullptr),
                         std::strtod(item.substr(colon + 1).c_str(), nullptr));
        pos = semi + 1;
    }
    return out;
}

int cmd_simulate(const hfv::RunConfig& cfg) {
    const std::string model = hfv::extra_or(cfg, "model", std::string("bm"));
    const hfv::SeedSpec seed{cfg.master_seed, {}};
    const double horizon = hfv::extra_or(cfg, "horizon", 1.0);
    const hfv::GridSpec grid{cfg.n, horizon};

    if (model == "fbm_logvol") {
        const double h = hfv::extra_or(cfg, "hurst", 0.16);
        const double nu = hfv::extra_or(cfg, "nu", 0.3);
        const double base = hfv::extra_or(cfg, "base_vol", 1.0);
        const std::vector<double> vol =
            hfv::simulate_fractional_logvol(cfg.n, h, nu, base, seed);
        std::ofstream f(out_path(cfg, "vol.csv"));
        f << "index,vol\n";
        for (std::size_t i = 0; i < vol.size(); ++i)
            f << i << "," << hfv::format_g17(vol[i]) << "\n";
        json rep = {{"config", hfv::config_json(cfg)}, {"model", model}, {"rows", vol.size()}};
        hfv::write_json_file(out_path(cfg, "report.json"), rep);
        std::cout << "wrote " << vol.size() << " volatility values\n";
        return 0;
    }

    hfv::PathSample path = [&]() {
        if (model == "bm")
            return hfv::simulate_bm(grid, hfv::extra_or(cfg, "sigma", 1.0), seed.child(0));
        if (model == "heston" || model == "heston_jumps") {
            hfv::HestonParams hp;
            hp.kappa = hfv::extra_or(cfg, "kappa", hp.kappa);
            hp.theta = hfv::extra_or(cfg, "theta", hp.theta);
            hp.xi = hfv::extra_or(cfg, "xi", hp.xi);
            hp.rho = hfv::extra_or(cfg, "rho", hp.rho);
            hp.v0 = hfv::extra_or(cfg, "v0", hp.v0);
            hp.mu = hfv::extra_or(cfg, "mu", hp.mu);
            return hfv::simulate_heston(grid, hp, seed.child(0));
        }
        throw std::runtime_error("unknown model: " + model);
    }();

    const auto fixed = jumps_from_config(cfg);
    const double intensity = hfv::extra_or(cfg, "jump_intensity", 0.0);
    if (!fixed.empty() || intensity > 0.0 || model == "heston_jumps") {
        hfv::JumpSpec js;
        js.intensity = intensity;
        js.size_dist = hfv::DistributionId::laplace(hfv::extra_or(cfg, "jump_scale", 0.05));
        if (!fixed.empty()) js.fixed_jumps = fixed;
        else if (model == "heston_jumps" && intensity == 0.0) js.intensity = 5.0;
        path = hfv::add_jumps(path, js, seed.child(1));
    }

    const hfv::ObservationSeries obs = hfv::observe(path, noise_from_config(cfg), seed.child(2));
    hfv::write_observations_csv(out_path(cfg, "obs.csv"), obs);
    hfv::write_latent_csv(out_path(cfg, "latent.csv"), path);
    hfv::write_ledger_json(out_path(cfg, "ledger.json"), path);
    json rep = {{"config", hfv::config_json(cfg)},
                {"model", path.model_tag},
                {"rows", obs.y.size()},
                {"integrated_variance", hfv::integrated_variance(path)},
                {"jump_count", path.jumps.size()}};
    hfv::write_json_file(out_path(cfg, "report.json"), rep);
    std::cout << "jump ledger: " << path.jumps.size() << " entries\n";
    for (const auto& [t, s] : path.jumps)
        std::cout << "  t=" << hfv::format_g17(t) << " size=" << hfv::format_g17(s) << "\n";
    return 0;
}

int cmd_estimate(const hfv::RunConfig& cfg) {
    if (cfg.input.empty()) throw std::runtime_error("estimate: --input required");
    const hfv::ObservationSeries obs = hfv::read_series_csv(cfg.input);
    hfv::require_equidistant(obs);
    const hfv::TruncationSpec trunc{hfv::extra_or(cfg, "trunc_tau", 0.49),
                                    hfv::extra_or(cfg, "trunc_cu", 4.0)};
    json rep;
    rep["config"] = hfv::config_json(cfg);
    rep["n"] = obs.y.size() - 1;
    rep["rv"] = hfv::realized_volatility(obs);
    rep["trv"] = hfv::truncated_rv(obs, trunc);

    const double s = hfv::extra_or(cfg, "spot_time", 0.5);
    const double sa = hfv::extra_or(cfg, "spot_alpha", 0.5);
    rep["spot"] = hfv::to_json(hfv::spot_vol(obs, s * obs.times.back(), sa));
    rep["spot_truncated"] =
        hfv::to_json(hfv::truncated_spot_vol(obs, s * obs.times.back(), sa, trunc));

    const std::string noise_kind = hfv::extra_or(cfg, "noise", std::string("none"));
    if (noise_kind != "none") {
        const std::size_t n = obs.y.size() - 1;
        const double h_def = hfv::choose_hn(n, hfv::HnMode::Balanced);
        const double h = 1.0 / hfv::extra_or(cfg, "h_inv", 1.0 / h_def);
        const hfv::BlockMinima bm = hfv::block_minima(obs, h);
        const double tau = hfv::extra_or(cfg, "tau", 1.0);
        const auto k_avail = static_cast<std::size_t>(
            std::floor(static_cast<double>(bm.minima.size()) * tau)) - 1;
        auto k_n = static_cast<std::size_t>(
            hfv::extra_or(cfg, "k_n", std::max(10.0, hfv::lomn_kn_default(h))));
        k_n = std::clamp<std::size_t>(k_n, 2, std::max<std::size_t>(k_avail, 2));
        // pilot from the raw scaled sum to center the correction grid
        double raw_guess = 0.0;
        for (std::size_t k = 1; k < bm.minima.size(); ++k) {
            const double d = bm.minima[k] - bm.minima[k - 1];
            raw_guess += d * d / h;
        }
        raw_guess *= hfv::pi / (2.0 * (hfv::pi - 2.0) * static_cast<double>(bm.minima.size() - 1));
        const hfv::NoiseSpec noise = noise_from_config(cfg);
        const hfv::PsiTable psi = hfv::build_psi_table(
            n, h, noise, 20000, hfv::SeedSpec{cfg.master_seed, {999}}, raw_guess / 4.0,
            4.0 * raw_guess);
        rep["lomn"] = hfv::to_json(hfv::lomn_spot_vol(bm, tau, k_n, psi));
        rep["lomn_truncated"] =
            hfv::to_json(hfv::lomn_truncated_spot_vol(bm, tau, k_n, psi, trunc));
        rep["blocks"] = bm.minima.size();
        rep["k_n"] = k_n;
    }

    // spot curve for plotting
    {
        std::ofstream f(out_path(cfg, "spot_curve.csv"));
        f << "s,spot,spot_truncated\n";
        const double T = obs.times.back();
        for (int i = 1; i < 100; ++i) {
            const double si = T * static_cast<double>(i) / 100.0;
            f << hfv::format_g17(si) << ","
              << hfv::format_g17(hfv::spot_vol(obs, si, sa).value) << ","
              << hfv::format_g17(hfv::truncated_spot_vol(obs, si, sa, trunc).value) << "\n";
        }
    }
    hfv::write_json_file(out_path(cfg, "estimate.json"), rep);
    std::cout << "rv=" << hfv::format_g17(rep["rv"].get<double>())
              << " trv=" << hfv::format_g17(rep["trv"].get<double>()) << "\n";
    return 0;
}

int cmd_test(const hfv::RunConfig& cfg) {
    if (cfg.input.empty()) throw std::runtime_error("test: --input required");
    const hfv::ObservationSeries obs = hfv::read_series_csv(cfg.input);
    hfv::require_equidistant(obs);
    const hfv::NormalizedIncrements ni = hfv::normalize_increments(obs);
    const auto r = static_cast<unsigned>(hfv::extra_or(cfg, "gap_order", 1.0));
    const std::string tail_s = hfv::extra_or(cfg, "gap_tail", std::string("both"));
    const hfv::GapTail tail = tail_s == "upper"   ? hfv::GapTail::Upper
                              : tail_s == "lower" ? hfv::GapTail::Lower
                                                  : hfv::GapTail::Both;
    const hfv::TestReport g = hfv::gumbel_test(ni, cfg.alpha);
    const hfv::TestReport e = hfv::exp_gap_test(ni, cfg.alpha, r, tail);
    const hfv::TestReport re = hfv::renyi_test(ni, cfg.alpha);
    const auto detections = hfv::sequential_detect(ni, cfg.alpha, hfv::SequentialBase::Renyi);

    json rep;
    rep["config"] = hfv::config_json(cfg);
    rep["reports"] = {hfv::to_json(g), hfv::to_json(e), hfv::to_json(re)};
    rep["sequential"] = json::array();
    for (const auto& d : detections)
        rep["sequential"].push_back({{"index", d.index}, {"time", d.time}, {"size", d.size}});
    const std::string path = out_path(cfg, "test.json");
    hfv::write_json_file(path, rep);
    for (const hfv::TestReport* t : {&g, &e, &re})
        std::cout << t->test_id << ": " << (t->reject ? "reject" : "accept")
                  << " stat=" << hfv::format_g17(t->statistic)
                  << " crit=" << hfv::format_g17(t->critical_value)
                  << " p=" << hfv::format_g17(t->p_value) << "\n";
    std::cout << "sequential detections: " << detections.size() << " (report: " << path
              << ")\n";
    const bool any_reject = g.reject || e.reject || re.reject;
    return (any_reject && cfg.exit_on_reject) ? 2 : 0;
}

int cmd_rough(const hfv::RunConfig& cfg) {
    if (cfg.input.empty()) throw std::runtime_error("rough: --input required");
    const hfv::VolSeries vs = hfv::read_vol_csv(cfg.input);
    const auto max_lag = static_cast<std::size_t>(hfv::extra_or(cfg, "max_lag", 100.0));
    const hfv::RoughnessFit fit = hfv::hurst_estimate(vs, {0.5, 1.0, 1.5, 2.0, 3.0}, max_lag);
    json rep = {{"config", hfv::config_json(cfg)}, {"fit", hfv::to_json(fit)}};
    hfv::write_json_file(out_path(cfg, "rough.json"), rep);
    hfv::write_m_table_csv(out_path(cfg, "m_table.csv"), fit);
    {
        std::ofstream f(out_path(cfg, "zeta.csv"));
        f << "q,zeta,intercept,r2\n";
        for (std::size_t i = 0; i < fit.q_grid.size(); ++i)
            f << hfv::format_g17(fit.q_grid[i]) << "," << hfv::format_g17(fit.zeta[i]) << ","
              << hfv::format_g17(fit.intercept[i]) << "," << hfv::format_g17(fit.r2[i])
              << "\n";
    }
    std::cout << "H=" << hfv::format_g17(fit.h_hat)
              << (fit.in_range ? "" : " (outside (0,1))") << "\n";
    return 0;
}

int cmd_mc(const hfv::RunConfig& cfg) {
    const std::string study = hfv::extra_or(cfg, "study", std::string("statistic"));
    const hfv::SeedSpec seed{cfg.master_seed, {}};
    hfv::McSummary sum;
    if (study == "statistic") {
        hfv::ExperimentSpec spec;
        spec.experiment_id = hfv::extra_or(cfg, "statistic", std::string("gumbel_centered"));
        spec.statistic = hfv::stat_kind_from(spec.experiment_id);
        spec.n = cfg.n;
        spec.replications = cfg.full ? 1000000 : cfg.reps;
        spec.seed = seed;
        spec.alpha = cfg.alpha;
        sum = hfv::run_statistic_study(spec);
    } else if (study == "size_power") {
        hfv::ExperimentSpec spec;
        spec.n = cfg.n;
        spec.replications = cfg.reps;
        spec.seed = seed;
        spec.alpha = cfg.alpha;
        const std::string test_s = hfv::extra_or(cfg, "test", std::string("renyi"));
        const hfv::IncrementTest test = test_s == "gumbel" ? hfv::IncrementTest::Gumbel
                                        : test_s == "exp_gap_r1"
                                            ? hfv::IncrementTest::ExpGapR1
                                            : hfv::IncrementTest::Renyi;
        const auto table = hfv::run_size_power(spec, test, {0.025, 0.05, 0.1});
        json rows = json::array();
        std::ofstream f(out_path(cfg, "size_power.csv"));
        f << "jump_size,rate,wilson_lo,wilson_hi,rejections,reps\n";
        for (const auto& row : table) {
            f << hfv::format_g17(row.jump_size) << "," << hfv::format_g17(row.rate) << ","
              << hfv::format_g17(row.wilson_lo) << "," << hfv::format_g17(row.wilson_hi)
              << "," << row.rejections << "," << row.reps << "\n";
            rows.push_back({{"jump_size", row.jump_size},
                            {"rate", row.rate},
                            {"wilson_lo", row.wilson_lo},
                            {"wilson_hi", row.wilson_hi}});
        }
        json rep = {{"config", hfv::config_json(cfg)}, {"test", test_s}, {"rows", rows}};
        hfv::write_json_file(out_path(cfg, "mc.json"), rep);
        std::cout << "size=" << hfv::format_g17(table.front().rate) << " at alpha="
                  << cfg.alpha << "\n";
        return 0;
    } else if (study == "reflection") {
        sum = hfv::check_reflection(cfg.reps, {-0.5, -1.0, -2.0, -3.0}, {{-0.5, 0.0}}, seed);
    } else if (study == "halfnormal") {
        sum = hfv::check_mixed_halfnormal(cfg.reps, cfg.n, 1.0 / 50.0,
                                          hfv::extra_or(cfg, "sigma", 1.0),
                                          noise_from_config(cfg), seed);
    } else if (study == "taxi") {
        sum = hfv::run_taxi(cfg.reps, hfv::extra_or(cfg, "theta0", 1.0), cfg.n, seed);
    } else {
        throw std::runtime_error("unknown study: " + study);
    }
    json rep = {{"config", hfv::config_json(cfg)}, {"summary", hfv::to_json(sum)}};
    hfv::write_json_file(out_path(cfg, "mc.json"), rep);
    if (!sum.percentile_grid.empty()) hfv::write_qq_csv(out_path(cfg, "mc_qq.csv"), sum);
    if (!sum.counts.empty()) hfv::write_hist_csv(out_path(cfg, "mc_hist.csv"), sum);
    std::cout << sum.experiment_id << ": R=" << sum.replications << " wall="
              << sum.wall_seconds << "s\n";
    for (const auto& m : sum.moments)
        std::cout << "  " << m.label << " = " << hfv::format_g17(m.value)
                  << (m.theory != 0.0 ? " (theory " + hfv::format_g17(m.theory) + ")" : "")
                  << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and inference for discretely observed prices"};
    app.require_subcommand(1);
    hfv::RunConfig cfg;
    std::string config_path;

    std::uint64_t cli_seed = 0;
    std::size_t cli_n = 0, cli_reps = 0;
    double cli_alpha = 0.0;
    std::string cli_input, cli_out;
    bool cli_full = false, cli_eor = false;

    auto* o_seed = app.add_option("--seed", cli_seed, "master seed");
    auto* o_n = app.add_option("--n", cli_n, "grid size / observation count");
    auto* o_reps = app.add_option("--reps", cli_reps, "Monte Carlo replications");
    auto* o_full = app.add_flag("--full", cli_full, "full-scale replication count");
    auto* o_alpha = app.add_option("--alpha", cli_alpha, "test level");
    app.add_option("--config", config_path, "flat key=value config file");
    auto* o_out = app.add_option("--out", cli_out, "output directory");
    auto* o_eor = app.add_flag("--exit-on-reject", cli_eor, "exit 2 when a test rejects");
    auto* o_input = app.add_option("--input", cli_input, "input CSV path");

    CLI::App* sc_sim = app.add_subcommand("simulate", "generate paths and observations");
    CLI::App* sc_est = app.add_subcommand("estimate", "volatility estimators on a series");
    CLI::App* sc_test = app.add_subcommand("test", "jump tests on a series");
    CLI::App* sc_rough = app.add_subcommand("rough", "roughness analysis of a vol series");
    CLI::App* sc_mc = app.add_subcommand("mc", "Monte Carlo studies");
    for (CLI::App* sc : {sc_sim, sc_est, sc_test, sc_rough, sc_mc}) sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (!config_path.empty()) hfv::load_config_file(cfg, config_path);
        if (o_seed->count()) cfg.master_seed = cli_seed;
        if (o_n->count()) cfg.n = cli_n;
        if (o_reps->count()) cfg.reps = cli_reps;
        if (o_full->count()) cfg.full = cli_full;
        if (o_alpha->count()) cfg.alpha = cli_alpha;
        if (o_out->count()) cfg.out = cli_out;
        if (o_eor->count()) cfg.exit_on_reject = cli_eor;
        if (o_input->count()) cfg.input = cli_input;

        if (sc_sim->parsed()) { cfg.subcommand = "simulate"; return cmd_simulate(cfg); }
        if (sc_est->parsed()) { cfg.subcommand = "estimate"; return cmd_estimate(cfg); }
        if (sc_test->parsed()) { cfg.subcommand = "test"; return cmd_test(cfg); }
        if (sc_rough->parsed()) { cfg.subcommand = "rough"; return cmd_rough(cfg); }
        if (sc_mc->parsed()) { cfg.subcommand = "mc"; return cmd_mc(cfg); }
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
