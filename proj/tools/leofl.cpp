// Command-line front end: scenario-driven sweeps and training runs.
// Exit codes: 0 success, 1 config error, 2 runtime error, 3 bound-check
// failure (verify-bound only).

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "leofl/analysis.hpp"
#include "leofl/channel.hpp"
#include "leofl/constants.hpp"
#include "leofl/constellation.hpp"
#include "leofl/csv.hpp"
#include "leofl/noma.hpp"
#include "leofl/protocol.hpp"
#include "leofl/rng.hpp"
#include "leofl/scenario.hpp"

namespace {

using namespace leofl;

struct Sweep {
    double start = -40.0, stop = 40.0, step = 10.0;
};

Sweep parse_sweep(const std::string& s) {
    Sweep sw;
    if (s.empty()) return sw;
    size_t a = s.find(':');
    size_t b = s.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos)
        throw ConfigError("--sweep expects start:stop:step");
    sw.start = std::stod(s.substr(0, a));
    sw.stop = std::stod(s.substr(a + 1, b - a - 1));
    sw.step = std::stod(s.substr(b + 1));
    if (!(sw.step > 0.0)) throw ConfigError("--sweep step must be > 0");
    return sw;
}

std::string out_path(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

int cmd_visibility(const ScenarioConfig& cfg, double t0, double t1, double dt,
                   const std::string& out_dir) {
    Constellation cons(cfg.shell_specs());
    CsvWriter csv(out_path(out_dir, "visibility.csv"));
    csv.header("sat_shell,sat_orbit,sat_slot,node,start_s,end_s");
    for (const GroundNode& node : cfg.nodes) {
        auto windows = visibility_windows(cons, node, t0, t1, dt);
        for (const auto& w : windows) {
            csv.field(w.sat.shell).field(w.sat.orbit).field(w.sat.slot).field(w.node);
            csv.field(w.start_s).field(w.end_s);
            csv.end_row();
        }
    }
    return 0;
}

int cmd_outage(const ScenarioConfig& cfg, const Sweep& sweep, long trials,
               const std::string& out_dir) {
    if (cfg.shells.empty()) throw ConfigError("outage: at least one shell required");
    const ShellConfig& ns_shell = cfg.shells.front();
    const ShellConfig& fs_shell = cfg.shells.back();
    ShadowedRicianParams ns = ns_shell.sr_params();
    ShadowedRicianParams fs = fs_shell.sr_params();
    double gamma = gamma_threshold(cfg.noma.target_rate_bps_hz, cfg.noma.gamma_form);
    double cond_gain =
        cfg.noma.cond_interferer_gain >= 0.0 ? cfg.noma.cond_interferer_gain : ns.mean();
    double sigma2 = noise_power(cfg.noise);
    // Zenith slant ranges at the shell altitudes set the folded budgets.
    double d_ns = ns_shell.spec.altitude_m - (cfg.nodes.empty() ? 0.0 : cfg.nodes[0].altitude_m);
    double d_fs = fs_shell.spec.altitude_m - (cfg.nodes.empty() ? 0.0 : cfg.nodes[0].altitude_m);

    CsvWriter csv(out_path(out_dir, "outage.csv"));
    csv.header("p_s_dbm,rho,op_ns_cf,op_ns_mc,op_fs_cf,op_fs_mc,op_sys_cf,op_sys_mc,stderr");
    for (double p = sweep.start; p <= sweep.stop + 1e-9; p += sweep.step) {
        double rho_ns, rho_fs;
        if (cfg.noma.link_budget_in_rho) {
            double ps = dbm_to_watts(p);
            rho_ns = ps * shl_budget(cfg.link, d_ns) / sigma2;
            rho_fs = ps * shl_budget(cfg.link, d_fs) / sigma2;
        } else {
            rho_ns = rho_fs = db_to_linear(p);  // P_s in dBm read as rho in dB
        }
        std::pair<double, double> interferer{cond_gain, 0.25};
        double cf_ns = outage_ns_closed(ns, rho_ns, 0.25, gamma);
        double cf_fs = outage_fs_closed(fs, rho_fs, 0.75, gamma, {&interferer, 1});
        double cf_sys = outage_system_closed(ns, fs, rho_ns, rho_fs, 0.25, 0.75, gamma, gamma,
                                             {&interferer, 1});
        OutageScenario sc{ns, fs, rho_ns, rho_fs, 0.25, 0.75, gamma, gamma, true, cond_gain};
        OutageReport mc = outage_monte_carlo(sc, trials,
                                             derive_seed(cfg.seed, "outage_sweep",
                                                         static_cast<uint64_t>(std::llround(p * 1000))));
        csv.field(p).field(rho_ns).field(cf_ns).field(mc.op_ns).field(cf_fs).field(mc.op_fs);
        csv.field(cf_sys).field(mc.op_system).field(mc.std_err);
        csv.end_row();
    }
    return 0;
}

int cmd_rate(const ScenarioConfig& cfg, const Sweep& sweep, int users, const std::string& out_dir) {
    std::vector<ShadowedRicianParams> fading;
    std::vector<double> dists;
    for (const auto& s : cfg.shells) {
        fading.push_back(s.sr_params());
        dists.push_back(s.spec.altitude_m);
    }
    double gamma = gamma_threshold(cfg.noma.target_rate_bps_hz, cfg.noma.gamma_form);
    CsvWriter csv(out_path(out_dir, "rate.csv"));
    csv.header("p_s_dbm,user_count,sum_rate_bps_hz,oma_sum_rate_bps_hz");
    CsvWriter per_user(out_path(out_dir, "rate_per_user.csv"));
    per_user.header("p_s_dbm,user_index,shell,gain,power_coeff,rate_bps_hz,oma_rate_bps_hz");
    std::vector<int> counts{users};
    std::vector<SrSampler> samplers;
    for (const auto& f : fading) samplers.emplace_back(f);
    for (double p = sweep.start; p <= sweep.stop + 1e-9; p += sweep.step) {
        double rho = db_to_linear(p);
        auto pts = capacity_sweep(counts, fading, dists, rho, cfg.noma.power_mode, gamma,
                                  derive_seed(cfg.seed, "rate_sweep"));
        // Rebuild the same group (same seed derivation as capacity_sweep) for
        // the per-user table and the OMA column.
        Rng rng(derive_seed(derive_seed(cfg.seed, "rate_sweep"), "capacity",
                            static_cast<uint64_t>(users)));
        std::vector<NomaUser> raw(static_cast<size_t>(users));
        for (int i = 0; i < users; ++i) {
            size_t shell = static_cast<size_t>(i) % fading.size();
            raw[static_cast<size_t>(i)].sat = {static_cast<int>(shell), 0, i};
            raw[static_cast<size_t>(i)].shell_index = static_cast<int>(shell);
            raw[static_cast<size_t>(i)].gain = samplers[shell].draw(rng);
        }
        NomaGroup group = order_by_gain(raw, rho);
        std::vector<double> gd(group.users.size());
        for (size_t k = 0; k < group.users.size(); ++k)
            gd[k] = dists[static_cast<size_t>(group.users[k].shell_index)];
        allocate_power(group, cfg.noma.power_mode, gd);
        RateReport rr = sum_rate(group);
        double oma_total = 0.0;
        double kinv = 1.0 / static_cast<double>(users);
        for (size_t k = 0; k < group.users.size(); ++k) {
            // Equal-bandwidth OMA: band B/K, power a_k P_s, noise share B/K.
            double oma_k = kinv * std::log2(1.0 + static_cast<double>(users) *
                                                      group.users[k].power_coeff * rho *
                                                      group.users[k].gain);
            oma_total += oma_k;
            per_user.field(p).field(static_cast<int>(k)).field(group.users[k].shell_index);
            per_user.field(group.users[k].gain).field(group.users[k].power_coeff);
            per_user.field(rr.per_user[k]).field(oma_k);
            per_user.end_row();
        }
        csv.field(p).field(pts[0].user_count).field(pts[0].sum_rate_bps_hz).field(oma_total);
        csv.end_row();
    }
    return 0;
}

int cmd_train(const ScenarioConfig& cfg, const std::string& out_dir, bool dump_trace) {
    Simulator sim(cfg);
    std::vector<RoundRecord> records = sim.run_training();
    CsvWriter csv(out_path(out_dir, "rounds.csv"));
    csv.header("round,sim_time_s,loss,accuracy,bytes_tx,contributors");
    for (const auto& r : records) {
        csv.field(r.round).field(r.sim_time_s).field(r.loss).field(r.accuracy);
        csv.field(static_cast<unsigned long long>(r.bytes_transmitted)).field(r.contributors_count);
        csv.end_row();
    }
    if (dump_trace) {
        CsvWriter tr(out_path(out_dir, "trace.log"));
        tr.header("timestamp,kind,src,dst,bits");
        for (const auto& e : sim.trace()) {
            tr.field(e.at_s).field(std::string(event_kind_name(e.kind))).field(e.src).field(e.dst);
            tr.field(e.bits);
            tr.end_row();
        }
    }
    if (!records.empty()) {
        const auto& last = records.back();
        std::cout << "rounds: " << records.size() << ", sim_time_s: " << format_double(last.sim_time_s)
                  << ", loss: " << format_double(last.loss)
                  << ", accuracy: " << format_double(last.accuracy) << "\n";
    } else {
        std::cout << "no rounds completed\n";
    }
    return 0;
}

int cmd_verify_bound(const ScenarioConfig& cfg, const std::string& out_dir, int steps, int seeds) {
    Constellation cons(cfg.shell_specs());
    Dataset data = generate_synthetic(cfg.fl.classes, cfg.fl.feature_dim, cfg.fl.samples,
                                      cfg.fl.separation, derive_seed(cfg.seed, "dataset"));
    auto shards = partition(data, cfg.fl.partition, cons, derive_seed(cfg.seed, "partition"));
    double l2 = cfg.fl.train.l2_reg;
    ConvergenceConstants c =
        estimate_constants(data, shards, l2, cfg.fl.train.local_epochs, cfg.fl.train.batch_size,
                           derive_seed(cfg.seed, "constants"));
    auto curve = theorem1_curve(data, shards, c, l2, cfg.fl.train.batch_size, steps, seeds,
                                derive_seed(cfg.seed, "curve"));
    emit_bound_curve(curve, out_path(out_dir, "bound.csv"));

    TrainConfig lcfg = cfg.fl.train;
    lcfg.schedule = LrSchedule::Decaying;
    LemmaReport lem = verify_lemmas(data, shards, c, lcfg, steps, seeds,
                                    derive_seed(cfg.seed, "lemmas"));
    CsvWriter csv(out_path(out_dir, "lemmas.csv"));
    csv.header("lemma,pass_fraction,worst_margin");
    csv.field(std::string("single_step_recursion")).field(lem.lemma1_pass_fraction)
        .field(lem.lemma1_worst_margin);
    csv.end_row();
    csv.field(std::string("variance_bound")).field(lem.lemma2_pass_fraction)
        .field(lem.lemma2_worst_margin);
    csv.end_row();
    csv.field(std::string("divergence_bound")).field(lem.lemma3_pass_fraction)
        .field(lem.lemma3_worst_margin);
    csv.end_row();

    bool ok = true;
    for (const auto& p : curve)
        if (p.empirical > p.bound) ok = false;
    std::cout << "bound check over " << curve.size() << " steps: " << (ok ? "PASS" : "FAIL")
              << "\n";
    std::cout << "lemma pass fractions: " << format_double(lem.lemma1_pass_fraction) << " "
              << format_double(lem.lemma2_pass_fraction) << " "
              << format_double(lem.lemma3_pass_fraction) << "\n";
    return ok ? 0 : 3;
}

int cmd_compare_oma(const ScenarioConfig& cfg, const Sweep& sweep, int users,
                    const std::string& out_dir) {
    std::vector<ShadowedRicianParams> fading;
    std::vector<double> dists;
    for (const auto& s : cfg.shells) {
        fading.push_back(s.sr_params());
        dists.push_back(s.spec.altitude_m);
    }
    std::vector<SrSampler> samplers;
    for (const auto& f : fading) samplers.emplace_back(f);
    CsvWriter csv(out_path(out_dir, "oma.csv"));
    csv.header("p_s_dbm,user_count,noma_total_bps_hz,oma_total_bps_hz,noma_minus_oma");
    for (double p = sweep.start; p <= sweep.stop + 1e-9; p += sweep.step) {
        double rho = db_to_linear(p);
        Rng rng(derive_seed(cfg.seed, "compare_oma", static_cast<uint64_t>(std::llround(p * 1000))));
        std::vector<NomaUser> raw(static_cast<size_t>(users));
        for (int i = 0; i < users; ++i) {
            size_t shell = static_cast<size_t>(i) % fading.size();
            raw[static_cast<size_t>(i)].sat = {static_cast<int>(shell), 0, i};
            raw[static_cast<size_t>(i)].shell_index = static_cast<int>(shell);
            raw[static_cast<size_t>(i)].gain = samplers[shell].draw(rng);
        }
        NomaGroup group = order_by_gain(raw, rho);
        std::vector<double> gd(group.users.size());
        for (size_t k = 0; k < group.users.size(); ++k)
            gd[k] = dists[static_cast<size_t>(group.users[k].shell_index)];
        allocate_power(group, cfg.noma.power_mode, gd);
        RateReport rr = sum_rate(group);
        double oma = 0.0;
        for (size_t k = 0; k < group.users.size(); ++k)
            oma += std::log2(1.0 + users * group.users[k].power_coeff * rho *
                                       group.users[k].gain) /
                   users;
        csv.field(p).field(users).field(rr.total).field(oma).field(rr.total - oma);
        csv.end_row();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LEO-FL simulator: constellation visibility, NOMA link analysis, and "
                 "federated-learning protocol runs"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", sweep_str;
    long long seed_override = -1;
    long trials = 1000000;

    app.add_option("--config", config_path, "scenario file")->required();
    app.add_option("--seed", seed_override, "override the scenario seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--trials", trials, "Monte-Carlo trials");
    app.add_option("--sweep", sweep_str, "p_s sweep start:stop:step (dBm)");

    double t0 = 0.0, t1 = 172800.0, dt = 10.0;
    auto* vis = app.add_subcommand("visibility", "emit visibility windows CSV");
    vis->add_option("--t0", t0, "start time, s");
    vis->add_option("--t1", t1, "end time, s");
    vis->add_option("--dt", dt, "sampling step, s");

    auto* outage = app.add_subcommand("outage", "closed-form and Monte-Carlo outage sweep");

    int users = 2;
    auto* rate = app.add_subcommand("rate", "NOMA sum-rate sweep with OMA comparison");
    rate->add_option("--users", users, "concurrent users");

    bool dump_trace = false;
    auto* train = app.add_subcommand("train", "run the FL protocol simulation");
    train->add_flag("--trace", dump_trace, "dump the event trace");

    int steps = 200, seeds = 30;
    auto* vb = app.add_subcommand("verify-bound", "convergence-bound and lemma checks");
    vb->add_option("--steps", steps, "global SGD steps");
    vb->add_option("--seeds", seeds, "seeded repetitions");

    auto* oma = app.add_subcommand("compare-oma", "NOMA vs equal-split OMA totals");
    oma->add_option("--users", users, "concurrent users");

    CLI11_PARSE(app, argc, argv);

    try {
        ScenarioConfig cfg = leofl::load_scenario(config_path);
        if (seed_override >= 0) cfg.seed = static_cast<uint64_t>(seed_override);
        Sweep sweep = parse_sweep(sweep_str);
        if (vis->parsed()) return cmd_visibility(cfg, t0, t1, dt, out_dir);
        if (outage->parsed()) return cmd_outage(cfg, sweep, trials, out_dir);
        if (rate->parsed()) return cmd_rate(cfg, sweep, users, out_dir);
        if (train->parsed()) return cmd_train(cfg, out_dir, dump_trace);
        if (vb->parsed()) return cmd_verify_bound(cfg, out_dir, steps, seeds);
        if (oma->parsed()) return cmd_compare_oma(cfg, sweep, users, out_dir);
    } catch (const leofl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
