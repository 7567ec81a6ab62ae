// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each check pins its scenario, tolerances and seeds in code.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../support/oracles.hpp"
#include "leofl/analysis.hpp"
#include "leofl/channel.hpp"
#include "leofl/constants.hpp"
#include "leofl/constellation.hpp"
#include "leofl/csv.hpp"
#include "leofl/fl.hpp"
#include "leofl/noma.hpp"
#include "leofl/protocol.hpp"
#include "leofl/rng.hpp"
#include "leofl/scenario.hpp"

using namespace leofl;

namespace {

int g_failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    if (!pass) ++g_failures;
}

const ShadowedRicianParams kVi = ShadowedRicianParams::from_2b(0.279, 2, 0.251);

// ---------------------------------------------------------------------------
// C1: closed-form outage vs conditional Monte-Carlo on a 3x3x3 grid,
// 1e6 trials, agreement within 3 standard errors at every point.
void criterion1() {
    const double rhos[] = {10.0, 100.0, 1000.0};           // 10, 20, 30 dB
    const double a_ns_grid[] = {0.15, 0.25, 0.4};
    const double rates[] = {0.5, 1.0, 1.5};                // gamma = 1, 3, 7
    const double cond_gain = 0.5;
    const long trials = 1000000;
    double worst_z = 0.0;
    int bad = 0;
    for (double rho : rhos)
        for (double a_ns : a_ns_grid)
            for (double rate : rates) {
                double gamma = gamma_threshold(rate, GammaForm::PaperTwoR);
                double a_fs = 1.0 - a_ns;
                std::pair<double, double> cond{cond_gain, a_ns};
                double cf_ns = outage_ns_closed(kVi, rho, a_ns, gamma);
                double cf_fs = outage_fs_closed(kVi, rho, a_fs, gamma, {&cond, 1});
                double cf_sys = outage_system_closed(kVi, kVi, rho, rho, a_ns, a_fs, gamma,
                                                     gamma, {&cond, 1});
                OutageScenario sc{kVi, kVi, rho, rho, a_ns, a_fs, gamma, gamma, true, cond_gain};
                uint64_t seed = derive_seed(20240915, "c1", static_cast<uint64_t>(rho * 10),
                                            static_cast<uint64_t>(a_ns * 100),
                                            static_cast<uint64_t>(rate * 10));
                OutageReport mc = outage_monte_carlo(sc, trials, seed);
                auto zval = [&](double p_mc, double p_cf) {
                    double se = std::sqrt(std::max(p_cf * (1.0 - p_cf), 1e-12) / trials);
                    return std::abs(p_mc - p_cf) / se;
                };
                double z = std::max({zval(mc.op_ns, cf_ns), zval(mc.op_fs, cf_fs),
                                     zval(mc.op_system, cf_sys)});
                worst_z = std::max(worst_z, z);
                if (z > 3.0) ++bad;
            }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "outage closed form vs 1e6-trial Monte-Carlo, 27 grid points: worst |z| = %.2f "
                  "(limit 3), %d points out of tolerance",
                  worst_z, bad);
    report("C1", bad == 0, buf);
}

// ---------------------------------------------------------------------------
// C2: paper outage magnitudes with the link parameters folded into rho.
// System OP within x3 of 1e-2 at 20 dBm and x3 of 1e-3 at 40 dBm.
void criterion2() {
    LinkBudgetParams link;  // 6.98 dBi both ends, 20 GHz, boresight
    NoiseParams noise{354.81, 50e6};
    double sigma2 = noise_power(noise);
    double d_ns = 500e3 - 25e3, d_fs = 1500e3 - 25e3;  // zenith slants to a 25 km HAP
    double gamma = gamma_threshold(1.0, GammaForm::PaperTwoR);
    std::pair<double, double> cond{kVi.mean(), 0.25};
    auto op_sys_at = [&](double p_dbm) {
        double ps = dbm_to_watts(p_dbm);
        double rho_ns = ps * shl_budget(link, d_ns) / sigma2;
        double rho_fs = ps * shl_budget(link, d_fs) / sigma2;
        return outage_system_closed(kVi, kVi, rho_ns, rho_fs, 0.25, 0.75, gamma, gamma,
                                    {&cond, 1});
    };
    double op20 = op_sys_at(20.0);
    double op40 = op_sys_at(40.0);
    bool pass20 = op20 >= 1e-2 / 3.0 && op20 <= 1e-2 * 3.0;
    bool pass40 = op40 >= 1e-3 / 3.0 && op40 <= 1e-3 * 3.0;
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "system OP with folded link budget: %.3g at 20 dBm (window [3.3e-3, 3e-2]), "
                  "%.3g at 40 dBm (window [3.3e-4, 3e-3]); received SNR is ~-42 dB under these "
                  "link parameters, see decisions ledger",
                  op20, op40);
    report("C2", pass20 && pass40, buf);
}

// ---------------------------------------------------------------------------
// C3: 528 MB at 140 / 160 Mbps -> 30.17 s / 26.4 s within 0.5%.
void criterion3() {
    double bits = 528e6 * 8.0;
    double t140 = oma_exchange_time(bits, 140e6, 0.0);
    double t160 = oma_exchange_time(bits, 160e6, 0.0);
    bool ok = std::abs(t140 - 30.17) / 30.17 < 0.005 && std::abs(t160 - 26.4) / 26.4 < 0.005;
    char buf[120];
    std::snprintf(buf, sizeof buf, "528 MB transfer: %.4f s at 140 Mbps, %.4f s at 160 Mbps",
                  t140, t160);
    report("C3", ok, buf);
}

// ---------------------------------------------------------------------------
// C4: telescoping sum-rate identity over 1000 random groups, 1e-10.
void criterion4() {
    Rng rng(424242);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        int n = 1 + static_cast<int>(rng.uniform_below(10));
        std::vector<NomaUser> users(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            users[static_cast<size_t>(i)].sat = {i % 3, 0, i};
            users[static_cast<size_t>(i)].gain = 0.01 + 3.0 * rng.uniform01();
        }
        double rho = std::pow(10.0, -1.0 + 5.0 * rng.uniform01());
        NomaGroup g = order_by_gain(users, rho);
        allocate_power(g, PowerMode::Static);
        RateReport r = sum_rate(g);
        double sum = 0.0;
        for (double v : r.per_user) sum += v;
        worst = std::max(worst, std::abs(sum - r.total) / std::max(1.0, std::abs(r.total)));
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "per-user rates vs closed-form total, 1000 groups: worst "
                  "relative gap %.2e (limit 1e-10)", worst);
    report("C4", worst <= 1e-10, buf);
}

// ---------------------------------------------------------------------------
// C5: channel statistics: cdf vs quadrature (1e-6 on 50 points), unit mass
// (1e-6), KS of 1e6 draws below 0.002.
void criterion5() {
    auto pdf = [](double x) { return sr_pdf(x, kVi); };
    double worst_cdf = 0.0;
    for (int i = 1; i <= 50; ++i) {
        double x = 0.1 * i;
        worst_cdf = std::max(worst_cdf,
                             std::abs(sr_cdf(x, kVi) - oracles::integrate(pdf, 0.0, x, 1e-10)));
    }
    double mass = oracles::integrate(pdf, 0.0, 60.0, 1e-10);
    SrSampler sampler(kVi);
    std::vector<double> draws;
    draws.reserve(1000000);
    for (long t = 0; t < 1000000; ++t) {
        Rng rng(derive_seed(5150, "c5", static_cast<uint64_t>(t)));
        draws.push_back(sampler.draw(rng));
    }
    double ks = oracles::ks_statistic(std::move(draws), [](double x) { return sr_cdf(x, kVi); });
    bool ok = worst_cdf < 1e-6 && std::abs(mass - 1.0) < 1e-6 && ks < 0.002;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "cdf vs quadrature max gap %.2e, pdf mass-1 %.2e, KS(1e6) %.5f (limits 1e-6, "
                  "1e-6, 0.002)",
                  worst_cdf, std::abs(mass - 1.0), ks);
    report("C5", ok, buf);
}

// ---------------------------------------------------------------------------
// C6: chain aggregation equals FedAvg on 1000 random orbits (1e-12) and the
// all-visible instant-link protocol matches the reference loop per round.
const char* kAllVisibleCfg = R"(
seed = 7

[shell]
altitude_km = 5000
inclination_deg = 0
num_orbits = 1
sats_per_orbit = 4

[node]
name = hap_a
kind = hap
latitude_deg = 0
longitude_deg = 0
altitude_km = 25
min_elevation_deg = 0

[node]
name = hap_b
kind = hap
latitude_deg = 0
longitude_deg = 90
altitude_km = 25
min_elevation_deg = 0

[node]
name = hap_c
kind = hap
latitude_deg = 0
longitude_deg = 180
altitude_km = 25
min_elevation_deg = 0

[node]
name = hap_d
kind = hap
latitude_deg = 0
longitude_deg = -90
altitude_km = 25
min_elevation_deg = 0

[fl]
classes = 2
feature_dim = 6
samples = 240
separation = 2.0
partition = iid
local_epochs = 1
batch_size = 16
l2_reg = 0.01
lr = 0.1
train_time_s = 0

[protocol]
instant_links = true
max_rounds = 6
)";

void criterion6() {
    Rng rng(606060);
    double worst_chain = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        size_t n = 1 + rng.uniform_below(10);
        size_t dim = 1 + rng.uniform_below(6);
        std::vector<ModelVector> models(n);
        std::vector<double> sizes(n);
        double total = 0.0;
        for (size_t k = 0; k < n; ++k) {
            models[k].w.resize(dim);
            for (auto& v : models[k].w) v = rng.normal();
            sizes[k] = 1.0 + rng.uniform_below(50);
            total += sizes[k];
        }
        ModelVector acc;
        acc.w.assign(dim, 0.0);
        size_t start = rng.uniform_below(n);
        for (size_t i = 0; i < n; ++i) {
            size_t k = (start + i) % n;
            acc = suborbital_accumulate(acc, models[k], sizes[k], total);
        }
        ModelVector ref = fedavg(models, sizes);
        for (size_t i = 0; i < dim; ++i)
            worst_chain = std::max(worst_chain, std::abs(acc.w[i] - ref.w[i]));
    }

    ScenarioConfig cfg = parse_scenario(kAllVisibleCfg);
    Simulator sim(cfg);
    auto records = sim.run_training();
    auto ref_rounds = reference_fedavg_rounds(cfg, static_cast<int>(records.size()));
    double worst_proto = records.empty() ? 1.0 : 0.0;
    for (size_t r = 0; r < records.size(); ++r)
        for (size_t i = 0; i < ref_rounds[r].dim(); ++i)
            worst_proto =
                std::max(worst_proto, std::abs(records[r].global_model.w[i] - ref_rounds[r].w[i]));
    bool ok = worst_chain <= 1e-12 && worst_proto <= 1e-12 && records.size() == 6;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "chain vs fedavg worst gap %.2e over 1000 orbits; protocol vs reference loop "
                  "worst gap %.2e over %zu rounds (limits 1e-12)",
                  worst_chain, worst_proto, records.size());
    report("C6", ok, buf);
}

// ---------------------------------------------------------------------------
// C7: Theorem-1 bound dominates the measured gap on the strongly convex desk
// problem, J in {1, 5}, decaying schedule, 30 seeds.
void criterion7() {
    Dataset data = generate_synthetic(2, 10, 200, 1.0, 2024);
    std::vector<ShellSpec> shells(1);
    shells[0].num_orbits = 1;
    shells[0].sats_per_orbit = 4;
    Constellation cons(shells);
    auto shards = partition(data, PartitionMode::IID, cons, 99);
    const double l2 = 0.1;
    bool ok = true;
    std::string detail;
    for (int j : {1, 5}) {
        ConvergenceConstants c = estimate_constants(data, shards, l2, j, 16, 3);
        auto curve = theorem1_curve(data, shards, c, l2, 16, 200, 30, 555);
        double worst_ratio = 0.0;
        for (const auto& p : curve) worst_ratio = std::max(worst_ratio, p.empirical / p.bound);
        if (worst_ratio > 1.0) ok = false;
        char buf[80];
        std::snprintf(buf, sizeof buf, "J=%d worst gap/bound %.3g; ", j, worst_ratio);
        detail += buf;
    }
    report("C7", ok, detail + "201 recorded steps each, 30 seeds (limit 1)");
}

// ---------------------------------------------------------------------------
// C8: simulated time to a fixed target loss is nonincreasing over
// {GS, 1 HAP, 2 HAPs, 3 HAPs} on the reduced constellation.
std::string c8_config(int n_haps) {
    std::ostringstream o;
    o << "seed = 17\n";
    for (double alt : {500.0, 1000.0, 1500.0}) {
        o << "\n[shell]\naltitude_km = " << alt
          << "\ninclination_deg = 70\nnum_orbits = 1\nsats_per_orbit = 4\n";
    }
    struct Site {
        const char* name;
        double lat, lon;
    };
    const Site sites[] = {{"rolla", 37.95, -91.77}, {"chinook", 48.59, -109.23},
                          {"primorsky", 45.0, 134.0}};
    if (n_haps == 0) {
        o << "\n[node]\nname = rolla_gs\nkind = gs\nlatitude_deg = 37.95\n"
             "longitude_deg = -91.77\naltitude_km = 0\nmin_elevation_deg = 10\n";
    } else {
        for (int i = 0; i < n_haps; ++i) {
            o << "\n[node]\nname = " << sites[i].name << "\nkind = hap\nlatitude_deg = "
              << sites[i].lat << "\nlongitude_deg = " << sites[i].lon
              << "\naltitude_km = 25\nmin_elevation_deg = 10\n";
        }
    }
    o << R"(
[noma]
p_s_dbm = 30

[fl]
classes = 4
feature_dim = 8
samples = 600
separation = 3.0
partition = iid
local_epochs = 2
batch_size = 16
l2_reg = 0.001
lr = 0.15
train_time_s = 10

[protocol]
isl_rate_mbps = 100
ihl_rate_mbps = 500
max_rounds = 40
target_loss = 0.25
max_sim_time_s = 1000000
)";
    return o.str();
}

void criterion8() {
    double times[4] = {0, 0, 0, 0};
    bool reached[4] = {false, false, false, false};
    const char* labels[] = {"GS", "1 HAP", "2 HAPs", "3 HAPs"};
    for (int k = 0; k < 4; ++k) {
        ScenarioConfig cfg = parse_scenario(c8_config(k));
        Simulator sim(cfg);
        auto records = sim.run_training();
        for (const auto& r : records) {
            if (r.loss <= cfg.protocol.target_loss) {
                times[k] = r.sim_time_s;
                reached[k] = true;
                break;
            }
        }
    }
    bool ok = reached[0] && reached[1] && reached[2] && reached[3];
    for (int k = 1; k < 4 && ok; ++k)
        if (times[k] > times[k - 1] + 1.0) ok = false;
    std::string detail = "time to loss<=0.25: ";
    for (int k = 0; k < 4; ++k) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s %.0fs%s", labels[k], reached[k] ? times[k] : -1.0,
                      k < 3 ? ", " : "");
        detail += buf;
    }
    report("C8", ok, detail + " (nonincreasing required)");
}

// ---------------------------------------------------------------------------
// C9: desk-scale replacement for the full-scale dataset studies: the tiny
// 1-HAP scenario reaches 95% accuracy within 20 rounds.
const char* kTinyCfg = R"(
seed = 11

[shell]
altitude_km = 5000
inclination_deg = 0
num_orbits = 1
sats_per_orbit = 4

[node]
name = hap
kind = hap
latitude_deg = 0
longitude_deg = 0
altitude_km = 25
min_elevation_deg = 0

[fl]
classes = 2
feature_dim = 6
samples = 240
separation = 3.0
partition = iid
local_epochs = 2
batch_size = 8
l2_reg = 0.001
lr = 0.2
train_time_s = 0

[protocol]
instant_links = true
max_rounds = 20
target_accuracy = 0.95
)";

void criterion9() {
    ScenarioConfig cfg = parse_scenario(kTinyCfg);
    Simulator sim(cfg);
    auto records = sim.run_training();
    bool ok = !records.empty() && records.size() <= 20 && records.back().accuracy >= 0.95;
    char buf[120];
    std::snprintf(buf, sizeof buf,
                  "synthetic 2-class scenario: %.3f accuracy after %zu rounds (needs >= 0.95 "
                  "within 20)",
                  records.empty() ? 0.0 : records.back().accuracy, records.size());
    report("C9", ok, buf);
}

// ---------------------------------------------------------------------------
// C10: re-running a subcommand with the same config and seed produces
// byte-identical CSV output. Exercises the CLI binary end to end.
std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void criterion10() {
#if defined(LEOFL_CLI_PATH) && defined(LEOFL_CONFIG_DIR)
    std::string cli = LEOFL_CLI_PATH;
    std::string cfgdir = LEOFL_CONFIG_DIR;
    std::string base = "acceptance_c10";
    std::string cmds[2] = {
        cli + " --config " + cfgdir + "/tiny_train.cfg --out " + base + "_a train > /dev/null",
        cli + " --config " + cfgdir + "/tiny_train.cfg --out " + base + "_b train > /dev/null"};
    bool ok = true;
    for (const auto& c : cmds)
        if (std::system(c.c_str()) != 0) ok = false;
    std::string ra = slurp(base + "_a/rounds.csv");
    std::string rb = slurp(base + "_b/rounds.csv");
    ok = ok && !ra.empty() && ra == rb;

    std::string oc1 = cli + " --config " + cfgdir + "/vi_walker.cfg --out " + base +
                      "_a --trials 20000 --sweep -10:30:20 outage > /dev/null";
    std::string oc2 = cli + " --config " + cfgdir + "/vi_walker.cfg --out " + base +
                      "_b --trials 20000 --sweep -10:30:20 outage > /dev/null";
    if (std::system(oc1.c_str()) != 0) ok = false;
    if (std::system(oc2.c_str()) != 0) ok = false;
    std::string oa = slurp(base + "_a/outage.csv");
    std::string ob = slurp(base + "_b/outage.csv");
    ok = ok && !oa.empty() && oa == ob;
    report("C10", ok, "train and outage subcommands re-run: rounds.csv and outage.csv byte-identical");
#else
    report("C10", false, "CLI path not wired into the build");
#endif
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
