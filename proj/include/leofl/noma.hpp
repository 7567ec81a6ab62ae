#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "leofl/channel.hpp"
#include "leofl/constellation.hpp"

namespace leofl {

struct NomaUser {
    SatelliteId sat;
    double gain = 0.0;         // |lambda|^2 channel power
    double power_coeff = 0.0;  // a_k, fraction of the group power budget
    double target_rate = 1.0;  // bits/s/Hz
    int shell_index = 0;
};

// Users ordered by descending channel gain (SIC order); ties broken by
// satellite id.
struct NomaGroup {
    std::vector<NomaUser> users;
    double snr_rho = 1.0;  // rho = P_s / sigma^2
};

enum class PowerMode { Static, Dynamic };

// gamma_th form: the printed 2^{2R}-1, or the conventional 2^R-1.
enum class GammaForm { PaperTwoR, Conventional };
double gamma_threshold(double target_rate, GammaForm form);

NomaGroup order_by_gain(std::vector<NomaUser> users, double rho);

// Static: a two-user group gets the fixed {0.25 near, 0.75 far} split; larger
// groups use an inverse-gain ladder a_k ~ 1/gain normalized to sum 1 (all-zero
// gains fall back to a uniform split). Dynamic: a_k ~ d_k^2 / sum d_j^2 from
// the supplied per-user distances (same order as group.users).
void allocate_power(NomaGroup& group, PowerMode mode, std::span<const double> distances_m = {});

// SINR of the k-th user (0-based index into the ordered group):
// k=0: a_0 rho g_0; k>0: a_k rho g_k / (rho sum_{i<k} a_i g_i + 1).
double sinr(const NomaGroup& group, size_t k);

struct RateReport {
    std::vector<double> per_user;  // log2(1 + SINR_k), bits/s/Hz
    double total = 0.0;
};

// Per-user rates and the total. The total telescopes to
// log2(1 + rho sum a_k g_k) exactly; with high_snr set, the log2(rho sum ...)
// approximation is returned instead.
RateReport sum_rate(const NomaGroup& group, bool high_snr = false);

// Closed-form outage probabilities. The NS form is F(A w1) with
// A = gamma_th / a_ns, w1 = 1/rho. The FS form is F(E w2) with
// E = gamma_th / a_fs and w2 = (rho sum a_i g_i + 1)/rho over the supplied
// realized stronger-user (gain, a) pairs; the expression is conditional on
// those gains.
double outage_ns_closed(const ShadowedRicianParams& p, double rho, double a_ns, double gamma_th);
double outage_fs_closed(const ShadowedRicianParams& p, double rho, double a_fs, double gamma_th,
                        std::span<const std::pair<double, double>> interferer_gain_coeff);
double outage_system_closed(const ShadowedRicianParams& p_ns, const ShadowedRicianParams& p_fs,
                            double rho_ns, double rho_fs, double a_ns, double a_fs,
                            double gamma_ns, double gamma_fs,
                            std::span<const std::pair<double, double>> interferer_gain_coeff);

enum class OutageMethod { ClosedForm, MonteCarlo };

struct OutageReport {
    double op_ns = 0.0;
    double op_fs = 0.0;
    double op_system = 0.0;
    OutageMethod method = OutageMethod::ClosedForm;
    long trials = 0;       // Monte-Carlo only
    double std_err = 0.0;  // Monte-Carlo only (largest of the three)
};

struct OutageScenario {
    ShadowedRicianParams ns_params;
    ShadowedRicianParams fs_params;
    double rho_ns = 1.0;
    double rho_fs = 1.0;
    double a_ns = 0.25;
    double a_fs = 0.75;
    double gamma_ns = 3.0;
    double gamma_fs = 3.0;
    // Conditional mode fixes the FS-side interferer gain at cond_ns_gain
    // (mirroring the closed form); unconditional mode averages over the drawn
    // NS gain instead.
    bool conditional = true;
    double cond_ns_gain = 0.0;
};

// Independent Monte-Carlo oracle for the closed forms: draws NS/FS gains
// i.i.d., applies the SINR threshold conditions, counts failures. Reports the
// binomial standard error sqrt(p(1-p)/trials).
OutageReport outage_monte_carlo(const OutageScenario& sc, long trials, uint64_t seed);

// OMA exchange time: model_bits / rate + distance / c (processing delays
// omitted).
double oma_exchange_time(double model_bits, double rate_bps, double distance_m);

// Symbol-level QPSK BER with SIC (re-modulation and subtraction, so decoding
// errors propagate). Per-trial fading draws come from each user's
// shadowed-Rician parameters unless fixed_gains is nonempty. Returns one BER
// per user in group order.
std::vector<double> qpsk_ber_monte_carlo(const NomaGroup& group,
                                         std::span<const ShadowedRicianParams> fading,
                                         std::span<const double> fixed_gains, long trials,
                                         uint64_t seed);

struct CapacityPoint {
    int user_count = 0;
    double sum_rate_bps_hz = 0.0;
    int decoded_users = 0;
};

// Sum rate vs number of concurrent users: draws per-user gains from the
// shell's fading law (users assigned round-robin across shells), allocates
// power, and credits a user's rate only when its SINR clears gamma_th.
std::vector<CapacityPoint> capacity_sweep(std::span<const int> user_counts,
                                          std::span<const ShadowedRicianParams> shell_fading,
                                          std::span<const double> shell_distance_m, double rho,
                                          PowerMode mode, double gamma_th, uint64_t seed);

}  // namespace leofl
