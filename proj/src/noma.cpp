#include "leofl/noma.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "leofl/constants.hpp"
#include "leofl/rng.hpp"

namespace leofl {

double gamma_threshold(double target_rate, GammaForm form) {
    double e = form == GammaForm::PaperTwoR ? 2.0 * target_rate : target_rate;
    return std::pow(2.0, e) - 1.0;
}

NomaGroup order_by_gain(std::vector<NomaUser> users, double rho) {
    std::sort(users.begin(), users.end(), [](const NomaUser& a, const NomaUser& b) {
        if (a.gain != b.gain) return a.gain > b.gain;
        return a.sat < b.sat;
    });
    return {std::move(users), rho};
}

void allocate_power(NomaGroup& group, PowerMode mode, std::span<const double> distances_m) {
    auto& users = group.users;
    if (users.empty()) throw std::invalid_argument("allocate_power: empty group");
    if (users.size() == 1) {
        users[0].power_coeff = 1.0;
        return;
    }
    if (mode == PowerMode::Static) {
        bool all_zero = true;
        for (const NomaUser& u : users)
            if (u.gain > 0.0) all_zero = false;
        if (all_zero) {
            for (NomaUser& u : users) u.power_coeff = 1.0 / users.size();
            return;
        }
        if (users.size() == 2) {
            users[0].power_coeff = 0.25;  // stronger (near)
            users[1].power_coeff = 0.75;  // weaker (far)
            return;
        }
        double sum = 0.0;
        // Inverse-gain ladder; zero-gain users take the largest finite rung.
        double max_inv = 0.0;
        for (const NomaUser& u : users)
            if (u.gain > 0.0) max_inv = std::max(max_inv, 1.0 / u.gain);
        for (NomaUser& u : users) {
            u.power_coeff = u.gain > 0.0 ? 1.0 / u.gain : max_inv;
            sum += u.power_coeff;
        }
        for (NomaUser& u : users) u.power_coeff /= sum;
        return;
    }
    // Dynamic: a_k ~ d_k^2, scale-invariant in the distances.
    if (distances_m.size() != users.size())
        throw std::invalid_argument("allocate_power: dynamic mode needs one distance per user");
    double sum = 0.0;
    for (double d : distances_m) sum += d * d;
    if (sum <= 0.0) {
        for (NomaUser& u : users) u.power_coeff = 1.0 / users.size();
        return;
    }
    for (size_t i = 0; i < users.size(); ++i)
        users[i].power_coeff = distances_m[i] * distances_m[i] / sum;
}

double sinr(const NomaGroup& group, size_t k) {
    if (k >= group.users.size()) throw std::out_of_range("sinr: user index out of range");
    double rho = group.snr_rho;
    const NomaUser& u = group.users[k];
    double signal = u.power_coeff * rho * u.gain;
    if (k == 0) return signal;
    double interference = 0.0;
    for (size_t i = 0; i < k; ++i)
        interference += group.users[i].gain * group.users[i].power_coeff;
    return signal / (rho * interference + 1.0);
}

RateReport sum_rate(const NomaGroup& group, bool high_snr) {
    RateReport r;
    r.per_user.reserve(group.users.size());
    double weighted = 0.0;
    for (size_t k = 0; k < group.users.size(); ++k) {
        r.per_user.push_back(std::log2(1.0 + sinr(group, k)));
        weighted += group.users[k].power_coeff * group.users[k].gain;
    }
    r.total = high_snr ? std::log2(group.snr_rho * weighted)
                       : std::log2(1.0 + group.snr_rho * weighted);
    return r;
}

double outage_ns_closed(const ShadowedRicianParams& p, double rho, double a_ns, double gamma_th) {
    if (!(rho > 0.0)) throw std::invalid_argument("outage_ns_closed: rho must be > 0");
    if (!(a_ns > 0.0 && a_ns <= 1.0))
        throw std::invalid_argument("outage_ns_closed: a_ns must be in (0,1]");
    double a = gamma_th / a_ns;
    double w1 = 1.0 / rho;
    return sr_cdf(a * w1, p);
}

double outage_fs_closed(const ShadowedRicianParams& p, double rho, double a_fs, double gamma_th,
                        std::span<const std::pair<double, double>> interferer_gain_coeff) {
    if (!(rho > 0.0)) throw std::invalid_argument("outage_fs_closed: rho must be > 0");
    if (!(a_fs > 0.0 && a_fs <= 1.0))
        throw std::invalid_argument("outage_fs_closed: a_fs must be in (0,1]");
    double e = gamma_th / a_fs;
    double interference = 0.0;
    for (const auto& [gain, coeff] : interferer_gain_coeff) interference += gain * coeff;
    double w2 = (rho * interference + 1.0) / rho;
    return sr_cdf(e * w2, p);
}

double outage_system_closed(const ShadowedRicianParams& p_ns, const ShadowedRicianParams& p_fs,
                            double rho_ns, double rho_fs, double a_ns, double a_fs,
                            double gamma_ns, double gamma_fs,
                            std::span<const std::pair<double, double>> interferer_gain_coeff) {
    double op_ns = outage_ns_closed(p_ns, rho_ns, a_ns, gamma_ns);
    double op_fs = outage_fs_closed(p_fs, rho_fs, a_fs, gamma_fs, interferer_gain_coeff);
    return 1.0 - (1.0 - op_ns) * (1.0 - op_fs);
}

OutageReport outage_monte_carlo(const OutageScenario& sc, long trials, uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("outage_monte_carlo: trials must be >= 1");
    SrSampler ns_sampler(sc.ns_params);
    SrSampler fs_sampler(sc.fs_params);
    long fail_ns = 0, fail_fs = 0, fail_sys = 0;
    for (long t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, "outage_mc", static_cast<uint64_t>(t)));
        double g_ns = ns_sampler.draw(rng);
        double g_fs = fs_sampler.draw(rng);
        bool ns_out = sc.a_ns * sc.rho_ns * g_ns < sc.gamma_ns;
        double interferer = sc.conditional ? sc.cond_ns_gain : g_ns;
        double sinr_fs =
            sc.a_fs * sc.rho_fs * g_fs / (sc.rho_fs * sc.a_ns * interferer + 1.0);
        bool fs_out = sinr_fs < sc.gamma_fs;
        fail_ns += ns_out;
        fail_fs += fs_out;
        fail_sys += (ns_out || fs_out);
    }
    OutageReport rep;
    rep.method = OutageMethod::MonteCarlo;
    rep.trials = trials;
    rep.op_ns = static_cast<double>(fail_ns) / trials;
    rep.op_fs = static_cast<double>(fail_fs) / trials;
    rep.op_system = static_cast<double>(fail_sys) / trials;
    auto se = [trials](double p) { return std::sqrt(p * (1.0 - p) / trials); };
    rep.std_err = std::max({se(rep.op_ns), se(rep.op_fs), se(rep.op_system)});
    return rep;
}

double oma_exchange_time(double model_bits, double rate_bps, double distance_m) {
    if (!(rate_bps > 0.0)) throw std::invalid_argument("oma_exchange_time: rate must be > 0");
    return model_bits / rate_bps + distance_m / kSpeedOfLight;
}

std::vector<double> qpsk_ber_monte_carlo(const NomaGroup& group,
                                         std::span<const ShadowedRicianParams> fading,
                                         std::span<const double> fixed_gains, long trials,
                                         uint64_t seed) {
    size_t n = group.users.size();
    if (n == 0) throw std::invalid_argument("qpsk_ber_monte_carlo: empty group");
    bool use_fixed = !fixed_gains.empty();
    if (use_fixed && fixed_gains.size() != n)
        throw std::invalid_argument("qpsk_ber_monte_carlo: fixed gain per user required");
    if (!use_fixed && fading.size() != n)
        throw std::invalid_argument("qpsk_ber_monte_carlo: fading params per user required");

    std::vector<SrSampler> samplers;
    if (!use_fixed) {
        samplers.reserve(n);
        for (const auto& p : fading) samplers.emplace_back(p);
    }

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<long> bit_errors(n, 0);
    std::vector<std::complex<double>> coef(n);
    std::vector<int> bits(2 * n);

    for (long t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, "qpsk_mc", static_cast<uint64_t>(t)));
        // Transmit amplitudes sqrt(a_k rho) with the noise normalized to unit
        // variance, so rho carries the power scale.
        std::complex<double> y{0.0, 0.0};
        for (size_t k = 0; k < n; ++k) {
            double g = use_fixed ? fixed_gains[k] : samplers[k].draw(rng);
            double phase = 2.0 * kPi * rng.uniform01();
            coef[k] = std::polar(std::sqrt(g), phase);
            bits[2 * k] = rng.uniform01() < 0.5 ? 0 : 1;
            bits[2 * k + 1] = rng.uniform01() < 0.5 ? 0 : 1;
            std::complex<double> sym{(bits[2 * k] ? -inv_sqrt2 : inv_sqrt2),
                                     (bits[2 * k + 1] ? -inv_sqrt2 : inv_sqrt2)};
            double amp = std::sqrt(group.users[k].power_coeff * group.snr_rho);
            y += coef[k] * amp * sym;
        }
        y += std::complex<double>(rng.normal() * inv_sqrt2, rng.normal() * inv_sqrt2);

        // SIC in gain order with genie CSI: decide, count errors, re-modulate
        // and subtract (wrong decisions propagate).
        for (size_t k = 0; k < n; ++k) {
            double amp = std::sqrt(group.users[k].power_coeff * group.snr_rho);
            std::complex<double> z = y / (coef[k] * amp);
            int b0 = z.real() < 0.0 ? 1 : 0;
            int b1 = z.imag() < 0.0 ? 1 : 0;
            bit_errors[k] += (b0 != bits[2 * k]) + (b1 != bits[2 * k + 1]);
            std::complex<double> sym{(b0 ? -inv_sqrt2 : inv_sqrt2),
                                     (b1 ? -inv_sqrt2 : inv_sqrt2)};
            y -= coef[k] * amp * sym;
        }
    }
    std::vector<double> ber(n);
    for (size_t k = 0; k < n; ++k)
        ber[k] = static_cast<double>(bit_errors[k]) / (2.0 * static_cast<double>(trials));
    return ber;
}

std::vector<CapacityPoint> capacity_sweep(std::span<const int> user_counts,
                                          std::span<const ShadowedRicianParams> shell_fading,
                                          std::span<const double> shell_distance_m, double rho,
                                          PowerMode mode, double gamma_th, uint64_t seed) {
    if (shell_fading.empty() || shell_fading.size() != shell_distance_m.size())
        throw std::invalid_argument("capacity_sweep: one fading law and distance per shell");
    std::vector<SrSampler> samplers;
    samplers.reserve(shell_fading.size());
    for (const auto& p : shell_fading) samplers.emplace_back(p);

    std::vector<CapacityPoint> out;
    for (int kc : user_counts) {
        if (kc < 1) throw std::invalid_argument("capacity_sweep: user counts must be >= 1");
        std::vector<NomaUser> users(static_cast<size_t>(kc));
        std::vector<double> dist(static_cast<size_t>(kc));
        Rng rng(derive_seed(seed, "capacity", static_cast<uint64_t>(kc)));
        for (int i = 0; i < kc; ++i) {
            size_t shell = static_cast<size_t>(i) % shell_fading.size();
            users[i].sat = {static_cast<int>(shell), 0, i};
            users[i].shell_index = static_cast<int>(shell);
            users[i].gain = samplers[shell].draw(rng);
            users[i].target_rate = 1.0;
        }
        NomaGroup group = order_by_gain(users, rho);
        for (size_t i = 0; i < group.users.size(); ++i)
            dist[i] = shell_distance_m[static_cast<size_t>(group.users[i].shell_index)];
        allocate_power(group, mode, dist);
        CapacityPoint pt;
        pt.user_count = kc;
        for (size_t i = 0; i < group.users.size(); ++i) {
            double s = sinr(group, i);
            if (s >= gamma_th) {
                pt.sum_rate_bps_hz += std::log2(1.0 + s);
                ++pt.decoded_users;
            }
        }
        out.push_back(pt);
    }
    return out;
}

}  // namespace leofl
