#pragma once

#include <cstdint>
#include <vector>

#include "leofl/rng.hpp"

namespace leofl {

// Shadowed-Rician power-gain distribution for the satellite-HAP link.
// b is the half multi-path power (2b is the multi-path component), m the
// integer fading severity, omega the average LoS power.
struct ShadowedRicianParams {
    double b;
    int m;
    double omega;

    ShadowedRicianParams(double b_, int m_, double omega_);
    static ShadowedRicianParams from_2b(double two_b, int m, double omega);

    double mu() const;     // (1/2b) * (2bm / (2bm + omega))^m
    double beta() const;   // 1 / 2b
    double delta() const;  // omega / (2b (2bm + omega))
    double mean() const { return 2.0 * b + omega; }
};

double sr_pdf(double x, const ShadowedRicianParams& p);
double sr_cdf(double x, const ShadowedRicianParams& p);

// Inverse-CDF sampler for the shadowed-Rician power gain. Builds a lookup
// table once, then refines each draw by safeguarded Newton until the
// probability error is below 1e-10.
class SrSampler {
  public:
    explicit SrSampler(const ShadowedRicianParams& p);

    double quantile(double u) const;
    double draw(Rng& rng) const { return quantile(rng.uniform01()); }

    double support_max() const { return x_max_; }

  private:
    ShadowedRicianParams params_;
    double x_max_ = 0.0;
    std::vector<double> grid_x_;
    std::vector<double> grid_f_;
};

struct NakagamiParams {
    int m;
    double omega;
    NakagamiParams(int m_, double omega_);
};

double nakagami_pdf(double x, const NakagamiParams& p);
double nakagami_cdf(double x, const NakagamiParams& p);

// Deterministic link-budget terms.
struct LinkBudgetParams {
    double carrier_hz = 20e9;
    double tx_antenna_gain_dbi = 6.98;
    double rx_antenna_gain_dbi = 6.98;
    double pointing_error_deg = 0.0;
    double aperture_diameter_m = 0.5;
    double beam_edge_constant = 0.0;  // k_s; 0 selects the boresight limit
};

struct NoiseParams {
    double temperature_k = 354.81;
    double bandwidth_hz = 50e6;
};

// (4 pi d f / c)^2, linear.
double free_space_path_loss(double distance_m, double carrier_hz);

// 2.7211e-20 f^2 theta_e^2 D_c^2 with theta_e in degrees (the constant is
// unit-bearing). Returns the raw factor; callers clamp to >= 1 when using it
// as an excess loss.
double pointing_loss(double carrier_hz, double pointing_error_deg, double aperture_diameter_m);

// G_k * (J1(ks)/(2 ks) + 36 J3(ks)/ks^3)^2. ks == 0 returns the peak gain.
double beam_gain(double peak_gain_linear, double k_s);

// Full satellite-HAP budget G_h G_k(theta) / (L_path * max(L_p, 1)), linear.
double shl_budget(const LinkBudgetParams& link, double distance_m);

// sigma^2 = k_B * T * B, watts. Rejects nonpositive T or B.
double noise_power(const NoiseParams& noise);

}  // namespace leofl
