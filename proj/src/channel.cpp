#include "leofl/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "leofl/constants.hpp"
#include "leofl/specfun.hpp"

namespace leofl {

ShadowedRicianParams::ShadowedRicianParams(double b_, int m_, double omega_)
    : b(b_), m(m_), omega(omega_) {
    if (!(b > 0.0)) throw std::invalid_argument("ShadowedRicianParams: b must be > 0");
    if (m < 1) throw std::invalid_argument("ShadowedRicianParams: m must be an integer >= 1");
    if (!(omega > 0.0)) throw std::invalid_argument("ShadowedRicianParams: omega must be > 0");
    // beta - delta = m / (2bm + omega) > 0 holds for any valid parameters,
    // but keep the guard: the CDF divides by it.
    if (!(beta() > delta() && delta() > 0.0))
        throw std::invalid_argument("ShadowedRicianParams: derived beta > delta > 0 violated");
}

ShadowedRicianParams ShadowedRicianParams::from_2b(double two_b, int m, double omega) {
    return ShadowedRicianParams(0.5 * two_b, m, omega);
}

double ShadowedRicianParams::mu() const {
    double two_b = 2.0 * b;
    return (1.0 / two_b) * std::pow(two_b * m / (two_b * m + omega), m);
}

double ShadowedRicianParams::beta() const { return 1.0 / (2.0 * b); }

double ShadowedRicianParams::delta() const {
    double two_b = 2.0 * b;
    return omega / (two_b * (two_b * m + omega));
}

namespace {

// Series coefficients c_i = (-1)^i (1-m)_i delta^i / (i!)^2, so that the
// density reads mu e^{-(beta-delta) x} sum_i c_i x^i.
std::vector<double> sr_coeffs(const ShadowedRicianParams& p) {
    std::vector<double> c(static_cast<size_t>(p.m));
    c[0] = 1.0;
    double d = p.delta();
    for (int i = 1; i < p.m; ++i)
        c[i] = c[i - 1] * (-1.0) * (i - p.m) * d / (static_cast<double>(i) * i);
    return c;
}

}  // namespace

double sr_pdf(double x, const ShadowedRicianParams& p) {
    if (x < 0.0) return 0.0;
    return p.mu() * std::exp(-p.beta() * x) * hyp1f1_finite(p.m, p.delta() * x);
}

double sr_cdf(double x, const ShadowedRicianParams& p) {
    if (x <= 0.0) return 0.0;
    double bd = p.beta() - p.delta();
    std::vector<double> c = sr_coeffs(p);
    // sum_i c_i * integral_x^inf t^i e^{-bd t} dt, via the closed form
    // e^{-bd x} sum_{j<=i} (i!/j!) x^j bd^{-(i-j+1)}.
    double tail = 0.0;
    for (int i = 0; i < p.m; ++i) {
        double inner = 0.0;
        double fact_ratio = 1.0;  // i!/j! descending from j=i
        double pw = std::pow(x, i);
        for (int j = i; j >= 0; --j) {
            inner += fact_ratio * pw * std::pow(bd, -(i - j + 1));
            fact_ratio *= j;  // i!/ (j-1)! = (i!/j!) * j
            pw /= (x > 0.0 ? x : 1.0);
        }
        tail += c[static_cast<size_t>(i)] * inner;
    }
    double f = 1.0 - p.mu() * std::exp(-bd * x) * tail;
    return std::clamp(f, 0.0, 1.0);
}

SrSampler::SrSampler(const ShadowedRicianParams& p) : params_(p) {
    // Find the effective support end: 1 - F < 1e-15.
    double x = 1.0;
    while (sr_cdf(x, params_) < 1.0 - 1e-15 && x < 1e9) x *= 2.0;
    x_max_ = x;
    const size_t n = 4096;
    grid_x_.resize(n + 1);
    grid_f_.resize(n + 1);
    for (size_t i = 0; i <= n; ++i) {
        grid_x_[i] = x_max_ * static_cast<double>(i) / n;
        grid_f_[i] = sr_cdf(grid_x_[i], params_);
    }
}

double SrSampler::quantile(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return x_max_;
    // Bracket from the table.
    auto it = std::lower_bound(grid_f_.begin(), grid_f_.end(), u);
    size_t hi_i = static_cast<size_t>(it - grid_f_.begin());
    if (hi_i == 0) hi_i = 1;
    if (hi_i >= grid_f_.size()) hi_i = grid_f_.size() - 1;
    double lo = grid_x_[hi_i - 1], hi = grid_x_[hi_i];
    double flo = grid_f_[hi_i - 1], fhi = grid_f_[hi_i];
    // Linear-in-probability initial guess, then safeguarded Newton.
    double x = (fhi > flo) ? lo + (hi - lo) * (u - flo) / (fhi - flo) : 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        double f = sr_cdf(x, params_) - u;
        if (std::abs(f) <= 1e-10) return x;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        double d = sr_pdf(x, params_);
        double step = d > 0.0 ? f / d : 0.0;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (hi - lo < 1e-14 * (1.0 + hi)) return 0.5 * (lo + hi);
        x = xn;
    }
    return x;
}

NakagamiParams::NakagamiParams(int m_, double omega_) : m(m_), omega(omega_) {
    if (m < 1) throw std::invalid_argument("NakagamiParams: m must be an integer >= 1");
    if (!(omega > 0.0)) throw std::invalid_argument("NakagamiParams: omega must be > 0");
}

double nakagami_pdf(double x, const NakagamiParams& p) {
    if (x < 0.0) return 0.0;
    if (x == 0.0) return p.m == 1 ? p.m / p.omega : 0.0;
    double r = p.m / p.omega;
    return std::pow(r, p.m) * std::pow(x, p.m - 1) * std::exp(-r * x) / std::tgamma(p.m);
}

double nakagami_cdf(double x, const NakagamiParams& p) {
    if (x <= 0.0) return 0.0;
    return gamma_p_int(p.m, p.m * x / p.omega);
}

double free_space_path_loss(double distance_m, double carrier_hz) {
    if (!(distance_m > 0.0)) throw std::invalid_argument("free_space_path_loss: distance must be > 0");
    double v = 4.0 * kPi * distance_m * carrier_hz / kSpeedOfLight;
    return v * v;
}

double pointing_loss(double carrier_hz, double pointing_error_deg, double aperture_diameter_m) {
    return 2.7211e-20 * carrier_hz * carrier_hz * pointing_error_deg * pointing_error_deg *
           aperture_diameter_m * aperture_diameter_m;
}

double beam_gain(double peak_gain_linear, double k_s) {
    if (k_s < 0.0) throw std::invalid_argument("beam_gain: k_s must be >= 0");
    if (k_s == 0.0) return peak_gain_linear;  // J1(x)/2x -> 1/4, 36 J3(x)/x^3 -> 3/4
    double bracket = bessel_j1(k_s) / (2.0 * k_s) + 36.0 * bessel_j3(k_s) / (k_s * k_s * k_s);
    return peak_gain_linear * bracket * bracket;
}

double shl_budget(const LinkBudgetParams& link, double distance_m) {
    double g_rx = db_to_linear(link.rx_antenna_gain_dbi);
    double g_tx = beam_gain(db_to_linear(link.tx_antenna_gain_dbi), link.beam_edge_constant);
    double lp = std::max(
        pointing_loss(link.carrier_hz, link.pointing_error_deg, link.aperture_diameter_m), 1.0);
    return g_rx * g_tx / (free_space_path_loss(distance_m, link.carrier_hz) * lp);
}

double noise_power(const NoiseParams& noise) {
    if (!(noise.temperature_k > 0.0)) throw std::invalid_argument("noise_power: T must be > 0");
    if (!(noise.bandwidth_hz > 0.0)) throw std::invalid_argument("noise_power: B must be > 0");
    return kBoltzmann * noise.temperature_k * noise.bandwidth_hz;
}

}  // namespace leofl
