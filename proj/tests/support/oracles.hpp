#pragma once

// Test-only numerical oracles: adaptive quadrature, KS statistic, finite
// differences. Kept independent of the implementation paths they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// Adaptive Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(f, a, m, fa, flm, fm);
    double right = simpson(f, m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

// Composite panels guard against mass the top-level samples would miss.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10) {
    const int panels = 16;
    double h = (b - a) / panels;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        double lo = a + i * h, hi = lo + h;
        double m = 0.5 * (lo + hi);
        double fa = f(lo), fm = f(m), fb = f(hi);
        total += adaptive_simpson_rec(f, lo, hi, fa, fm, fb, simpson(f, lo, hi, fa, fm, fb),
                                      tol / panels, 48);
    }
    return total;
}

// One-sample Kolmogorov-Smirnov statistic against a supplied CDF.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        double u = cdf(samples[i]);
        d = std::max(d, std::max((i + 1) / n - u, u - i / n));
    }
    return d;
}

// Central finite-difference derivative.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracles
