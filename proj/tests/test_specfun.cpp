#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "leofl/specfun.hpp"

using namespace leofl;

namespace {

// Independent power-series oracle for 1F1(m; 1; z):
// sum_n (m)_n z^n / ((1)_n n!).
double hyp1f1_series(int m, double z) {
    double term = 1.0, sum = 1.0;
    for (int n = 1; n < 500; ++n) {
        term *= (m + n - 1.0) * z / (static_cast<double>(n) * n);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

}  // namespace

TEST_CASE("bessel J1 and J3 match the standard library across the range") {
    for (double x = 1e-6; x < 30.0; x += 0.0937) {
        double j1 = bessel_j1(x);
        double j3 = bessel_j3(x);
        double r1 = std::cyl_bessel_j(1.0, x);
        double r3 = std::cyl_bessel_j(3.0, x);
        CHECK(std::abs(j1 - r1) < 1e-10 * std::max(1.0, std::abs(r1)));
        CHECK(std::abs(j3 - r3) < 1e-10 * std::max(1.0, std::abs(r3)));
    }
}

TEST_CASE("bessel small-argument limits") {
    // J1(x) ~ x/2, J3(x) ~ x^3/48 for small x.
    double x = 1e-5;
    CHECK(bessel_j1(x) == doctest::Approx(x / 2.0).epsilon(1e-9));
    CHECK(bessel_j3(x) == doctest::Approx(x * x * x / 48.0).epsilon(1e-7));
}

TEST_CASE("bessel odd symmetry") {
    CHECK(bessel_j1(-2.5) == doctest::Approx(-bessel_j1(2.5)).epsilon(1e-14));
    CHECK(bessel_j3(-2.5) == doctest::Approx(-bessel_j3(2.5)).epsilon(1e-14));
}

TEST_CASE("hyp1f1 finite form: m=1 reduces to e^z") {
    for (double z : {0.0, 0.3, 1.0, 5.0, 19.0})
        CHECK(hyp1f1_finite(1, z) == doctest::Approx(std::exp(z)).epsilon(1e-14));
}

TEST_CASE("hyp1f1 finite form: m=2 identity e^z (1+z)") {
    double v = hyp1f1_finite(2, 0.7);
    CHECK(v == doctest::Approx(std::exp(0.7) * 1.7).epsilon(1e-13));
    CHECK(v == doctest::Approx(3.42337960269981).epsilon(1e-12));
}

TEST_CASE("hyp1f1 finite form matches the direct power series") {
    for (int m = 1; m <= 6; ++m)
        for (double z = 0.0; z <= 20.0; z += 0.73) {
            double a = hyp1f1_finite(m, z);
            double b = hyp1f1_series(m, z);
            CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)));
        }
}

TEST_CASE("hyp1f1 rejects m < 1") {
    CHECK_THROWS(hyp1f1_finite(0, 1.0));
}

TEST_CASE("regularized lower incomplete gamma, integer order") {
    // a=1: P(1,y) = 1 - e^{-y}.
    for (double y : {0.1, 1.0, 3.0})
        CHECK(gamma_p_int(1, y) == doctest::Approx(1.0 - std::exp(-y)).epsilon(1e-14));
    // a=3, y=2: 1 - e^{-2}(1 + 2 + 2) = 1 - 5 e^{-2}.
    CHECK(gamma_p_int(3, 2.0) == doctest::Approx(1.0 - 5.0 * std::exp(-2.0)).epsilon(1e-14));
    CHECK(gamma_p_int(2, 0.0) == 0.0);
}

TEST_CASE("gaussian Q function endpoints") {
    CHECK(q_function(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(q_function(1.6448536269514722) == doctest::Approx(0.05).epsilon(1e-9));
}
