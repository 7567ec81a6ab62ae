#pragma once

namespace leofl {

// Bessel functions of the first kind, implemented locally: ascending power
// series for small arguments, Hankel asymptotic expansion plus the standard
// three-term recurrence in order for large arguments.
double bessel_j0(double x);
double bessel_j1(double x);
double bessel_j3(double x);

// Finite-sum form of the confluent hypergeometric function 1F1(m; 1; z) for
// integer m >= 1:
//   e^z * sum_{i=0}^{m-1} (-1)^i (1-m)_i z^i / (i!)^2
double hyp1f1_finite(int m, double z);

// Regularized lower incomplete gamma P(a, y) for integer a >= 1,
// P(a,y) = 1 - e^{-y} sum_{n<a} y^n/n!  (exact finite sum).
double gamma_p_int(int a, double y);

// Gaussian tail Q(x) = P(N(0,1) > x).
double q_function(double x);

}  // namespace leofl
