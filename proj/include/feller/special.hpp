#pragma once

namespace feller {

// Regularized lower incomplete gamma P(a, x) = gamma(a,x)/Gamma(a),
// series/continued-fraction hybrid, relative error <= 1e-12 for a > 0.
double gamma_p(double a, double x);

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

// Unregularized lower incomplete gamma gamma(a, x) = int_0^x u^{a-1} e^{-u} du.
double lower_incomplete_gamma(double a, double x);

// Probability that a squared-Bessel bridge of dimension dim < 2 from y0 to
// y1 over an interval of length dt stays strictly positive. Ratio of
// modified Bessel functions I_{1-dim/2} / I_{dim/2-1} at sqrt(y0*y1)/dt.
double besq_bridge_survival(double y0, double y1, double dim, double dt);

}  // namespace feller
