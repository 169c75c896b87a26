#pragma once

namespace lamegap {

/// Gamma function for positive real arguments (Lanczos approximation,
/// better than 1e-12 relative on (0, 30]).
double gamma_function(double x);

/// The bracketed Gamma factor used by the gap constants: for s = (d+i-1)/m,
///   Gamma(1-s) * Gamma(s)   when m > d+i-1  (so s in (0,1)),
///   1                       when m = d+i-1.
/// Requests with m < d+i-1 are rejected.
double gamma_bracket(int d, int i, double m);

/// Volume of the k-dimensional unit ball.
double unit_ball_volume(int k);

} // namespace lamegap
