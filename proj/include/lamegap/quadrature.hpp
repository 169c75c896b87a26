#pragma once

#include <functional>

namespace lamegap {

/// Adaptive Gauss-Kronrod 15(7) quadrature on [a, b].
/// Bisects until the local Kronrod-minus-Gauss error estimate is below
/// rel_tol * |whole| + abs_tol, with a recursion depth cap.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, double abs_tol = 1e-14, int max_depth = 48);

} // namespace lamegap
