#include "lamegap/special.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lamegap {

namespace {

// Lanczos, g = 7, 9 terms (Godfrey coefficients).
double lanczos_gamma(double x)
{
    static const double coef[9] = {
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    };
    const double g = 7.0;
    double a = coef[0];
    for (int k = 1; k < 9; ++k) {
        a += coef[k] / (x - 1.0 + static_cast<double>(k));
    }
    const double t = x - 1.0 + g + 0.5;
    return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, x - 0.5) * std::exp(-t) * a;
}

} // namespace

double gamma_function(double x)
{
    if (!(x > 0.0)) {
        throw std::domain_error("gamma_function: argument must be positive");
    }
    if (x < 0.5) {
        // Reflection keeps the Lanczos argument away from the pole.
        return std::numbers::pi / (std::sin(std::numbers::pi * x) * lanczos_gamma(1.0 - x));
    }
    return lanczos_gamma(x);
}

double gamma_bracket(int d, int i, double m)
{
    const double crit = static_cast<double>(d + i - 1);
    if (m > crit) {
        const double s = crit / m;
        return gamma_function(1.0 - s) * gamma_function(s);
    }
    if (m == crit) {
        return 1.0;
    }
    throw std::domain_error("gamma_bracket: requires m >= d+i-1");
}

double unit_ball_volume(int k)
{
    if (k < 0) {
        throw std::domain_error("unit_ball_volume: negative dimension");
    }
    if (k == 0) {
        return 1.0;
    }
    const double kd = static_cast<double>(k);
    return std::pow(std::numbers::pi, kd / 2.0) / gamma_function(kd / 2.0 + 1.0);
}

} // namespace lamegap
