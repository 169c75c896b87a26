#pragma once

#include <Eigen/Dense>

#include <functional>

namespace lamegap {

/// Analytic gap geometry near the almost-touching point: the inclusion
/// boundaries are graphs x_d = eps + h1(x') and x_d = h2(x') over the chart
/// |x'| <= 2R, with h1 - h2 = tau |x'|^m + O(|x'|^{m+sigma}).
///
/// Profiles carry first and second derivatives of h1, h2; they are required
/// by the auxiliary-field gradients, so sample-only profiles are not
/// representable here.
struct GapProfile {
    int d = 2;          // ambient dimension, x' has d-1 components
    double m = 2.0;     // convexity exponent
    double tau = 1.0;   // leading coefficient
    double sigma = 2.0; // remainder exponent
    double R = 0.5;     // chart half-width
    double kappa1 = 0.0;
    double kappa2 = 0.0;

    std::function<double(const Eigen::VectorXd&)> h1;
    std::function<double(const Eigen::VectorXd&)> h2;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_h1;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_h2;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess_h1;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess_h2;

    void require_chart(const Eigen::VectorXd& xprime) const;
};

/// Gap thickness delta(x') = eps + h1(x') - h2(x'); valid on |x'| <= 2R.
double delta(const GapProfile& p, double eps, const Eigen::VectorXd& xprime);
Eigen::VectorXd delta_grad(const GapProfile& p, const Eigen::VectorXd& xprime);
Eigen::MatrixXd delta_hess(const GapProfile& p, const Eigen::VectorXd& xprime);

/// Symmetric power-law profile h1 = tau/2 |x'|^m, h2 = -tau/2 |x'|^m
/// in dimension d (exact remainder zero).
GapProfile power_profile(int d, double m, double tau, double R = 0.5);

/// Two curvilinear squares with rounded-off angles (d = 2):
///   |x1|^m + |x2 - eps - r1|^m = r1^m   (upper),
///   |x1|^m + |x2 + r2|^m = r2^m         (lower).
/// Gives tau0 = (1/m)(r1^{1-m} + r2^{1-m}) and remainder exponent sigma = m.
GapProfile curvilinear_square_profile(double r1, double r2, double m);

/// Characteristic predicate of the thin gap
///   Omega_t(z') = { h2(x') < x_d < eps + h1(x'), |x' - z'| < t }  (open set).
bool in_omega_t(const GapProfile& p, double eps, const Eigen::VectorXd& zprime, double t,
                const Eigen::VectorXd& x);

} // namespace lamegap
