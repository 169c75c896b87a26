#pragma once

#include "lamegap/elasticity.hpp"
#include "lamegap/gap_profile.hpp"

#include <Eigen/Dense>

#include <functional>

namespace lamegap {

/// Keller scalar v = (x_d - h2(x')) / delta(x'); equals 1 on the upper gap
/// boundary and 0 on the lower one.
double keller_v(const GapProfile& p, double eps, const Eigen::VectorXd& x);
Eigen::VectorXd keller_v_grad(const GapProfile& p, double eps, const Eigen::VectorXd& x);

/// f(v) = (v - 1/2)^2 / 2 - 1/8 and its derivative; f(0) = f(1) = 0.
struct FProfile {
    double value;
    double derivative;
};
FProfile f_profile(double vbar);

/// Explicit auxiliary field u1^alpha = psi_alpha v + F_alpha, where the
/// correction F_alpha couples the (lambda+mu)/mu and (lambda+mu)/(lambda+2mu)
/// factors with the gap-thickness gradient.  u1^alpha equals psi_alpha on the
/// upper boundary and 0 on the lower one; u1^alpha + u2^alpha = psi_alpha
/// holds identically.
Eigen::VectorXd aux_u1(int alpha, const GapProfile& p, double eps,
                       const LameParameters& params, const Eigen::VectorXd& x);
Eigen::MatrixXd aux_grad_u1(int alpha, const GapProfile& p, double eps,
                            const LameParameters& params, const Eigen::VectorXd& x);
Eigen::VectorXd aux_u2(int alpha, const GapProfile& p, double eps,
                       const LameParameters& params, const Eigen::VectorXd& x);
Eigen::MatrixXd aux_grad_u2(int alpha, const GapProfile& p, double eps,
                            const LameParameters& params, const Eigen::VectorXd& x);

/// Boundary data for the general auxiliary field: a vector field with its
/// Jacobian and a C^2-norm bound.  Trace-only data should be encoded as a
/// field constant in x_d; rigid-motion data may be passed as the full affine
/// field, in which case the general field reduces exactly to aux_u1.
struct BoundaryField {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
    double c2_norm = 0.0;
};

BoundaryField zero_field(int d);
BoundaryField rigid_field(const RigidMotionBasis& basis, int alpha);

/// General auxiliary field for data (psi on the upper boundary, phi on the
/// lower one) and its gradient.
Eigen::VectorXd general_aux_v(const BoundaryField& psi, const BoundaryField& phi,
                              const GapProfile& p, double eps, const LameParameters& params,
                              const Eigen::VectorXd& x);
Eigen::MatrixXd general_aux_v_grad(const BoundaryField& psi, const BoundaryField& phi,
                                   const GapProfile& p, double eps,
                                   const LameParameters& params, const Eigen::VectorXd& x);

/// Residual scale |psi-phi| delta^{(m-2)/m} + delta (||psi|| + ||phi||)
///                + |grad_{x'}(psi - phi)|  (traces composed with the charts).
double residual_scale(const BoundaryField& psi, const BoundaryField& phi, const GapProfile& p,
                      double eps, const Eigen::VectorXd& xprime);

/// Blow-up rate index rho_i(d, m; eps), i in {0, 2}:
///   eps^{(d+i-1)/m - 1}  if m > d+i-1,
///   |ln eps|             if m = d+i-1,
///   1                    if m < d+i-1.
double rho(int i, int d, double m, double eps);

/// log-factor helper |ln eps| (d = 2) / 1 (d >= 3); reporting only.
double rho_d_log(int d, double eps);

enum class RemainderKind { Eps0, Eps2, EpsBar0, EpsBar2, EpsHat0, EpsHat2 };

/// The six remainder-order functions; each is defined only on the branch
/// domain of its case split and throws std::domain_error elsewhere.
double remainder_order(RemainderKind kind, int d, double m, double sigma, double eps);

/// The definite constants M0, M2, the Lame factors L_d^alpha, and the
/// bracketed Gamma values for the pair of exponents (d-1)/m, (d+1)/m.
struct ConstantsBundle {
    int d = 2;
    double m = 2.0;
    double tau = 1.0;
    double omega = 2.0; // volume of the (d-1)-ball
    double M0 = 0.0;
    double M2 = 0.0;
    bool M0_valid = false; // m >= d-1
    bool M2_valid = false; // m >= d+1
    double gamma_bracket_0 = 0.0;
    double gamma_bracket_2 = 0.0;
    Eigen::VectorXd L; // L_d^alpha, alpha = 1..d(d+1)/2
};

ConstantsBundle constants(int d, double m, double tau, const LameParameters& params);

/// Bundles (d, m, sigma) for the rate and remainder functions.
struct RateFunctions {
    int d = 2;
    double m = 2.0;
    double sigma = 2.0;

    double rho0(double eps) const { return rho(0, d, m, eps); }
    double rho2(double eps) const { return rho(2, d, m, eps); }
    double order(RemainderKind kind, double eps) const
    {
        return remainder_order(kind, d, m, sigma, eps);
    }
};

} // namespace lamegap
