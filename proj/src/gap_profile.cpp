#include "lamegap/gap_profile.hpp"

#include <cmath>
#include <stdexcept>

namespace lamegap {

namespace {

// |t|^m and derivatives, smooth through 0 for m >= 2.
double pow_abs(double t, double m) { return std::pow(std::abs(t), m); }

double dpow_abs(double t, double m)
{
    if (t == 0.0) {
        return 0.0;
    }
    return m * std::pow(std::abs(t), m - 1.0) * (t > 0.0 ? 1.0 : -1.0);
}

double d2pow_abs(double t, double m)
{
    if (t == 0.0) {
        return m == 2.0 ? 2.0 : 0.0;
    }
    return m * (m - 1.0) * std::pow(std::abs(t), m - 2.0);
}

} // namespace

void GapProfile::require_chart(const Eigen::VectorXd& xprime) const
{
    if (xprime.size() != d - 1) {
        throw std::invalid_argument("GapProfile: x' dimension mismatch");
    }
    if (xprime.norm() > 2.0 * R * (1.0 + 1e-12)) {
        throw std::domain_error("GapProfile: point outside the 2R chart");
    }
}

double delta(const GapProfile& p, double eps, const Eigen::VectorXd& xprime)
{
    p.require_chart(xprime);
    return eps + p.h1(xprime) - p.h2(xprime);
}

Eigen::VectorXd delta_grad(const GapProfile& p, const Eigen::VectorXd& xprime)
{
    p.require_chart(xprime);
    return p.grad_h1(xprime) - p.grad_h2(xprime);
}

Eigen::MatrixXd delta_hess(const GapProfile& p, const Eigen::VectorXd& xprime)
{
    p.require_chart(xprime);
    return p.hess_h1(xprime) - p.hess_h2(xprime);
}

GapProfile power_profile(int d, double m, double tau, double R)
{
    if (d < 2 || m < 2.0 || tau <= 0.0 || R <= 0.0) {
        throw std::invalid_argument("power_profile: invalid parameters");
    }
    GapProfile p;
    p.d = d;
    p.m = m;
    p.tau = tau;
    p.sigma = m; // remainder identically zero
    p.R = R;
    p.kappa1 = tau * m * m;
    p.kappa2 = tau * (1.0 + m * m) * std::pow(2.0 * R, std::max(0.0, m - 2.0));

    auto radial = [m](const Eigen::VectorXd& xp) { return std::pow(xp.norm(), m); };
    auto radial_grad = [m](const Eigen::VectorXd& xp) -> Eigen::VectorXd {
        const double r = xp.norm();
        if (r == 0.0) {
            return Eigen::VectorXd::Zero(xp.size());
        }
        return m * std::pow(r, m - 2.0) * xp;
    };
    auto radial_hess = [m](const Eigen::VectorXd& xp) -> Eigen::MatrixXd {
        const auto n = xp.size();
        const double r = xp.norm();
        if (r == 0.0) {
            if (m == 2.0) {
                return 2.0 * Eigen::MatrixXd::Identity(n, n);
            }
            return Eigen::MatrixXd::Zero(n, n);
        }
        Eigen::MatrixXd h = m * std::pow(r, m - 2.0) * Eigen::MatrixXd::Identity(n, n);
        h += m * (m - 2.0) * std::pow(r, m - 4.0) * (xp * xp.transpose());
        return h;
    };

    const double half = 0.5 * tau;
    p.h1 = [radial, half](const Eigen::VectorXd& xp) { return half * radial(xp); };
    p.h2 = [radial, half](const Eigen::VectorXd& xp) { return -half * radial(xp); };
    p.grad_h1 = [radial_grad, half](const Eigen::VectorXd& xp) -> Eigen::VectorXd {
        return half * radial_grad(xp);
    };
    p.grad_h2 = [radial_grad, half](const Eigen::VectorXd& xp) -> Eigen::VectorXd {
        return -half * radial_grad(xp);
    };
    p.hess_h1 = [radial_hess, half](const Eigen::VectorXd& xp) -> Eigen::MatrixXd {
        return half * radial_hess(xp);
    };
    p.hess_h2 = [radial_hess, half](const Eigen::VectorXd& xp) -> Eigen::MatrixXd {
        return -half * radial_hess(xp);
    };
    return p;
}

GapProfile curvilinear_square_profile(double r1, double r2, double m)
{
    if (!(r1 > 0.0) || !(r2 > 0.0)) {
        throw std::invalid_argument("curvilinear_square_profile: radii must be positive");
    }
    if (m < 2.0) {
        throw std::invalid_argument("curvilinear_square_profile: m must be >= 2");
    }
    GapProfile p;
    p.d = 2;
    p.m = m;
    p.tau = (std::pow(r1, 1.0 - m) + std::pow(r2, 1.0 - m)) / m;
    p.sigma = m; // Taylor remainder is O(|x1|^{2m})
    p.R = 0.35 * std::min(r1, r2);
    p.kappa1 = 4.0 * m * m * std::pow(std::min(r1, r2), 1.0 - m);
    p.kappa2 = p.kappa1 * (1.0 + std::pow(2.0 * p.R, std::max(0.0, m - 2.0)));

    // cap(t; r) = r - (r^m - |t|^m)^{1/m}, the sagitta of the superellipse.
    auto cap = [m](double t, double r) { return r - std::pow(std::pow(r, m) - pow_abs(t, m), 1.0 / m); };
    auto dcap = [m](double t, double r) {
        const double u = pow_abs(t, m);
        const double base = std::pow(r, m) - u;
        return (1.0 / m) * std::pow(base, 1.0 / m - 1.0) * dpow_abs(t, m);
    };
    auto d2cap = [m](double t, double r) {
        const double u = pow_abs(t, m);
        const double base = std::pow(r, m) - u;
        const double du = dpow_abs(t, m);
        const double d2u = d2pow_abs(t, m);
        return (1.0 / m) * (1.0 / m - 1.0) * std::pow(base, 1.0 / m - 2.0) * (-du) * du +
               (1.0 / m) * std::pow(base, 1.0 / m - 1.0) * d2u;
    };

    p.h1 = [cap, r1](const Eigen::VectorXd& xp) { return cap(xp[0], r1); };
    p.h2 = [cap, r2](const Eigen::VectorXd& xp) { return -cap(xp[0], r2); };
    p.grad_h1 = [dcap, r1](const Eigen::VectorXd& xp) -> Eigen::VectorXd {
        Eigen::VectorXd g(1);
        g[0] = dcap(xp[0], r1);
        return g;
    };
    p.grad_h2 = [dcap, r2](const Eigen::VectorXd& xp) -> Eigen::VectorXd {
        Eigen::VectorXd g(1);
        g[0] = -dcap(xp[0], r2);
        return g;
    };
    p.hess_h1 = [d2cap, r1](const Eigen::VectorXd& xp) -> Eigen::MatrixXd {
        Eigen::MatrixXd h(1, 1);
        h(0, 0) = d2cap(xp[0], r1);
        return h;
    };
    p.hess_h2 = [d2cap, r2](const Eigen::VectorXd& xp) -> Eigen::MatrixXd {
        Eigen::MatrixXd h(1, 1);
        h(0, 0) = -d2cap(xp[0], r2);
        return h;
    };
    return p;
}

bool in_omega_t(const GapProfile& p, double eps, const Eigen::VectorXd& zprime, double t,
                const Eigen::VectorXd& x)
{
    if (zprime.size() != p.d - 1 || x.size() != p.d) {
        throw std::invalid_argument("in_omega_t: dimension mismatch");
    }
    if (zprime.norm() > p.R || !(t > 0.0) || t > 2.0 * p.R) {
        throw std::domain_error("in_omega_t: parameters out of chart");
    }
    const Eigen::VectorXd xp = x.head(p.d - 1);
    if ((xp - zprime).norm() >= t) {
        return false;
    }
    if (xp.norm() > 2.0 * p.R) {
        return false;
    }
    const double xd = x[p.d - 1];
    return xd > p.h2(xp) && xd < eps + p.h1(xp);
}

} // namespace lamegap
