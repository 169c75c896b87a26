#include "lamegap/asymptotics.hpp"

#include "lamegap/special.hpp"

#include <cmath>
#include <stdexcept>

namespace lamegap {

namespace {

void require_point(const GapProfile& p, const Eigen::VectorXd& x)
{
    if (x.size() != p.d) {
        throw std::invalid_argument("point dimension mismatch");
    }
    p.require_chart(x.head(p.d - 1));
}

} // namespace

double keller_v(const GapProfile& p, double eps, const Eigen::VectorXd& x)
{
    require_point(p, x);
    const Eigen::VectorXd xp = x.head(p.d - 1);
    return (x[p.d - 1] - p.h2(xp)) / delta(p, eps, xp);
}

Eigen::VectorXd keller_v_grad(const GapProfile& p, double eps, const Eigen::VectorXd& x)
{
    require_point(p, x);
    const int d = p.d;
    const Eigen::VectorXd xp = x.head(d - 1);
    const double del = delta(p, eps, xp);
    const double vbar = (x[d - 1] - p.h2(xp)) / del;
    const Eigen::VectorXd dh2 = p.grad_h2(xp);
    const Eigen::VectorXd dd = delta_grad(p, xp);
    Eigen::VectorXd g(d);
    for (int i = 0; i < d - 1; ++i) {
        g[i] = (-dh2[i] - vbar * dd[i]) / del;
    }
    g[d - 1] = 1.0 / del;
    return g;
}

FProfile f_profile(double vbar)
{
    const double c = vbar - 0.5;
    return {0.5 * c * c - 0.125, c};
}

namespace {

struct AuxFrame {
    int d;
    double del;
    double vbar;
    FProfile f;
    double c1; // (lambda+mu)/mu
    double c2; // (lambda+mu)/(lambda+2mu)
    Eigen::VectorXd dvbar;  // d
    Eigen::VectorXd ddelta; // d-1
    Eigen::MatrixXd hdelta; // (d-1) x (d-1)
};

AuxFrame make_frame(const GapProfile& p, double eps, const LameParameters& params,
                    const Eigen::VectorXd& x)
{
    require_point(p, x);
    AuxFrame fr;
    fr.d = p.d;
    const Eigen::VectorXd xp = x.head(p.d - 1);
    fr.del = delta(p, eps, xp);
    fr.vbar = (x[p.d - 1] - p.h2(xp)) / fr.del;
    fr.f = f_profile(fr.vbar);
    fr.c1 = (params.lambda() + params.mu()) / params.mu();
    fr.c2 = (params.lambda() + params.mu()) / (params.lambda() + 2.0 * params.mu());
    fr.dvbar = keller_v_grad(p, eps, x);
    fr.ddelta = delta_grad(p, xp);
    fr.hdelta = delta_hess(p, xp);
    return fr;
}

// v = psi*vbar + phi*(1-vbar) + c1 f (psi^d - phi^d) sum_i d_i(delta) e_i
//     + c2 f sum_i (psi^i - phi^i) d_i(delta) e_d,
// with psi, phi evaluated at the volume point.
Eigen::VectorXd aux_value(const AuxFrame& fr, const Eigen::VectorXd& psi,
                          const Eigen::VectorXd& phi)
{
    const int d = fr.d;
    Eigen::VectorXd out = psi * fr.vbar + phi * (1.0 - fr.vbar);
    const double jump_d = psi[d - 1] - phi[d - 1];
    for (int i = 0; i < d - 1; ++i) {
        out[i] += fr.c1 * fr.f.value * jump_d * fr.ddelta[i];
    }
    double s = 0.0;
    for (int i = 0; i < d - 1; ++i) {
        s += (psi[i] - phi[i]) * fr.ddelta[i];
    }
    out[d - 1] += fr.c2 * fr.f.value * s;
    return out;
}

Eigen::MatrixXd aux_jacobian(const AuxFrame& fr, const Eigen::VectorXd& psi,
                             const Eigen::MatrixXd& jpsi, const Eigen::VectorXd& phi,
                             const Eigen::MatrixXd& jphi)
{
    const int d = fr.d;
    // leading part psi*vbar + phi*(1-vbar)
    Eigen::MatrixXd jac = fr.vbar * jpsi + (1.0 - fr.vbar) * jphi;
    jac += (psi - phi) * fr.dvbar.transpose();

    const double jump_d = psi[d - 1] - phi[d - 1];
    const Eigen::VectorXd jump_d_grad = (jpsi.row(d - 1) - jphi.row(d - 1)).transpose();
    for (int i = 0; i < d - 1; ++i) {
        for (int j = 0; j < d; ++j) {
            double t = fr.f.derivative * fr.dvbar[j] * jump_d * fr.ddelta[i];
            t += fr.f.value * jump_d_grad[j] * fr.ddelta[i];
            if (j < d - 1) {
                t += fr.f.value * jump_d * fr.hdelta(i, j);
            }
            jac(i, j) += fr.c1 * t;
        }
    }
    double s = 0.0;
    for (int i = 0; i < d - 1; ++i) {
        s += (psi[i] - phi[i]) * fr.ddelta[i];
    }
    for (int j = 0; j < d; ++j) {
        double ds = 0.0;
        for (int i = 0; i < d - 1; ++i) {
            ds += (jpsi(i, j) - jphi(i, j)) * fr.ddelta[i];
            if (j < d - 1) {
                ds += (psi[i] - phi[i]) * fr.hdelta(i, j);
            }
        }
        jac(d - 1, j) += fr.c2 * (fr.f.derivative * fr.dvbar[j] * s + fr.f.value * ds);
    }
    return jac;
}

} // namespace

Eigen::VectorXd aux_u1(int alpha, const GapProfile& p, double eps, const LameParameters& params,
                       const Eigen::VectorXd& x)
{
    const RigidMotionBasis basis(p.d);
    const AuxFrame fr = make_frame(p, eps, params, x);
    return aux_value(fr, basis.evaluate(alpha, x), Eigen::VectorXd::Zero(p.d));
}

Eigen::MatrixXd aux_grad_u1(int alpha, const GapProfile& p, double eps,
                            const LameParameters& params, const Eigen::VectorXd& x)
{
    const RigidMotionBasis basis(p.d);
    const AuxFrame fr = make_frame(p, eps, params, x);
    return aux_jacobian(fr, basis.evaluate(alpha, x), basis.jacobian(alpha),
                        Eigen::VectorXd::Zero(p.d), Eigen::MatrixXd::Zero(p.d, p.d));
}

Eigen::VectorXd aux_u2(int alpha, const GapProfile& p, double eps, const LameParameters& params,
                       const Eigen::VectorXd& x)
{
    const RigidMotionBasis basis(p.d);
    return basis.evaluate(alpha, x) - aux_u1(alpha, p, eps, params, x);
}

Eigen::MatrixXd aux_grad_u2(int alpha, const GapProfile& p, double eps,
                            const LameParameters& params, const Eigen::VectorXd& x)
{
    const RigidMotionBasis basis(p.d);
    return basis.jacobian(alpha) - aux_grad_u1(alpha, p, eps, params, x);
}

BoundaryField zero_field(int d)
{
    BoundaryField f;
    f.value = [d](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(d); };
    f.jacobian = [d](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(d, d); };
    f.c2_norm = 0.0;
    return f;
}

BoundaryField rigid_field(const RigidMotionBasis& basis, int alpha)
{
    BoundaryField f;
    f.value = [basis, alpha](const Eigen::VectorXd& x) { return basis.evaluate(alpha, x); };
    f.jacobian = [basis, alpha](const Eigen::VectorXd&) { return basis.jacobian(alpha); };
    f.c2_norm = 2.0;
    return f;
}

Eigen::VectorXd general_aux_v(const BoundaryField& psi, const BoundaryField& phi,
                              const GapProfile& p, double eps, const LameParameters& params,
                              const Eigen::VectorXd& x)
{
    if (!psi.value || !phi.value) {
        throw std::invalid_argument("general_aux_v: missing boundary data");
    }
    const AuxFrame fr = make_frame(p, eps, params, x);
    return aux_value(fr, psi.value(x), phi.value(x));
}

Eigen::MatrixXd general_aux_v_grad(const BoundaryField& psi, const BoundaryField& phi,
                                   const GapProfile& p, double eps,
                                   const LameParameters& params, const Eigen::VectorXd& x)
{
    if (!psi.value || !phi.value || !psi.jacobian || !phi.jacobian) {
        throw std::invalid_argument("general_aux_v_grad: missing derivative data");
    }
    const AuxFrame fr = make_frame(p, eps, params, x);
    return aux_jacobian(fr, psi.value(x), psi.jacobian(x), phi.value(x), phi.jacobian(x));
}

double residual_scale(const BoundaryField& psi, const BoundaryField& phi, const GapProfile& p,
                      double eps, const Eigen::VectorXd& xprime)
{
    if (!psi.value || !phi.value || !psi.jacobian || !phi.jacobian) {
        throw std::invalid_argument("residual_scale: missing derivative data");
    }
    p.require_chart(xprime);
    const int d = p.d;
    const double del = delta(p, eps, xprime);

    Eigen::VectorXd top(d), bot(d);
    top.head(d - 1) = xprime;
    top[d - 1] = eps + p.h1(xprime);
    bot.head(d - 1) = xprime;
    bot[d - 1] = p.h2(xprime);

    const Eigen::VectorXd jump = psi.value(top) - phi.value(bot);
    const double term1 = jump.norm() * std::pow(del, (p.m - 2.0) / p.m);
    const double term2 = del * (psi.c2_norm + phi.c2_norm);

    // tangential derivative of the composed traces
    const Eigen::MatrixXd jp = psi.jacobian(top);
    const Eigen::MatrixXd jq = phi.jacobian(bot);
    const Eigen::VectorXd dh1 = p.grad_h1(xprime);
    const Eigen::VectorXd dh2 = p.grad_h2(xprime);
    Eigen::MatrixXd tang(d, d - 1);
    for (int i = 0; i < d - 1; ++i) {
        tang.col(i) = (jp.col(i) + jp.col(d - 1) * dh1[i]) - (jq.col(i) + jq.col(d - 1) * dh2[i]);
    }
    return term1 + term2 + tang.norm();
}

double rho(int i, int d, double m, double eps)
{
    if (i != 0 && i != 2) {
        throw std::invalid_argument("rho: index must be 0 or 2");
    }
    if (!(eps > 0.0) || !(eps < 1.0)) {
        throw std::domain_error("rho: eps must lie in (0, 1)");
    }
    const double crit = static_cast<double>(d + i - 1);
    if (m > crit) {
        return std::pow(eps, crit / m - 1.0);
    }
    if (m == crit) {
        return std::abs(std::log(eps));
    }
    return 1.0;
}

double rho_d_log(int d, double eps)
{
    if (!(eps > 0.0) || !(eps < 1.0)) {
        throw std::domain_error("rho_d_log: eps must lie in (0, 1)");
    }
    return d == 2 ? std::abs(std::log(eps)) : 1.0;
}

double remainder_order(RemainderKind kind, int d, double m, double sigma, double eps)
{
    if (!(eps > 0.0) || !(eps < 1.0)) {
        throw std::domain_error("remainder_order: eps must lie in (0, 1)");
    }
    if (!(sigma > 0.0)) {
        throw std::domain_error("remainder_order: sigma must be positive");
    }
    const double dd = static_cast<double>(d);
    const double lg = std::abs(std::log(eps));
    switch (kind) {
    case RemainderKind::Eps0: {
        if (m > dd - 1.0 + sigma && sigma >= 2.0) {
            return std::pow(eps, std::min({0.25, sigma / m, (m - dd - 1.0) / m}));
        }
        if (m > dd + 1.0 && m <= dd - 1.0 + sigma && sigma > 2.0) {
            return std::pow(eps, std::min(0.25, (m - dd - 1.0) / m));
        }
        if (m == dd + 1.0) {
            return 1.0 / lg;
        }
        throw std::domain_error("remainder_order: eps0 branch domain violated");
    }
    case RemainderKind::Eps2: {
        if (m > dd + 1.0 + sigma) {
            return std::pow(eps, std::min(0.25, sigma / m));
        }
        if (m == dd + 1.0 + sigma) {
            return std::max(std::pow(eps, 0.25), std::pow(eps, sigma / m) * lg);
        }
        if (m > dd + 1.0 && m < dd + 1.0 + sigma) {
            return std::pow(eps, std::min(0.25, (m - dd - 1.0) / m));
        }
        if (m == dd + 1.0) {
            return 1.0 / lg;
        }
        throw std::domain_error("remainder_order: eps2 branch domain violated");
    }
    case RemainderKind::EpsBar0: {
        if (m > dd - 1.0 + sigma && m < dd + 1.0 && sigma < 2.0) {
            return std::pow(eps, std::min(sigma / m, (dd + 1.0 - m) / (12.0 * m)));
        }
        if (m == dd - 1.0 + sigma && sigma < 2.0) {
            return std::max(std::pow(eps, sigma / m) * lg,
                            std::pow(eps, (dd + 1.0 - m) / (12.0 * m)));
        }
        if (m > dd - 1.0 && m < dd - 1.0 + sigma && sigma <= 2.0) {
            return std::pow(eps, std::min((m - dd + 1.0) / m, (dd + 1.0 - m) / (12.0 * m)));
        }
        if (m == dd - 1.0) {
            return 1.0 / lg;
        }
        throw std::domain_error("remainder_order: eps-bar0 branch domain violated");
    }
    case RemainderKind::EpsBar2: {
        if (m > dd - 1.0 && m < dd + 1.0) {
            return std::pow(eps, std::min((m - dd + 1.0) / m, (dd + 1.0 - m) / (12.0 * m)));
        }
        if (m == dd - 1.0) {
            return 1.0 / lg;
        }
        throw std::domain_error("remainder_order: eps-bar2 branch domain violated");
    }
    case RemainderKind::EpsHat0:
    case RemainderKind::EpsHat2: {
        const double i = (kind == RemainderKind::EpsHat0) ? 0.0 : 2.0;
        const double crit = dd + i - 1.0;
        if (m > crit + sigma) {
            return std::pow(eps, sigma / m);
        }
        if (m == crit + sigma) {
            return std::pow(eps, sigma / m) * lg;
        }
        if (m > crit && m < crit + sigma) {
            return std::pow(eps, 1.0 - crit / m);
        }
        if (m == crit) {
            return 1.0 / lg;
        }
        return std::pow(eps, std::min(1.0 / 6.0, (crit - m) / (12.0 * m)));
    }
    }
    throw std::logic_error("remainder_order: unreachable");
}

ConstantsBundle constants(int d, double m, double tau, const LameParameters& params)
{
    if (params.dim() != d) {
        throw std::invalid_argument("constants: dimension mismatch with parameters");
    }
    if (!(tau > 0.0) || m < 2.0) {
        throw std::invalid_argument("constants: invalid (m, tau)");
    }
    ConstantsBundle c;
    c.d = d;
    c.m = m;
    c.tau = tau;
    c.omega = unit_ball_volume(d - 1);
    c.M0_valid = m >= static_cast<double>(d - 1);
    c.M2_valid = m >= static_cast<double>(d + 1);
    if (c.M0_valid) {
        c.gamma_bracket_0 = gamma_bracket(d, 0, m);
        const double s = static_cast<double>(d - 1) / m;
        c.M0 = (d - 1) * c.omega * c.gamma_bracket_0 / (m * std::pow(tau, s));
    }
    if (c.M2_valid) {
        c.gamma_bracket_2 = gamma_bracket(d, 2, m);
        const double s = static_cast<double>(d + 1) / m;
        c.M2 = c.omega * c.gamma_bracket_2 / (m * std::pow(tau, s));
    }
    const int n = d * (d + 1) / 2;
    c.L.resize(n);
    for (int a = 1; a <= n; ++a) {
        c.L[a - 1] = params.lame_factor(a);
    }
    return c;
}

} // namespace lamegap
