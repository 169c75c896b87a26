#include "lamegap/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace lamegap {

double Superellipse::implicit(const Eigen::Vector2d& x) const
{
    return std::pow(std::abs(x[0]) / r, m) + std::pow(std::abs(x[1] - c) / r, m) - 1.0;
}

Eigen::Vector2d Superellipse::point(double t) const
{
    const double ct = std::cos(t);
    const double st = std::sin(t);
    auto shape = [this](double u) {
        return (u >= 0.0 ? 1.0 : -1.0) * std::pow(std::abs(u), 2.0 / m);
    };
    return {r * shape(ct), c + r * shape(st)};
}

Domain2D Domain2D::squares(double r1, double r2, double m, double eps, double outer_factor)
{
    if (eps < 0.0) {
        throw std::invalid_argument("Domain2D: eps must be >= 0");
    }
    Domain2D dom;
    dom.profile = curvilinear_square_profile(r1, r2, m);
    dom.eps = eps;
    dom.inc1 = {r1, eps + r1, m};
    dom.inc2 = {r2, -r2, m};
    dom.outer_radius = outer_factor * std::max(r1, r2);
    dom.outer_center = Eigen::Vector2d(0.0, 0.5 * (eps + r1 - r2));
    dom.chart_halfwidth = dom.profile.R;
    return dom;
}

bool Domain2D::in_matrix(const Eigen::Vector2d& x) const
{
    if ((x - outer_center).norm() >= outer_radius) {
        return false;
    }
    return !inc1.inside(x) && !inc2.inside(x);
}

double Domain2D::gap_top(double x1) const
{
    Eigen::VectorXd xp(1);
    xp[0] = x1;
    return eps + profile.h1(xp);
}

double Domain2D::gap_bottom(double x1) const
{
    Eigen::VectorXd xp(1);
    xp[0] = x1;
    return profile.h2(xp);
}

} // namespace lamegap
