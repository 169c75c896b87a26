#pragma once

#include "lamegap/gap_profile.hpp"

#include <Eigen/Dense>

namespace lamegap {

/// Superellipse |x1|^m + |x2 - c|^m = r^m centered at (0, c).
struct Superellipse {
    double r = 1.0;
    double c = 0.0;
    double m = 2.0;

    double implicit(const Eigen::Vector2d& x) const;
    bool inside(const Eigen::Vector2d& x) const { return implicit(x) < 0.0; }

    /// Angle parametrization x(t) = (r sgn(cos t)|cos t|^{2/m},
    ///                               c + r sgn(sin t)|sin t|^{2/m}).
    Eigen::Vector2d point(double t) const;
};

/// The 2D solver geometry: an outer circle far from two stacked superellipse
/// inclusions separated by the gap eps (eps = 0 is the touching configuration).
struct Domain2D {
    Eigen::Vector2d outer_center = Eigen::Vector2d::Zero();
    double outer_radius = 5.0;
    Superellipse inc1; // upper, center (0, eps + r1)
    Superellipse inc2; // lower, center (0, -r2)
    double eps = 1e-2;
    GapProfile profile;    // matching curvilinear-square profile
    double chart_halfwidth = 0.35; // gap-block half width (= profile.R)

    /// Two curvilinear squares (disks for m = 2) inside a circle of radius
    /// outer_factor * max(r1, r2) centered between the inclusions.
    static Domain2D squares(double r1, double r2, double m, double eps,
                            double outer_factor = 5.0);

    bool in_matrix(const Eigen::Vector2d& x) const;

    /// Gap boundary heights over the chart.
    double gap_top(double x1) const;    // eps + h1(x1)
    double gap_bottom(double x1) const; // h2(x1)
};

} // namespace lamegap
