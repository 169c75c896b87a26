#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

namespace lamegap {

/// Isotropic Lame material (lambda, mu) in dimension d, with the strong
/// ellipticity condition mu > 0, d*lambda + 2*mu > 0 enforced at construction.
/// An optional kappa3 asserts the bound box kappa3 <= mu, d*lambda+2*mu <= 1/kappa3.
class LameParameters {
public:
    LameParameters(double lambda, double mu, int d,
                   std::optional<double> kappa3 = std::nullopt);

    double lambda() const { return lambda_; }
    double mu() const { return mu_; }
    int dim() const { return d_; }

    /// Number of rigid motions, d(d+1)/2.
    int rigid_dim() const { return d_ * (d_ + 1) / 2; }

    /// The per-mode Lame factor: mu for alpha <= d-1, lambda+2mu for
    /// d <= alpha <= 2d-1, 2mu for alpha >= 2d.  (1-based alpha.)
    double lame_factor(int alpha) const;

private:
    double lambda_;
    double mu_;
    int d_;
};

/// Applies the isotropic stiffness tensor componentwise:
///   (C xi)_ij = lambda tr(xi) delta_ij + mu (xi_ij + xi_ji).
Eigen::MatrixXd stiffness_apply(const LameParameters& params, const Eigen::MatrixXd& xi);

/// (C xi, xi) for a symmetric matrix xi; rejects non-symmetric input.
double quadratic_form(const LameParameters& params, const Eigen::MatrixXd& xi);

/// The ordered basis of the rigid displacement space: translations e_alpha
/// (alpha <= d), then x_d e_{alpha-d} - x_{alpha-d} e_d (d+1 <= alpha <= 2d-1),
/// then the remaining rotations x_{j} e_{i} - x_{i} e_{j} with
/// 1 <= i < j < d enumerated lexicographically on (i, j).
class RigidMotionBasis {
public:
    explicit RigidMotionBasis(int d);

    int dim() const { return d_; }
    int size() const { return d_ * (d_ + 1) / 2; }

    /// psi_alpha(x), alpha 1-based.
    Eigen::VectorXd evaluate(int alpha, const Eigen::VectorXd& x) const;

    /// Constant Jacobian J_ij = d_j psi^i (skew for rotational modes).
    Eigen::MatrixXd jacobian(int alpha) const;

    /// For rotational modes (alpha > d) the active index pair (i, j),
    /// 1-based, meaning psi = x_j e_i - x_i e_j.
    std::pair<int, int> rotation_pair(int alpha) const;

    /// Stacks psi_alpha(p) for each sample point into a (d * npts) x size()
    /// matrix; full column rank certifies injectivity of the evaluation map.
    Eigen::MatrixXd evaluation_matrix(const std::vector<Eigen::VectorXd>& points) const;

private:
    int d_;
    std::vector<std::pair<int, int>> pairs_; // rotation pairs for alpha > d, 1-based
};

inline RigidMotionBasis rigid_basis(int d) { return RigidMotionBasis(d); }

} // namespace lamegap
