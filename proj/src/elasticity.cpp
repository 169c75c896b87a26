#include "lamegap/elasticity.hpp"

#include <cmath>
#include <stdexcept>

namespace lamegap {

LameParameters::LameParameters(double lambda, double mu, int d, std::optional<double> kappa3)
    : lambda_(lambda), mu_(mu), d_(d)
{
    if (d < 2) {
        throw std::invalid_argument("LameParameters: dimension must be >= 2");
    }
    if (!(mu > 0.0) || !(d * lambda + 2.0 * mu > 0.0)) {
        throw std::invalid_argument("LameParameters: strong ellipticity violated");
    }
    if (kappa3) {
        const double k3 = *kappa3;
        if (!(k3 > 0.0) || !(k3 <= mu) || !(d * lambda + 2.0 * mu <= 1.0 / k3)) {
            throw std::invalid_argument("LameParameters: kappa3 bound box violated");
        }
    }
}

double LameParameters::lame_factor(int alpha) const
{
    if (alpha < 1 || alpha > rigid_dim()) {
        throw std::out_of_range("lame_factor: alpha out of range");
    }
    if (alpha <= d_ - 1) {
        return mu_;
    }
    if (alpha <= 2 * d_ - 1) {
        return lambda_ + 2.0 * mu_;
    }
    return 2.0 * mu_;
}

Eigen::MatrixXd stiffness_apply(const LameParameters& params, const Eigen::MatrixXd& xi)
{
    const int d = params.dim();
    if (xi.rows() != d || xi.cols() != d) {
        throw std::invalid_argument("stiffness_apply: matrix dimension mismatch");
    }
    Eigen::MatrixXd out = params.mu() * (xi + xi.transpose());
    out.diagonal().array() += params.lambda() * xi.trace();
    return out;
}

double quadratic_form(const LameParameters& params, const Eigen::MatrixXd& xi)
{
    const int d = params.dim();
    if (xi.rows() != d || xi.cols() != d) {
        throw std::invalid_argument("quadratic_form: matrix dimension mismatch");
    }
    const double scale = xi.cwiseAbs().maxCoeff();
    if ((xi - xi.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale)) {
        throw std::invalid_argument("quadratic_form: matrix must be symmetric");
    }
    const double tr = xi.trace();
    return params.lambda() * tr * tr + 2.0 * params.mu() * xi.squaredNorm();
}

RigidMotionBasis::RigidMotionBasis(int d) : d_(d)
{
    if (d < 2) {
        throw std::invalid_argument("RigidMotionBasis: dimension must be >= 2");
    }
    for (int i = 1; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            pairs_.emplace_back(i, j);
        }
    }
}

Eigen::VectorXd RigidMotionBasis::evaluate(int alpha, const Eigen::VectorXd& x) const
{
    if (x.size() != d_) {
        throw std::invalid_argument("RigidMotionBasis::evaluate: point dimension mismatch");
    }
    if (alpha < 1 || alpha > size()) {
        throw std::out_of_range("RigidMotionBasis::evaluate: alpha out of range");
    }
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d_);
    if (alpha <= d_) {
        v[alpha - 1] = 1.0;
    } else if (alpha <= 2 * d_ - 1) {
        const int i = alpha - d_; // 1-based, i < d
        v[i - 1] = x[d_ - 1];
        v[d_ - 1] = -x[i - 1];
    } else {
        const auto [i, j] = rotation_pair(alpha);
        v[i - 1] = x[j - 1];
        v[j - 1] = -x[i - 1];
    }
    return v;
}

Eigen::MatrixXd RigidMotionBasis::jacobian(int alpha) const
{
    if (alpha < 1 || alpha > size()) {
        throw std::out_of_range("RigidMotionBasis::jacobian: alpha out of range");
    }
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d_, d_);
    if (alpha <= d_) {
        return jac;
    }
    if (alpha <= 2 * d_ - 1) {
        const int i = alpha - d_;
        jac(i - 1, d_ - 1) = 1.0;
        jac(d_ - 1, i - 1) = -1.0;
        return jac;
    }
    const auto [i, j] = rotation_pair(alpha);
    jac(i - 1, j - 1) = 1.0;
    jac(j - 1, i - 1) = -1.0;
    return jac;
}

std::pair<int, int> RigidMotionBasis::rotation_pair(int alpha) const
{
    if (alpha <= d_ || alpha > size()) {
        throw std::out_of_range("RigidMotionBasis::rotation_pair: alpha is not rotational");
    }
    if (alpha <= 2 * d_ - 1) {
        return {alpha - d_, d_};
    }
    return pairs_[static_cast<std::size_t>(alpha - 2 * d_)];
}

Eigen::MatrixXd RigidMotionBasis::evaluation_matrix(
    const std::vector<Eigen::VectorXd>& points) const
{
    const int npts = static_cast<int>(points.size());
    Eigen::MatrixXd m(d_ * npts, size());
    for (int p = 0; p < npts; ++p) {
        for (int a = 1; a <= size(); ++a) {
            m.block(p * d_, a - 1, d_, 1) = evaluate(a, points[static_cast<std::size_t>(p)]);
        }
    }
    return m;
}

} // namespace lamegap
