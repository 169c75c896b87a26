#include "lamegap/blowup.hpp"

#include "lamegap/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace lamegap {

namespace {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

double determinant(const MatrixXd& m)
{
    return Eigen::PartialPivLU<MatrixXd>(m).determinant();
}

} // namespace

Regime classify_regime(int d, double m)
{
    if (m >= d + 1) {
        return Regime::HighM;
    }
    if (m >= d - 1) {
        return Regime::MidM;
    }
    return Regime::LowM;
}

bool a11_entry_finite(int d, double m, int a, int b)
{
    if (a == b) {
        return a <= d ? m < d - 1 : m < d + 1;
    }
    if (a <= d && b <= d) {
        return d >= 3; // the 2D off-diagonal translation pair grows like |ln eps|
    }
    return true;
}

double StarredTables::a11_at(int a, int b) const
{
    if (a < 1 || a > nmodes() || b < 1 || b > nmodes()) {
        throw std::out_of_range("StarredTables::a11_at: mode out of range");
    }
    if (!a11_finite(a - 1, b - 1)) {
        std::ostringstream os;
        os << "a_11^{*" << a << b << "} is infinite in the touching configuration for d=" << d
           << ", m=" << m << " (requested outside its finiteness range)";
        throw std::domain_error(os.str());
    }
    return a11(a - 1, b - 1);
}

FactorMatrices assemble_matrices(const StarredTables& t, Regime regime)
{
    const int n = t.nmodes();
    const int d = t.d;
    const int k = n - d;

    FactorMatrices fm;
    fm.regime = regime;
    fm.d = d;
    fm.m = t.m;

    fm.D.resize(n, n);
    for (int b = 1; b <= n; ++b) {
        for (int a = 1; a <= n; ++a) {
            fm.D(b - 1, a - 1) = t.dsum(b - 1, a - 1);
        }
    }
    fm.det_D = determinant(fm.D);
    {
        Eigen::JacobiSVD<MatrixXd> svd(fm.D);
        fm.cond_D = svd.singularValues()(0) / std::max(svd.singularValues()(n - 1), 1e-300);
    }

    const VectorXd ysum = t.b1 + t.b2;

    if (regime == Regime::HighM) {
        for (int alpha = 1; alpha <= n; ++alpha) {
            MatrixXd f(1 + n, 1 + n);
            f(0, 0) = t.b1[alpha - 1];
            for (int g = 1; g <= n; ++g) {
                f(0, g) = t.bsum(alpha - 1, g - 1);
            }
            for (int b = 1; b <= n; ++b) {
                f(b, 0) = ysum[b - 1];
                for (int g = 1; g <= n; ++g) {
                    f(b, g) = t.dsum(b - 1, g - 1);
                }
            }
            fm.F.push_back(f);
            fm.det_F.push_back(determinant(f));
        }
        return fm;
    }

    if (regime == Regime::MidM) {
        // F0 = [[A0, B0], [C0, D]]
        MatrixXd f0(k + n, k + n);
        for (int r = 0; r < k; ++r) {
            for (int c = 0; c < k; ++c) {
                f0(r, c) = t.a11_at(d + 1 + r, d + 1 + c);
            }
            for (int c = 0; c < n; ++c) {
                f0(r, k + c) = t.bsum(d + r, c);
            }
        }
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < k; ++c) {
                f0(k + r, c) = t.csum(r, d + c);
            }
            for (int c = 0; c < n; ++c) {
                f0(k + r, k + c) = t.dsum(r, c);
            }
        }
        fm.F0 = f0;
        fm.det_F0 = determinant(f0);

        for (int alpha = 1; alpha <= d; ++alpha) {
            MatrixXd f(k + 1 + n, k + 1 + n);
            // A1 block (k+1 square), rows: alpha then d+1..n
            f(0, 0) = t.b1[alpha - 1];
            for (int c = 0; c < k; ++c) {
                f(0, 1 + c) = t.a11_at(alpha, d + 1 + c);
            }
            for (int r = 0; r < k; ++r) {
                f(1 + r, 0) = t.b1[d + r];
                for (int c = 0; c < k; ++c) {
                    f(1 + r, 1 + c) = t.a11_at(d + 1 + r, d + 1 + c);
                }
            }
            // B1 block ((k+1) x n)
            for (int c = 0; c < n; ++c) {
                f(0, k + 1 + c) = t.bsum(alpha - 1, c);
                for (int r = 0; r < k; ++r) {
                    f(1 + r, k + 1 + c) = t.bsum(d + r, c);
                }
            }
            // C1 block (n x (k+1)) and D
            for (int r = 0; r < n; ++r) {
                f(k + 1 + r, 0) = ysum[r];
                for (int c = 0; c < k; ++c) {
                    f(k + 1 + r, 1 + c) = t.csum(r, d + c);
                }
                for (int c = 0; c < n; ++c) {
                    f(k + 1 + r, k + 1 + c) = t.dsum(r, c);
                }
            }
            fm.F1.push_back(f);
            fm.det_F1.push_back(determinant(f));
        }

        for (int alpha = d + 1; alpha <= n; ++alpha) {
            MatrixXd f = fm.F0;
            const int col = alpha - d - 1; // column within the A0/C0 blocks
            for (int r = 0; r < k; ++r) {
                f(r, col) = t.b1[d + r];
            }
            for (int r = 0; r < n; ++r) {
                f(k + r, col) = ysum[r];
            }
            fm.F2.push_back(f);
            fm.det_F2.push_back(determinant(f));
        }
        return fm;
    }

    // LowM: full bordered matrices
    MatrixXd ffull(2 * n, 2 * n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            ffull(r, c) = t.a11_at(r + 1, c + 1);
            ffull(r, n + c) = t.bsum(r, c);
            ffull(n + r, c) = t.csum(r, c);
            ffull(n + r, n + c) = t.dsum(r, c);
        }
    }
    fm.Ffull = ffull;
    fm.det_Ffull = determinant(ffull);
    for (int alpha = 1; alpha <= n; ++alpha) {
        MatrixXd f = ffull;
        for (int r = 0; r < n; ++r) {
            f(r, alpha - 1) = t.b1[r];
            f(n + r, alpha - 1) = t.b1[r] + t.b2[r];
        }
        fm.F3.push_back(f);
        fm.det_F3.push_back(determinant(f));
    }
    return fm;
}

namespace {

StarredTables tables_from_set(const SubproblemSet& set, int d, double m)
{
    const int n = static_cast<int>(set.b1.size());
    StarredTables t;
    t.d = d;
    t.m = m;
    t.a11.resize(n, n);
    t.a11_finite.resize(n, n);
    t.bsum.resize(n, n);
    t.csum.resize(n, n);
    t.dsum.resize(n, n);
    for (int a = 1; a <= n; ++a) {
        for (int b = 1; b <= n; ++b) {
            // SubproblemSet stores a_{ij}^{alpha beta} at (beta-1, alpha-1)
            const double v11 = set.a11(b - 1, a - 1);
            const double v21 = set.a21(b - 1, a - 1);
            const double v12 = set.a12(b - 1, a - 1);
            const double v22 = set.a22(b - 1, a - 1);
            const bool fin = a11_entry_finite(d, m, a, b);
            t.a11_finite(a - 1, b - 1) = fin;
            t.a11(a - 1, b - 1) = fin ? v11 : std::numeric_limits<double>::quiet_NaN();
            t.bsum(a - 1, b - 1) = v11 + v21;
            t.csum(a - 1, b - 1) = v11 + v12;
            t.dsum(a - 1, b - 1) = v11 + v21 + v12 + v22;
        }
    }
    t.b1 = set.b1;
    t.b2 = set.b2;
    return t;
}

double rel_dev(double x, double y)
{
    const double scale = std::max({std::abs(x), std::abs(y), 1e-12});
    return std::abs(x - y) / scale;
}

CutData aux_cut_data(const GapProfile& profile, const LameParameters& params)
{
    return [profile, params](int which, int alpha, const Vector2d& x) -> Vector2d {
        Eigen::VectorXd xv(2);
        xv << x[0], x[1];
        if (which == 1) {
            return Vector2d(aux_u1(alpha, profile, 0.0, params, xv));
        }
        if (which == 2) {
            return Vector2d(aux_u2(alpha, profile, 0.0, params, xv));
        }
        return Vector2d::Zero();
    };
}

} // namespace

StarredQuantities starred_quantities(
    const Domain2D& touching_dom, const LameParameters& params,
    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& phi,
    const MeshGrading& grading, double stability_tol)
{
    if (touching_dom.eps != 0.0) {
        throw std::invalid_argument("starred_quantities: domain must be the touching one");
    }
    if (!(grading.eta > 0.0)) {
        throw std::invalid_argument("starred_quantities: cusp cutoff eta must be positive");
    }
    const double m = touching_dom.profile.m;
    StarredQuantities out;
    out.regime = classify_regime(2, m);
    out.eta = grading.eta;

    const CutData cut = aux_cut_data(touching_dom.profile, params);

    auto run = [&](double eta, std::shared_ptr<const LameSystem>& sys_out) {
        MeshGrading g = grading;
        g.eta = eta;
        auto sys = std::make_shared<LameSystem>(build_mesh(touching_dom, g), params);
        sys_out = sys;
        return solve_subproblems(sys, phi, 0.0, cut);
    };

    out.set = run(grading.eta, out.system);
    out.set_half = run(grading.eta / 2.0, out.system_half);
    out.tables = tables_from_set(out.set, 2, m);
    out.tables_half = tables_from_set(out.set_half, 2, m);
    out.factors = assemble_matrices(out.tables, out.regime);

    // stability over entries the regime actually consumes
    double dev = 0.0;
    const int n = out.tables.nmodes();
    for (int a = 0; a < n; ++a) {
        dev = std::max(dev, rel_dev(out.tables.b1[a], out.tables_half.b1[a]));
        dev = std::max(dev, rel_dev(out.tables.b2[a], out.tables_half.b2[a]));
        for (int b = 0; b < n; ++b) {
            dev = std::max(dev, rel_dev(out.tables.dsum(a, b), out.tables_half.dsum(a, b)));
            if (out.regime != Regime::HighM) {
                dev = std::max(dev, rel_dev(out.tables.bsum(a, b), out.tables_half.bsum(a, b)));
                dev = std::max(dev, rel_dev(out.tables.csum(a, b), out.tables_half.csum(a, b)));
                if (out.tables.a11_finite(a, b)) {
                    dev = std::max(dev, rel_dev(out.tables.a11(a, b), out.tables_half.a11(a, b)));
                }
            }
        }
    }
    out.max_rel_dev = dev;
    out.eta_stable = dev <= stability_tol;
    return out;
}

CoeffExpansion coeff_expansion(int alpha, int d, double m, double sigma, double eps,
                               const FactorMatrices& factors, const ConstantsBundle& constants)
{
    const int n = d * (d + 1) / 2;
    if (alpha < 1 || alpha > n) {
        throw std::out_of_range("coeff_expansion: alpha out of range");
    }
    const Regime regime = classify_regime(d, m);
    if (regime != factors.regime) {
        throw std::invalid_argument("coeff_expansion: factor matrices were assembled for a "
                                    "different regime");
    }
    auto hadamard = [](const MatrixXd& mm) {
        double s = 1.0;
        for (int r = 0; r < mm.rows(); ++r) {
            s *= mm.row(r).norm();
        }
        return s;
    };
    auto check_det = [&](double det, const MatrixXd& mm, const char* what) {
        if (std::abs(det) < 1e-10 * std::max(hadamard(mm), 1e-300)) {
            throw std::runtime_error(std::string("coeff_expansion: vanishing determinant of ") +
                                     what);
        }
    };

    CoeffExpansion out;
    const double lame = constants.L[alpha - 1];
    if (regime == Regime::HighM) {
        check_det(factors.det_D, factors.D, "D*");
        const double ratio = factors.det_F[static_cast<std::size_t>(alpha - 1)] / factors.det_D;
        if (alpha <= d) {
            out.value = ratio / (lame * constants.M0 * rho(0, d, m, eps));
            out.predicted_remainder = remainder_order(RemainderKind::Eps0, d, m, sigma, eps);
        } else {
            out.value = ratio / (lame * constants.M2 * rho(2, d, m, eps));
            out.predicted_remainder = remainder_order(RemainderKind::Eps2, d, m, sigma, eps);
        }
        return out;
    }
    if (regime == Regime::MidM) {
        check_det(factors.det_F0, factors.F0, "F0*");
        if (alpha <= d) {
            const double ratio =
                factors.det_F1[static_cast<std::size_t>(alpha - 1)] / factors.det_F0;
            out.value = ratio / (lame * constants.M0 * rho(0, d, m, eps));
            out.predicted_remainder = remainder_order(RemainderKind::EpsBar0, d, m, sigma, eps);
        } else {
            const double ratio =
                factors.det_F2[static_cast<std::size_t>(alpha - d - 1)] / factors.det_F0;
            out.value = ratio;
            out.predicted_remainder = remainder_order(RemainderKind::EpsBar2, d, m, sigma, eps);
        }
        return out;
    }
    check_det(factors.det_Ffull, factors.Ffull, "F*");
    out.value = factors.det_F3[static_cast<std::size_t>(alpha - 1)] / factors.det_Ffull;
    out.predicted_remainder =
        std::pow(eps, std::min(1.0 / 6.0, (d - 1.0 - m) / (12.0 * m)));
    return out;
}

namespace {

// (1 - u)^{1/m} remainder series: g(u) = 1 - (1-u)^{1/m} - u/m, accurate for
// small u where the direct difference cancels.
double cap_remainder_series(double u, double m)
{
    double term = -u / m; // k = 1 binomial term of (1-u)^{1/m}
    double sum = 0.0;
    for (int k = 1; k < 80; ++k) {
        term *= (1.0 / m - k) / (k + 1.0) * (-u);
        sum -= term; // g picks up -(binomial terms k >= 2)
        if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) {
            break;
        }
    }
    return sum;
}

} // namespace

GeometryConstants squares_geometry_constants(double r1, double r2, double m, double r0,
                                             const LameParameters& params,
                                             const MeshGrading& grading)
{
    if (!(r0 > 0.0) || r0 >= 0.5 * std::min(r1, r2)) {
        throw std::invalid_argument("squares_geometry_constants: need 0 < r0 < min(r1,r2)/2");
    }
    if (!(grading.eta > 0.0) || grading.eta >= 0.5 * r0) {
        throw std::invalid_argument("squares_geometry_constants: need 0 < eta < r0/2");
    }
    const Domain2D dom = Domain2D::squares(r1, r2, m, 0.0);
    if (r0 > dom.profile.R) {
        throw std::invalid_argument("squares_geometry_constants: r0 exceeds the gap chart");
    }
    const double tau0 = dom.profile.tau;

    GeometryConstants geo;
    geo.m = m;
    geo.r1 = r1;
    geo.r2 = r2;
    geo.r0 = r0;
    geo.tau0 = tau0;
    geo.eta = grading.eta;
    geo.alpha3_defined = m >= 3.0;

    // gap thickness and its deviation from the leading power
    auto gap = [&](double x) {
        Eigen::VectorXd xp(1);
        xp[0] = x;
        return dom.profile.h1(xp) - dom.profile.h2(xp);
    };
    auto gap_minus_lead = [&](double x) {
        const double u1 = std::pow(std::abs(x) / r1, m);
        const double u2 = std::pow(std::abs(x) / r2, m);
        return r1 * cap_remainder_series(u1, m) + r2 * cap_remainder_series(u2, m);
    };

    const CutData cut = aux_cut_data(dom.profile, params);

    auto kstar_at = [&](double eta, double r0_used, std::array<double, 3>& mstar,
                        std::array<double, 3>& mtilde, double& c1_out,
                        double& c2_out) -> std::array<double, 3> {
        MeshGrading g = grading;
        g.eta = eta;
        auto sys = std::make_shared<LameSystem>(build_mesh(dom, g), params);
        const RigidMotionBasis basis(2);

        std::array<double, 3> energy{};
        for (int alpha = 1; alpha <= 3; ++alpha) {
            const FieldSolution v = sys->solve(
                [&](int tag, const Vector2d& x) -> Vector2d {
                    if (tag == kInclusion1) {
                        return Vector2d(basis.evaluate(alpha, x));
                    }
                    if (tag == kCuspCut) {
                        return cut(1, alpha, x);
                    }
                    return Vector2d::Zero();
                },
                "v1s_" + std::to_string(alpha));
            energy[static_cast<std::size_t>(alpha - 1)] = v.energy;
        }

        // 1D gap extractions over (eta, r0)
        auto w_int = [&](auto weight) {
            return 2.0 * integrate([&](double x) { return weight(x) / gap(x); }, eta, r0_used,
                                   1e-11, 1e-13);
        };
        const double w_const = w_int([](double) { return 1.0; });
        const double w_x2 = w_int([](double x) { return x * x; });

        // C* corrections over (0, r0): written through the remainder series the
        // integrands are smooth and bounded through 0 (quadrature nodes never
        // hit the endpoint exactly)
        const double c1 = 2.0 * integrate(
                              [&](double x) {
                                  const double lead = tau0 * std::pow(std::abs(x), m);
                                  const double gml = gap_minus_lead(x);
                                  return -gml / ((lead + gml) * lead);
                              },
                              0.0, r0_used, 1e-11, 1e-13);
        const double c2 = 2.0 * integrate(
                              [&](double x) {
                                  const double lead = tau0 * std::pow(std::abs(x), m);
                                  const double gml = gap_minus_lead(x);
                                  return -x * x * gml / ((lead + gml) * lead);
                              },
                              0.0, r0_used, 1e-11, 1e-13);
        c1_out = c1;
        c2_out = c2;

        std::array<double, 3> k{};
        for (int alpha = 1; alpha <= 3; ++alpha) {
            const double lame = params.lame_factor(alpha);
            const double w = (alpha <= 2) ? w_const : w_x2;
            const double cst = (alpha <= 2) ? c1 : c2;
            const double mstar_a = energy[static_cast<std::size_t>(alpha - 1)] - lame * w;
            const double mtilde_a = mstar_a + lame * cst;
            mstar[static_cast<std::size_t>(alpha - 1)] = mstar_a;
            mtilde[static_cast<std::size_t>(alpha - 1)] = mtilde_a;
            double tail = 0.0;
            if (alpha <= 2) {
                tail = -2.0 * std::pow(r0_used, 1.0 - m) * lame / (tau0 * (m - 1.0));
            } else if (m == 3.0) {
                tail = 2.0 * (std::log(tau0) + 3.0 * std::log(r0_used)) * lame / (3.0 * tau0);
            } else if (m > 3.0) {
                tail = 2.0 * std::pow(r0_used, 3.0 - m) * lame / (tau0 * (3.0 - m));
            } else {
                tail = std::numeric_limits<double>::quiet_NaN(); // alpha = 3, m < 3
            }
            k[static_cast<std::size_t>(alpha - 1)] = mtilde_a + tail;
        }
        return k;
    };

    std::array<double, 3> mstar{}, mtilde{};
    double c1 = 0.0, c2 = 0.0;
    const std::array<double, 3> k_ref = kstar_at(grading.eta, r0, mstar, mtilde, c1, c2);
    std::array<double, 3> m_unused{}, mt_unused{};
    double c1u = 0.0, c2u = 0.0;
    const std::array<double, 3> k_half_r0 =
        kstar_at(grading.eta, r0 / 2.0, m_unused, mt_unused, c1u, c2u);
    const std::array<double, 3> k_half_eta =
        kstar_at(grading.eta / 2.0, r0, m_unused, mt_unused, c1u, c2u);

    geo.Mstar = Eigen::Vector3d(mstar[0], mstar[1], mstar[2]);
    geo.Mtilde = Eigen::Vector3d(mtilde[0], mtilde[1], mtilde[2]);
    geo.Cstar1 = c1;
    geo.Cstar2 = c2;
    geo.K = Eigen::Vector3d(k_ref[0], k_ref[1], k_ref[2]);

    const int n_check = geo.alpha3_defined ? 3 : 2;
    double dev_r0 = 0.0, dev_eta = 0.0;
    for (int a = 0; a < n_check; ++a) {
        dev_r0 = std::max(dev_r0, rel_dev(k_ref[static_cast<std::size_t>(a)],
                                          k_half_r0[static_cast<std::size_t>(a)]));
        dev_eta = std::max(dev_eta, rel_dev(k_ref[static_cast<std::size_t>(a)],
                                            k_half_eta[static_cast<std::size_t>(a)]));
    }
    geo.r0_rel_dev = dev_r0;
    geo.eta_rel_dev = dev_eta;

    const ConstantsBundle cb = constants(2, m, tau0, params);
    for (int alpha = 1; alpha <= 3; ++alpha) {
        const double lame = params.lame_factor(alpha);
        if (alpha <= 2) {
            geo.G[alpha - 1] = geo.K[alpha - 1] / (lame * cb.M0);
        } else if (geo.alpha3_defined) {
            geo.G[2] = geo.K[2] / (lame * cb.M2);
        } else {
            geo.G[2] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return geo;
}

double example_squares_expansion(int alpha, double m, double eps, const GeometryConstants& geo,
                                 const FactorMatrices& factors, const ConstantsBundle& constants)
{
    if (alpha < 1 || alpha > 3) {
        throw std::out_of_range("example_squares_expansion: alpha out of range (d = 2)");
    }
    if (alpha == 3 && m < 3.0 && factors.regime != Regime::MidM) {
        throw std::invalid_argument("example_squares_expansion: regime mismatch");
    }
    const double lame = constants.L[alpha - 1];
    if (m >= 3.0) {
        if (factors.regime != Regime::HighM) {
            throw std::invalid_argument("example_squares_expansion: m >= 3 needs HighM factors");
        }
        const double ratio = factors.det_F[static_cast<std::size_t>(alpha - 1)] / factors.det_D;
        if (alpha <= 2) {
            const double e_pow = std::pow(eps, (m - 1.0) / m);
            return ratio * e_pow / (lame * constants.M0) / (1.0 + geo.G[alpha - 1] * e_pow);
        }
        if (m == 3.0) {
            return ratio / (lame * constants.M2) / (std::abs(std::log(eps)) + geo.G[2]);
        }
        const double e_pow = std::pow(eps, (m - 3.0) / m);
        return ratio * e_pow / (lame * constants.M2) / (1.0 + geo.G[2] * e_pow);
    }
    // 2 <= m < 3
    if (factors.regime != Regime::MidM) {
        throw std::invalid_argument("example_squares_expansion: 2 <= m < 3 needs MidM factors");
    }
    if (alpha <= 2) {
        const double ratio = factors.det_F1[static_cast<std::size_t>(alpha - 1)] / factors.det_F0;
        const double e_pow = std::pow(eps, (m - 1.0) / m);
        return ratio * e_pow / (lame * constants.M0) / (1.0 + geo.G[alpha - 1] * e_pow);
    }
    return factors.det_F2[0] / factors.det_F0;
}

double strictly_convex_3d_geometry_constant(double kappa1, double kappa2, double R,
                                            double lame_factor_alpha, double m3_star_alpha)
{
    if (!(kappa1 > 0.0) || !(kappa2 > 0.0) || !(R > 0.0)) {
        throw std::invalid_argument("strictly_convex_3d_geometry_constant: bad parameters");
    }
    const double pi = std::numbers::pi_v<double>;
    const double integral = integrate(
        [&](double th) {
            const double c = std::cos(th), s = std::sin(th);
            return std::log(c * c / kappa1 + s * s / kappa2);
        },
        0.0, pi / 2.0);
    return 2.0 * std::log(R) - (2.0 / pi) * integral +
           std::sqrt(kappa1 * kappa2) / (pi * lame_factor_alpha) * m3_star_alpha;
}

} // namespace lamegap
