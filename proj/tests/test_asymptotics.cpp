#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lamegap/asymptotics.hpp"
#include "lamegap/quadrature.hpp"
#include "lamegap/special.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace lamegap;

namespace {

Eigen::VectorXd xp1(double v)
{
    Eigen::VectorXd x(1);
    x[0] = v;
    return x;
}

Eigen::VectorXd pt2(double a, double b)
{
    Eigen::VectorXd x(2);
    x << a, b;
    return x;
}

// random point strictly inside the gap, away from both boundaries
Eigen::VectorXd random_gap_point(const GapProfile& p, double eps, std::mt19937& rng,
                                 double margin = 0.15)
{
    std::uniform_real_distribution<double> ux(-0.9 * p.R, 0.9 * p.R);
    std::uniform_real_distribution<double> ut(margin, 1.0 - margin);
    Eigen::VectorXd x(p.d);
    Eigen::VectorXd xp(p.d - 1);
    for (int i = 0; i < p.d - 1; ++i) {
        xp[i] = ux(rng) / std::sqrt(static_cast<double>(p.d - 1));
    }
    const double lo = p.h2(xp);
    const double hi = eps + p.h1(xp);
    x.head(p.d - 1) = xp;
    x[p.d - 1] = lo + ut(rng) * (hi - lo);
    return x;
}

} // namespace

TEST_CASE("gamma function sanity")
{
    CHECK(gamma_function(0.5) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
    CHECK(gamma_function(1.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(gamma_function(2.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(gamma_function(5.0) == doctest::Approx(24.0).epsilon(1e-13));
    // reflection identity on (0,1)
    for (double s : {0.1, 0.25, 0.33, 0.5, 0.75, 0.9}) {
        CHECK(gamma_function(s) * gamma_function(1.0 - s) ==
              doctest::Approx(std::numbers::pi / std::sin(std::numbers::pi * s)).epsilon(1e-12));
        CHECK(gamma_function(s) == doctest::Approx(std::tgamma(s)).epsilon(1e-12));
    }
    CHECK_THROWS(gamma_function(0.0));
    CHECK_THROWS(gamma_function(-1.5));
}

TEST_CASE("unit ball volumes")
{
    CHECK(unit_ball_volume(1) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi).epsilon(1e-13));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-13));
}

TEST_CASE("constants bundle")
{
    const LameParameters p2(1.0, 1.0, 2);
    const ConstantsBundle c = constants(2, 2.0, 1.0, p2);
    REQUIRE(c.M0_valid);
    CHECK(c.M0 == doctest::Approx(std::numbers::pi).epsilon(1e-12));
    CHECK_FALSE(c.M2_valid); // m = 2 < d+1 = 3

    const ConstantsBundle c3 = constants(2, 3.0, 1.0, p2);
    REQUIRE(c3.M2_valid);
    CHECK(c3.M2 == doctest::Approx(2.0 / 3.0).epsilon(1e-12)); // critical bracket = 1

    REQUIRE(c.L.size() == 3);
    CHECK(c.L[0] == doctest::Approx(1.0)); // mu
    CHECK(c.L[1] == doctest::Approx(3.0)); // lambda + 2mu
    CHECK(c.L[2] == doctest::Approx(3.0));

    // d = 3: block sizes (d-1, d, rest) = (2, 3, 1)
    const LameParameters p3(1.0, 1.0, 3);
    const ConstantsBundle cc = constants(3, 2.0, 1.0, p3);
    REQUIRE(cc.L.size() == 6);
    CHECK(cc.L[0] == doctest::Approx(1.0)); // mu
    CHECK(cc.L[1] == doctest::Approx(1.0));
    CHECK(cc.L[2] == doctest::Approx(3.0)); // lambda + 2mu
    CHECK(cc.L[3] == doctest::Approx(3.0));
    CHECK(cc.L[4] == doctest::Approx(3.0));
    CHECK(cc.L[5] == doctest::Approx(2.0)); // 2mu
}

TEST_CASE("rho branches")
{
    // three samples per branch
    CHECK(rho(0, 2, 2.0, 1e-2) == doctest::Approx(std::pow(1e-2, -0.5)));
    CHECK(rho(0, 2, 4.0, 1e-3) == doctest::Approx(std::pow(1e-3, 0.25 - 1.0)));
    CHECK(rho(0, 2, 3.0, 1e-4) == doctest::Approx(std::pow(1e-4, 1.0 / 3.0 - 1.0)));
    CHECK(rho(0, 3, 2.0, 1e-2) == doctest::Approx(std::abs(std::log(1e-2))));
    CHECK(rho(0, 4, 3.0, 1e-3) == doctest::Approx(std::abs(std::log(1e-3))));
    CHECK(rho(0, 3, 2.0, 1e-5) == doctest::Approx(std::abs(std::log(1e-5))));
    CHECK(rho(0, 4, 2.0, 1e-2) == doctest::Approx(1.0));
    CHECK(rho(0, 5, 3.0, 1e-3) == doctest::Approx(1.0));
    CHECK(rho(0, 6, 2.0, 1e-4) == doctest::Approx(1.0));

    CHECK(rho(2, 2, 4.0, 1e-4) == doctest::Approx(10.0)); // eps^{3/4-1}
    CHECK(rho(2, 2, 5.0, 1e-2) == doctest::Approx(std::pow(1e-2, 3.0 / 5.0 - 1.0)));
    CHECK(rho(2, 3, 6.0, 1e-3) == doctest::Approx(std::pow(1e-3, 4.0 / 6.0 - 1.0)));
    CHECK(rho(2, 2, 3.0, 1e-2) == doctest::Approx(std::abs(std::log(1e-2))));
    CHECK(rho(2, 3, 4.0, 1e-3) == doctest::Approx(std::abs(std::log(1e-3))));
    CHECK(rho(2, 4, 5.0, 1e-4) == doctest::Approx(std::abs(std::log(1e-4))));
    CHECK(rho(2, 2, 2.0, 1e-2) == doctest::Approx(1.0));
    CHECK(rho(2, 3, 2.0, 1e-3) == doctest::Approx(1.0));
    CHECK(rho(2, 4, 4.0, 1e-4) == doctest::Approx(1.0));

    CHECK_THROWS(rho(1, 2, 2.0, 1e-2));
    CHECK_THROWS(rho(0, 2, 2.0, 2.0));

    CHECK(rho_d_log(2, 1e-2) == doctest::Approx(std::abs(std::log(1e-2))));
    CHECK(rho_d_log(3, 1e-2) == doctest::Approx(1.0));
}

TEST_CASE("remainder orders")
{
    const double eps = 1e-3;
    const double lg = std::abs(std::log(eps));

    // eps0: m = d+1 branch
    CHECK(remainder_order(RemainderKind::Eps0, 2, 3.0, 2.0, eps) == doctest::Approx(1.0 / lg));
    // eps0: top branch (m > d-1+sigma, sigma >= 2): d=2, sigma=2, m=6
    CHECK(remainder_order(RemainderKind::Eps0, 2, 6.0, 2.0, eps) ==
          doctest::Approx(std::pow(eps, std::min({0.25, 2.0 / 6.0, 3.0 / 6.0}))));
    // eps0: middle branch d+1 < m <= d-1+sigma, sigma > 2: d=2, sigma=4, m=4
    CHECK(remainder_order(RemainderKind::Eps0, 2, 4.0, 4.0, eps) ==
          doctest::Approx(std::pow(eps, std::min(0.25, 1.0 / 4.0))));
    // out of domain: m > d+1 with sigma < 2
    CHECK_THROWS(remainder_order(RemainderKind::Eps0, 2, 4.0, 1.0, eps));

    // eps2 middle: m = d+1+sigma
    CHECK(remainder_order(RemainderKind::Eps2, 2, 5.0, 2.0, eps) ==
          doctest::Approx(std::max(std::pow(eps, 0.25), std::pow(eps, 2.0 / 5.0) * lg)));
    CHECK(remainder_order(RemainderKind::Eps2, 2, 3.0, 2.0, eps) == doctest::Approx(1.0 / lg));
    CHECK(remainder_order(RemainderKind::Eps2, 2, 7.0, 2.0, eps) ==
          doctest::Approx(std::pow(eps, std::min(0.25, 2.0 / 7.0))));

    // eps-bar0: d=2, m=2, sigma=2 -> branch d-1 < m < d-1+sigma, sigma <= 2
    CHECK(remainder_order(RemainderKind::EpsBar0, 2, 2.0, 2.0, eps) ==
          doctest::Approx(std::pow(eps, std::min(1.0 / 2.0, 1.0 / 24.0))));
    CHECK(remainder_order(RemainderKind::EpsBar0, 3, 2.0, 2.0, eps) == doctest::Approx(1.0 / lg));
    // d=3, m=2.5, sigma=0.4: m > d-1+sigma = 2.4, m < d+1, sigma < 2
    CHECK(remainder_order(RemainderKind::EpsBar0, 3, 2.5, 0.4, eps) ==
          doctest::Approx(std::pow(eps, std::min(0.4 / 2.5, 1.5 / 30.0))));

    CHECK(remainder_order(RemainderKind::EpsBar2, 2, 2.0, 2.0, eps) ==
          doctest::Approx(std::pow(eps, std::min(0.5, 1.0 / 24.0))));
    CHECK(remainder_order(RemainderKind::EpsBar2, 3, 2.0, 2.0, eps) == doctest::Approx(1.0 / lg));
    CHECK_THROWS(remainder_order(RemainderKind::EpsBar2, 2, 4.0, 2.0, eps));

    // eps-hat: all five branches (i = 0)
    CHECK(remainder_order(RemainderKind::EpsHat0, 2, 4.0, 2.0, eps) ==
          doctest::Approx(std::pow(eps, 0.5)));
    CHECK(remainder_order(RemainderKind::EpsHat0, 2, 3.0, 2.0, eps) ==
          doctest::Approx(std::pow(eps, 2.0 / 3.0) * lg));
    CHECK(remainder_order(RemainderKind::EpsHat0, 2, 2.0, 2.0, eps) ==
          doctest::Approx(std::pow(eps, 1.0 - 0.5)));
    CHECK(remainder_order(RemainderKind::EpsHat0, 3, 2.0, 2.0, eps) == doctest::Approx(1.0 / lg));
    CHECK(remainder_order(RemainderKind::EpsHat0, 5, 2.0, 2.0, eps) ==
          doctest::Approx(std::pow(eps, std::min(1.0 / 6.0, 2.0 / 24.0))));
    // spec example: eps-hat0 with m < d-1
    CHECK(remainder_order(RemainderKind::EpsHat0, 4, 2.0, 3.0, eps) ==
          doctest::Approx(std::pow(eps, std::min(1.0 / 6.0, 1.0 / 24.0))));
}

TEST_CASE("keller function")
{
    const GapProfile p = curvilinear_square_profile(1.0, 1.0, 2.0);
    const double eps = 1e-2;

    // midline value 1/2
    const double xm = 0.1;
    const double mid = (eps + p.h1(xp1(xm)) + p.h2(xp1(xm))) / 2.0;
    CHECK(keller_v(p, eps, pt2(xm, mid)) == doctest::Approx(0.5).epsilon(1e-13));

    // boundary traces
    CHECK(keller_v(p, eps, pt2(0.2, eps + p.h1(xp1(0.2)))) == doctest::Approx(1.0));
    CHECK(keller_v(p, eps, pt2(0.2, p.h2(xp1(0.2)))) == doctest::Approx(0.0));

    // gradient vs finite differences; d-derivative equals 1/delta
    std::mt19937 rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::VectorXd x = random_gap_point(p, eps, rng);
        const double del = delta(p, eps, x.head(1));
        const Eigen::VectorXd g = keller_v_grad(p, eps, x);
        CHECK(g[1] == doctest::Approx(1.0 / del).epsilon(1e-12));
        const double h = 1e-7 * std::max(del, 1e-3);
        for (int j = 0; j < 2; ++j) {
            Eigen::VectorXd xpp = x, xpm = x;
            xpp[j] += h;
            xpm[j] -= h;
            const double fd = (keller_v(p, eps, xpp) - keller_v(p, eps, xpm)) / (2 * h);
            CHECK(g[j] == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("f profile")
{
    CHECK(f_profile(0.0).value == doctest::Approx(0.0));
    CHECK(f_profile(1.0).value == doctest::Approx(0.0));
    CHECK(f_profile(0.5).value == doctest::Approx(-0.125));
    CHECK(f_profile(0.75).value == doctest::Approx(-0.09375));
    CHECK(f_profile(0.3).derivative == doctest::Approx(-0.2));
}

TEST_CASE("aux field boundary traces and sum identity")
{
    std::mt19937 rng(17);
    const LameParameters params(1.0, 1.0, 2);
    const double eps = 1e-2;
    for (const GapProfile& p :
         {curvilinear_square_profile(1.0, 1.0, 2.0), power_profile(2, 4.0, 0.7)}) {
        const RigidMotionBasis basis(2);
        for (int alpha = 1; alpha <= 3; ++alpha) {
            // traces
            for (double t : {-0.3, -0.05, 0.0, 0.08, 0.25}) {
                const Eigen::VectorXd top = pt2(t, eps + p.h1(xp1(t)));
                const Eigen::VectorXd bot = pt2(t, p.h2(xp1(t)));
                CHECK((aux_u1(alpha, p, eps, params, top) - basis.evaluate(alpha, top)).norm() <
                      1e-12);
                CHECK(aux_u1(alpha, p, eps, params, bot).norm() < 1e-12);
                CHECK(aux_u2(alpha, p, eps, params, bot)
                          .isApprox(basis.evaluate(alpha, bot), 1e-12));
                CHECK(aux_u2(alpha, p, eps, params, top).norm() < 1e-12);
            }
            // identity u1 + u2 = psi at random gap points
            for (int rep = 0; rep < 200; ++rep) {
                const Eigen::VectorXd x = random_gap_point(p, eps, rng, 0.01);
                const Eigen::VectorXd sum =
                    aux_u1(alpha, p, eps, params, x) + aux_u2(alpha, p, eps, params, x);
                CHECK((sum - basis.evaluate(alpha, x)).norm() < 1e-12);
            }
        }
    }
}

TEST_CASE("aux gradient matches finite differences")
{
    std::mt19937 rng(23);
    const LameParameters params(1.5, 0.8, 2);
    const GapProfile p = curvilinear_square_profile(1.0, 0.8, 2.0);
    const double eps = 1e-2;
    for (int alpha = 1; alpha <= 3; ++alpha) {
        for (int rep = 0; rep < 100; ++rep) {
            const Eigen::VectorXd x = random_gap_point(p, eps, rng);
            const double del = delta(p, eps, x.head(1));
            const Eigen::MatrixXd jac = aux_grad_u1(alpha, p, eps, params, x);
            const double h = 1e-6 * del;
            for (int j = 0; j < 2; ++j) {
                Eigen::VectorXd xpp = x, xpm = x;
                xpp[j] += h;
                xpm[j] -= h;
                const Eigen::VectorXd fd =
                    (aux_u1(alpha, p, eps, params, xpp) - aux_u1(alpha, p, eps, params, xpm)) /
                    (2 * h);
                const double scale = std::max(1.0, jac.cwiseAbs().maxCoeff());
                CHECK((fd - jac.col(j)).norm() / scale < 1e-5);
            }
        }
    }
}

TEST_CASE("aux gradient dominant entry at the gap center")
{
    const LameParameters params(1.0, 1.0, 2);
    const GapProfile p = curvilinear_square_profile(1.0, 1.0, 2.0);
    const double eps = 1e-3;
    for (int alpha = 1; alpha <= 2; ++alpha) {
        const Eigen::VectorXd x = pt2(0.0, eps / 2.0);
        const Eigen::MatrixXd jac = aux_grad_u1(alpha, p, eps, params, x);
        CHECK(jac(alpha - 1, 1) == doctest::Approx(1.0 / eps).epsilon(1e-10));
    }
}

TEST_CASE("general auxiliary field reduces to aux_u1 and superposes")
{
    std::mt19937 rng(29);
    const LameParameters params(2.0, 1.0, 2);
    const GapProfile p = curvilinear_square_profile(1.0, 1.0, 2.0);
    const double eps = 1e-2;
    const RigidMotionBasis basis(2);

    // psi = phi = const -> v = const
    BoundaryField cf;
    cf.value = [](const Eigen::VectorXd&) { return Eigen::Vector2d(0.4, -0.7); };
    cf.jacobian = [](const Eigen::VectorXd&) { return Eigen::Matrix2d::Zero(); };
    cf.c2_norm = 1.0;
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::VectorXd x = random_gap_point(p, eps, rng);
        CHECK((general_aux_v(cf, cf, p, eps, params, x) - Eigen::Vector2d(0.4, -0.7)).norm() <
              1e-13);
    }
    // residual for equal constant data: only the delta * ||psi||_{C^2} term
    const double rs = residual_scale(cf, cf, p, eps, xp1(0.1));
    CHECK(rs == doctest::Approx(delta(p, eps, xp1(0.1)) * 2.0).epsilon(1e-12));

    // psi = psi_alpha, phi = 0 reduces to aux_u1
    for (int alpha = 1; alpha <= 3; ++alpha) {
        const BoundaryField rf = rigid_field(basis, alpha);
        const BoundaryField zf = zero_field(2);
        for (int rep = 0; rep < 100; ++rep) {
            const Eigen::VectorXd x = random_gap_point(p, eps, rng);
            CHECK((general_aux_v(rf, zf, p, eps, params, x) - aux_u1(alpha, p, eps, params, x))
                      .norm() < 1e-13);
            CHECK((general_aux_v_grad(rf, zf, p, eps, params, x) -
                   aux_grad_u1(alpha, p, eps, params, x))
                      .norm() < 1e-12);
        }
    }

    // superposition in (psi, phi)
    const BoundaryField f1 = rigid_field(basis, 1);
    const BoundaryField f3 = rigid_field(basis, 3);
    BoundaryField mix;
    mix.value = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return 0.3 * f1.value(x) + 1.7 * f3.value(x);
    };
    mix.jacobian = [&](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
        return 0.3 * f1.jacobian(x) + 1.7 * f3.jacobian(x);
    };
    const BoundaryField zf = zero_field(2);
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::VectorXd x = random_gap_point(p, eps, rng);
        const Eigen::VectorXd lhs = general_aux_v(mix, zf, p, eps, params, x);
        const Eigen::VectorXd rhs = 0.3 * general_aux_v(f1, zf, p, eps, params, x) +
                                    1.7 * general_aux_v(f3, zf, p, eps, params, x);
        CHECK((lhs - rhs).norm() < 1e-12);

        // swap data to the lower boundary as well
        const Eigen::VectorXd lhs2 = general_aux_v(zf, mix, p, eps, params, x);
        const Eigen::VectorXd rhs2 = 0.3 * general_aux_v(zf, f1, p, eps, params, x) +
                                     1.7 * general_aux_v(zf, f3, p, eps, params, x);
        CHECK((lhs2 - rhs2).norm() < 1e-12);
    }
}

TEST_CASE("residual scale picks up tangential variation")
{
    const LameParameters params(1.0, 1.0, 2);
    const GapProfile p = power_profile(2, 2.0, 1.0);
    BoundaryField lin;
    lin.value = [](const Eigen::VectorXd& x) { return Eigen::Vector2d(x[0], 0.0); };
    lin.jacobian = [](const Eigen::VectorXd&) {
        Eigen::Matrix2d j = Eigen::Matrix2d::Zero();
        j(0, 0) = 1.0;
        return j;
    };
    lin.c2_norm = 1.0;
    const BoundaryField zf = zero_field(2);

    // at x' = 0 the jump vanishes, so only delta-term and the tangential
    // derivative |d/dx'(x', 0)| = 1 remain
    const double eps = 1e-3;
    const double rs = residual_scale(lin, zf, p, eps, xp1(0.0));
    CHECK(rs == doctest::Approx(eps * 1.0 + 1.0).epsilon(1e-10));
}

TEST_CASE("1D quadrature identity approaches M0 rho0")
{
    // int_{-R}^{R} dx / (eps + tau |x|^m)  ->  M0 * rho0(2, m; eps)
    const LameParameters params(1.0, 1.0, 2);
    const double R = 0.5;
    const double tau = 1.0;
    for (double m : {2.0, 3.0, 4.0}) {
        const ConstantsBundle c = constants(2, m, tau, params);
        double prev_err = 1e9;
        for (double eps : {1e-4, 1e-6, 1e-8}) {
            const double q = integrate(
                [&](double t) { return 1.0 / (eps + tau * std::pow(std::abs(t), m)); }, -R, R,
                1e-12, 1e-14);
            const double ratio = q / (c.M0 * rho(0, 2, m, eps));
            const double err = std::abs(ratio - 1.0);
            CHECK(err < prev_err + 1e-12);
            prev_err = err;
        }
        CHECK(prev_err < 1e-2);
    }

    // closed form cross-check for m = 2
    const double eps = 1e-6;
    const double q = integrate([&](double t) { return 1.0 / (eps + t * t); }, -R, R);
    const double closed = 2.0 * std::atan(R / std::sqrt(eps)) / std::sqrt(eps);
    CHECK(q == doctest::Approx(closed).epsilon(1e-9));
}
