#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lamegap/blowup.hpp"
#include "lamegap/special.hpp"

#include <cmath>
#include <numbers>

using namespace lamegap;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

// synthetic tables with recognizable entries for structure checks
StarredTables synthetic_tables(int d, double m)
{
    const int n = d * (d + 1) / 2;
    StarredTables t;
    t.d = d;
    t.m = m;
    t.a11.resize(n, n);
    t.a11_finite.resize(n, n);
    t.bsum.resize(n, n);
    t.csum.resize(n, n);
    t.dsum.resize(n, n);
    t.b1.resize(n);
    t.b2.resize(n);
    for (int a = 1; a <= n; ++a) {
        t.b1[a - 1] = 1000.0 + a;
        t.b2[a - 1] = 2000.0 + a;
        for (int b = 1; b <= n; ++b) {
            t.a11_finite(a - 1, b - 1) = a11_entry_finite(d, m, a, b);
            t.a11(a - 1, b - 1) = 10000.0 + 10.0 * a + b;
            t.bsum(a - 1, b - 1) = 20000.0 + 10.0 * a + b;
            t.csum(a - 1, b - 1) = 30000.0 + 10.0 * a + b;
            t.dsum(a - 1, b - 1) = 40000.0 + 10.0 * a + b;
        }
    }
    return t;
}

StarredTables permuted(const StarredTables& t, const std::vector<int>& sigma /*1-based images*/)
{
    StarredTables p = t;
    const int n = t.nmodes();
    for (int a = 1; a <= n; ++a) {
        p.b1[a - 1] = t.b1[sigma[static_cast<std::size_t>(a - 1)] - 1];
        p.b2[a - 1] = t.b2[sigma[static_cast<std::size_t>(a - 1)] - 1];
        for (int b = 1; b <= n; ++b) {
            const int sa = sigma[static_cast<std::size_t>(a - 1)];
            const int sb = sigma[static_cast<std::size_t>(b - 1)];
            p.a11(a - 1, b - 1) = t.a11(sa - 1, sb - 1);
            p.a11_finite(a - 1, b - 1) = t.a11_finite(sa - 1, sb - 1);
            p.bsum(a - 1, b - 1) = t.bsum(sa - 1, sb - 1);
            p.csum(a - 1, b - 1) = t.csum(sa - 1, sb - 1);
            p.dsum(a - 1, b - 1) = t.dsum(sa - 1, sb - 1);
        }
    }
    return p;
}

Vector2d generic_phi(const Vector2d& x)
{
    return {0.6 * x[0] + 0.8 * x[1] + 0.3, 0.5 * x[0] - 0.7 * x[1] + 0.2};
}

} // namespace

TEST_CASE("regime classification")
{
    CHECK(classify_regime(2, 2.0) == Regime::MidM);
    CHECK(classify_regime(2, 2.9) == Regime::MidM);
    CHECK(classify_regime(2, 3.0) == Regime::HighM);
    CHECK(classify_regime(2, 4.0) == Regime::HighM);
    CHECK(classify_regime(3, 2.0) == Regime::MidM);
    CHECK(classify_regime(3, 4.0) == Regime::HighM);
    CHECK(classify_regime(4, 2.0) == Regime::LowM);
    CHECK(classify_regime(4, 2.5) == Regime::LowM);
}

TEST_CASE("a11 entry gating")
{
    // d = 2: translation diagonal always diverges (m >= 2 > d-1)
    CHECK_FALSE(a11_entry_finite(2, 2.0, 1, 1));
    CHECK_FALSE(a11_entry_finite(2, 2.0, 2, 2));
    CHECK_FALSE(a11_entry_finite(2, 2.0, 1, 2));
    CHECK(a11_entry_finite(2, 2.0, 3, 3));
    CHECK_FALSE(a11_entry_finite(2, 3.0, 3, 3));
    CHECK(a11_entry_finite(2, 2.0, 1, 3));
    CHECK(a11_entry_finite(2, 4.0, 2, 3));
    // d = 4, m = 2 < d-1: everything finite
    CHECK(a11_entry_finite(4, 2.0, 1, 1));
    CHECK(a11_entry_finite(4, 2.0, 5, 5));
    CHECK(a11_entry_finite(4, 2.0, 1, 2));

    const StarredTables t = synthetic_tables(2, 2.0);
    CHECK_THROWS(t.a11_at(1, 1));
    CHECK(t.a11_at(3, 3) == doctest::Approx(10033.0));
}

TEST_CASE("factor matrix structure, HighM (d = 2)")
{
    const StarredTables t = synthetic_tables(2, 4.0);
    const FactorMatrices fm = assemble_matrices(t, Regime::HighM);
    REQUIRE(fm.F.size() == 3);
    for (int alpha = 1; alpha <= 3; ++alpha) {
        const MatrixXd& f = fm.F[static_cast<std::size_t>(alpha - 1)];
        REQUIRE(f.rows() == 4);
        // first column: (b1^alpha, sum_i b_i^1, sum_i b_i^2, sum_i b_i^3)
        CHECK(f(0, 0) == doctest::Approx(1000.0 + alpha));
        CHECK(f(1, 0) == doctest::Approx(3000.0 + 2 * 1));
        CHECK(f(2, 0) == doctest::Approx(3000.0 + 2 * 2));
        CHECK(f(3, 0) == doctest::Approx(3000.0 + 2 * 3));
        // first row: Bsum(alpha, gamma)
        CHECK(f(0, 2) == doctest::Approx(20000.0 + 10.0 * alpha + 2));
        // interior: Dsum(beta, gamma)
        CHECK(f(2, 3) == doctest::Approx(40000.0 + 10.0 * 2 + 3));
    }
    // D matrix is the dsum table
    CHECK(fm.D(1, 2) == doctest::Approx(40000.0 + 10.0 * 2 + 3));
}

TEST_CASE("factor matrix structure, MidM (d = 2)")
{
    const StarredTables t = synthetic_tables(2, 2.0);
    const FactorMatrices fm = assemble_matrices(t, Regime::MidM);
    // F0 is 5x5: A0 = a11(3,3); B0 = bsum(3, 1..3); C0 = csum(1..3, 3); D
    REQUIRE(fm.F0.rows() == 5);
    CHECK(fm.F0(0, 0) == doctest::Approx(10033.0));
    CHECK(fm.F0(0, 1) == doctest::Approx(20031.0));
    CHECK(fm.F0(0, 3) == doctest::Approx(20033.0));
    CHECK(fm.F0(2, 0) == doctest::Approx(30023.0)); // csum(2, 3)
    CHECK(fm.F0(1, 1) == doctest::Approx(40011.0)); // dsum(1, 1)
    CHECK(fm.F0(4, 4) == doctest::Approx(40033.0));

    // F1^alpha is 6x6
    REQUIRE(fm.F1.size() == 2);
    const MatrixXd& f1 = fm.F1[0]; // alpha = 1
    REQUIRE(f1.rows() == 6);
    CHECK(f1(0, 0) == doctest::Approx(1001.0));    // b1^1
    CHECK(f1(0, 1) == doctest::Approx(10013.0));   // a11(1,3)
    CHECK(f1(1, 0) == doctest::Approx(1003.0));    // b1^3
    CHECK(f1(1, 1) == doctest::Approx(10033.0));   // a11(3,3)
    CHECK(f1(0, 2) == doctest::Approx(20011.0));   // bsum(1,1)
    CHECK(f1(1, 4) == doctest::Approx(20033.0));   // bsum(3,3)
    CHECK(f1(2, 0) == doctest::Approx(3002.0));    // sum_i b_i^1
    CHECK(f1(3, 1) == doctest::Approx(30023.0));   // csum(2,3)
    CHECK(f1(4, 3) == doctest::Approx(40032.0));   // dsum(3,2)

    // F2^3: F0 with its A0/C0 column replaced by b-vectors
    REQUIRE(fm.F2.size() == 1);
    const MatrixXd& f2 = fm.F2[0];
    CHECK(f2(0, 0) == doctest::Approx(1003.0)); // b1^3 replaces a11(3,3)
    CHECK(f2(2, 0) == doctest::Approx(3004.0)); // sum b_i^2 in the C0 column
    CHECK(f2(0, 1) == doctest::Approx(fm.F0(0, 1)));
    CHECK(f2(3, 3) == doctest::Approx(fm.F0(3, 3)));
}

TEST_CASE("factor matrix structure, LowM (d = 4)")
{
    const StarredTables t = synthetic_tables(4, 2.0);
    const FactorMatrices fm = assemble_matrices(t, Regime::LowM);
    const int n = 10;
    REQUIRE(fm.Ffull.rows() == 2 * n);
    CHECK(fm.Ffull(0, 0) == doctest::Approx(10011.0));
    CHECK(fm.Ffull(0, n) == doctest::Approx(20011.0));
    CHECK(fm.Ffull(n, 0) == doctest::Approx(30011.0));
    CHECK(fm.Ffull(n + 2, n + 4) == doctest::Approx(40035.0));
    REQUIRE(fm.F3.size() == 10);
    const MatrixXd& f3 = fm.F3[4]; // alpha = 5
    CHECK(f3(2, 4) == doctest::Approx(1003.0));          // b1^3 replaces column 5
    CHECK(f3(n + 2, 4) == doctest::Approx(3006.0));      // (b1+b2)^3
    CHECK(f3(2, 5) == doctest::Approx(fm.Ffull(2, 5)));  // other columns untouched
}

TEST_CASE("determinants invariant under consistent mode reordering")
{
    const StarredTables t = synthetic_tables(2, 4.0);
    // make the tables numerically nontrivial
    StarredTables tt = t;
    tt.dsum << 5.0, 1.0, 0.5, 1.0, 4.0, 0.25, 0.5, 0.25, 3.0;
    tt.bsum << 2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0;
    tt.csum = tt.bsum.transpose();
    tt.b1 << 0.7, -0.4, 0.2;
    tt.b2 << 0.1, 0.3, -0.6;
    const FactorMatrices fm = assemble_matrices(tt, Regime::HighM);

    const std::vector<int> sigma{2, 3, 1}; // new mode a is old mode sigma[a-1]
    const StarredTables tp = permuted(tt, sigma);
    const FactorMatrices fp = assemble_matrices(tp, Regime::HighM);
    CHECK(fp.det_D == doctest::Approx(fm.det_D).epsilon(1e-12));
    for (int a = 1; a <= 3; ++a) {
        CHECK(fp.det_F[static_cast<std::size_t>(a - 1)] ==
              doctest::Approx(fm.det_F[static_cast<std::size_t>(sigma[static_cast<std::size_t>(
                  a - 1)] - 1)]).epsilon(1e-12));
    }
}

TEST_CASE("zero boundary data forces singular bordered matrices")
{
    StarredTables t = synthetic_tables(2, 4.0);
    t.b1.setZero();
    t.b2.setZero();
    const FactorMatrices fm = assemble_matrices(t, Regime::HighM);
    for (const double det : fm.det_F) {
        CHECK(std::abs(det) < 1e-6 * std::abs(fm.det_D));
    }
}

TEST_CASE("boundary-data scaling acts linearly on the coefficient values")
{
    StarredTables t = synthetic_tables(2, 4.0);
    t.dsum << 5.0, 1.0, 0.5, 1.0, 4.0, 0.25, 0.5, 0.25, 3.0;
    t.bsum << 2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0;
    t.csum = t.bsum.transpose();
    t.b1 << 0.7, -0.4, 0.2;
    t.b2 << 0.1, 0.3, -0.6;
    const FactorMatrices fm = assemble_matrices(t, Regime::HighM);

    StarredTables ts = t;
    ts.b1 *= 3.5;
    ts.b2 *= 3.5;
    const FactorMatrices fs = assemble_matrices(ts, Regime::HighM);
    CHECK(fs.det_D == doctest::Approx(fm.det_D).epsilon(1e-13));

    const LameParameters params(1.0, 1.0, 2);
    const ConstantsBundle cb = constants(2, 4.0, 0.5, params);
    for (int alpha = 1; alpha <= 3; ++alpha) {
        const double v = coeff_expansion(alpha, 2, 4.0, 4.0, 1e-3, fm, cb).value;
        const double vs = coeff_expansion(alpha, 2, 4.0, 4.0, 1e-3, fs, cb).value;
        CHECK(vs == doctest::Approx(3.5 * v).epsilon(1e-11));
    }
}

TEST_CASE("coefficient expansion scalings per regime")
{
    const LameParameters params(1.0, 1.0, 2);
    StarredTables t = synthetic_tables(2, 4.0);
    t.dsum << 5.0, 1.0, 0.5, 1.0, 4.0, 0.25, 0.5, 0.25, 3.0;
    t.bsum << 2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0;
    t.csum = t.bsum.transpose();
    t.b1 << 0.7, -0.4, 0.2;
    t.b2 << 0.1, 0.3, -0.6;

    // regime (i), m = 4: alpha <= 2 scales like 1/rho0 = eps^{3/4}
    const FactorMatrices fm = assemble_matrices(t, Regime::HighM);
    const ConstantsBundle cb4 = constants(2, 4.0, 0.5, params);
    const double c1a = coeff_expansion(1, 2, 4.0, 4.0, 1e-3, fm, cb4).value;
    const double c1b = coeff_expansion(1, 2, 4.0, 4.0, 1e-4, fm, cb4).value;
    CHECK(c1b / c1a == doctest::Approx(std::pow(0.1, 0.75)).epsilon(1e-10));
    // alpha = 3 scales like 1/rho2 = eps^{1/4}
    const double c3a = coeff_expansion(3, 2, 4.0, 4.0, 1e-3, fm, cb4).value;
    const double c3b = coeff_expansion(3, 2, 4.0, 4.0, 1e-4, fm, cb4).value;
    CHECK(c3b / c3a == doctest::Approx(std::pow(0.1, 0.25)).epsilon(1e-10));

    // regime (ii), m = 2: alpha = 3 independent of eps
    StarredTables t2 = synthetic_tables(2, 2.0);
    t2.dsum = t.dsum;
    t2.bsum = t.bsum;
    t2.csum = t.csum;
    t2.b1 = t.b1;
    t2.b2 = t.b2;
    t2.a11(2, 2) = 2.2;
    t2.a11(0, 2) = t2.a11(2, 0) = 0.15;
    t2.a11(1, 2) = t2.a11(2, 1) = -0.1;
    const FactorMatrices fm2 = assemble_matrices(t2, Regime::MidM);
    const ConstantsBundle cb2 = constants(2, 2.0, 1.0, params);
    const double m3a = coeff_expansion(3, 2, 2.0, 2.0, 1e-3, fm2, cb2).value;
    const double m3b = coeff_expansion(3, 2, 2.0, 2.0, 1e-5, fm2, cb2).value;
    CHECK(m3a == doctest::Approx(m3b).epsilon(1e-13));
    // alpha = 1 scales like 1/rho0 = eps^{1/2}
    const double m1a = coeff_expansion(1, 2, 2.0, 2.0, 1e-3, fm2, cb2).value;
    const double m1b = coeff_expansion(1, 2, 2.0, 2.0, 1e-5, fm2, cb2).value;
    CHECK(m1b / m1a == doctest::Approx(0.1).epsilon(1e-10));

    // regime mismatch is rejected
    CHECK_THROWS(coeff_expansion(1, 2, 2.0, 2.0, 1e-3, fm, cb2));
}

TEST_CASE("starred quantities on the touching disks")
{
    const LameParameters params(1.0, 1.0, 2);
    const Domain2D dom = Domain2D::squares(1.0, 1.0, 2.0, 0.0);
    MeshGrading g;
    g.n_layers = 5;
    g.target_h = 0.5;
    g.eta = 2e-2;
    const StarredQuantities sq = starred_quantities(dom, params, generic_phi, g);
    CHECK(sq.regime == Regime::MidM);

    // D* symmetric positive definite
    const Eigen::MatrixXd& dmat = sq.factors.D;
    CHECK((dmat - dmat.transpose()).norm() < 1e-10 * dmat.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dmat);
    CHECK(es.eigenvalues().minCoeff() > 0.0);

    // C* block equals the transpose of the B* block entrywise
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            CHECK(sq.tables.csum(a, b) ==
                  doctest::Approx(sq.tables.bsum(b, a)).epsilon(1e-11));
        }
    }

    // eta-stability of the regime entries
    CHECK(sq.max_rel_dev < 0.08);

    // phi = 0 makes every b vanish
    const StarredQuantities sq0 = starred_quantities(
        dom, params, [](const Vector2d&) { return Vector2d::Zero(); }, g);
    CHECK(sq0.tables.b1.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sq0.tables.b2.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("finite-eps boundary functionals approach the starred ones")
{
    const LameParameters params(1.0, 1.0, 2);
    MeshGrading g;
    g.n_layers = 5;
    g.target_h = 0.5;
    g.eta = 1.5e-2;
    const Domain2D touching = Domain2D::squares(1.0, 1.0, 2.0, 0.0);
    const StarredQuantities sq = starred_quantities(touching, params, generic_phi, g);

    double prev = 1e300;
    for (double eps : {3e-2, 3e-3}) {
        const Domain2D dom = Domain2D::squares(1.0, 1.0, 2.0, eps);
        MeshGrading gf;
        gf.n_layers = 5;
        gf.target_h = 0.5;
        auto sys = std::make_shared<LameSystem>(build_mesh(dom, gf), params);
        const SubproblemSet set = solve_subproblems(sys, generic_phi, eps);
        const double dev = (set.b1 - sq.tables.b1).cwiseAbs().maxCoeff();
        CHECK(dev < prev);
        prev = dev;
    }
}

TEST_CASE("squares geometry constants: tails, stability, and G")
{
    const LameParameters params(1.0, 1.0, 2);
    MeshGrading g;
    g.n_layers = 6;
    g.target_h = 0.5;
    g.eta = 5e-3;

    // disks (m = 2, r1 = r2 = 1): tau0 = 1; tail for alpha = 1 at r0 = 0.25 is
    // -2 r0^{-1} mu / (tau0 (m-1)) = -8 mu
    const GeometryConstants geo = squares_geometry_constants(1.0, 1.0, 2.0, 0.25, params, g);
    CHECK(geo.tau0 == doctest::Approx(1.0));
    CHECK(geo.K[0] - geo.Mtilde[0] == doctest::Approx(-8.0).epsilon(1e-12));
    CHECK(geo.K[1] - geo.Mtilde[1] == doctest::Approx(-24.0).epsilon(1e-12)); // -2 r0^{-1} (lambda+2mu)
    CHECK_FALSE(geo.alpha3_defined);
    // K is r0-independent by construction of the extraction
    CHECK(geo.r0_rel_dev < 1e-8);
    // cusp-cutoff stability
    CHECK(geo.eta_rel_dev < 0.05);
    // G = K / (L M0)
    const ConstantsBundle cb = constants(2, 2.0, 1.0, params);
    CHECK(geo.G[0] == doctest::Approx(geo.K[0] / (1.0 * cb.M0)).epsilon(1e-12));
    CHECK(geo.G[1] == doctest::Approx(geo.K[1] / (3.0 * cb.M0)).epsilon(1e-12));

    // m = 3 with tau0 = 1 (r1 = r2 = sqrt(2/3)): the alpha = 3 tail is
    // 2 (ln tau0 + 3 ln r0) L / (3 tau0) = 2 ln(0.25) * L
    const double r = std::sqrt(2.0 / 3.0);
    MeshGrading g3 = g;
    g3.eta = 4e-3;
    const GeometryConstants geo3 = squares_geometry_constants(r, r, 3.0, 0.25, params, g3);
    CHECK(geo3.tau0 == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(geo3.alpha3_defined);
    CHECK(geo3.K[2] - geo3.Mtilde[2] ==
          doctest::Approx(2.0 * std::log(0.25) * 3.0).epsilon(1e-10));
    CHECK(geo3.r0_rel_dev < 1e-7);
}

TEST_CASE("squares example expansion reduces to the plain expansion")
{
    const LameParameters params(1.0, 1.0, 2);

    // synthetic HighM factors for m = 4
    StarredTables t = synthetic_tables(2, 4.0);
    t.dsum << 5.0, 1.0, 0.5, 1.0, 4.0, 0.25, 0.5, 0.25, 3.0;
    t.bsum << 2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0;
    t.csum = t.bsum.transpose();
    t.b1 << 0.7, -0.4, 0.2;
    t.b2 << 0.1, 0.3, -0.6;
    const FactorMatrices fm = assemble_matrices(t, Regime::HighM);
    const double tau0 = 0.5;
    const ConstantsBundle cb = constants(2, 4.0, tau0, params);

    GeometryConstants geo;
    geo.m = 4.0;
    geo.tau0 = tau0;
    geo.alpha3_defined = true;
    geo.G = Eigen::Vector3d(0.0, 0.0, 0.0);
    for (int alpha = 1; alpha <= 3; ++alpha) {
        const double plain = coeff_expansion(alpha, 2, 4.0, 4.0, 1e-3, fm, cb).value;
        const double refined = example_squares_expansion(alpha, 4.0, 1e-3, geo, fm, cb);
        CHECK(refined == doctest::Approx(plain).epsilon(1e-12));
    }

    // fixed G: ratio refined/plain -> 1 as eps -> 0
    geo.G = Eigen::Vector3d(2.0, -1.0, 0.7);
    double prev_gap = 1e300;
    for (double eps : {1e-2, 1e-4, 1e-6}) {
        const double plain = coeff_expansion(1, 2, 4.0, 4.0, eps, fm, cb).value;
        const double refined = example_squares_expansion(1, 4.0, eps, geo, fm, cb);
        const double gap = std::abs(refined / plain - 1.0);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 1e-3);

    // m = 3, alpha = 3: the denominator is |ln eps| + G*_3
    geo.m = 3.0;
    const ConstantsBundle cb3 = constants(2, 3.0, tau0, params);
    const FactorMatrices fm3 = assemble_matrices(synthetic_tables(2, 3.0), Regime::HighM);
    const double eps = 1e-3;
    const double v = example_squares_expansion(3, 3.0, eps, geo, fm3, cb3);
    const double expect = (fm3.det_F[2] / fm3.det_D) / (3.0 * cb3.M2) /
                          (std::abs(std::log(eps)) + geo.G[2]);
    CHECK(v == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("3D strictly convex geometry constant formula")
{
    // kappa1 = kappa2 = k: the angular integral is log(1/k) * pi/2
    const double k = 2.0;
    const double v = strictly_convex_3d_geometry_constant(k, k, 1.5, 1.0, 0.0);
    CHECK(v == doctest::Approx(2.0 * std::log(1.5) - std::log(1.0 / k) * 1.0).epsilon(1e-10));
}
