#pragma once

#include "lamegap/asymptotics.hpp"
#include "lamegap/fem.hpp"
#include "lamegap/geometry.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lamegap {

/// The case split of the coefficient expansions.
enum class Regime { HighM, MidM, LowM }; // m >= d+1, d-1 <= m < d+1, m < d-1

Regime classify_regime(int d, double m);

/// Starred entry tables indexed by mode superscripts (alpha, beta), 1-based:
///   a11(a,b)  = a_11^{*ab}        (gated: finite only for some (a,b), m)
///   bsum(a,b) = sum_i a_{i1}^{*ab}
///   csum(a,b) = sum_j a_{1j}^{*ab}
///   dsum(a,b) = sum_ij a_{ij}^{*ab}
/// Divergent a11 entries carry an explicit infinite marker and cannot be
/// read through the gated accessor.
struct StarredTables {
    int d = 2;
    double m = 2.0;
    Eigen::MatrixXd a11;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> a11_finite;
    Eigen::MatrixXd bsum, csum, dsum;
    Eigen::VectorXd b1, b2;

    int nmodes() const { return d * (d + 1) / 2; }
    double a11_at(int a, int b) const; // throws for entries infinite in this m-range
};

/// Whether a_11^{*ab} stays finite in the touching configuration.
bool a11_entry_finite(int d, double m, int a, int b);

/// Blow-up factor matrices for one regime, with determinants.
struct FactorMatrices {
    Regime regime = Regime::MidM;
    int d = 2;
    double m = 2.0;

    Eigen::MatrixXd D;                  // always present
    double det_D = 0.0;
    std::vector<Eigen::MatrixXd> F;     // regime HighM: F^alpha, alpha = 1..N
    std::vector<double> det_F;
    Eigen::MatrixXd F0;                 // regime MidM
    double det_F0 = 0.0;
    std::vector<Eigen::MatrixXd> F1;    // alpha = 1..d
    std::vector<double> det_F1;
    std::vector<Eigen::MatrixXd> F2;    // alpha = d+1..N (stored from index 0)
    std::vector<double> det_F2;
    Eigen::MatrixXd Ffull;              // regime LowM
    double det_Ffull = 0.0;
    std::vector<Eigen::MatrixXd> F3;
    std::vector<double> det_F3;

    double cond_D = 0.0;
};

/// Assembles the regime's matrices from entry tables (any dimension).
FactorMatrices assemble_matrices(const StarredTables& t, Regime regime);

/// FEM-computed starred quantities on the truncated touching configuration,
/// evaluated at both eta and eta/2 for the stability report.
struct StarredQuantities {
    Regime regime = Regime::MidM;
    double eta = 0.0;
    StarredTables tables;      // at eta
    StarredTables tables_half; // at eta/2
    FactorMatrices factors;    // from `tables`
    double max_rel_dev = 0.0;  // eta vs eta/2 over regime-used entries
    bool eta_stable = true;
    std::shared_ptr<const LameSystem> system;      // at eta
    std::shared_ptr<const LameSystem> system_half; // at eta/2
    SubproblemSet set;         // at eta
    SubproblemSet set_half;
};

StarredQuantities starred_quantities(
    const Domain2D& touching_dom, const LameParameters& params,
    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& phi,
    const MeshGrading& grading, double stability_tol = 0.05);

/// Leading coefficient value of C_1^alpha - C_2^alpha with the predicted
/// remainder order attached (reporting only, never gates computation).
struct CoeffExpansion {
    double value = 0.0;
    double predicted_remainder = 0.0;
};

CoeffExpansion coeff_expansion(int alpha, int d, double m, double sigma, double eps,
                               const FactorMatrices& factors, const ConstantsBundle& constants);

/// Geometry constants of the curvilinear-squares pipeline (d = 2).
struct GeometryConstants {
    double m = 2.0, r1 = 1.0, r2 = 1.0, r0 = 0.25, tau0 = 1.0, eta = 0.0;
    Eigen::Vector3d Mstar;  // renormalized touching energies (per alpha)
    Eigen::Vector3d Mtilde; // Mstar + L * C-star correction
    double Cstar1 = 0.0, Cstar2 = 0.0;
    Eigen::Vector3d K;      // K*_m^alpha (alpha = 3 defined only for m >= 3)
    Eigen::Vector3d G;      // G*_m^alpha = K / (L M)
    bool alpha3_defined = false;
    double r0_rel_dev = 0.0;  // K at r0 vs r0/2
    double eta_rel_dev = 0.0; // K at eta vs eta/2
};

GeometryConstants squares_geometry_constants(double r1, double r2, double m, double r0,
                                             const LameParameters& params,
                                             const MeshGrading& grading);

/// Refined coefficient values of the curvilinear-squares example.
double example_squares_expansion(int alpha, double m, double eps,
                                 const GeometryConstants& geo, const FactorMatrices& factors,
                                 const ConstantsBundle& constants);

/// 3D strictly convex helper: the geometry constant with the principal
/// curvature integral (formula only, no FEM verification path).
double strictly_convex_3d_geometry_constant(double kappa1, double kappa2, double R,
                                            double lame_factor_alpha, double m3_star_alpha);

} // namespace lamegap
