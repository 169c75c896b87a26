#pragma once

#include "lamegap/elasticity.hpp"
#include "lamegap/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lamegap {

/// Dirichlet data: tag -> displacement at a boundary node position.
using BoundaryData = std::function<Eigen::Vector2d(int tag, const Eigen::Vector2d&)>;

/// Discrete displacement field on a P2 space.  Boundary values are imposed
/// exactly at the P2 nodes; `residual` is the relative algebraic residual of
/// the interior solve (0 for directly constructed combinations).
struct FieldSolution {
    Eigen::VectorXd u; // all dofs, [2*node + component]
    double residual = 0.0;
    double energy = 0.0;
    std::string label;
    double eps = 0.0;
};

/// Quadratic (P2) displacement space with a cached factorization of the
/// interior stiffness block; one factorization serves every Dirichlet
/// subproblem on the mesh.
class LameSystem {
public:
    LameSystem(Mesh mesh, const LameParameters& params);

    const Mesh& mesh() const { return mesh_; }
    const LameParameters& params() const { return params_; }
    int n_nodes() const { return static_cast<int>(node_pos_.size()); }
    int n_dofs() const { return 2 * n_nodes(); }
    const std::vector<Eigen::Vector2d>& node_positions() const { return node_pos_; }
    const std::vector<int>& node_tags() const { return node_tag_; }

    FieldSolution solve(const BoundaryData& data, const std::string& label,
                        double eps = 0.0) const;

    /// Discrete energy pairing u^T K v (the volume form of the a-entries).
    double energy_inner(const FieldSolution& u, const FieldSolution& v) const;

    /// Element-local gradient (Jacobian, J_ij = d_j u^i) at a point.
    Eigen::Matrix2d gradient_at(const FieldSolution& u, const Eigen::Vector2d& x) const;
    Eigen::Vector2d value_at(const FieldSolution& u, const Eigen::Vector2d& x) const;

    FieldSolution combine(const std::vector<std::pair<double, const FieldSolution*>>& terms,
                          const std::string& label) const;

private:
    void assemble();
    void build_locator();
    struct Located {
        int tri;
        Eigen::Vector3d bary;
    };
    Located locate(const Eigen::Vector2d& x) const;

    Mesh mesh_;
    LameParameters params_;

    std::vector<Eigen::Vector2d> node_pos_;     // P2 nodes: vertices then edge nodes
    std::vector<int> node_tag_;
    std::vector<std::array<int, 6>> elem_nodes_; // vertex 0,1,2 then mid(0,1), mid(1,2), mid(2,0)

    Eigen::SparseMatrix<double> K_;  // full
    Eigen::SparseMatrix<double> Kii_;
    Eigen::SparseMatrix<double> Kib_;
    std::vector<int> dof_to_interior_; // -1 for boundary dofs
    std::vector<int> interior_dofs_;
    std::vector<int> boundary_dofs_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;

    // point-location grid
    double cell_ = 1.0;
    Eigen::Vector2d grid_min_ = Eigen::Vector2d::Zero();
    int gx_ = 1, gy_ = 1;
    std::vector<std::vector<int>> cells_;
};

/// Writes/reads the plain-text solution dump (17 significant digits).
void write_solution(const LameSystem& sys, const FieldSolution& u, std::ostream& os);
void write_solution_file(const LameSystem& sys, const FieldSolution& u,
                         const std::string& path);

/// The seven Dirichlet subproblems of the linear decomposition on one mesh:
/// v_i^alpha (rigid data on inclusion i) and v_0 (data phi on the outer
/// boundary).  For the touching configuration, cusp-cut segments receive the
/// explicit auxiliary-field data supplied by `cut_data`.
struct SubproblemSet {
    std::shared_ptr<const LameSystem> sys;
    std::vector<FieldSolution> v1; // alpha = 1..3
    std::vector<FieldSolution> v2;
    FieldSolution v0;
    Eigen::MatrixXd a11, a21, a12, a22; // a[beta-1][alpha-1] = a_{ij}^{alpha beta}
    Eigen::VectorXd b1, b2;
};

using CutData = std::function<Eigen::Vector2d(int which /*1,2,0*/, int alpha,
                                              const Eigen::Vector2d&)>;

SubproblemSet solve_subproblems(std::shared_ptr<const LameSystem> sys,
                                const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& phi,
                                double eps, const std::optional<CutData>& cut_data = {});

double compute_a(const SubproblemSet& s, int i, int j, int alpha, int beta);
double compute_b(const SubproblemSet& s, int i, int beta);

/// Block coefficient system [[A,B],[C,D]] [X1;X2] = [Y1;Y2].
struct CoefficientSolution {
    Eigen::VectorXd X1, X2, Y1, Y2;
    Eigen::MatrixXd block;
    double det = 0.0;
    double cond_estimate = 0.0;
    Eigen::VectorXd flux_moment_residuals; // energy(u, v_i^alpha), 2N entries
};

struct LimitSolution {
    SubproblemSet sub;
    CoefficientSolution coeffs;
    FieldSolution u;
};

LimitSolution solve_limit_problem(std::shared_ptr<const LameSystem> sys,
                                  const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& phi,
                                  double eps);

} // namespace lamegap
