#include "lamegap/fem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lamegap {

namespace {

using Eigen::Matrix2d;
using Eigen::Vector2d;

// P2 reference shape gradients at barycentric (l0, l1, l2);
// vertex shapes N_i = l_i(2 l_i - 1), edge shapes 4 l_a l_b.
void shape_grads(const Eigen::Vector3d& l, Eigen::Matrix<double, 6, 2>& dref)
{
    // reference coords: l1 = xi, l2 = eta, l0 = 1 - xi - eta
    const double l0 = l[0], l1 = l[1], l2 = l[2];
    // d/dxi, d/deta of l: dl0 = (-1,-1), dl1 = (1,0), dl2 = (0,1)
    const double d0[2] = {-1.0, -1.0};
    const double d1[2] = {1.0, 0.0};
    const double d2[2] = {0.0, 1.0};
    for (int k = 0; k < 2; ++k) {
        dref(0, k) = (4.0 * l0 - 1.0) * d0[k];
        dref(1, k) = (4.0 * l1 - 1.0) * d1[k];
        dref(2, k) = (4.0 * l2 - 1.0) * d2[k];
        dref(3, k) = 4.0 * (l1 * d0[k] + l0 * d1[k]); // mid(0,1)
        dref(4, k) = 4.0 * (l2 * d1[k] + l1 * d2[k]); // mid(1,2)
        dref(5, k) = 4.0 * (l0 * d2[k] + l2 * d0[k]); // mid(2,0)
    }
}

void shape_values(const Eigen::Vector3d& l, Eigen::Matrix<double, 6, 1>& n)
{
    n[0] = l[0] * (2.0 * l[0] - 1.0);
    n[1] = l[1] * (2.0 * l[1] - 1.0);
    n[2] = l[2] * (2.0 * l[2] - 1.0);
    n[3] = 4.0 * l[0] * l[1];
    n[4] = 4.0 * l[1] * l[2];
    n[5] = 4.0 * l[2] * l[0];
}

// Dunavant 6-point rule, exact through degree 4 (weights sum to 1 on the
// reference triangle of area 1/2)
struct QuadPt {
    Eigen::Vector3d bary;
    double w;
};
const QuadPt kQuadPts[6] = {
    {{0.108103018168070, 0.445948490915965, 0.445948490915965}, 0.223381589678011},
    {{0.445948490915965, 0.108103018168070, 0.445948490915965}, 0.223381589678011},
    {{0.445948490915965, 0.445948490915965, 0.108103018168070}, 0.223381589678011},
    {{0.816847572980459, 0.091576213509771, 0.091576213509771}, 0.109951743655322},
    {{0.091576213509771, 0.816847572980459, 0.091576213509771}, 0.109951743655322},
    {{0.091576213509771, 0.091576213509771, 0.816847572980459}, 0.109951743655322},
};

// isoparametric geometry: Jacobian columns dx/dxi, dx/deta from the six
// element nodes
Matrix2d geometry_jacobian(const std::array<int, 6>& en,
                           const std::vector<Vector2d>& pos,
                           const Eigen::Matrix<double, 6, 2>& dref)
{
    Matrix2d jac = Matrix2d::Zero();
    for (int a = 0; a < 6; ++a) {
        const Vector2d& p = pos[static_cast<std::size_t>(en[static_cast<std::size_t>(a)])];
        jac.col(0) += p * dref(a, 0);
        jac.col(1) += p * dref(a, 1);
    }
    return jac;
}

Vector2d isoparametric_point(const std::array<int, 6>& en, const std::vector<Vector2d>& pos,
                             const Eigen::Vector3d& bary)
{
    Eigen::Matrix<double, 6, 1> n;
    shape_values(bary, n);
    Vector2d x = Vector2d::Zero();
    for (int a = 0; a < 6; ++a) {
        x += n[a] * pos[static_cast<std::size_t>(en[static_cast<std::size_t>(a)])];
    }
    return x;
}

// refine reference coordinates on curved elements: solve x(xi) = target
Eigen::Vector3d invert_isoparametric(const std::array<int, 6>& en,
                                     const std::vector<Vector2d>& pos, Eigen::Vector3d bary,
                                     const Vector2d& target)
{
    Eigen::Matrix<double, 6, 2> dref;
    for (int it = 0; it < 8; ++it) {
        const Vector2d r = target - isoparametric_point(en, pos, bary);
        if (r.norm() < 1e-14) {
            break;
        }
        shape_grads(bary, dref);
        const Matrix2d jac = geometry_jacobian(en, pos, dref);
        const Vector2d dxi = jac.inverse() * r;
        bary[1] += dxi[0];
        bary[2] += dxi[1];
        bary[0] = 1.0 - bary[1] - bary[2];
    }
    return bary;
}

} // namespace

LameSystem::LameSystem(Mesh mesh, const LameParameters& params)
    : mesh_(std::move(mesh)), params_(params)
{
    if (params_.dim() != 2) {
        throw std::invalid_argument("LameSystem: 2D solver requires d = 2 parameters");
    }
    mesh_.validate();

    // P2 nodes: vertices, then one node per (unique) edge
    const int nv = static_cast<int>(mesh_.nodes.size());
    node_pos_ = mesh_.nodes;
    node_tag_ = mesh_.node_tag;

    std::map<std::pair<int, int>, int> edge_node;
    auto ekey = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
    auto get_edge_node = [&](int a, int b) {
        const auto key = ekey(a, b);
        const auto it = edge_node.find(key);
        if (it != edge_node.end()) {
            return it->second;
        }
        const int id = static_cast<int>(node_pos_.size());
        node_pos_.push_back(0.5 * (node_pos_[static_cast<std::size_t>(a)] +
                                   node_pos_[static_cast<std::size_t>(b)]));
        node_tag_.push_back(kInterior);
        edge_node.emplace(key, id);
        return id;
    };
    elem_nodes_.reserve(mesh_.tris.size());
    for (const auto& t : mesh_.tris) {
        std::array<int, 6> en;
        en[0] = t[0];
        en[1] = t[1];
        en[2] = t[2];
        en[3] = get_edge_node(t[0], t[1]);
        en[4] = get_edge_node(t[1], t[2]);
        en[5] = get_edge_node(t[2], t[0]);
        elem_nodes_.push_back(en);
    }
    // boundary edge midnodes inherit the edge tag and are snapped onto the
    // analytic curve when the mesh carries a projector
    std::vector<std::pair<int, Vector2d>> snapped; // (node, straight midpoint)
    for (const auto& be : mesh_.boundary_edges) {
        const auto it = edge_node.find(ekey(be[0], be[1]));
        if (it == edge_node.end()) {
            throw std::runtime_error("LameSystem: boundary edge missing from triangulation");
        }
        node_tag_[static_cast<std::size_t>(it->second)] = be[2];
        if (mesh_.boundary_projector) {
            auto& p = node_pos_[static_cast<std::size_t>(it->second)];
            snapped.emplace_back(it->second, p);
            p = mesh_.boundary_projector(be[2], p);
        }
    }
    (void)nv;

    // revert snaps that degrade or invert adjacent curved elements
    if (!snapped.empty()) {
        std::map<int, Vector2d> straight(snapped.begin(), snapped.end());
        for (int pass = 0; pass < 4; ++pass) {
            bool reverted = false;
            Eigen::Matrix<double, 6, 2> dref;
            for (const auto& en : elem_nodes_) {
                Matrix2d aff;
                aff.col(0) = node_pos_[static_cast<std::size_t>(en[1])] -
                             node_pos_[static_cast<std::size_t>(en[0])];
                aff.col(1) = node_pos_[static_cast<std::size_t>(en[2])] -
                             node_pos_[static_cast<std::size_t>(en[0])];
                const double straight_det = aff.determinant();
                bool bad = false;
                for (const auto& q : kQuadPts) {
                    shape_grads(q.bary, dref);
                    if (geometry_jacobian(en, node_pos_, dref).determinant() <
                        0.05 * straight_det) {
                        bad = true;
                        break;
                    }
                }
                if (!bad) {
                    continue;
                }
                for (int a = 3; a < 6; ++a) {
                    const auto it = straight.find(en[static_cast<std::size_t>(a)]);
                    if (it != straight.end()) {
                        node_pos_[static_cast<std::size_t>(it->first)] = it->second;
                        reverted = true;
                    }
                }
            }
            if (!reverted) {
                break;
            }
        }
    }

    assemble();
    build_locator();
}

void LameSystem::assemble()
{
    const int n = n_dofs();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(elem_nodes_.size() * 144);
    const double lambda = params_.lambda();
    const double mu = params_.mu();

    for (std::size_t e = 0; e < elem_nodes_.size(); ++e) {
        const auto& en = elem_nodes_[e];
        Eigen::Matrix<double, 12, 12> ke = Eigen::Matrix<double, 12, 12>::Zero();
        Eigen::Matrix<double, 6, 2> dref;
        for (const auto& q : kQuadPts) {
            shape_grads(q.bary, dref);
            const Matrix2d jac = geometry_jacobian(en, node_pos_, dref);
            const double detj = jac.determinant();
            if (!(detj > 0.0)) {
                throw std::runtime_error("LameSystem: inverted isoparametric element");
            }
            const Eigen::Matrix<double, 6, 2> dx = dref * jac.inverse();
            const double w = 0.5 * q.w * detj;
            for (int a = 0; a < 6; ++a) {
                for (int b = 0; b < 6; ++b) {
                    const double gdot = dx.row(a).dot(dx.row(b));
                    for (int i = 0; i < 2; ++i) {
                        for (int j = 0; j < 2; ++j) {
                            double v = lambda * dx(a, i) * dx(b, j) + mu * dx(a, j) * dx(b, i);
                            if (i == j) {
                                v += mu * gdot;
                            }
                            ke(2 * a + i, 2 * b + j) += w * v;
                        }
                    }
                }
            }
        }
        for (int a = 0; a < 6; ++a) {
            for (int i = 0; i < 2; ++i) {
                const int ga = 2 * en[static_cast<std::size_t>(a)] + i;
                for (int b = 0; b < 6; ++b) {
                    for (int j = 0; j < 2; ++j) {
                        const int gb = 2 * en[static_cast<std::size_t>(b)] + j;
                        trips.emplace_back(ga, gb, ke(2 * a + i, 2 * b + j));
                    }
                }
            }
        }
    }
    K_.resize(n, n);
    K_.setFromTriplets(trips.begin(), trips.end());

    dof_to_interior_.assign(static_cast<std::size_t>(n), -1);
    for (int node = 0; node < n_nodes(); ++node) {
        for (int c = 0; c < 2; ++c) {
            const int dof = 2 * node + c;
            if (node_tag_[static_cast<std::size_t>(node)] == kInterior) {
                dof_to_interior_[static_cast<std::size_t>(dof)] =
                    static_cast<int>(interior_dofs_.size());
                interior_dofs_.push_back(dof);
            } else {
                boundary_dofs_.push_back(dof);
            }
        }
    }

    const int ni = static_cast<int>(interior_dofs_.size());
    const int nb = static_cast<int>(boundary_dofs_.size());
    std::vector<int> dof_to_boundary(static_cast<std::size_t>(n), -1);
    for (int k = 0; k < nb; ++k) {
        dof_to_boundary[static_cast<std::size_t>(boundary_dofs_[static_cast<std::size_t>(k)])] = k;
    }
    std::vector<Eigen::Triplet<double>> tii, tib;
    for (int col = 0; col < K_.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(K_, col); it; ++it) {
            const int r = static_cast<int>(it.row());
            const int c = static_cast<int>(it.col());
            const int ir = dof_to_interior_[static_cast<std::size_t>(r)];
            const int ic = dof_to_interior_[static_cast<std::size_t>(c)];
            if (ir >= 0 && ic >= 0) {
                tii.emplace_back(ir, ic, it.value());
            } else if (ir >= 0 && ic < 0) {
                tib.emplace_back(ir, dof_to_boundary[static_cast<std::size_t>(c)], it.value());
            }
        }
    }
    Kii_.resize(ni, ni);
    Kii_.setFromTriplets(tii.begin(), tii.end());
    Kib_.resize(ni, nb);
    Kib_.setFromTriplets(tib.begin(), tib.end());
    ldlt_.compute(Kii_);
    if (ldlt_.info() != Eigen::Success) {
        throw std::runtime_error("LameSystem: factorization failed");
    }
}

FieldSolution LameSystem::solve(const BoundaryData& data, const std::string& label,
                                double eps) const
{
    const int nb = static_cast<int>(boundary_dofs_.size());
    Eigen::VectorXd gb(nb);
    for (int k = 0; k < nb; ++k) {
        const int dof = boundary_dofs_[static_cast<std::size_t>(k)];
        const int node = dof / 2;
        const int comp = dof % 2;
        const Vector2d g =
            data(node_tag_[static_cast<std::size_t>(node)], node_pos_[static_cast<std::size_t>(node)]);
        gb[k] = g[comp];
    }
    const Eigen::VectorXd rhs = -(Kib_ * gb);
    Eigen::VectorXd ui = ldlt_.solve(rhs);
    // iterative refinement down to the 1e-10 residual contract
    double rel = 0.0;
    for (int it = 0; it < 4; ++it) {
        const Eigen::VectorXd r = rhs - Kii_ * ui;
        rel = r.norm() / std::max(rhs.norm(), 1e-300);
        if (rel < 1e-12) {
            break;
        }
        ui += ldlt_.solve(r);
    }
    if (!(rel < 1e-10)) {
        throw std::runtime_error("LameSystem::solve: residual " + std::to_string(rel) +
                                 " exceeds tolerance for " + label);
    }

    FieldSolution sol;
    sol.u = Eigen::VectorXd::Zero(n_dofs());
    for (int k = 0; k < static_cast<int>(interior_dofs_.size()); ++k) {
        sol.u[interior_dofs_[static_cast<std::size_t>(k)]] = ui[k];
    }
    for (int k = 0; k < nb; ++k) {
        sol.u[boundary_dofs_[static_cast<std::size_t>(k)]] = gb[k];
    }
    sol.residual = rel;
    sol.energy = sol.u.dot(K_ * sol.u);
    sol.label = label;
    sol.eps = eps;
    return sol;
}

double LameSystem::energy_inner(const FieldSolution& u, const FieldSolution& v) const
{
    if (u.u.size() != n_dofs() || v.u.size() != n_dofs()) {
        throw std::invalid_argument("energy_inner: field does not match this mesh");
    }
    return u.u.dot(K_ * v.u);
}

void LameSystem::build_locator()
{
    Vector2d lo(1e300, 1e300), hi(-1e300, -1e300);
    for (const auto& p : mesh_.nodes) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    grid_min_ = lo;
    const Vector2d span = hi - lo;
    const int target = static_cast<int>(std::sqrt(static_cast<double>(mesh_.tris.size()))) + 1;
    gx_ = std::max(1, std::min(512, target));
    gy_ = gx_;
    cell_ = std::max(span[0] / gx_, span[1] / gy_) + 1e-300;
    gx_ = static_cast<int>(span[0] / cell_) + 1;
    gy_ = static_cast<int>(span[1] / cell_) + 1;
    cells_.assign(static_cast<std::size_t>(gx_ * gy_), {});
    for (std::size_t t = 0; t < mesh_.tris.size(); ++t) {
        Vector2d tlo(1e300, 1e300), thi(-1e300, -1e300);
        for (int k = 0; k < 3; ++k) {
            const Vector2d& p = mesh_.nodes[static_cast<std::size_t>(mesh_.tris[t][static_cast<std::size_t>(k)])];
            tlo = tlo.cwiseMin(p);
            thi = thi.cwiseMax(p);
        }
        const int x0 = std::clamp(static_cast<int>((tlo[0] - grid_min_[0]) / cell_), 0, gx_ - 1);
        const int x1 = std::clamp(static_cast<int>((thi[0] - grid_min_[0]) / cell_), 0, gx_ - 1);
        const int y0 = std::clamp(static_cast<int>((tlo[1] - grid_min_[1]) / cell_), 0, gy_ - 1);
        const int y1 = std::clamp(static_cast<int>((thi[1] - grid_min_[1]) / cell_), 0, gy_ - 1);
        for (int x = x0; x <= x1; ++x) {
            for (int y = y0; y <= y1; ++y) {
                cells_[static_cast<std::size_t>(y * gx_ + x)].push_back(static_cast<int>(t));
            }
        }
    }
}

LameSystem::Located LameSystem::locate(const Vector2d& x) const
{
    const int cx = std::clamp(static_cast<int>((x[0] - grid_min_[0]) / cell_), 0, gx_ - 1);
    const int cy = std::clamp(static_cast<int>((x[1] - grid_min_[1]) / cell_), 0, gy_ - 1);
    double best_short = -1e300;
    int best_tri = -1;
    Eigen::Vector3d best_bary;
    for (int ring = 0; ring < std::max(gx_, gy_); ++ring) {
        for (int dx = -ring; dx <= ring; ++dx) {
            for (int dy = -ring; dy <= ring; ++dy) {
                if (std::max(std::abs(dx), std::abs(dy)) != ring) {
                    continue;
                }
                const int gx = cx + dx, gy = cy + dy;
                if (gx < 0 || gy < 0 || gx >= gx_ || gy >= gy_) {
                    continue;
                }
                for (const int t : cells_[static_cast<std::size_t>(gy * gx_ + gx)]) {
                    const auto& tri = mesh_.tris[static_cast<std::size_t>(t)];
                    const Vector2d& a = mesh_.nodes[static_cast<std::size_t>(tri[0])];
                    const Vector2d& b = mesh_.nodes[static_cast<std::size_t>(tri[1])];
                    const Vector2d& c = mesh_.nodes[static_cast<std::size_t>(tri[2])];
                    Matrix2d jac;
                    jac.col(0) = b - a;
                    jac.col(1) = c - a;
                    const Vector2d xi = jac.inverse() * (x - a);
                    const Eigen::Vector3d bary(1.0 - xi[0] - xi[1], xi[0], xi[1]);
                    const double short_side = bary.minCoeff();
                    if (short_side > best_short) {
                        best_short = short_side;
                        best_tri = t;
                        best_bary = bary;
                    }
                }
            }
        }
        if (best_short >= -1e-10 && best_tri >= 0) {
            return {best_tri, best_bary};
        }
    }
    if (best_tri >= 0 && best_short > -1e-6) {
        return {best_tri, best_bary};
    }
    std::ostringstream os;
    os << "locate: point (" << x.transpose() << ") outside mesh";
    throw std::domain_error(os.str());
}

Matrix2d LameSystem::gradient_at(const FieldSolution& u, const Vector2d& x) const
{
    const Located loc = locate(x);
    const auto& en = elem_nodes_[static_cast<std::size_t>(loc.tri)];
    const Eigen::Vector3d bary = invert_isoparametric(en, node_pos_, loc.bary, x);
    Eigen::Matrix<double, 6, 2> dref;
    shape_grads(bary, dref);
    const Matrix2d jac = geometry_jacobian(en, node_pos_, dref);
    const Eigen::Matrix<double, 6, 2> dx = dref * jac.inverse();
    Matrix2d grad = Matrix2d::Zero();
    for (int a = 0; a < 6; ++a) {
        const int node = en[static_cast<std::size_t>(a)];
        for (int i = 0; i < 2; ++i) {
            const double ua = u.u[2 * node + i];
            grad(i, 0) += ua * dx(a, 0);
            grad(i, 1) += ua * dx(a, 1);
        }
    }
    return grad;
}

Vector2d LameSystem::value_at(const FieldSolution& u, const Vector2d& x) const
{
    const Located loc = locate(x);
    const auto& en = elem_nodes_[static_cast<std::size_t>(loc.tri)];
    const Eigen::Vector3d bary = invert_isoparametric(en, node_pos_, loc.bary, x);
    Eigen::Matrix<double, 6, 1> n;
    shape_values(bary, n);
    Vector2d out = Vector2d::Zero();
    for (int a = 0; a < 6; ++a) {
        const int node = en[static_cast<std::size_t>(a)];
        out[0] += n[a] * u.u[2 * node];
        out[1] += n[a] * u.u[2 * node + 1];
    }
    return out;
}

FieldSolution LameSystem::combine(
    const std::vector<std::pair<double, const FieldSolution*>>& terms,
    const std::string& label) const
{
    FieldSolution out;
    out.u = Eigen::VectorXd::Zero(n_dofs());
    double res = 0.0;
    for (const auto& [c, f] : terms) {
        out.u += c * f->u;
        res = std::max(res, f->residual);
    }
    out.residual = res;
    out.energy = out.u.dot(K_ * out.u);
    out.label = label;
    return out;
}

void write_solution(const LameSystem& sys, const FieldSolution& u, std::ostream& os)
{
    os << "lamegap-solution 1\n";
    os << "label " << (u.label.empty() ? "field" : u.label) << "\n";
    os << std::setprecision(17);
    os << "eps " << u.eps << "\n";
    os << "residual " << u.residual << "\n";
    os << "nodes " << sys.n_nodes() << "\n";
    for (int k = 0; k < sys.n_nodes(); ++k) {
        const auto& p = sys.node_positions()[static_cast<std::size_t>(k)];
        os << p[0] << " " << p[1] << " " << u.u[2 * k] << " " << u.u[2 * k + 1] << "\n";
    }
}

void write_solution_file(const LameSystem& sys, const FieldSolution& u, const std::string& path)
{
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("write_solution_file: cannot open " + path);
    }
    write_solution(sys, u, os);
}

SubproblemSet solve_subproblems(std::shared_ptr<const LameSystem> sys,
                                const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& phi,
                                double eps, const std::optional<CutData>& cut_data)
{
    const RigidMotionBasis basis(2);
    const int nmodes = basis.size();
    SubproblemSet set;
    set.sys = sys;

    auto cut = [&](int which, int alpha, const Vector2d& x) -> Vector2d {
        if (!cut_data) {
            throw std::runtime_error(
                "solve_subproblems: mesh has cusp-cut boundary but no cut data supplied");
        }
        return (*cut_data)(which, alpha, x);
    };

    for (int alpha = 1; alpha <= nmodes; ++alpha) {
        set.v1.push_back(sys->solve(
            [&](int tag, const Vector2d& x) -> Vector2d {
                if (tag == kInclusion1) {
                    return basis.evaluate(alpha, x);
                }
                if (tag == kCuspCut) {
                    return cut(1, alpha, x);
                }
                return Vector2d::Zero();
            },
            "v1_" + std::to_string(alpha), eps));
        set.v2.push_back(sys->solve(
            [&](int tag, const Vector2d& x) -> Vector2d {
                if (tag == kInclusion2) {
                    return basis.evaluate(alpha, x);
                }
                if (tag == kCuspCut) {
                    return cut(2, alpha, x);
                }
                return Vector2d::Zero();
            },
            "v2_" + std::to_string(alpha), eps));
    }
    set.v0 = sys->solve(
        [&](int tag, const Vector2d& x) -> Vector2d {
            if (tag == kOuter) {
                return phi(x);
            }
            return Vector2d::Zero();
        },
        "v0", eps);

    set.a11.resize(nmodes, nmodes);
    set.a21.resize(nmodes, nmodes);
    set.a12.resize(nmodes, nmodes);
    set.a22.resize(nmodes, nmodes);
    set.b1.resize(nmodes);
    set.b2.resize(nmodes);
    for (int beta = 1; beta <= nmodes; ++beta) {
        for (int alpha = 1; alpha <= nmodes; ++alpha) {
            const auto& va1 = set.v1[static_cast<std::size_t>(alpha - 1)];
            const auto& va2 = set.v2[static_cast<std::size_t>(alpha - 1)];
            const auto& vb1 = set.v1[static_cast<std::size_t>(beta - 1)];
            const auto& vb2 = set.v2[static_cast<std::size_t>(beta - 1)];
            set.a11(beta - 1, alpha - 1) = sys->energy_inner(va1, vb1);
            set.a21(beta - 1, alpha - 1) = sys->energy_inner(va2, vb1);
            set.a12(beta - 1, alpha - 1) = sys->energy_inner(va1, vb2);
            set.a22(beta - 1, alpha - 1) = sys->energy_inner(va2, vb2);
        }
        set.b1[beta - 1] = -sys->energy_inner(set.v1[static_cast<std::size_t>(beta - 1)], set.v0);
        set.b2[beta - 1] = -sys->energy_inner(set.v2[static_cast<std::size_t>(beta - 1)], set.v0);
    }
    return set;
}

double compute_a(const SubproblemSet& s, int i, int j, int alpha, int beta)
{
    const int a = alpha - 1, b = beta - 1;
    if (i == 1 && j == 1) {
        return s.a11(b, a);
    }
    if (i == 2 && j == 1) {
        return s.a21(b, a);
    }
    if (i == 1 && j == 2) {
        return s.a12(b, a);
    }
    if (i == 2 && j == 2) {
        return s.a22(b, a);
    }
    throw std::invalid_argument("compute_a: i, j must be 1 or 2");
}

double compute_b(const SubproblemSet& s, int i, int beta)
{
    if (i == 1) {
        return s.b1[beta - 1];
    }
    if (i == 2) {
        return s.b2[beta - 1];
    }
    throw std::invalid_argument("compute_b: i must be 1 or 2");
}

LimitSolution solve_limit_problem(std::shared_ptr<const LameSystem> sys,
                                  const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& phi,
                                  double eps)
{
    LimitSolution out;
    out.sub = solve_subproblems(sys, phi, eps);
    const SubproblemSet& s = out.sub;
    const int n = static_cast<int>(s.b1.size());

    Eigen::MatrixXd block(2 * n, 2 * n);
    block.topLeftCorner(n, n) = s.a11;
    block.topRightCorner(n, n) = s.a11 + s.a21;
    block.bottomLeftCorner(n, n) = s.a11 + s.a12;
    block.bottomRightCorner(n, n) = s.a11 + s.a21 + s.a12 + s.a22;
    Eigen::VectorXd rhs(2 * n);
    rhs.head(n) = s.b1;
    rhs.tail(n) = s.b1 + s.b2;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(block);
    const double det = lu.determinant();
    double row_scale = 1.0;
    for (int r = 0; r < 2 * n; ++r) {
        row_scale *= block.row(r).norm();
    }
    if (std::abs(det) < 1e-12 * row_scale) {
        throw std::runtime_error("solve_limit_problem: coefficient block system is singular");
    }
    const Eigen::VectorXd x = lu.solve(rhs);

    CoefficientSolution cs;
    cs.X1 = x.head(n);
    cs.X2 = x.tail(n);
    cs.Y1 = rhs.head(n);
    cs.Y2 = rhs.tail(n);
    cs.block = block;
    cs.det = det;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(block);
    cs.cond_estimate = svd.singularValues()(0) /
                       std::max(svd.singularValues()(2 * n - 1), 1e-300);

    // u = sum X1_a v1^a + sum X2_a (v1^a + v2^a) + v0
    std::vector<std::pair<double, const FieldSolution*>> terms;
    for (int a = 0; a < n; ++a) {
        terms.emplace_back(cs.X1[a] + cs.X2[a], &s.v1[static_cast<std::size_t>(a)]);
        terms.emplace_back(cs.X2[a], &s.v2[static_cast<std::size_t>(a)]);
    }
    terms.emplace_back(1.0, &s.v0);
    out.u = sys->combine(terms, "u");
    out.u.eps = eps;

    cs.flux_moment_residuals.resize(2 * n);
    for (int a = 0; a < n; ++a) {
        cs.flux_moment_residuals[a] = sys->energy_inner(out.u, s.v1[static_cast<std::size_t>(a)]);
        cs.flux_moment_residuals[n + a] =
            sys->energy_inner(out.u, s.v2[static_cast<std::size_t>(a)]);
    }
    out.coeffs = cs;
    return out;
}

} // namespace lamegap
