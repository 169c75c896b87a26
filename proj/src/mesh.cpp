#include "lamegap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace lamegap {

namespace {

using Eigen::Vector2d;

double orient2d(const Vector2d& a, const Vector2d& b, const Vector2d& c)
{
    const long double det = (static_cast<long double>(b[0]) - a[0]) *
                                (static_cast<long double>(c[1]) - a[1]) -
                            (static_cast<long double>(b[1]) - a[1]) *
                                (static_cast<long double>(c[0]) - a[0]);
    return static_cast<double>(det);
}

bool in_circumcircle(const Vector2d& a, const Vector2d& b, const Vector2d& c, const Vector2d& p)
{
    const long double ax = a[0] - p[0], ay = a[1] - p[1];
    const long double bx = b[0] - p[0], by = b[1] - p[1];
    const long double cx = c[0] - p[0], cy = c[1] - p[1];
    const long double a2 = ax * ax + ay * ay;
    const long double b2 = bx * bx + by * by;
    const long double c2 = cx * cx + cy * cy;
    const long double det = ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) +
                            a2 * (bx * cy - by * cx);
    return det > 0.0L;
}

/// Incremental Bowyer-Watson triangulation with neighbor walking.
class Delaunay {
public:
    explicit Delaunay(double extent)
    {
        pts_.emplace_back(-4.0 * extent, -4.0 * extent);
        pts_.emplace_back(4.0 * extent, -4.0 * extent);
        pts_.emplace_back(0.0, 4.0 * extent);
        tris_.push_back({{0, 1, 2}, {-1, -1, -1}});
        alive_.push_back(1);
    }

    int insert(const Vector2d& p)
    {
        const int pid = static_cast<int>(pts_.size());
        pts_.push_back(p);

        const int t0 = locate(p);
        // cavity = BFS over circumcircle-violating triangles
        std::vector<int> bad;
        std::vector<int> stack{t0};
        std::vector<char> seen(tris_.size(), 0);
        seen[static_cast<std::size_t>(t0)] = 1;
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            bad.push_back(t);
            for (int e = 0; e < 3; ++e) {
                const int n = tris_[static_cast<std::size_t>(t)].nb[static_cast<std::size_t>(e)];
                if (n < 0 || seen[static_cast<std::size_t>(n)]) {
                    continue;
                }
                const auto& tn = tris_[static_cast<std::size_t>(n)];
                if (in_circumcircle(pts_[static_cast<std::size_t>(tn.v[0])],
                                    pts_[static_cast<std::size_t>(tn.v[1])],
                                    pts_[static_cast<std::size_t>(tn.v[2])], p)) {
                    seen[static_cast<std::size_t>(n)] = 1;
                    stack.push_back(n);
                }
            }
        }

        // cavity boundary: edges of bad triangles whose neighbor is not bad
        struct BEdge {
            int a, b, outer;
        };
        std::vector<BEdge> boundary;
        for (const int t : bad) {
            const auto& tr = tris_[static_cast<std::size_t>(t)];
            for (int e = 0; e < 3; ++e) {
                const int n = tr.nb[static_cast<std::size_t>(e)];
                if (n >= 0 && seen[static_cast<std::size_t>(n)]) {
                    continue;
                }
                boundary.push_back({tr.v[(e + 1) % 3], tr.v[(e + 2) % 3], n});
            }
        }
        for (const int t : bad) {
            alive_[static_cast<std::size_t>(t)] = 0;
        }

        // fan the cavity; link adjacency through a local edge map
        std::unordered_map<std::int64_t, int> half; // directed edge (p_new -> a) key
        std::vector<int> created;
        for (const auto& be : boundary) {
            Tri nt;
            nt.v = {pid, be.a, be.b};
            nt.nb = {be.outer, -1, -1};
            const int nid = add_tri(nt);
            created.push_back(nid);
            if (be.outer >= 0) {
                auto& out = tris_[static_cast<std::size_t>(be.outer)];
                for (int e = 0; e < 3; ++e) {
                    const int va = out.v[(e + 1) % 3];
                    const int vb = out.v[(e + 2) % 3];
                    if ((va == be.b && vb == be.a)) {
                        out.nb[static_cast<std::size_t>(e)] = nid;
                    }
                }
            }
            half[key(pid, be.a)] = nid;    // edge (v0,v1) side
            half[key(be.b, pid)] = nid;    // edge (v2,v0) side
        }
        for (const int nid : created) {
            auto& tr = tris_[static_cast<std::size_t>(nid)];
            // neighbor opposite v[1] shares edge (v[2], v[0]) = (b, pid)
            const auto it1 = half.find(key(pid, tr.v[2]));
            if (it1 != half.end() && it1->second != nid) {
                tr.nb[1] = it1->second;
            }
            // neighbor opposite v[2] shares edge (v[0], v[1]) = (pid, a)
            const auto it2 = half.find(key(tr.v[1], pid));
            if (it2 != half.end() && it2->second != nid) {
                tr.nb[2] = it2->second;
            }
        }
        if (!created.empty()) {
            hint_ = created.front();
        }
        return pid;
    }

    const std::vector<Vector2d>& points() const { return pts_; }

    /// Triangles avoiding the three synthetic corner vertices.
    std::vector<std::array<int, 3>> real_triangles() const
    {
        std::vector<std::array<int, 3>> out;
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            if (!alive_[t]) {
                continue;
            }
            const auto& tr = tris_[t];
            if (tr.v[0] < 3 || tr.v[1] < 3 || tr.v[2] < 3) {
                continue;
            }
            out.push_back({tr.v[0], tr.v[1], tr.v[2]});
        }
        return out;
    }

    int tri_count() const { return static_cast<int>(tris_.size()); }
    bool tri_alive(int t) const { return alive_[static_cast<std::size_t>(t)] != 0; }
    const std::array<int, 3>& tri_vertices(int t) const
    {
        return tris_[static_cast<std::size_t>(t)].v;
    }
    const std::array<int, 3>& tri_neighbors(int t) const
    {
        return tris_[static_cast<std::size_t>(t)].nb;
    }
    bool has_super_vertex(int t) const
    {
        const auto& v = tris_[static_cast<std::size_t>(t)].v;
        return v[0] < 3 || v[1] < 3 || v[2] < 3;
    }

private:
    struct Tri {
        std::array<int, 3> v;
        std::array<int, 3> nb;
    };

    static std::int64_t key(int a, int b)
    {
        return (static_cast<std::int64_t>(a) << 32) | static_cast<std::int64_t>(b);
    }

    int add_tri(const Tri& t)
    {
        tris_.push_back(t);
        alive_.push_back(1);
        return static_cast<int>(tris_.size()) - 1;
    }

    int locate(const Vector2d& p) const
    {
        int t = (hint_ >= 0 && alive_[static_cast<std::size_t>(hint_)]) ? hint_ : -1;
        if (t < 0) {
            for (std::size_t i = 0; i < tris_.size(); ++i) {
                if (alive_[i]) {
                    t = static_cast<int>(i);
                    break;
                }
            }
        }
        for (int step = 0; step < 100000 && t >= 0; ++step) {
            const auto& tr = tris_[static_cast<std::size_t>(t)];
            int cross = -1;
            for (int e = 0; e < 3; ++e) {
                const Vector2d& a = pts_[static_cast<std::size_t>(tr.v[(e + 1) % 3])];
                const Vector2d& b = pts_[static_cast<std::size_t>(tr.v[(e + 2) % 3])];
                if (orient2d(a, b, p) < 0.0) {
                    cross = e;
                    break;
                }
            }
            if (cross < 0) {
                return t;
            }
            t = tr.nb[static_cast<std::size_t>(cross)];
        }
        // robust fallback
        for (std::size_t i = 0; i < tris_.size(); ++i) {
            if (!alive_[i]) {
                continue;
            }
            const auto& tr = tris_[i];
            bool inside = true;
            for (int e = 0; e < 3 && inside; ++e) {
                const Vector2d& a = pts_[static_cast<std::size_t>(tr.v[(e + 1) % 3])];
                const Vector2d& b = pts_[static_cast<std::size_t>(tr.v[(e + 2) % 3])];
                inside = orient2d(a, b, p) >= -1e-14;
            }
            if (inside) {
                return static_cast<int>(i);
            }
        }
        throw std::runtime_error("mesh generation: point location failed");
    }

    std::vector<Vector2d> pts_;
    std::vector<Tri> tris_;
    std::vector<char> alive_;
    int hint_ = 0;
};

/// Spatial hash for nearest-point rejection during refinement.
class PointGrid {
public:
    explicit PointGrid(double cell) : cell_(cell) {}

    void insert(const Vector2d& p)
    {
        cells_[key(p)].push_back(p);
    }

    bool has_point_within(const Vector2d& p, double rad) const
    {
        const int ix = static_cast<int>(std::floor(p[0] / cell_));
        const int iy = static_cast<int>(std::floor(p[1] / cell_));
        const int reach = static_cast<int>(std::ceil(rad / cell_)) + 1;
        for (int dx = -reach; dx <= reach; ++dx) {
            for (int dy = -reach; dy <= reach; ++dy) {
                const auto it = cells_.find(pack(ix + dx, iy + dy));
                if (it == cells_.end()) {
                    continue;
                }
                for (const auto& q : it->second) {
                    if ((q - p).norm() < rad) {
                        return true;
                    }
                }
            }
        }
        return false;
    }

private:
    static std::int64_t pack(int x, int y)
    {
        return (static_cast<std::int64_t>(static_cast<std::uint32_t>(x)) << 32) |
               static_cast<std::int64_t>(static_cast<std::uint32_t>(y));
    }
    std::int64_t key(const Vector2d& p) const
    {
        return pack(static_cast<int>(std::floor(p[0] / cell_)),
                    static_cast<int>(std::floor(p[1] / cell_)));
    }

    double cell_;
    std::unordered_map<std::int64_t, std::vector<Vector2d>> cells_;
};

struct GapBlock {
    // columns[i] = node ids bottom..top at abscissa xs[i]
    std::vector<double> xs;
    std::vector<std::vector<int>> columns;
};

struct Builder {
    const Domain2D& dom;
    const MeshGrading& g;
    Mesh mesh;

    explicit Builder(const Domain2D& d, const MeshGrading& gr) : dom(d), g(gr) {}

    int add_node(const Vector2d& p, int tag)
    {
        mesh.nodes.push_back(p);
        mesh.node_tag.push_back(tag);
        return static_cast<int>(mesh.nodes.size()) - 1;
    }

    double gap_delta(double x) const { return dom.gap_top(x) - dom.gap_bottom(x); }

    // entrance size used by the far-region sizing function; matches the
    // interface column node spacing so the transition stays well shaped
    double entry_h() const
    {
        const double R = dom.chart_halfwidth;
        return std::clamp(1.2 * gap_delta(R) / g.n_layers, g.target_h / 80.0, g.target_h);
    }

    double size_at(const Vector2d& p) const
    {
        const double R = dom.chart_halfwidth;
        const double ymid = 0.5 * (dom.gap_top(R) + dom.gap_bottom(R));
        const double dist = std::min((p - Vector2d(R, ymid)).norm(),
                                     (p - Vector2d(-R, ymid)).norm());
        return std::min(g.target_h, entry_h() + 0.6 * dist);
    }

    std::vector<double> column_abscissae(double x0, double x1) const
    {
        std::vector<double> xs{x0};
        const double dx_max = std::min(g.target_h, (x1 - x0) / 6.0);
        double x = x0;
        while (x < x1) {
            double dx = g.gap_refinement_ratio * gap_delta(x) / g.n_layers;
            dx = std::min(dx, dx_max);
            x += dx;
            if (x >= x1 - 0.4 * dx) {
                x = x1;
            }
            xs.push_back(x);
        }
        return xs;
    }

    std::vector<int> make_column(double x, bool cusp_cut_interior)
    {
        const double bot = dom.gap_bottom(x);
        const double top = dom.gap_top(x);
        std::vector<int> col;
        for (int k = 0; k <= g.n_layers; ++k) {
            const double t = static_cast<double>(k) / g.n_layers;
            int tag = kInterior;
            if (k == 0) {
                tag = kInclusion2;
            } else if (k == g.n_layers) {
                tag = kInclusion1;
            } else if (cusp_cut_interior) {
                tag = kCuspCut;
            }
            col.push_back(add_node(Vector2d(x, bot + t * (top - bot)), tag));
        }
        return col;
    }

    // breaks exact collinearity of the block/Delaunay interface columns
    void jig_column(const std::vector<int>& col, double inward)
    {
        for (std::size_t k = 1; k + 1 < col.size(); ++k) {
            const double s = (k % 2 == 0) ? 1.0 : 0.6;
            mesh.nodes[static_cast<std::size_t>(col[k])][0] += inward * s;
        }
    }

    void triangulate_strip(const std::vector<std::vector<int>>& cols)
    {
        for (std::size_t i = 0; i + 1 < cols.size(); ++i) {
            const auto& a = cols[i];
            const auto& b = cols[i + 1];
            for (int k = 0; k < g.n_layers; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                mesh.tris.push_back({a[ku], b[ku], b[ku + 1]});
                mesh.tris.push_back({a[ku], b[ku + 1], a[ku + 1]});
            }
            mesh.boundary_edges.push_back({a[0], b[0], kInclusion2});
            mesh.boundary_edges.push_back(
                {a[static_cast<std::size_t>(g.n_layers)], b[static_cast<std::size_t>(g.n_layers)],
                 kInclusion1});
        }
    }

    void emit_cut_edges(const std::vector<int>& col)
    {
        for (std::size_t k = 0; k + 1 < col.size(); ++k) {
            mesh.boundary_edges.push_back({col[k], col[k + 1], kCuspCut});
        }
    }

    GapBlock build_gap_block()
    {
        const double R = dom.chart_halfwidth;
        GapBlock block;
        if (dom.eps > 0.0) {
            const auto right = column_abscissae(0.0, R);
            std::vector<double> xs;
            for (auto it = right.rbegin(); it != right.rend(); ++it) {
                if (*it > 0.0) {
                    xs.push_back(-*it);
                }
            }
            xs.insert(xs.end(), right.begin(), right.end());
            block.xs = xs;
            for (const double x : xs) {
                block.columns.push_back(make_column(x, false));
            }
            triangulate_strip(block.columns);
        } else {
            if (!(g.eta > 0.0)) {
                throw std::invalid_argument("build_mesh: touching configuration needs eta > 0");
            }
            const auto right = column_abscissae(g.eta, R);
            std::vector<std::vector<int>> right_cols;
            for (const double x : right) {
                right_cols.push_back(make_column(x, x == g.eta));
            }
            triangulate_strip(right_cols);
            emit_cut_edges(right_cols.front());

            std::vector<std::vector<int>> left_cols;
            for (auto it = right.rbegin(); it != right.rend(); ++it) {
                left_cols.push_back(make_column(-*it, *it == g.eta));
            }
            triangulate_strip(left_cols);
            emit_cut_edges(left_cols.back());

            block.columns = std::move(left_cols);
            block.columns.insert(block.columns.end(), right_cols.begin(), right_cols.end());
            for (const auto& c : block.columns) {
                block.xs.push_back(mesh.nodes[static_cast<std::size_t>(c[0])][0]);
            }
        }
        return block;
    }

    // adaptive arc-length march over a superellipse between two parameters
    std::vector<double> march_arc(const Superellipse& se, double t0, double t1) const
    {
        std::vector<double> params;
        double t = t0;
        const double dt_probe = 1e-7;
        int guard = 0;
        while (t < t1 && guard++ < 100000) {
            const Vector2d p = se.point(t);
            const double speed =
                std::max((se.point(t + dt_probe) - p).norm() / dt_probe, 1e-9);
            double dt = size_at(p) / speed;
            dt = std::clamp(dt, 1e-5, 0.35);
            if (t + 1.45 * dt >= t1) {
                break;
            }
            t += dt;
            params.push_back(t);
        }
        return params;
    }

    bool in_gap_strip(const Vector2d& p) const
    {
        const double R = dom.chart_halfwidth;
        if (std::abs(p[0]) > R) {
            return false;
        }
        return p[1] > dom.gap_bottom(p[0]) - 1e-14 && p[1] < dom.gap_top(p[0]) + 1e-14;
    }

    bool in_outer_region(const Vector2d& p) const
    {
        return dom.in_matrix(p) && !in_gap_strip(p);
    }
};

struct Chain {
    enum class Curve { Inc1, Inc2, Circle };
    Curve curve;
    int tag = kInterior;
    bool closed = false;
    std::vector<int> ids;       // global node ids in order
    std::vector<double> params; // curve parameter per node (same length)
};

} // namespace

Mesh build_mesh(const Domain2D& dom, const MeshGrading& grading)
{
    if (grading.n_layers < 2) {
        throw std::invalid_argument("build_mesh: n_layers must be >= 2");
    }
    if (!(grading.target_h > 0.0)) {
        throw std::invalid_argument("build_mesh: target_h must be positive");
    }

    Builder bld(dom, grading);
    const double R = dom.chart_halfwidth;

    GapBlock block = bld.build_gap_block();
    const std::vector<int>& col_left = block.columns.front();
    const std::vector<int>& col_right = block.columns.back();
    // displace interface interior nodes outward so the outer triangulation
    // sees no exactly collinear point triples along the interfaces
    const double jig = 1e-6 * bld.gap_delta(R);
    bld.jig_column(col_left, -jig);
    bld.jig_column(col_right, jig);

    const int corner_r_top = col_right[static_cast<std::size_t>(grading.n_layers)];
    const int corner_r_bot = col_right[0];
    const int corner_l_top = col_left[static_cast<std::size_t>(grading.n_layers)];
    const int corner_l_bot = col_left[0];

    const double tc1 = std::acos(std::pow(R / dom.inc1.r, dom.inc1.m / 2.0));
    const double tc2 = std::acos(std::pow(R / dom.inc2.r, dom.inc2.m / 2.0));
    const double pi = std::numbers::pi_v<double>;

    // on-curve samples added when a wall segment fails to appear in the
    // triangulation; indexed by chain
    std::array<std::vector<double>, 3> extra_params;
    std::vector<Vector2d> extra_steiner;
    std::string failure;

    for (int attempt = 0; attempt < 8; ++attempt) {
        Mesh mesh = bld.mesh; // copy of the gap-block state
        std::vector<Chain> chains;

        auto curve_point = [&](Chain::Curve c, double t) -> Vector2d {
            switch (c) {
            case Chain::Curve::Inc1:
                return dom.inc1.point(t);
            case Chain::Curve::Inc2:
                return dom.inc2.point(t);
            case Chain::Curve::Circle:
                return dom.outer_center + dom.outer_radius * Vector2d(std::cos(t), std::sin(t));
            }
            throw std::logic_error("curve_point");
        };

        auto build_chain = [&](Chain::Curve curve, int tag, const std::vector<double>& marched,
                               double t_first, double t_last, int first_id, int last_id) {
            Chain ch;
            ch.curve = curve;
            ch.tag = tag;
            std::vector<double> all = marched;
            const auto& extra = extra_params[static_cast<std::size_t>(curve)];
            for (const double t : extra) {
                if (t > t_first + 1e-12 && t < t_last - 1e-12) {
                    all.push_back(t);
                }
            }
            std::sort(all.begin(), all.end());
            all.erase(std::unique(all.begin(), all.end(),
                                  [](double u, double v) { return std::abs(u - v) < 1e-10; }),
                      all.end());
            ch.ids.push_back(first_id);
            ch.params.push_back(t_first);
            for (const double t : all) {
                mesh.nodes.push_back(curve_point(curve, t));
                mesh.node_tag.push_back(tag);
                ch.ids.push_back(static_cast<int>(mesh.nodes.size()) - 1);
                ch.params.push_back(t);
            }
            if (last_id >= 0) {
                ch.ids.push_back(last_id);
                ch.params.push_back(t_last);
            } else {
                ch.closed = true;
            }
            chains.push_back(std::move(ch));
        };

        build_chain(Chain::Curve::Inc1, kInclusion1, bld.march_arc(dom.inc1, -tc1, pi + tc1),
                    -tc1, pi + tc1, corner_r_top, corner_l_top);
        build_chain(Chain::Curve::Inc2, kInclusion2,
                    bld.march_arc(dom.inc2, pi - tc2, 2.0 * pi + tc2), pi - tc2, 2.0 * pi + tc2,
                    corner_l_bot, corner_r_bot);
        {
            // outer circle, phase-shifted to avoid mirror-symmetric ties
            const int n = std::max(
                24, static_cast<int>(std::ceil(2.0 * pi * dom.outer_radius / grading.target_h)));
            std::vector<double> angles;
            for (int k = 1; k < n; ++k) {
                angles.push_back(2.0 * pi * (k + 0.37) / n);
            }
            const double t0 = 2.0 * pi * 0.37 / n;
            mesh.nodes.push_back(curve_point(Chain::Curve::Circle, t0));
            mesh.node_tag.push_back(kOuter);
            const int first = static_cast<int>(mesh.nodes.size()) - 1;
            build_chain(Chain::Curve::Circle, kOuter, angles, t0, t0 + 2.0 * pi, first, -1);
        }

        // Delaunay over every outer-region point
        Delaunay dt(2.0 * dom.outer_radius + 2.0);
        std::unordered_map<int, int> d2g; // delaunay id -> global id
        std::vector<int> g2d(mesh.nodes.size(), -1);
        auto insert_global = [&](int gid) {
            if (g2d[static_cast<std::size_t>(gid)] >= 0) {
                return;
            }
            const int did = dt.insert(mesh.nodes[static_cast<std::size_t>(gid)]);
            d2g[did] = gid;
            g2d[static_cast<std::size_t>(gid)] = did;
        };
        for (const Chain& ch : chains) {
            for (const int gid : ch.ids) {
                insert_global(gid);
            }
        }
        for (const int gid : col_left) {
            insert_global(gid);
        }
        for (const int gid : col_right) {
            insert_global(gid);
        }

        // wall segments in Delaunay ids, for encroachment tests and the
        // flood-fill barrier
        struct Wall {
            int da, db;
            Vector2d mid;
            double half_len;
        };
        std::vector<Wall> wall_list;
        std::set<std::pair<int, int>> wall_set;
        auto add_wall = [&](int ga, int gb) {
            const int da = g2d[static_cast<std::size_t>(ga)];
            const int db = g2d[static_cast<std::size_t>(gb)];
            const Vector2d a = mesh.nodes[static_cast<std::size_t>(ga)];
            const Vector2d b = mesh.nodes[static_cast<std::size_t>(gb)];
            wall_list.push_back({da, db, 0.5 * (a + b), 0.5 * (a - b).norm()});
            wall_set.insert({std::min(da, db), std::max(da, db)});
        };
        for (const Chain& ch : chains) {
            for (std::size_t k = 0; k + 1 < ch.ids.size(); ++k) {
                add_wall(ch.ids[k], ch.ids[k + 1]);
            }
            if (ch.closed) {
                add_wall(ch.ids.back(), ch.ids.front());
            }
        }
        for (std::size_t k = 0; k + 1 < col_left.size(); ++k) {
            add_wall(col_left[k], col_left[k + 1]);
        }
        for (std::size_t k = 0; k + 1 < col_right.size(); ++k) {
            add_wall(col_right[k], col_right[k + 1]);
        }

        // hash wall diametral disks over a coarse grid for O(1) queries
        const double wcell = grading.target_h;
        std::unordered_map<std::int64_t, std::vector<int>> wall_grid;
        auto wpack = [](int x, int y) {
            return (static_cast<std::int64_t>(static_cast<std::uint32_t>(x)) << 32) |
                   static_cast<std::int64_t>(static_cast<std::uint32_t>(y));
        };
        for (std::size_t wi = 0; wi < wall_list.size(); ++wi) {
            const Wall& w = wall_list[wi];
            const int x0 = static_cast<int>(std::floor((w.mid[0] - w.half_len) / wcell));
            const int x1 = static_cast<int>(std::floor((w.mid[0] + w.half_len) / wcell));
            const int y0 = static_cast<int>(std::floor((w.mid[1] - w.half_len) / wcell));
            const int y1 = static_cast<int>(std::floor((w.mid[1] + w.half_len) / wcell));
            for (int x = x0; x <= x1; ++x) {
                for (int y = y0; y <= y1; ++y) {
                    wall_grid[wpack(x, y)].push_back(static_cast<int>(wi));
                }
            }
        }
        auto encroaches = [&](const Vector2d& p) {
            const int cx = static_cast<int>(std::floor(p[0] / wcell));
            const int cy = static_cast<int>(std::floor(p[1] / wcell));
            const auto it = wall_grid.find(wpack(cx, cy));
            if (it == wall_grid.end()) {
                return false;
            }
            for (const int wi : it->second) {
                const Wall& w = wall_list[static_cast<std::size_t>(wi)];
                if ((p - w.mid).norm() < w.half_len) {
                    return true;
                }
            }
            return false;
        };

        PointGrid grid(0.5 * grading.target_h);
        for (const auto& [did, gid] : d2g) {
            grid.insert(mesh.nodes[static_cast<std::size_t>(gid)]);
        }
        for (const auto& p : extra_steiner) {
            if (!grid.has_point_within(p, 1e-12) && !encroaches(p)) {
                const int did = dt.insert(p);
                mesh.nodes.push_back(p);
                mesh.node_tag.push_back(kInterior);
                d2g[did] = static_cast<int>(mesh.nodes.size()) - 1;
                grid.insert(p);
            }
        }

        // size-driven interior refinement; candidate sites must not encroach
        // any wall segment
        for (int pass = 0; pass < 40; ++pass) {
            const auto tris = dt.real_triangles();
            std::vector<Vector2d> to_insert;
            for (const auto& t : tris) {
                const Vector2d& a = dt.points()[static_cast<std::size_t>(t[0])];
                const Vector2d& c1 = dt.points()[static_cast<std::size_t>(t[1])];
                const Vector2d& c2 = dt.points()[static_cast<std::size_t>(t[2])];
                const Vector2d centroid = (a + c1 + c2) / 3.0;
                if (!bld.in_outer_region(centroid)) {
                    continue;
                }
                const double d2 = 2.0 * orient2d(a, c1, c2);
                if (std::abs(d2) < 1e-30) {
                    continue;
                }
                const double a2 = a.squaredNorm(), b2 = c1.squaredNorm(), cc2 = c2.squaredNorm();
                Vector2d cc;
                cc[0] = (a2 * (c1[1] - c2[1]) + b2 * (c2[1] - a[1]) + cc2 * (a[1] - c1[1])) / d2;
                cc[1] = (a2 * (c2[0] - c1[0]) + b2 * (a[0] - c2[0]) + cc2 * (c1[0] - a[0])) / d2;
                const double rad = (cc - a).norm();
                const double h = bld.size_at(centroid);
                const double lmin =
                    std::min({(a - c1).norm(), (c1 - c2).norm(), (c2 - a).norm()});
                // radius-edge ratio > 1.35 is roughly min angle < 22 degrees
                const bool too_big = rad > 0.72 * h;
                const bool too_thin = rad > 1.35 * lmin;
                if (!too_big && !too_thin) {
                    continue;
                }
                const Vector2d site = bld.in_outer_region(cc) ? cc : centroid;
                if (encroaches(site)) {
                    continue;
                }
                const double hs = bld.size_at(site);
                const double reject = too_thin ? std::min(0.3 * rad, 0.45 * hs) : 0.45 * hs;
                if (grid.has_point_within(site, reject)) {
                    continue;
                }
                to_insert.push_back(site);
                grid.insert(site);
            }
            if (to_insert.empty()) {
                break;
            }
            for (const auto& p : to_insert) {
                const int did = dt.insert(p);
                mesh.nodes.push_back(p);
                mesh.node_tag.push_back(kInterior);
                d2g[did] = static_cast<int>(mesh.nodes.size()) - 1;
            }
            if (mesh.nodes.size() > 300000) {
                throw std::runtime_error("build_mesh: refinement exploded");
            }
        }

        // audit: every wall must be an edge of the triangulation; repair by
        // splitting the missing segments on their curves (or guarding the
        // interface) and retry
        std::set<std::pair<int, int>> alive_edges;
        for (int t = 0; t < dt.tri_count(); ++t) {
            if (!dt.tri_alive(t)) {
                continue;
            }
            const auto& v = dt.tri_vertices(t);
            for (int e = 0; e < 3; ++e) {
                const int a = v[static_cast<std::size_t>(e)];
                const int b = v[static_cast<std::size_t>((e + 1) % 3)];
                alive_edges.insert({std::min(a, b), std::max(a, b)});
            }
        }
        bool missing_any = false;
        for (const Chain& ch : chains) {
            const std::size_t n = ch.ids.size();
            for (std::size_t k = 0; k + 1 <= n - 1; ++k) {
                const std::size_t k2 = (k + 1) % n;
                if (k + 1 == n && !ch.closed) {
                    break;
                }
                const std::size_t kk2 = (k + 1 < n) ? k + 1 : 0;
                const int da = g2d[static_cast<std::size_t>(ch.ids[k])];
                const int db = g2d[static_cast<std::size_t>(ch.ids[kk2])];
                (void)k2;
                if (!alive_edges.count({std::min(da, db), std::max(da, db)})) {
                    missing_any = true;
                    extra_params[static_cast<std::size_t>(ch.curve)].push_back(
                        0.5 * (ch.params[k] + ch.params[kk2]));
                }
            }
            if (ch.closed) {
                const int da = g2d[static_cast<std::size_t>(ch.ids.back())];
                const int db = g2d[static_cast<std::size_t>(ch.ids.front())];
                if (!alive_edges.count({std::min(da, db), std::max(da, db)})) {
                    missing_any = true;
                    extra_params[static_cast<std::size_t>(ch.curve)].push_back(
                        0.5 * (ch.params.back() + (ch.params.front() + 2.0 * pi)));
                }
            }
        }
        auto audit_column = [&](const std::vector<int>& col, double outward) {
            for (std::size_t k = 0; k + 1 < col.size(); ++k) {
                const int da = g2d[static_cast<std::size_t>(col[k])];
                const int db = g2d[static_cast<std::size_t>(col[k + 1])];
                if (!alive_edges.count({std::min(da, db), std::max(da, db)})) {
                    missing_any = true;
                    const Vector2d a = mesh.nodes[static_cast<std::size_t>(col[k])];
                    const Vector2d b = mesh.nodes[static_cast<std::size_t>(col[k + 1])];
                    extra_steiner.push_back(0.5 * (a + b) +
                                            Vector2d(outward * 0.45 * (b - a).norm(), 0.0));
                }
            }
        };
        audit_column(col_left, -1.0);
        audit_column(col_right, 1.0);
        if (missing_any) {
            failure += " [attempt " + std::to_string(attempt) + "] wall segments missing";
            continue;
        }

        // keep the outer region by flood fill bounded by the wall segments;
        // this stays conforming even at reflex corners
        const Vector2d seed_pt(0.0, 0.5 * (dom.inc1.c + dom.inc1.r + dom.outer_center[1] +
                                           dom.outer_radius));
        int seed = -1;
        double best = 1e300;
        for (int t = 0; t < dt.tri_count(); ++t) {
            if (!dt.tri_alive(t) || dt.has_super_vertex(t)) {
                continue;
            }
            const auto& v = dt.tri_vertices(t);
            const Vector2d c = (dt.points()[static_cast<std::size_t>(v[0])] +
                                dt.points()[static_cast<std::size_t>(v[1])] +
                                dt.points()[static_cast<std::size_t>(v[2])]) /
                               3.0;
            const double dist = (c - seed_pt).norm();
            if (dist < best && bld.in_outer_region(c)) {
                best = dist;
                seed = t;
            }
        }
        if (seed < 0) {
            throw std::runtime_error("build_mesh: no seed triangle for flood fill");
        }

        std::vector<char> filled(static_cast<std::size_t>(dt.tri_count()), 0);
        std::vector<int> fstack{seed};
        filled[static_cast<std::size_t>(seed)] = 1;
        bool leaked = false;
        while (!fstack.empty()) {
            const int t = fstack.back();
            fstack.pop_back();
            if (dt.has_super_vertex(t)) {
                leaked = true;
                break;
            }
            const auto& v = dt.tri_vertices(t);
            const auto& nb = dt.tri_neighbors(t);
            for (int e = 0; e < 3; ++e) {
                const int n = nb[static_cast<std::size_t>(e)];
                if (n < 0 || !dt.tri_alive(n) || filled[static_cast<std::size_t>(n)]) {
                    continue;
                }
                const int a = v[(e + 1) % 3];
                const int b = v[(e + 2) % 3];
                if (wall_set.count({std::min(a, b), std::max(a, b)})) {
                    continue;
                }
                filled[static_cast<std::size_t>(n)] = 1;
                fstack.push_back(n);
            }
        }
        if (leaked) {
            failure += " [attempt " + std::to_string(attempt) + "] flood fill leaked";
            continue;
        }
        for (int t = 0; t < dt.tri_count(); ++t) {
            if (!dt.tri_alive(t) || !filled[static_cast<std::size_t>(t)]) {
                continue;
            }
            const auto& v = dt.tri_vertices(t);
            const Vector2d& a = dt.points()[static_cast<std::size_t>(v[0])];
            const Vector2d& c1 = dt.points()[static_cast<std::size_t>(v[1])];
            const Vector2d& c2 = dt.points()[static_cast<std::size_t>(v[2])];
            if (orient2d(a, c1, c2) > 0.0) {
                mesh.tris.push_back({d2g.at(v[0]), d2g.at(v[1]), d2g.at(v[2])});
            } else {
                mesh.tris.push_back({d2g.at(v[0]), d2g.at(v[2]), d2g.at(v[1])});
            }
        }

        // boundary edges from the chains
        for (const Chain& ch : chains) {
            const std::size_t n = ch.ids.size();
            for (std::size_t k = 0; k + 1 < n; ++k) {
                mesh.boundary_edges.push_back({ch.ids[k], ch.ids[k + 1], ch.tag});
            }
            if (ch.closed) {
                mesh.boundary_edges.push_back({ch.ids[n - 1], ch.ids[0], ch.tag});
            }
        }

        try {
            mesh.validate();
        } catch (const std::exception& e) {
            failure += " [attempt " + std::to_string(attempt) + "] " + e.what();
            continue;
        }

        const Superellipse inc1 = dom.inc1;
        const Superellipse inc2 = dom.inc2;
        const Vector2d ctr = dom.outer_center;
        const double rad = dom.outer_radius;
        mesh.boundary_projector = [inc1, inc2, ctr, rad](int tag,
                                                         const Vector2d& p) -> Vector2d {
            auto onto_superellipse = [](const Superellipse& se, const Vector2d& q) {
                const Vector2d d(q[0], q[1] - se.c);
                const double w = std::pow(std::abs(d[0]) / se.r, se.m) +
                                 std::pow(std::abs(d[1]) / se.r, se.m);
                if (w <= 0.0) {
                    return q;
                }
                const double s = std::pow(w, -1.0 / se.m);
                return Vector2d(s * d[0], se.c + s * d[1]);
            };
            switch (tag) {
            case kInclusion1:
                return onto_superellipse(inc1, p);
            case kInclusion2:
                return onto_superellipse(inc2, p);
            case kOuter:
                return ctr + rad * (p - ctr).normalized();
            default:
                return p; // cusp cuts are exact straight segments
            }
        };
        return mesh;
    }
    throw std::runtime_error("build_mesh: could not produce a conforming mesh: " + failure);
}

void Mesh::validate() const
{
    // orientation and areas
    for (auto& t : tris) {
        const Vector2d& a = nodes[static_cast<std::size_t>(t[0])];
        const Vector2d& b = nodes[static_cast<std::size_t>(t[1])];
        const Vector2d& c = nodes[static_cast<std::size_t>(t[2])];
        if (orient2d(a, b, c) <= 0.0) {
            std::ostringstream os;
            os << "mesh validate: non-positive triangle area, nodes (" << t[0] << "," << t[1]
               << "," << t[2] << ") at [" << a.transpose() << "] [" << b.transpose() << "] ["
               << c.transpose() << "]";
            throw std::runtime_error(os.str());
        }
    }
    // edge incidence: boundary edges once, interior edges twice
    std::map<std::pair<int, int>, int> count;
    auto ekey = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
    for (const auto& t : tris) {
        for (int e = 0; e < 3; ++e) {
            ++count[ekey(t[static_cast<std::size_t>(e)], t[static_cast<std::size_t>((e + 1) % 3)])];
        }
    }
    std::map<std::pair<int, int>, int> btag;
    for (const auto& be : boundary_edges) {
        btag[ekey(be[0], be[1])] = be[2];
    }
    for (const auto& [edge, c] : count) {
        if (c > 2) {
            throw std::runtime_error("mesh validate: non-manifold edge");
        }
        if (c == 1 && btag.find(edge) == btag.end()) {
            std::ostringstream os;
            os << "mesh validate: untagged boundary edge (" << edge.first << "," << edge.second
               << ")";
            throw std::runtime_error(os.str());
        }
    }
    for (const auto& [edge, tag] : btag) {
        const auto it = count.find(edge);
        if (it == count.end() || it->second != 1) {
            std::ostringstream os;
            os << "mesh validate: declared boundary edge not on the mesh boundary ("
               << edge.first << "," << edge.second << ") tag " << tag;
            throw std::runtime_error(os.str());
        }
    }
}

MeshStats Mesh::stats() const
{
    MeshStats s;
    s.n_nodes = static_cast<int>(nodes.size());
    s.n_triangles = static_cast<int>(tris.size());
    s.min_angle_deg = 180.0;
    s.max_aspect = 0.0;
    s.min_area = 1e300;
    for (const auto& t : tris) {
        const Vector2d& a = nodes[static_cast<std::size_t>(t[0])];
        const Vector2d& b = nodes[static_cast<std::size_t>(t[1])];
        const Vector2d& c = nodes[static_cast<std::size_t>(t[2])];
        const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
        const double area = 0.5 * orient2d(a, b, c);
        s.min_area = std::min(s.min_area, area);
        const double lmax = std::max({la, lb, lc});
        const double lmin = std::min({la, lb, lc});
        s.max_aspect = std::max(s.max_aspect, lmax / std::max(lmin, 1e-300));
        auto angle = [](double opp, double s1, double s2) {
            const double cosv =
                std::clamp((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2), -1.0, 1.0);
            return std::acos(cosv) * 180.0 / std::numbers::pi_v<double>;
        };
        s.min_angle_deg = std::min(
            {s.min_angle_deg, angle(la, lb, lc), angle(lb, lc, la), angle(lc, la, lb)});
    }
    return s;
}

void write_mesh(const Mesh& mesh, std::ostream& os)
{
    os << "lamegap-mesh 1\n";
    os << "nodes " << mesh.nodes.size() << "\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        os << mesh.nodes[i][0] << " " << mesh.nodes[i][1] << " " << mesh.node_tag[i] << "\n";
    }
    os << "triangles " << mesh.tris.size() << "\n";
    for (const auto& t : mesh.tris) {
        os << t[0] << " " << t[1] << " " << t[2] << "\n";
    }
    os << "boundary_edges " << mesh.boundary_edges.size() << "\n";
    for (const auto& e : mesh.boundary_edges) {
        os << e[0] << " " << e[1] << " " << e[2] << "\n";
    }
}

void write_mesh_file(const Mesh& mesh, const std::string& path)
{
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("write_mesh_file: cannot open " + path);
    }
    write_mesh(mesh, os);
}

Mesh read_mesh(std::istream& is)
{
    std::string magic;
    int version = 0;
    is >> magic >> version;
    if (magic != "lamegap-mesh" || version != 1) {
        throw std::runtime_error("read_mesh: bad header");
    }
    Mesh mesh;
    std::string section;
    std::size_t n = 0;
    is >> section >> n;
    if (section != "nodes") {
        throw std::runtime_error("read_mesh: expected nodes section");
    }
    mesh.nodes.resize(n);
    mesh.node_tag.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        is >> mesh.nodes[i][0] >> mesh.nodes[i][1] >> mesh.node_tag[i];
    }
    is >> section >> n;
    if (section != "triangles") {
        throw std::runtime_error("read_mesh: expected triangles section");
    }
    mesh.tris.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        is >> mesh.tris[i][0] >> mesh.tris[i][1] >> mesh.tris[i][2];
    }
    is >> section >> n;
    if (section != "boundary_edges") {
        throw std::runtime_error("read_mesh: expected boundary_edges section");
    }
    mesh.boundary_edges.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        is >> mesh.boundary_edges[i][0] >> mesh.boundary_edges[i][1] >> mesh.boundary_edges[i][2];
    }
    if (!is) {
        throw std::runtime_error("read_mesh: truncated file");
    }
    return mesh;
}

Mesh read_mesh_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("read_mesh_file: cannot open " + path);
    }
    return read_mesh(is);
}

} // namespace lamegap
