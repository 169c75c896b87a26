#pragma once

#include "lamegap/geometry.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace lamegap {

enum BoundaryTag : int {
    kInterior = -1,
    kOuter = 0,
    kInclusion1 = 1,
    kInclusion2 = 2,
    kCuspCut = 3,
};

struct MeshStats {
    int n_nodes = 0;
    int n_triangles = 0;
    int gap_columns = 0;
    int gap_layers = 0;
    double min_angle_deg = 0.0;
    double max_aspect = 0.0;
    double min_area = 0.0;
};

/// Conforming triangle mesh of the matrix region with tagged boundary.
/// Triangles are CCW; boundary edges carry the tag of the curve they
/// discretize.  The gap is covered by layered anisotropic columns whose
/// nodes lie exactly on the analytic inclusion boundaries.
struct Mesh {
    std::vector<Eigen::Vector2d> nodes;
    std::vector<std::array<int, 3>> tris;
    std::vector<int> node_tag;                     // BoundaryTag per node
    std::vector<std::array<int, 3>> boundary_edges; // {n0, n1, tag}

    /// Maps a point near a tagged boundary onto the analytic curve; used to
    /// snap higher-order boundary nodes.  Set by build_mesh; not serialized,
    /// so meshes loaded from text keep straight boundary edges.
    std::function<Eigen::Vector2d(int tag, const Eigen::Vector2d&)> boundary_projector;

    MeshStats stats() const;
    void validate() const; // conformity + orientation, throws on failure
};

struct MeshGrading {
    int n_layers = 6;        // element layers across the gap thickness
    double target_h = 0.35;  // far-field element size
    double gap_refinement_ratio = 4.0; // column width / layer height in the gap
    double eta = 0.0;        // cusp cutoff half-width (required when eps = 0)
};

Mesh build_mesh(const Domain2D& dom, const MeshGrading& grading);

void write_mesh(const Mesh& mesh, std::ostream& os);
void write_mesh_file(const Mesh& mesh, const std::string& path);
Mesh read_mesh(std::istream& is);
Mesh read_mesh_file(const std::string& path);

} // namespace lamegap
