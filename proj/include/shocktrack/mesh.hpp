#ifndef SHOCKTRACK_MESH_HPP
#define SHOCKTRACK_MESH_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "shocktrack/basis.hpp"

namespace shocktrack {

/// Metric terms of the reference-to-physical map at one point.
struct MetricData {
    Eigen::Matrix2d J;
    double det = 0.0;
    Eigen::Matrix2d cof;
    double surf = 0.0;        // ||cof(J) nhat||, face points only
    Eigen::Vector2d normal;   // unit physical normal, face points only
};

/// Conforming curved quadrilateral mesh. Element nodes are stored
/// lexicographically ((q+1)^2 ids, first reference coordinate fastest);
/// node coordinates are a flat interleaved (x,y) vector.
class Mesh {
public:
    struct Face {
        int elem_p = -1, face_p = -1;  // interior side
        int elem_m = -1, face_m = -1;  // neighbor side, -1 on the boundary
        bool reversed = true;          // neighbor traverses with parameter 1-t
        int btag = -1;                 // boundary tag, -1 for interior faces
        bool wall_projected = false;   // curved-wall exact-projection treatment
    };

    int q = 1;
    Eigen::VectorXd coords;                   // 2*n_nodes, interleaved
    std::vector<std::vector<int>> elems;      // (q+1)^2 node ids each
    std::vector<Face> faces;
    std::vector<std::string> boundary_names;  // btag -> name

    // Optional per-node metadata used by the problem definitions.
    std::vector<Eigen::Vector2d> node_param;  // generator parameter coords
    std::vector<char> node_on_ring;           // shock-tracking control ring flag

    int n_nodes() const { return int(coords.size() / 2); }
    int n_elems() const { return int(elems.size()); }
    int nodes_per_elem() const { return (q + 1) * (q + 1); }

    Eigen::Vector2d node(int i) const { return {coords[2 * i], coords[2 * i + 1]}; }

    /// Local node indices along face f, counterclockwise.
    std::vector<int> face_local_nodes(int f) const;
    /// Global node ids along face f of element e, counterclockwise.
    std::vector<int> face_nodes(int e, int f) const;
    /// Corner vertex ids of an element (lexicographic corners).
    std::array<int, 4> corner_nodes(int e) const;

    int boundary_tag(const std::string &name) const;

    /// Rebuild the face list from element connectivity. Boundary tags are
    /// assigned by the classifier (given the two endpoint vertex ids).
    void build_faces(const std::function<int(int, int)> &classify_boundary);
};

/// x(xi) for one element.
Eigen::Vector2d reference_to_physical(const Mesh &mesh, int elem, const Eigen::Vector2d &xi);

/// Metric terms at a reference point of an element (volume variant: no
/// surface data).
MetricData metric_at(const Mesh &mesh, int elem, const Eigen::Vector2d &xi);

/// Metric terms at parameter t of face f of element e, including surface
/// scaling and unit outward normal (wall projection applied when requested).
MetricData face_metric_at(const Mesh &mesh, int elem, int face, double t, bool wall_projected);

/// det(J) > 0 at every volume and face quadrature point of every element,
/// for the quadrature rules of both the coarse and enriched spaces.
bool mesh_validity(const Mesh &mesh, const Eigen::VectorXd &coords,
                   const std::vector<int> &nqs);

/// Mesh distortion penalty of the node vector x (same layout as coords):
///   f = (1/N_k) sum_k  (int_k (|J|_F^2/det(J))^2 dx) / (int_k dx)
double mesh_distortion(const Mesh &mesh, const Eigen::VectorXd &x, int nq);
double mesh_distortion_gradient(const Mesh &mesh, const Eigen::VectorXd &x, int nq,
                                Eigen::VectorXd &grad);
double mesh_distortion_hessian(const Mesh &mesh, const Eigen::VectorXd &x, int nq,
                               Eigen::VectorXd &grad, Eigen::SparseMatrix<double> &hess);

/// Structured grid on [x0,x1] x [y0,y1] with nx x ny elements of order q.
/// Boundary names: bottom, right, top, left.
Mesh structured_rectangle(double x0, double x1, double y0, double y1,
                          int nx, int ny, int q);

/// Uniform isotropic refinement (each quad into four children sampling the
/// parent map). Parameter coords and ring flags are propagated; wall nodes
/// can be reprojected by the caller.
Mesh refine_uniform(const Mesh &mesh);

/// Elevate grid order 1 -> 2, placing new nodes at face midpoints and
/// element centroids of the current geometry.
Mesh elevate_to_q2(const Mesh &mesh);

/// Place non-control q=2 mid-face and centroid nodes at the centers of
/// their faces/elements (wall-projected faces get reprojected by the
/// problem). `is_control` marks nodes that must not move.
void recenter_high_order_nodes(Mesh &mesh, const std::vector<char> &is_control);

/// Plain text mesh format: node list, element connectivity, boundary tags.
void write_mesh_text(const Mesh &mesh, std::ostream &os);
Mesh read_mesh_text(std::istream &is);

}  // namespace shocktrack

#endif
