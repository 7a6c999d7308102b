#ifndef SHOCKTRACK_BASIS_HPP
#define SHOCKTRACK_BASIS_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace shocktrack {

/// Gauss-Legendre rule with n points on [0,1].
struct Quad1D {
    Eigen::VectorXd points;
    Eigen::VectorXd weights;
};
Quad1D gauss_legendre(int n);

/// 1D interpolation node families on [0,1]. Degree 0 uses the midpoint.
Eigen::VectorXd equispaced_nodes(int degree);
Eigen::VectorXd gauss_lobatto_nodes(int degree);

/// Values and derivatives of all Lagrange basis functions through the given
/// nodes, evaluated at t.
void lagrange_eval(const Eigen::VectorXd &nodes, double t,
                   Eigen::VectorXd &values, Eigen::VectorXd &derivs);

/// Tensor-product basis evaluated at a set of 2D reference points.
/// Basis ordering is lexicographic with the first coordinate fastest.
struct BasisTable {
    Eigen::MatrixXd val;  // n_points x n_basis
    Eigen::MatrixXd d0;   // d/dxi_0
    Eigen::MatrixXd d1;   // d/dxi_1
};
BasisTable tensor_basis_at(const Eigen::VectorXd &nodes1d,
                           const std::vector<Eigen::Vector2d> &pts);

/// Reference-element quadrature layout shared by all assembly passes:
/// tensor Gauss-Legendre volume points plus one rule per face. Faces are
/// parameterized counterclockwise so that two conforming neighbors traverse
/// a shared face in opposite directions:
///   face 0: (t,0)  face 1: (1,t)  face 2: (1-t,1)  face 3: (0,1-t)
struct RefQuadrature {
    int nq = 0;
    std::vector<Eigen::Vector2d> vol_pts;
    Eigen::VectorXd vol_w;
    std::array<std::vector<Eigen::Vector2d>, 4> face_pts;
    Eigen::VectorXd face_w;
    std::array<Eigen::Vector2d, 4> ref_normal;

    static RefQuadrature make(int nq);

    /// Point on face `f` at parameter t in [0,1].
    static Eigen::Vector2d face_point(int f, double t);
};

/// All basis tables one assembly pass needs for a (geometry degree,
/// field degree, quadrature) combination.
struct ElementTables {
    int q = 1;       // geometry degree
    int p = 0;       // field degree
    int nq = 0;      // quadrature points per direction
    RefQuadrature quad;

    BasisTable geom_vol, field_vol;
    std::array<BasisTable, 4> geom_face, field_face;
    std::array<BasisTable, 4> field_face_rev;  // at reversed parameter 1-t

    static const ElementTables &get(int q, int p, int nq);
};

/// Quadrature points per direction used for degree-`p_field` fields on a
/// degree-`q` grid.
inline int quadrature_points(int p_field, int q) { return p_field + 2 + (q >= 2 ? 1 : 0); }

}  // namespace shocktrack

#endif
