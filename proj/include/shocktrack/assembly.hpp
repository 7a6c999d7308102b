#ifndef SHOCKTRACK_ASSEMBLY_HPP
#define SHOCKTRACK_ASSEMBLY_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <vector>

#include "shocktrack/basis.hpp"
#include "shocktrack/jet.hpp"
#include "shocktrack/laws.hpp"
#include "shocktrack/mesh.hpp"

namespace shocktrack {

using SpMat = Eigen::SparseMatrix<double>;

/// Discrete solution space: degree-p nodal (Gauss-Lobatto) basis, m states,
/// element-major / basis-major / state-major coefficient layout.
struct Space {
    int p = 0;
    int m = 1;
    int n_elems = 0;

    int np() const { return (p + 1) * (p + 1); }
    int n_dofs() const { return n_elems * np() * m; }
    int dof(int e, int j, int s) const { return (e * np() + j) * m + s; }
};

struct ResidualJacobians {
    SpMat wrt_u;  // n_dofs x n_dofs
    SpMat wrt_x;  // n_dofs x 2*n_nodes
};

/// Blocks of the second derivative of the scalar w^T r(u, x).
struct HessianBlocks {
    SpMat uu, ux, xx;
};

struct FunctionalDerivatives {
    double value = 0.0;
    Eigen::VectorXd wrt_u;
    SpMat uu, ux;
};

/// Raised when assembly meets a non-physical state or an inverted element.
struct AssemblyError : std::runtime_error {
    int elem;
    AssemblyError(const std::string &what, int elem_) : std::runtime_error(what), elem(elem_) {}
};

/// Interpolation from degree p to degree p_to >= p (pointwise-identical
/// representation; constant matrix depending only on reference coordinates).
SpMat interpolation_matrix(const Space &from, const Space &to);

namespace detail {

// Slot layout of the per-quadrature-point variable vector:
// [u+ (m)] [u- (m), interior faces only] [J (4: d0x,d1x,d0y,d1y)] [pos (2)]
struct QpLayout {
    int m = 1;
    bool has_minus = false;
    int t_J() const { return (has_minus ? 2 : 1) * m; }
    int t_pos() const { return t_J() + 4; }
    int dim() const { return t_pos() + 2; }
};

template <class T>
struct QpVars {
    const QpLayout *L;
    std::array<T, kJetCap> t{};

    const T &up(int s) const { return t[s]; }
    const T &um(int s) const { return t[L->m + s]; }
    const T *J() const { return &t[L->t_J()]; }
    const T *pos() const { return &t[L->t_pos()]; }
};

// Surface scaling and unit outward normal from the metric slots; applies the
// curved-wall projection chain rule when requested.
template <class T>
void face_metric(const QpVars<T> &q, const Eigen::Vector2d &nhat, bool wall_projected,
                 T *normal, T &sigma) {
    const T *J = q.J();
    T j[4] = {J[0], J[1], J[2], J[3]};
    if (wall_projected) {
        const T *p = q.pos();
        const T r2 = p[0] * p[0] + p[1] * p[1];
        const T r = sqrt(r2);
        const T inv_r3 = 1.0 / (r * r2);
        // dP = (I - xh xh^T)/r, rows applied to J columns
        const T d00 = p[1] * p[1] * inv_r3, d01 = -p[0] * p[1] * inv_r3, d11 = p[0] * p[0] * inv_r3;
        T jw[4];
        jw[0] = d00 * j[0] + d01 * j[2];
        jw[1] = d00 * j[1] + d01 * j[3];
        jw[2] = d01 * j[0] + d11 * j[2];
        jw[3] = d01 * j[1] + d11 * j[3];
        for (int k = 0; k < 4; ++k) j[k] = jw[k];
    }
    // cof(J) nhat with J = [[j0, j1],[j2, j3]]
    const T c0 = j[3] * nhat[0] - j[2] * nhat[1];
    const T c1 = -j[1] * nhat[0] + j[0] * nhat[1];
    sigma = sqrt(c0 * c0 + c1 * c1);
    normal[0] = c0 / sigma;
    normal[1] = c1 / sigma;
}

// Conservation-law volume outputs: V_{s,d} = [cof(J)^T F_s]_d (2m entries)
// followed by S_s det(J) (m entries, when the law has a source).
template <class T, class Law>
void volume_outputs(const Law &law, const QpVars<T> &q, T *O) {
    constexpr int m = Law::m;
    T F[m][2];
    law.flux(&q.t[0], q.pos(), F);
    const T *J = q.J();
    // V_s = cof(J)^T F_s pairs with grad_xi of the test function, so that
    // (J^-T grad phi) . F det(J) = grad phi . V
    for (int s = 0; s < m; ++s) {
        O[2 * s] = J[3] * F[s][0] - J[1] * F[s][1];
        O[2 * s + 1] = -J[2] * F[s][0] + J[0] * F[s][1];
    }
    if constexpr (Law::has_source) {
        const T det = J[0] * J[3] - J[1] * J[2];
        T S[m];
        law.source(&q.t[0], q.pos(), S);
        for (int s = 0; s < m; ++s) O[2 * m + s] = S[s] * det;
    }
}

// Face outputs: H_s * sigma (m entries). Boundary faces impose the
// prescribed state through the consistency flux F(u_Gamma) . n.
template <class T, class Law>
void face_outputs(const Law &law, const QpVars<T> &q, const Eigen::Vector2d &nhat,
                  bool boundary, int btag, bool wall_projected, FluxKind kind, T *O) {
    constexpr int m = Law::m;
    T n[2], sigma;
    face_metric(q, nhat, wall_projected, n, sigma);
    T H[m];
    if (boundary) {
        T ug[m];
        law.boundary_state(btag, &q.t[0], q.pos(), n, ug);
        T F[m][2];
        law.flux(ug, q.pos(), F);
        for (int s = 0; s < m; ++s) H[s] = F[s][0] * n[0] + F[s][1] * n[1];
    } else {
        law.numerical_flux(kind, &q.t[0], &q.t[m], n, q.pos(), H);
    }
    for (int s = 0; s < m; ++s) O[s] = H[s] * sigma;
}

// Functional outputs: volume j(u,pos) det(J), or boundary j_Gamma(u_Gamma) sigma.
template <class T, class Law>
T functional_volume_output(const Law &law, const QpVars<T> &q) {
    const T *J = q.J();
    const T det = J[0] * J[3] - J[1] * J[2];
    return law.volume_functional(&q.t[0], q.pos()) * det;
}

template <class T, class Law>
T functional_face_output(const Law &law, const QpVars<T> &q, const Eigen::Vector2d &nhat,
                         int btag, bool wall_projected) {
    constexpr int m = Law::m;
    T n[2], sigma;
    face_metric(q, nhat, wall_projected, n, sigma);
    T ug[m];
    law.boundary_state(btag, &q.t[0], q.pos(), n, ug);
    return law.boundary_functional(btag, ug, q.pos(), n) * sigma;
}

// Gathers one entity's local data: global index maps and the constant
// linearization B (t-variable values are B * local values at each point).
struct EntityWork {
    QpLayout layout;
    int np_p = 0, np_m = 0, nn = 0;
    std::vector<int> gu;     // global u dofs, plus block then minus block
    std::vector<int> gx;     // global coordinate indices
    Eigen::VectorXd u_loc;   // local u values
    Eigen::VectorXd x_loc;   // local coordinates
    Eigen::MatrixXd B;       // layout.dim() x n_loc, rebuilt per point

    int n_u_loc() const { return int(gu.size()); }
    int n_loc() const { return int(gu.size() + gx.size()); }
};

void gather_volume(const Mesh &mesh, const Eigen::VectorXd &x, const Space &sp,
                   const Eigen::VectorXd &u, int e, EntityWork &w);
void gather_face(const Mesh &mesh, const Eigen::VectorXd &x, const Space &sp,
                 const Eigen::VectorXd &u, const Mesh::Face &f, EntityWork &w);

// Fill w.B and return variable values for a volume point (row k of tables).
void point_vars_volume(const ElementTables &tab, int k, EntityWork &w, Eigen::VectorXd &tval);
// Same for a face point; uses the plus-side face tables and, on interior
// faces, the minus-side (possibly reversed) trace tables.
void point_vars_face(const ElementTables &tab, const Mesh::Face &f, int k, EntityWork &w,
                     Eigen::VectorXd &tval);

template <class T>
void seed(const Eigen::VectorXd &tval, int dim, QpVars<T> &q) {
    for (int i = 0; i < dim; ++i) q.t[i] = T::variable(tval[i], i);
}
template <>
inline void seed<double>(const Eigen::VectorXd &tval, int dim, QpVars<double> &q) {
    for (int i = 0; i < dim; ++i) q.t[i] = tval[i];
}

void check_element_valid(const Eigen::VectorXd &tval, const QpLayout &L, int elem);

template <class Law>
void check_admissible(const Law &law, const Eigen::VectorXd &tval, const QpLayout &L, int elem,
                      bool minus) {
    const double *u = tval.data() + (minus ? Law::m : 0);
    if (!law.admissible(u))
        throw AssemblyError("non-physical state at quadrature point", elem);
}

}  // namespace detail

/// DG residual of the weak form, evaluated in the reference element. The
/// test/trial degree is sp.p; pass the enriched field with the enriched
/// space to obtain R(U, x).
template <class Law>
Eigen::VectorXd assemble_residual(const Law &law, const Mesh &mesh, const Eigen::VectorXd &x,
                                  const Space &sp, const Eigen::VectorXd &u,
                                  const std::vector<FluxKind> &face_flux) {
    using namespace detail;
    const int nq = quadrature_points(sp.p, mesh.q);
    const ElementTables &tab = ElementTables::get(mesh.q, sp.p, nq);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(sp.n_dofs());
    constexpr int m = Law::m;

    EntityWork w;
    Eigen::VectorXd tval;
    QpVars<double> q;
    const int n_vol_out = Law::has_source ? 3 * m : 2 * m;
    double O[3 * m > m ? 3 * m : m];

    for (int e = 0; e < mesh.n_elems(); ++e) {
        gather_volume(mesh, x, sp, u, e, w);
        q.L = &w.layout;
        for (int k = 0; k < int(tab.quad.vol_pts.size()); ++k) {
            point_vars_volume(tab, k, w, tval);
            check_element_valid(tval, w.layout, e);
            check_admissible(law, tval, w.layout, e, false);
            seed(tval, w.layout.dim(), q);
            volume_outputs(law, q, O);
            const double wq = tab.quad.vol_w[k];
            for (int s = 0; s < m; ++s)
                for (int i = 0; i < w.np_p; ++i) {
                    double acc = tab.field_vol.d0(k, i) * O[2 * s] +
                                 tab.field_vol.d1(k, i) * O[2 * s + 1];
                    if constexpr (Law::has_source) acc += tab.field_vol.val(k, i) * O[2 * m + s];
                    r[sp.dof(e, i, s)] -= wq * acc;
                }
        }
        (void)n_vol_out;
    }

    for (const auto &f : mesh.faces) {
        gather_face(mesh, x, sp, u, f, w);
        q.L = &w.layout;
        const bool bnd = f.elem_m < 0;
        const auto &ftab = tab.field_face[f.face_p];
        const auto &mtab = f.reversed ? tab.field_face_rev[f.face_m >= 0 ? f.face_m : 0]
                                      : tab.field_face[f.face_m >= 0 ? f.face_m : 0];
        for (int k = 0; k < tab.nq; ++k) {
            point_vars_face(tab, f, k, w, tval);
            check_admissible(law, tval, w.layout, f.elem_p, false);
            if (!bnd) check_admissible(law, tval, w.layout, f.elem_m, true);
            seed(tval, w.layout.dim(), q);
            face_outputs(law, q, tab.quad.ref_normal[f.face_p], bnd, f.btag, f.wall_projected,
                         face_flux[&f - mesh.faces.data()], O);
            const double wq = tab.quad.face_w[k];
            for (int s = 0; s < m; ++s) {
                for (int i = 0; i < w.np_p; ++i)
                    r[sp.dof(f.elem_p, i, s)] += wq * ftab.val(k, i) * O[s];
                if (!bnd)
                    for (int i = 0; i < w.np_m; ++i)
                        r[sp.dof(f.elem_m, i, s)] -= wq * mtab.val(k, i) * O[s];
            }
        }
    }
    return r;
}

/// Exact derivatives of the assembled residual w.r.t. the solution
/// coefficients and the node coordinates (forward-mode differentiation of
/// the same kernels, lifted by the constant per-point linearization).
template <class Law>
ResidualJacobians assemble_residual_jacobians(const Law &law, const Mesh &mesh,
                                              const Eigen::VectorXd &x, const Space &sp,
                                              const Eigen::VectorXd &u,
                                              const std::vector<FluxKind> &face_flux) {
    using namespace detail;
    const int nq = quadrature_points(sp.p, mesh.q);
    const ElementTables &tab = ElementTables::get(mesh.q, sp.p, nq);
    constexpr int m = Law::m;
    const int n_out_max = 3 * m;

    std::vector<Eigen::Triplet<double>> tu, tx;
    EntityWork w;
    Eigen::VectorXd tval;
    QpVars<Jet1> q;
    Jet1 O[3 * m > m ? 3 * m : m];
    Eigen::MatrixXd dOdt(n_out_max, kJetCap), M;

    auto scatter_row = [&](int row, double c, const Eigen::MatrixXd &Mrows, int s,
                           const EntityWork &ww) {
        const int nu = ww.n_u_loc();
        for (int j = 0; j < nu; ++j) {
            const double v = c * Mrows(s, j);
            if (v != 0.0) tu.emplace_back(row, ww.gu[j], v);
        }
        for (int j = 0; j < int(ww.gx.size()); ++j) {
            const double v = c * Mrows(s, nu + j);
            if (v != 0.0) tx.emplace_back(row, ww.gx[j], v);
        }
    };

    for (int e = 0; e < mesh.n_elems(); ++e) {
        gather_volume(mesh, x, sp, u, e, w);
        q.L = &w.layout;
        const int nout = Law::has_source ? 3 * m : 2 * m;
        for (int k = 0; k < int(tab.quad.vol_pts.size()); ++k) {
            point_vars_volume(tab, k, w, tval);
            check_element_valid(tval, w.layout, e);
            check_admissible(law, tval, w.layout, e, false);
            seed(tval, w.layout.dim(), q);
            volume_outputs(law, q, O);
            const int td = w.layout.dim();
            for (int a = 0; a < nout; ++a) dOdt.row(a).head(td) = O[a].g.head(td).transpose();
            M.noalias() = dOdt.topLeftCorner(nout, td) * w.B.topRows(td);
            const double wq = tab.quad.vol_w[k];
            // combined per-test row: -(d0*V0 + d1*V1 + phi*S)
            for (int s = 0; s < m; ++s)
                for (int i = 0; i < w.np_p; ++i) {
                    const int row = sp.dof(e, i, s);
                    scatter_row(row, -wq * tab.field_vol.d0(k, i), M, 2 * s, w);
                    scatter_row(row, -wq * tab.field_vol.d1(k, i), M, 2 * s + 1, w);
                    if constexpr (Law::has_source)
                        scatter_row(row, -wq * tab.field_vol.val(k, i), M, 2 * m + s, w);
                }
        }
    }

    for (const auto &f : mesh.faces) {
        gather_face(mesh, x, sp, u, f, w);
        q.L = &w.layout;
        const bool bnd = f.elem_m < 0;
        const auto &ftab = tab.field_face[f.face_p];
        const auto &mtab = f.reversed ? tab.field_face_rev[f.face_m >= 0 ? f.face_m : 0]
                                      : tab.field_face[f.face_m >= 0 ? f.face_m : 0];
        for (int k = 0; k < tab.nq; ++k) {
            point_vars_face(tab, f, k, w, tval);
            check_admissible(law, tval, w.layout, f.elem_p, false);
            if (!bnd) check_admissible(law, tval, w.layout, f.elem_m, true);
            seed(tval, w.layout.dim(), q);
            face_outputs(law, q, tab.quad.ref_normal[f.face_p], bnd, f.btag, f.wall_projected,
                         face_flux[&f - mesh.faces.data()], O);
            const int td = w.layout.dim();
            for (int s = 0; s < m; ++s) dOdt.row(s).head(td) = O[s].g.head(td).transpose();
            M.noalias() = dOdt.topLeftCorner(m, td) * w.B.topRows(td);
            const double wq = tab.quad.face_w[k];
            for (int s = 0; s < m; ++s) {
                for (int i = 0; i < w.np_p; ++i)
                    scatter_row(sp.dof(f.elem_p, i, s), wq * ftab.val(k, i), M, s, w);
                if (!bnd)
                    for (int i = 0; i < w.np_m; ++i)
                        scatter_row(sp.dof(f.elem_m, i, s), -wq * mtab.val(k, i), M, s, w);
            }
        }
    }

    ResidualJacobians out;
    out.wrt_u.resize(sp.n_dofs(), sp.n_dofs());
    out.wrt_u.setFromTriplets(tu.begin(), tu.end());
    out.wrt_x.resize(sp.n_dofs(), x.size());
    out.wrt_x.setFromTriplets(tx.begin(), tx.end());
    return out;
}

/// Second derivative blocks of the scalar w^T r(u, x), assembled cellwise
/// without forming third-order tensors: the test-function weights are
/// contracted with w first, the per-point Hessian of the resulting scalar
/// is lifted to the element block and added to the global matrices.
template <class Law>
HessianBlocks assemble_weighted_hessian(const Law &law, const Mesh &mesh,
                                        const Eigen::VectorXd &x, const Space &sp,
                                        const Eigen::VectorXd &u, const Eigen::VectorXd &wvec,
                                        const std::vector<FluxKind> &face_flux) {
    using namespace detail;
    const int nq = quadrature_points(sp.p, mesh.q);
    const ElementTables &tab = ElementTables::get(mesh.q, sp.p, nq);
    constexpr int m = Law::m;

    std::vector<Eigen::Triplet<double>> tuu, tux, txx;
    EntityWork w;
    Eigen::VectorXd tval;
    QpVars<Jet2> q;
    Jet2 O[3 * m > m ? 3 * m : m];
    Eigen::MatrixXd Hloc, BtH;

    auto scatter = [&](const EntityWork &ww) {
        const int nu = ww.n_u_loc();
        const int nxl = int(ww.gx.size());
        for (int a = 0; a < nu; ++a)
            for (int b = 0; b < nu; ++b) {
                const double v = Hloc(a, b);
                if (v != 0.0) tuu.emplace_back(ww.gu[a], ww.gu[b], v);
            }
        for (int a = 0; a < nu; ++a)
            for (int b = 0; b < nxl; ++b) {
                const double v = Hloc(a, nu + b);
                if (v != 0.0) tux.emplace_back(ww.gu[a], ww.gx[b], v);
            }
        for (int a = 0; a < nxl; ++a)
            for (int b = 0; b < nxl; ++b) {
                const double v = Hloc(nu + a, nu + b);
                if (v != 0.0) txx.emplace_back(ww.gx[a], ww.gx[b], v);
            }
    };

    for (int e = 0; e < mesh.n_elems(); ++e) {
        gather_volume(mesh, x, sp, u, e, w);
        q.L = &w.layout;
        const int nout = Law::has_source ? 3 * m : 2 * m;
        Hloc.setZero(w.n_loc(), w.n_loc());
        for (int k = 0; k < int(tab.quad.vol_pts.size()); ++k) {
            point_vars_volume(tab, k, w, tval);
            check_element_valid(tval, w.layout, e);
            check_admissible(law, tval, w.layout, e, false);
            seed(tval, w.layout.dim(), q);
            volume_outputs(law, q, O);
            const double wq = tab.quad.vol_w[k];
            // contract test weights with wvec, then accumulate the scalar
            Jet2 P(0.0);
            for (int s = 0; s < m; ++s) {
                double c0 = 0.0, c1 = 0.0, cs = 0.0;
                for (int i = 0; i < w.np_p; ++i) {
                    const double wi = wvec[sp.dof(e, i, s)];
                    c0 += wi * tab.field_vol.d0(k, i);
                    c1 += wi * tab.field_vol.d1(k, i);
                    if constexpr (Law::has_source) cs += wi * tab.field_vol.val(k, i);
                }
                P += O[2 * s] * (-wq * c0) + O[2 * s + 1] * (-wq * c1);
                if constexpr (Law::has_source) P += O[2 * m + s] * (-wq * cs);
            }
            const int td = w.layout.dim();
            (void)nout;
            BtH.noalias() = w.B.topRows(td).transpose() * P.h.topLeftCorner(td, td);
            Hloc.noalias() += BtH * w.B.topRows(td);
        }
        scatter(w);
    }

    for (const auto &f : mesh.faces) {
        gather_face(mesh, x, sp, u, f, w);
        q.L = &w.layout;
        const bool bnd = f.elem_m < 0;
        const auto &ftab = tab.field_face[f.face_p];
        const auto &mtab = f.reversed ? tab.field_face_rev[f.face_m >= 0 ? f.face_m : 0]
                                      : tab.field_face[f.face_m >= 0 ? f.face_m : 0];
        Hloc.setZero(w.n_loc(), w.n_loc());
        for (int k = 0; k < tab.nq; ++k) {
            point_vars_face(tab, f, k, w, tval);
            check_admissible(law, tval, w.layout, f.elem_p, false);
            if (!bnd) check_admissible(law, tval, w.layout, f.elem_m, true);
            seed(tval, w.layout.dim(), q);
            face_outputs(law, q, tab.quad.ref_normal[f.face_p], bnd, f.btag, f.wall_projected,
                         face_flux[&f - mesh.faces.data()], O);
            const double wq = tab.quad.face_w[k];
            Jet2 P(0.0);
            for (int s = 0; s < m; ++s) {
                double c = 0.0;
                for (int i = 0; i < w.np_p; ++i)
                    c += wvec[sp.dof(f.elem_p, i, s)] * ftab.val(k, i);
                if (!bnd)
                    for (int i = 0; i < w.np_m; ++i)
                        c -= wvec[sp.dof(f.elem_m, i, s)] * mtab.val(k, i);
                P += O[s] * (wq * c);
            }
            const int td = w.layout.dim();
            BtH.noalias() = w.B.topRows(td).transpose() * P.h.topLeftCorner(td, td);
            Hloc.noalias() += BtH * w.B.topRows(td);
        }
        scatter(w);
    }

    HessianBlocks out;
    out.uu.resize(sp.n_dofs(), sp.n_dofs());
    out.uu.setFromTriplets(tuu.begin(), tuu.end());
    out.ux.resize(sp.n_dofs(), x.size());
    out.ux.setFromTriplets(tux.begin(), tux.end());
    out.xx.resize(x.size(), x.size());
    out.xx.setFromTriplets(txx.begin(), txx.end());
    return out;
}

/// Scalar functional J(u, x): volume integrand plus boundary integrand
/// evaluated on the boundary state (adjoint-consistent form).
template <class Law>
double functional_value(const Law &law, const Mesh &mesh, const Eigen::VectorXd &x,
                        const Space &sp, const Eigen::VectorXd &u) {
    using namespace detail;
    const int nq = quadrature_points(sp.p, mesh.q);
    const ElementTables &tab = ElementTables::get(mesh.q, sp.p, nq);
    double J = 0.0;
    EntityWork w;
    Eigen::VectorXd tval;
    QpVars<double> q;

    for (int e = 0; e < mesh.n_elems(); ++e) {
        gather_volume(mesh, x, sp, u, e, w);
        q.L = &w.layout;
        for (int k = 0; k < int(tab.quad.vol_pts.size()); ++k) {
            point_vars_volume(tab, k, w, tval);
            seed(tval, w.layout.dim(), q);
            J += tab.quad.vol_w[k] * functional_volume_output(law, q);
        }
    }
    for (const auto &f : mesh.faces) {
        if (f.btag < 0) continue;
        gather_face(mesh, x, sp, u, f, w);
        q.L = &w.layout;
        for (int k = 0; k < tab.nq; ++k) {
            point_vars_face(tab, f, k, w, tval);
            seed(tval, w.layout.dim(), q);
            J += tab.quad.face_w[k] *
                 functional_face_output(law, q, tab.quad.ref_normal[f.face_p], f.btag,
                                        f.wall_projected);
        }
    }
    return J;
}

/// J value, exact gradient w.r.t. u, and second derivatives J_uu, J_ux.
template <class Law>
FunctionalDerivatives functional_derivatives(const Law &law, const Mesh &mesh,
                                             const Eigen::VectorXd &x, const Space &sp,
                                             const Eigen::VectorXd &u) {
    using namespace detail;
    const int nq = quadrature_points(sp.p, mesh.q);
    const ElementTables &tab = ElementTables::get(mesh.q, sp.p, nq);
    FunctionalDerivatives out;
    out.wrt_u = Eigen::VectorXd::Zero(sp.n_dofs());
    std::vector<Eigen::Triplet<double>> tuu, tux;

    EntityWork w;
    Eigen::VectorXd tval;
    QpVars<Jet2> q;
    Eigen::MatrixXd Hloc, BtH;
    Eigen::VectorXd gloc;

    auto scatter = [&](const EntityWork &ww) {
        const int nu = ww.n_u_loc();
        for (int a = 0; a < nu; ++a) {
            out.wrt_u[ww.gu[a]] += gloc[a];
            for (int b = 0; b < nu; ++b)
                if (Hloc(a, b) != 0.0) tuu.emplace_back(ww.gu[a], ww.gu[b], Hloc(a, b));
            for (int b = 0; b < int(ww.gx.size()); ++b)
                if (Hloc(a, nu + b) != 0.0) tux.emplace_back(ww.gu[a], ww.gx[b], Hloc(a, nu + b));
        }
    };

    for (int e = 0; e < mesh.n_elems(); ++e) {
        gather_volume(mesh, x, sp, u, e, w);
        q.L = &w.layout;
        Hloc.setZero(w.n_loc(), w.n_loc());
        gloc.setZero(w.n_loc());
        for (int k = 0; k < int(tab.quad.vol_pts.size()); ++k) {
            point_vars_volume(tab, k, w, tval);
            seed(tval, w.layout.dim(), q);
            const Jet2 Jq = functional_volume_output(law, q) * tab.quad.vol_w[k];
            out.value += Jq.v;
            const int td = w.layout.dim();
            gloc.noalias() += w.B.topRows(td).transpose() * Jq.g.head(td);
            BtH.noalias() = w.B.topRows(td).transpose() * Jq.h.topLeftCorner(td, td);
            Hloc.noalias() += BtH * w.B.topRows(td);
        }
        scatter(w);
    }
    for (const auto &f : mesh.faces) {
        if (f.btag < 0) continue;
        gather_face(mesh, x, sp, u, f, w);
        q.L = &w.layout;
        Hloc.setZero(w.n_loc(), w.n_loc());
        gloc.setZero(w.n_loc());
        for (int k = 0; k < tab.nq; ++k) {
            point_vars_face(tab, f, k, w, tval);
            seed(tval, w.layout.dim(), q);
            const Jet2 Jq = functional_face_output(law, q, tab.quad.ref_normal[f.face_p], f.btag,
                                                   f.wall_projected) *
                            tab.quad.face_w[k];
            out.value += Jq.v;
            const int td = w.layout.dim();
            gloc.noalias() += w.B.topRows(td).transpose() * Jq.g.head(td);
            BtH.noalias() = w.B.topRows(td).transpose() * Jq.h.topLeftCorner(td, td);
            Hloc.noalias() += BtH * w.B.topRows(td);
        }
        scatter(w);
    }

    out.uu.resize(sp.n_dofs(), sp.n_dofs());
    out.uu.setFromTriplets(tuu.begin(), tuu.end());
    out.ux.resize(sp.n_dofs(), x.size());
    out.ux.setFromTriplets(tux.begin(), tux.end());
    return out;
}

/// True when the law's admissibility constraint holds at every volume and
/// face quadrature point.
template <class Law>
bool states_admissible(const Law &law, const Mesh &mesh, const Eigen::VectorXd &x,
                       const Space &sp, const Eigen::VectorXd &u) {
    using namespace detail;
    const int nq = quadrature_points(sp.p, mesh.q);
    const ElementTables &tab = ElementTables::get(mesh.q, sp.p, nq);
    EntityWork w;
    Eigen::VectorXd tval;
    for (int e = 0; e < mesh.n_elems(); ++e) {
        gather_volume(mesh, x, sp, u, e, w);
        for (int k = 0; k < int(tab.quad.vol_pts.size()); ++k) {
            point_vars_volume(tab, k, w, tval);
            if (!law.admissible(tval.data())) return false;
        }
    }
    for (const auto &f : mesh.faces) {
        gather_face(mesh, x, sp, u, f, w);
        for (int k = 0; k < tab.nq; ++k) {
            point_vars_face(tab, f, k, w, tval);
            if (!law.admissible(tval.data())) return false;
            if (f.elem_m >= 0 && !law.admissible(tval.data() + Law::m)) return false;
        }
    }
    return true;
}

/// Block-diagonal DG mass matrix (per state).
SpMat assemble_mass(const Mesh &mesh, const Eigen::VectorXd &x, const Space &sp);

}  // namespace shocktrack

#endif
