#include "shocktrack/assembly.hpp"

namespace shocktrack {

SpMat interpolation_matrix(const Space &from, const Space &to) {
    if (from.n_elems != to.n_elems || from.m != to.m || to.p < from.p)
        throw std::invalid_argument("interpolation_matrix: incompatible spaces");
    const Eigen::VectorXd n1 = gauss_lobatto_nodes(to.p);
    std::vector<Eigen::Vector2d> nodes2d;
    nodes2d.reserve(to.np());
    for (int j = 0; j < to.p + 1; ++j)
        for (int i = 0; i < to.p + 1; ++i) nodes2d.push_back({n1[i], n1[j]});
    const BasisTable tab = tensor_basis_at(gauss_lobatto_nodes(from.p), nodes2d);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(size_t(to.n_dofs()) * from.np());
    for (int e = 0; e < from.n_elems; ++e)
        for (int i = 0; i < to.np(); ++i)
            for (int j = 0; j < from.np(); ++j) {
                const double v = tab.val(i, j);
                if (std::abs(v) < 1e-15) continue;
                for (int s = 0; s < from.m; ++s)
                    trips.emplace_back(to.dof(e, i, s), from.dof(e, j, s), v);
            }
    SpMat I(to.n_dofs(), from.n_dofs());
    I.setFromTriplets(trips.begin(), trips.end());
    return I;
}

SpMat assemble_mass(const Mesh &mesh, const Eigen::VectorXd &x, const Space &sp) {
    const int nq = quadrature_points(sp.p, mesh.q);
    const ElementTables &tab = ElementTables::get(mesh.q, sp.p, nq);
    std::vector<Eigen::Triplet<double>> trips;
    const int nn = mesh.nodes_per_elem();
    for (int e = 0; e < mesh.n_elems(); ++e) {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(sp.np(), sp.np());
        for (int k = 0; k < int(tab.quad.vol_pts.size()); ++k) {
            double j0 = 0, j1 = 0, j2 = 0, j3 = 0;
            for (int a = 0; a < nn; ++a) {
                const int na = mesh.elems[e][a];
                j0 += x[2 * na] * tab.geom_vol.d0(k, a);
                j1 += x[2 * na] * tab.geom_vol.d1(k, a);
                j2 += x[2 * na + 1] * tab.geom_vol.d0(k, a);
                j3 += x[2 * na + 1] * tab.geom_vol.d1(k, a);
            }
            const double det = j0 * j3 - j1 * j2;
            const double w = tab.quad.vol_w[k] * det;
            for (int i = 0; i < sp.np(); ++i)
                for (int j = 0; j < sp.np(); ++j)
                    M(i, j) += w * tab.field_vol.val(k, i) * tab.field_vol.val(k, j);
        }
        for (int i = 0; i < sp.np(); ++i)
            for (int j = 0; j < sp.np(); ++j)
                if (M(i, j) != 0.0)
                    for (int s = 0; s < sp.m; ++s)
                        trips.emplace_back(sp.dof(e, i, s), sp.dof(e, j, s), M(i, j));
    }
    SpMat out(sp.n_dofs(), sp.n_dofs());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

namespace detail {

void gather_volume(const Mesh &mesh, const Eigen::VectorXd &x, const Space &sp,
                   const Eigen::VectorXd &u, int e, EntityWork &w) {
    w.layout.m = sp.m;
    w.layout.has_minus = false;
    w.np_p = sp.np();
    w.np_m = 0;
    w.nn = mesh.nodes_per_elem();
    const int nu = w.np_p * sp.m;
    w.gu.resize(nu);
    w.u_loc.resize(nu);
    for (int j = 0; j < w.np_p; ++j)
        for (int s = 0; s < sp.m; ++s) {
            const int l = j * sp.m + s;
            w.gu[l] = sp.dof(e, j, s);
            w.u_loc[l] = u[w.gu[l]];
        }
    w.gx.resize(2 * w.nn);
    w.x_loc.resize(2 * w.nn);
    for (int a = 0; a < w.nn; ++a) {
        const int na = mesh.elems[e][a];
        w.gx[2 * a] = 2 * na;
        w.gx[2 * a + 1] = 2 * na + 1;
        w.x_loc[2 * a] = x[2 * na];
        w.x_loc[2 * a + 1] = x[2 * na + 1];
    }
    w.B.resize(w.layout.dim(), w.n_loc());
}

void gather_face(const Mesh &mesh, const Eigen::VectorXd &x, const Space &sp,
                 const Eigen::VectorXd &u, const Mesh::Face &f, EntityWork &w) {
    const bool interior = f.elem_m >= 0;
    w.layout.m = sp.m;
    w.layout.has_minus = interior;
    w.np_p = sp.np();
    w.np_m = interior ? sp.np() : 0;
    w.nn = mesh.nodes_per_elem();
    const int nu = (w.np_p + w.np_m) * sp.m;
    w.gu.resize(nu);
    w.u_loc.resize(nu);
    for (int j = 0; j < w.np_p; ++j)
        for (int s = 0; s < sp.m; ++s) {
            const int l = j * sp.m + s;
            w.gu[l] = sp.dof(f.elem_p, j, s);
            w.u_loc[l] = u[w.gu[l]];
        }
    if (interior) {
        const int off = w.np_p * sp.m;
        for (int j = 0; j < w.np_m; ++j)
            for (int s = 0; s < sp.m; ++s) {
                const int l = off + j * sp.m + s;
                w.gu[l] = sp.dof(f.elem_m, j, s);
                w.u_loc[l] = u[w.gu[l]];
            }
    }
    w.gx.resize(2 * w.nn);
    w.x_loc.resize(2 * w.nn);
    for (int a = 0; a < w.nn; ++a) {
        const int na = mesh.elems[f.elem_p][a];
        w.gx[2 * a] = 2 * na;
        w.gx[2 * a + 1] = 2 * na + 1;
        w.x_loc[2 * a] = x[2 * na];
        w.x_loc[2 * a + 1] = x[2 * na + 1];
    }
    w.B.resize(w.layout.dim(), w.n_loc());
}

namespace {

void fill_geometry_rows(const BasisTable &geom, int k, EntityWork &w, Eigen::VectorXd &tval) {
    const QpLayout &L = w.layout;
    const int nu = w.n_u_loc();
    const int tj = L.t_J(), tp = L.t_pos();
    double j0 = 0, j1 = 0, j2 = 0, j3 = 0, px = 0, py = 0;
    for (int a = 0; a < w.nn; ++a) {
        const double xa = w.x_loc[2 * a], ya = w.x_loc[2 * a + 1];
        const double d0 = geom.d0(k, a), d1 = geom.d1(k, a), v = geom.val(k, a);
        j0 += xa * d0;
        j1 += xa * d1;
        j2 += ya * d0;
        j3 += ya * d1;
        px += xa * v;
        py += ya * v;
        w.B(tj + 0, nu + 2 * a) = d0;
        w.B(tj + 1, nu + 2 * a) = d1;
        w.B(tj + 2, nu + 2 * a + 1) = d0;
        w.B(tj + 3, nu + 2 * a + 1) = d1;
        w.B(tp + 0, nu + 2 * a) = v;
        w.B(tp + 1, nu + 2 * a + 1) = v;
    }
    tval[tj + 0] = j0;
    tval[tj + 1] = j1;
    tval[tj + 2] = j2;
    tval[tj + 3] = j3;
    tval[tp + 0] = px;
    tval[tp + 1] = py;
}

}  // namespace

void point_vars_volume(const ElementTables &tab, int k, EntityWork &w, Eigen::VectorXd &tval) {
    const QpLayout &L = w.layout;
    tval.resize(L.dim());
    w.B.setZero();
    const int m = L.m;
    for (int s = 0; s < m; ++s) {
        double us = 0.0;
        for (int j = 0; j < w.np_p; ++j) {
            const double phi = tab.field_vol.val(k, j);
            us += phi * w.u_loc[j * m + s];
            w.B(s, j * m + s) = phi;
        }
        tval[s] = us;
    }
    fill_geometry_rows(tab.geom_vol, k, w, tval);
}

void point_vars_face(const ElementTables &tab, const Mesh::Face &f, int k, EntityWork &w,
                     Eigen::VectorXd &tval) {
    const QpLayout &L = w.layout;
    tval.resize(L.dim());
    w.B.setZero();
    const int m = L.m;
    const BasisTable &ftab = tab.field_face[f.face_p];
    for (int s = 0; s < m; ++s) {
        double us = 0.0;
        for (int j = 0; j < w.np_p; ++j) {
            const double phi = ftab.val(k, j);
            us += phi * w.u_loc[j * m + s];
            w.B(s, j * m + s) = phi;
        }
        tval[s] = us;
    }
    if (L.has_minus) {
        const BasisTable &mtab =
            f.reversed ? tab.field_face_rev[f.face_m] : tab.field_face[f.face_m];
        const int off = w.np_p * m;
        for (int s = 0; s < m; ++s) {
            double us = 0.0;
            for (int j = 0; j < w.np_m; ++j) {
                const double phi = mtab.val(k, j);
                us += phi * w.u_loc[off + j * m + s];
                w.B(m + s, off + j * m + s) = phi;
            }
            tval[m + s] = us;
        }
    }
    fill_geometry_rows(tab.geom_face[f.face_p], k, w, tval);
}

void check_element_valid(const Eigen::VectorXd &tval, const QpLayout &L, int elem) {
    const int tj = L.t_J();
    const double det = tval[tj] * tval[tj + 3] - tval[tj + 1] * tval[tj + 2];
    if (!(det > 0.0)) throw AssemblyError("non-positive metric Jacobian", elem);
}

}  // namespace detail

}  // namespace shocktrack
