#include "shocktrack/mesh.hpp"

#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "shocktrack/jet.hpp"

namespace shocktrack {

std::vector<int> Mesh::face_local_nodes(int f) const {
    const int n1 = q + 1;
    std::vector<int> loc(n1);
    for (int k = 0; k <= q; ++k) {
        switch (f) {
            case 0: loc[k] = k; break;                        // (t,0)
            case 1: loc[k] = k * n1 + q; break;               // (1,t)
            case 2: loc[k] = q * n1 + (q - k); break;         // (1-t,1)
            default: loc[k] = (q - k) * n1; break;            // (0,1-t)
        }
    }
    return loc;
}

std::vector<int> Mesh::face_nodes(int e, int f) const {
    std::vector<int> loc = face_local_nodes(f);
    for (int &l : loc) l = elems[e][l];
    return loc;
}

std::array<int, 4> Mesh::corner_nodes(int e) const {
    const int n1 = q + 1;
    return {elems[e][0], elems[e][q], elems[e][n1 * n1 - 1], elems[e][q * n1]};
}

int Mesh::boundary_tag(const std::string &name) const {
    for (int i = 0; i < int(boundary_names.size()); ++i)
        if (boundary_names[i] == name) return i;
    return -1;
}

void Mesh::build_faces(const std::function<int(int, int)> &classify_boundary) {
    faces.clear();
    std::map<std::pair<int, int>, int> open;  // endpoint key -> face index
    for (int e = 0; e < n_elems(); ++e) {
        for (int f = 0; f < 4; ++f) {
            const std::vector<int> fn = face_nodes(e, f);
            const int a = fn.front(), b = fn.back();
            const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
            auto it = open.find(key);
            if (it == open.end()) {
                Face face;
                face.elem_p = e;
                face.face_p = f;
                open.emplace(key, int(faces.size()));
                faces.push_back(face);
            } else {
                Face &face = faces[it->second];
                if (face.elem_m != -1) throw std::runtime_error("mesh: face shared by >2 elements");
                face.elem_m = e;
                face.face_m = f;
                const std::vector<int> fp = face_nodes(face.elem_p, face.face_p);
                face.reversed = (fp.front() == fn.back() && fp.back() == fn.front());
                // Conforming mesh: the two sides must reference identical nodes.
                for (int k = 0; k <= q; ++k) {
                    const int other = face.reversed ? fn[q - k] : fn[k];
                    if (fp[k] != other) throw std::runtime_error("mesh: non-conforming face");
                }
                open.erase(it);
            }
        }
    }
    for (auto &[key, idx] : open) {
        Face &face = faces[idx];
        face.btag = classify_boundary(face.elem_p, face.face_p);
        if (face.btag < 0) throw std::runtime_error("mesh: unclassified boundary face");
    }
}

namespace {

Eigen::Matrix2d jacobian_from(const Mesh &mesh, const Eigen::VectorXd &coords, int elem,
                              const BasisTable &geom, int row) {
    Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
    const auto &nodes = mesh.elems[elem];
    for (int k = 0; k < int(nodes.size()); ++k) {
        const double x = coords[2 * nodes[k]];
        const double y = coords[2 * nodes[k] + 1];
        J(0, 0) += x * geom.d0(row, k);
        J(0, 1) += x * geom.d1(row, k);
        J(1, 0) += y * geom.d0(row, k);
        J(1, 1) += y * geom.d1(row, k);
    }
    return J;
}

Eigen::Matrix2d cofactor(const Eigen::Matrix2d &J) {
    Eigen::Matrix2d c;
    c << J(1, 1), -J(1, 0), -J(0, 1), J(0, 0);
    return c;
}

}  // namespace

Eigen::Vector2d reference_to_physical(const Mesh &mesh, int elem, const Eigen::Vector2d &xi) {
    const Eigen::VectorXd gn = equispaced_nodes(mesh.q);
    Eigen::VectorXd v0, d0, v1, d1;
    lagrange_eval(gn, xi[0], v0, d0);
    lagrange_eval(gn, xi[1], v1, d1);
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    const int n1 = mesh.q + 1;
    for (int j = 0; j < n1; ++j)
        for (int i = 0; i < n1; ++i)
            x += v0[i] * v1[j] * mesh.node(mesh.elems[elem][j * n1 + i]);
    return x;
}

MetricData metric_at(const Mesh &mesh, int elem, const Eigen::Vector2d &xi) {
    const Eigen::VectorXd gn = equispaced_nodes(mesh.q);
    Eigen::VectorXd v0, d0, v1, d1;
    lagrange_eval(gn, xi[0], v0, d0);
    lagrange_eval(gn, xi[1], v1, d1);
    MetricData m;
    m.J.setZero();
    const int n1 = mesh.q + 1;
    for (int j = 0; j < n1; ++j)
        for (int i = 0; i < n1; ++i) {
            const Eigen::Vector2d xn = mesh.node(mesh.elems[elem][j * n1 + i]);
            m.J.col(0) += d0[i] * v1[j] * xn;
            m.J.col(1) += v0[i] * d1[j] * xn;
        }
    m.det = m.J.determinant();
    m.cof = cofactor(m.J);
    return m;
}

MetricData face_metric_at(const Mesh &mesh, int elem, int face, double t, bool wall_projected) {
    const Eigen::Vector2d xi = RefQuadrature::face_point(face, t);
    MetricData m = metric_at(mesh, elem, xi);
    const Eigen::Vector2d nhat = RefQuadrature::make(1).ref_normal[face];
    Eigen::Matrix2d Juse = m.J;
    if (wall_projected) {
        const Eigen::Vector2d x = reference_to_physical(mesh, elem, xi);
        const double r = x.norm();
        const Eigen::Vector2d xh = x / r;
        const Eigen::Matrix2d dP = (Eigen::Matrix2d::Identity() - xh * xh.transpose()) / r;
        Juse = dP * m.J;
    }
    const Eigen::Vector2d cn = cofactor(Juse) * nhat;
    m.surf = cn.norm();
    m.normal = cn / m.surf;
    return m;
}

bool mesh_validity(const Mesh &mesh, const Eigen::VectorXd &coords,
                   const std::vector<int> &nqs) {
    for (int nq : nqs) {
        const RefQuadrature quad = RefQuadrature::make(nq);
        const Eigen::VectorXd gn = equispaced_nodes(mesh.q);
        const BasisTable gv = tensor_basis_at(gn, quad.vol_pts);
        std::array<BasisTable, 4> gf;
        for (int f = 0; f < 4; ++f) gf[f] = tensor_basis_at(gn, quad.face_pts[f]);
        for (int e = 0; e < mesh.n_elems(); ++e) {
            for (int k = 0; k < int(quad.vol_pts.size()); ++k)
                if (jacobian_from(mesh, coords, e, gv, k).determinant() <= 0.0) return false;
            for (int f = 0; f < 4; ++f)
                for (int k = 0; k < nq; ++k)
                    if (jacobian_from(mesh, coords, e, gf[f], k).determinant() <= 0.0) return false;
        }
    }
    return true;
}

namespace {

struct DistortionLocal {
    double value = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

// Per-element A/B ratio with derivatives w.r.t. the element's coordinates,
// A = int (|J|_F^2/det)^2 det dxi, B = int det dxi.
DistortionLocal element_distortion(const Mesh &mesh, const Eigen::VectorXd &x, int e,
                                   const ElementTables &tab, int order) {
    const int nn = mesh.nodes_per_elem();
    const int nloc = 2 * nn;
    const auto &nodes = mesh.elems[e];

    Jet2 A(0.0), B(0.0);
    Eigen::VectorXd gA = Eigen::VectorXd::Zero(nloc), gB = Eigen::VectorXd::Zero(nloc);
    Eigen::MatrixXd hA = Eigen::MatrixXd::Zero(nloc, nloc), hB = hA;

    Eigen::MatrixXd lift(4, nloc);
    for (int k = 0; k < int(tab.quad.vol_pts.size()); ++k) {
        Jet2 J00(0.0), J01(0.0), J10(0.0), J11(0.0);
        lift.setZero();
        double j00 = 0, j01 = 0, j10 = 0, j11 = 0;
        for (int a = 0; a < nn; ++a) {
            const double xa = x[2 * nodes[a]], ya = x[2 * nodes[a] + 1];
            j00 += xa * tab.geom_vol.d0(k, a);
            j01 += xa * tab.geom_vol.d1(k, a);
            j10 += ya * tab.geom_vol.d0(k, a);
            j11 += ya * tab.geom_vol.d1(k, a);
            lift(0, 2 * a) = tab.geom_vol.d0(k, a);
            lift(1, 2 * a) = tab.geom_vol.d1(k, a);
            lift(2, 2 * a + 1) = tab.geom_vol.d0(k, a);
            lift(3, 2 * a + 1) = tab.geom_vol.d1(k, a);
        }
        J00 = Jet2::variable(j00, 0);
        J01 = Jet2::variable(j01, 1);
        J10 = Jet2::variable(j10, 2);
        J11 = Jet2::variable(j11, 3);

        const Jet2 det = J00 * J11 - J01 * J10;
        const Jet2 fro = J00 * J00 + J01 * J01 + J10 * J10 + J11 * J11;
        const Jet2 ratio = fro / det;
        const double w = tab.quad.vol_w[k];
        const Jet2 ai = ratio * ratio * det * w;
        const Jet2 bi = det * w;

        A.v += ai.v;
        B.v += bi.v;
        if (order >= 1) {
            gA += lift.transpose() * ai.g.head<4>();
            gB += lift.transpose() * bi.g.head<4>();
        }
        if (order >= 2) {
            hA += lift.transpose() * ai.h.topLeftCorner<4, 4>() * lift;
            hB += lift.transpose() * bi.h.topLeftCorner<4, 4>() * lift;
        }
    }

    DistortionLocal out;
    const double f = A.v / B.v;
    out.value = f;
    if (order >= 1) out.grad = (gA - f * gB) / B.v;
    if (order >= 2) {
        out.hess = (hA - f * hB - out.grad * gB.transpose() - gB * out.grad.transpose()) / B.v;
    }
    return out;
}

double distortion_impl(const Mesh &mesh, const Eigen::VectorXd &x, int nq, int order,
                       Eigen::VectorXd *grad, Eigen::SparseMatrix<double> *hess) {
    const ElementTables &tab = ElementTables::get(mesh.q, 0, nq);
    const int N = mesh.n_elems();
    double total = 0.0;
    if (grad) grad->setZero(x.size());
    std::vector<Eigen::Triplet<double>> trips;
    for (int e = 0; e < N; ++e) {
        const DistortionLocal loc = element_distortion(mesh, x, e, tab, order);
        total += loc.value;
        const auto &nodes = mesh.elems[e];
        const int nn = int(nodes.size());
        if (grad) {
            for (int a = 0; a < nn; ++a) {
                (*grad)[2 * nodes[a]] += loc.grad[2 * a] / N;
                (*grad)[2 * nodes[a] + 1] += loc.grad[2 * a + 1] / N;
            }
        }
        if (hess) {
            for (int a = 0; a < nn; ++a)
                for (int ca = 0; ca < 2; ++ca)
                    for (int b = 0; b < nn; ++b)
                        for (int cb = 0; cb < 2; ++cb)
                            trips.emplace_back(2 * nodes[a] + ca, 2 * nodes[b] + cb,
                                               loc.hess(2 * a + ca, 2 * b + cb) / N);
        }
    }
    if (hess) {
        hess->resize(x.size(), x.size());
        hess->setFromTriplets(trips.begin(), trips.end());
    }
    return total / N;
}

}  // namespace

double mesh_distortion(const Mesh &mesh, const Eigen::VectorXd &x, int nq) {
    return distortion_impl(mesh, x, nq, 0, nullptr, nullptr);
}

double mesh_distortion_gradient(const Mesh &mesh, const Eigen::VectorXd &x, int nq,
                                Eigen::VectorXd &grad) {
    return distortion_impl(mesh, x, nq, 1, &grad, nullptr);
}

double mesh_distortion_hessian(const Mesh &mesh, const Eigen::VectorXd &x, int nq,
                               Eigen::VectorXd &grad, Eigen::SparseMatrix<double> &hess) {
    return distortion_impl(mesh, x, nq, 2, &grad, &hess);
}

Mesh structured_rectangle(double x0, double x1, double y0, double y1,
                          int nx, int ny, int q) {
    Mesh m;
    m.q = q;
    const int mx = nx * q + 1, my = ny * q + 1;
    m.coords.resize(2 * mx * my);
    m.node_param.resize(mx * my);
    for (int j = 0; j < my; ++j)
        for (int i = 0; i < mx; ++i) {
            const double u = double(i) / (mx - 1), v = double(j) / (my - 1);
            m.coords[2 * (j * mx + i)] = x0 + u * (x1 - x0);
            m.coords[2 * (j * mx + i) + 1] = y0 + v * (y1 - y0);
            m.node_param[j * mx + i] = {u, v};
        }
    for (int ej = 0; ej < ny; ++ej)
        for (int ei = 0; ei < nx; ++ei) {
            std::vector<int> conn;
            conn.reserve((q + 1) * (q + 1));
            for (int j = 0; j <= q; ++j)
                for (int i = 0; i <= q; ++i)
                    conn.push_back((ej * q + j) * mx + ei * q + i);
            m.elems.push_back(std::move(conn));
        }
    m.boundary_names = {"bottom", "right", "top", "left"};
    const double tol = 1e-12 * (std::abs(x1 - x0) + std::abs(y1 - y0));
    m.build_faces([&](int e, int f) {
        const auto fn = m.face_nodes(e, f);
        const Eigen::Vector2d a = m.node(fn.front()), b = m.node(fn.back());
        if (std::abs(a.y() - y0) < tol && std::abs(b.y() - y0) < tol) return 0;
        if (std::abs(a.x() - x1) < tol && std::abs(b.x() - x1) < tol) return 1;
        if (std::abs(a.y() - y1) < tol && std::abs(b.y() - y1) < tol) return 2;
        if (std::abs(a.x() - x0) < tol && std::abs(b.x() - x0) < tol) return 3;
        return -1;
    });
    return m;
}

namespace {

// Key for deduplicating nodes created during refinement: parent vertices,
// positions along parent edges, or parent-interior lattice points.
struct RefineKey {
    int kind;  // 0 vertex, 1 edge, 2 interior
    int a, b, c;
    bool operator<(const RefineKey &o) const {
        return std::tie(kind, a, b, c) < std::tie(o.kind, o.a, o.b, o.c);
    }
};

}  // namespace

Mesh refine_uniform(const Mesh &mesh) {
    const int q = mesh.q;
    const int n1 = q + 1;
    const int L = 2 * q;  // refined lattice extent per parent

    Mesh out;
    out.q = q;
    std::map<RefineKey, int> ids;
    std::vector<double> xs;
    std::vector<Eigen::Vector2d> params;
    std::vector<char> ring;
    const bool has_param = !mesh.node_param.empty();
    const bool has_ring = !mesh.node_on_ring.empty();

    auto param_at = [&](int e, const Eigen::Vector2d &xi) -> Eigen::Vector2d {
        const Eigen::VectorXd gn = equispaced_nodes(q);
        Eigen::VectorXd v0, d0, v1, d1;
        lagrange_eval(gn, xi[0], v0, d0);
        lagrange_eval(gn, xi[1], v1, d1);
        Eigen::Vector2d p = Eigen::Vector2d::Zero();
        for (int j = 0; j < n1; ++j)
            for (int i = 0; i < n1; ++i)
                p += v0[i] * v1[j] * mesh.node_param[mesh.elems[e][j * n1 + i]];
        return p;
    };

    auto key_for = [&](int e, int a, int b) -> RefineKey {
        const bool a0 = (a == 0), aL = (a == L), b0 = (b == 0), bL = (b == L);
        if ((a0 || aL) && (b0 || bL)) {
            const auto c = mesh.corner_nodes(e);
            const int v = b0 ? (a0 ? c[0] : c[1]) : (a0 ? c[3] : c[2]);
            return {0, v, 0, 0};
        }
        if (a0 || aL || b0 || bL) {
            int f = b0 ? 0 : (aL ? 1 : (bL ? 2 : 3));
            int k = (f == 0) ? a : (f == 1) ? b : (f == 2) ? (L - a) : (L - b);
            const auto fn = mesh.face_nodes(e, f);
            int v0 = fn.front(), v1 = fn.back();
            if (v0 > v1) {
                std::swap(v0, v1);
                k = L - k;
            }
            return {1, v0, v1, k};
        }
        return {2, e, a, b};
    };

    auto get_node = [&](int e, int a, int b) -> int {
        const RefineKey key = key_for(e, a, b);
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        const Eigen::Vector2d xi(double(a) / L, double(b) / L);
        const Eigen::Vector2d x = reference_to_physical(mesh, e, xi);
        const int id = int(xs.size() / 2);
        xs.push_back(x[0]);
        xs.push_back(x[1]);
        if (has_param) params.push_back(param_at(e, xi));
        if (has_ring) {
            bool on = false;
            if (key.kind == 0) {
                on = mesh.node_on_ring[key.a];
            } else if (key.kind == 1) {
                on = mesh.node_on_ring[key.a] && mesh.node_on_ring[key.b];
            }
            ring.push_back(on ? 1 : 0);
        }
        ids.emplace(key, id);
        return id;
    };

    // Child boundary tags: child face -> parent face btag.
    std::map<std::pair<int, int>, int> child_btag;
    std::vector<std::array<int, 4>> parent_face_tag(mesh.n_elems(), {-1, -1, -1, -1});
    std::vector<std::array<bool, 4>> parent_face_wall(mesh.n_elems(), {false, false, false, false});
    for (const auto &f : mesh.faces) {
        if (f.btag >= 0) {
            parent_face_tag[f.elem_p][f.face_p] = f.btag;
            parent_face_wall[f.elem_p][f.face_p] = f.wall_projected;
        }
    }

    for (int e = 0; e < mesh.n_elems(); ++e) {
        for (int cy = 0; cy < 2; ++cy)
            for (int cx = 0; cx < 2; ++cx) {
                std::vector<int> conn;
                conn.reserve(n1 * n1);
                for (int j = 0; j <= q; ++j)
                    for (int i = 0; i <= q; ++i)
                        conn.push_back(get_node(e, cx * q + i, cy * q + j));
                const int ce = int(out.elems.size());
                out.elems.push_back(std::move(conn));
                // Child faces lying on parent boundary faces.
                const int pf[4] = {cy == 0 ? 0 : -1, cx == 1 ? 1 : -1,
                                   cy == 1 ? 2 : -1, cx == 0 ? 3 : -1};
                for (int f = 0; f < 4; ++f)
                    if (pf[f] >= 0 && parent_face_tag[e][pf[f]] >= 0)
                        child_btag[{ce, f}] = parent_face_tag[e][pf[f]] +
                                              (parent_face_wall[e][pf[f]] ? 1 << 16 : 0);
            }
    }

    out.coords = Eigen::Map<Eigen::VectorXd>(xs.data(), long(xs.size()));
    out.node_param = std::move(params);
    out.node_on_ring = std::move(ring);
    out.boundary_names = mesh.boundary_names;
    out.build_faces([&](int e, int f) {
        auto it = child_btag.find({e, f});
        return it == child_btag.end() ? -1 : (it->second & 0xffff);
    });
    for (auto &f : out.faces)
        if (f.btag >= 0) {
            auto it = child_btag.find({f.elem_p, f.face_p});
            if (it != child_btag.end() && (it->second >> 16)) f.wall_projected = true;
        }
    return out;
}

Mesh elevate_to_q2(const Mesh &mesh) {
    if (mesh.q != 1) throw std::runtime_error("elevate_to_q2: expects a q=1 mesh");
    Mesh out;
    out.q = 2;
    std::vector<double> xs(mesh.coords.data(), mesh.coords.data() + mesh.coords.size());
    std::vector<Eigen::Vector2d> params = mesh.node_param;
    std::vector<char> ring = mesh.node_on_ring;
    const bool has_param = !params.empty();
    const bool has_ring = !ring.empty();

    std::map<std::pair<int, int>, int> edge_mid;
    auto midpoint_node = [&](int v0, int v1) -> int {
        const std::pair<int, int> key{std::min(v0, v1), std::max(v0, v1)};
        auto it = edge_mid.find(key);
        if (it != edge_mid.end()) return it->second;
        const int id = int(xs.size() / 2);
        xs.push_back(0.5 * (xs[2 * v0] + xs[2 * v1]));
        xs.push_back(0.5 * (xs[2 * v0 + 1] + xs[2 * v1 + 1]));
        if (has_param) params.push_back(0.5 * (params[v0] + params[v1]));
        if (has_ring) ring.push_back(ring[v0] && ring[v1] ? 1 : 0);
        edge_mid.emplace(key, id);
        return id;
    };

    std::map<std::pair<int, int>, int> face_tag;
    for (const auto &f : mesh.faces)
        if (f.btag >= 0)
            face_tag[{f.elem_p, f.face_p}] = f.btag + (f.wall_projected ? 1 << 16 : 0);

    for (int e = 0; e < mesh.n_elems(); ++e) {
        const auto &c = mesh.elems[e];  // bl=0 br=1 tl=2 tr=3 (lexicographic q=1)
        const int bl = c[0], br = c[1], tl = c[2], tr = c[3];
        const int mb = midpoint_node(bl, br);
        const int mr = midpoint_node(br, tr);
        const int mt = midpoint_node(tl, tr);
        const int ml = midpoint_node(bl, tl);
        const int ctr = int(xs.size() / 2);
        xs.push_back(0.25 * (xs[2 * bl] + xs[2 * br] + xs[2 * tl] + xs[2 * tr]));
        xs.push_back(0.25 * (xs[2 * bl + 1] + xs[2 * br + 1] + xs[2 * tl + 1] + xs[2 * tr + 1]));
        if (has_param) params.push_back(0.25 * (params[bl] + params[br] + params[tl] + params[tr]));
        if (has_ring) ring.push_back(0);
        out.elems.push_back({bl, mb, br, ml, ctr, mr, tl, mt, tr});
    }

    out.coords = Eigen::Map<Eigen::VectorXd>(xs.data(), long(xs.size()));
    out.node_param = std::move(params);
    out.node_on_ring = std::move(ring);
    out.boundary_names = mesh.boundary_names;
    out.build_faces([&](int e, int f) {
        auto it = face_tag.find({e, f});
        return it == face_tag.end() ? -1 : (it->second & 0xffff);
    });
    for (auto &f : out.faces)
        if (f.btag >= 0) {
            auto it = face_tag.find({f.elem_p, f.face_p});
            if (it != face_tag.end() && (it->second >> 16)) f.wall_projected = true;
        }
    return out;
}

void recenter_high_order_nodes(Mesh &mesh, const std::vector<char> &is_control) {
    if (mesh.q != 2) return;
    auto set_mid = [&](int mid, int a, int b) {
        if (is_control[mid]) return;
        mesh.coords[2 * mid] = 0.5 * (mesh.coords[2 * a] + mesh.coords[2 * b]);
        mesh.coords[2 * mid + 1] = 0.5 * (mesh.coords[2 * a + 1] + mesh.coords[2 * b + 1]);
    };
    for (int e = 0; e < mesh.n_elems(); ++e) {
        const auto &c = mesh.elems[e];
        set_mid(c[1], c[0], c[2]);
        set_mid(c[3], c[0], c[6]);
        set_mid(c[5], c[2], c[8]);
        set_mid(c[7], c[6], c[8]);
        if (!is_control[c[4]]) {
            mesh.coords[2 * c[4]] = 0.25 * (mesh.coords[2 * c[0]] + mesh.coords[2 * c[2]] +
                                            mesh.coords[2 * c[6]] + mesh.coords[2 * c[8]]);
            mesh.coords[2 * c[4] + 1] = 0.25 * (mesh.coords[2 * c[0] + 1] + mesh.coords[2 * c[2] + 1] +
                                                mesh.coords[2 * c[6] + 1] + mesh.coords[2 * c[8] + 1]);
        }
    }
}

void write_mesh_text(const Mesh &mesh, std::ostream &os) {
    os << "shocktrack-mesh 1\n";
    os << "q " << mesh.q << "\n";
    os << "nodes " << mesh.n_nodes() << "\n";
    os.precision(17);
    for (int i = 0; i < mesh.n_nodes(); ++i)
        os << mesh.coords[2 * i] << " " << mesh.coords[2 * i + 1] << "\n";
    os << "elements " << mesh.n_elems() << "\n";
    for (const auto &e : mesh.elems) {
        for (size_t k = 0; k < e.size(); ++k) os << e[k] << (k + 1 < e.size() ? ' ' : '\n');
    }
    os << "boundary_names " << mesh.boundary_names.size() << "\n";
    for (const auto &n : mesh.boundary_names) os << n << "\n";
    int nb = 0;
    for (const auto &f : mesh.faces)
        if (f.btag >= 0) ++nb;
    os << "boundary_faces " << nb << "\n";
    for (const auto &f : mesh.faces)
        if (f.btag >= 0) os << f.elem_p << " " << f.face_p << " " << f.btag << "\n";
}

Mesh read_mesh_text(std::istream &is) {
    std::string tok;
    int version = 0;
    is >> tok >> version;
    if (tok != "shocktrack-mesh" || version != 1)
        throw std::runtime_error("mesh: unrecognized text format");
    Mesh m;
    int n = 0;
    is >> tok >> m.q;
    is >> tok >> n;
    m.coords.resize(2 * n);
    for (int i = 0; i < 2 * n; ++i) is >> m.coords[i];
    is >> tok >> n;
    m.elems.resize(n);
    const int nn = (m.q + 1) * (m.q + 1);
    for (auto &e : m.elems) {
        e.resize(nn);
        for (int &id : e) is >> id;
    }
    is >> tok >> n;
    m.boundary_names.resize(n);
    for (auto &name : m.boundary_names) is >> name;
    is >> tok >> n;
    std::map<std::pair<int, int>, int> tags;
    for (int k = 0; k < n; ++k) {
        int e, f, t;
        is >> e >> f >> t;
        tags[{e, f}] = t;
    }
    m.build_faces([&](int e, int f) {
        auto it = tags.find({e, f});
        return it == tags.end() ? -1 : it->second;
    });
    return m;
}

}  // namespace shocktrack
