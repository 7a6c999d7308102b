#include "shocktrack/optimizer.hpp"

namespace shocktrack {

SpMat control_space_stiffness(const Mesh &mesh, const Eigen::VectorXd &x, const ControlMap &cm) {
    const int nq = quadrature_points(1, mesh.q);
    const ElementTables &tab = ElementTables::get(mesh.q, 0, nq);
    const int nn = mesh.nodes_per_elem();

    std::vector<Eigen::Triplet<double>> trips;
    for (int e = 0; e < mesh.n_elems(); ++e) {
        const auto &nodes = mesh.elems[e];
        for (int k = 0; k < int(tab.quad.vol_pts.size()); ++k) {
            Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
            for (int a = 0; a < nn; ++a) {
                const Eigen::Vector2d xa(x[2 * nodes[a]], x[2 * nodes[a] + 1]);
                J.col(0) += tab.geom_vol.d0(k, a) * xa;
                J.col(1) += tab.geom_vol.d1(k, a) * xa;
            }
            const double det = J.determinant();
            const Eigen::Matrix2d Jit = J.inverse().transpose();
            const double w = tab.quad.vol_w[k] * det;
            std::vector<Eigen::Vector2d> g(nn);
            for (int a = 0; a < nn; ++a)
                g[a] = Jit * Eigen::Vector2d(tab.geom_vol.d0(k, a), tab.geom_vol.d1(k, a));
            for (int a = 0; a < nn; ++a)
                for (int b = 0; b < nn; ++b) {
                    const double v = w * g[a].dot(g[b]);
                    // interleaved coordinate stiffness K (x) I_2
                    trips.emplace_back(2 * nodes[a], 2 * nodes[b], v);
                    trips.emplace_back(2 * nodes[a] + 1, 2 * nodes[b] + 1, v);
                }
        }
    }
    SpMat K(x.size(), x.size());
    K.setFromTriplets(trips.begin(), trips.end());
    return cm.A.transpose() * K * cm.A;
}

}  // namespace shocktrack
