#ifndef SHOCKTRACK_TEST_HELPERS_HPP
#define SHOCKTRACK_TEST_HELPERS_HPP

#include <functional>
#include <random>

#include "shocktrack/assembly.hpp"
#include "shocktrack/mesh.hpp"

namespace shocktrack::testing {

inline std::vector<FluxKind> uniform_flux(const Mesh &mesh, FluxKind kind) {
    return std::vector<FluxKind>(mesh.faces.size(), kind);
}

/// Nodal projection of a pointwise exact state onto the DG space.
inline Eigen::VectorXd nodal_project(
    const Mesh &mesh, const Space &sp,
    const std::function<Eigen::VectorXd(const Eigen::Vector2d &)> &fn) {
    Eigen::VectorXd u(sp.n_dofs());
    const Eigen::VectorXd nodes = gauss_lobatto_nodes(sp.p);
    for (int e = 0; e < mesh.n_elems(); ++e)
        for (int j = 0; j <= sp.p; ++j)
            for (int i = 0; i <= sp.p; ++i) {
                const Eigen::Vector2d xi(nodes[i], nodes[j]);
                const Eigen::VectorXd vals = fn(reference_to_physical(mesh, e, xi));
                for (int s = 0; s < sp.m; ++s) u[sp.dof(e, j * (sp.p + 1) + i, s)] = vals[s];
            }
    return u;
}

/// Evaluate the DG field at a reference point of one element.
inline Eigen::VectorXd eval_field(const Mesh &, const Space &sp, const Eigen::VectorXd &u,
                                  int e, const Eigen::Vector2d &xi) {
    const Eigen::VectorXd nodes = gauss_lobatto_nodes(sp.p);
    Eigen::VectorXd v0, d0, v1, d1;
    lagrange_eval(nodes, xi[0], v0, d0);
    lagrange_eval(nodes, xi[1], v1, d1);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(sp.m);
    for (int j = 0; j <= sp.p; ++j)
        for (int i = 0; i <= sp.p; ++i)
            for (int s = 0; s < sp.m; ++s)
                out[s] += v0[i] * v1[j] * u[sp.dof(e, j * (sp.p + 1) + i, s)];
    return out;
}

inline void perturb_nodes(Mesh &mesh, double amp, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> un(-amp, amp);
    for (int i = 0; i < int(mesh.coords.size()); ++i) mesh.coords[i] += un(rng);
}

inline EulerLaw supersonic_channel_law() {
    EulerLaw law;
    law.freestream = EulerLaw::conservative(1.4, 3.0, 0.0, 1.0, 1.4);
    // tags: bottom, right, top, left -> outflow, outflow, outflow, inflow
    law.bc_kind = {1, 1, 1, 0};
    law.functional_tag = {0, 1, 0, 0};
    return law;
}

}  // namespace shocktrack::testing

#endif
