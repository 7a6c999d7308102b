#include "doctest.h"

#include <cmath>
#include <random>

#include "shocktrack/verify.hpp"
#include "test_helpers.hpp"

using namespace shocktrack;
using namespace shocktrack::testing;

namespace {

Eigen::VectorXd random_vec(int n, unsigned seed, double lo = -1, double hi = 1) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> un(lo, hi);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = un(rng);
    return v;
}

// Annulus sector with the inner arc treated as an exactly-projected wall:
// r in [1,2], theta in [-pi/4, pi/4].
Mesh annulus_sector(int nr, int nt, int q) {
    Mesh m = structured_rectangle(0, 1, 0, 1, nr, nt, q);
    for (int i = 0; i < m.n_nodes(); ++i) {
        const double r = 1.0 + m.coords[2 * i];
        const double th = (m.coords[2 * i + 1] - 0.5) * M_PI / 2;
        m.coords[2 * i] = r * std::cos(th);
        m.coords[2 * i + 1] = r * std::sin(th);
    }
    for (auto &f : m.faces)
        if (f.btag == 3) f.wall_projected = true;  // r=1 arc
    return m;
}

EulerLaw annulus_law() {
    EulerLaw law;
    law.freestream = EulerLaw::conservative(1.4, 3.0, 0.0, 1.0, 1.4);
    // tags bottom,right,top,left -> outflow, inflow, outflow, slip wall
    law.bc_kind = {1, 0, 1, 2};
    law.functional_tag = {1, 0, 1, 0};
    return law;
}

}  // namespace

TEST_CASE("advection jacobians match finite differences") {
    Mesh m = structured_rectangle(-1, 1, 0, 1, 2, 2, 1);
    perturb_nodes(m, 0.03, 51);
    StraightShockLaw law;
    const Space sp{1, 1, m.n_elems()};
    const auto flux = uniform_flux(m, FluxKind::upwind);
    const Eigen::VectorXd u = random_vec(sp.n_dofs(), 3);

    CHECK(verify_jacobian_u(law, m, m.coords, sp, u, flux) < 1e-6);
    CHECK(verify_jacobian_x(law, m, m.coords, sp, u, flux) < 1e-6);

    // r is affine in u for advection: r_u u reproduces r(u) - r(0)
    const auto J = assemble_residual_jacobians(law, m, m.coords, sp, u, flux);
    const Eigen::VectorXd delta = assemble_residual(law, m, m.coords, sp, u, flux) -
                                  assemble_residual(law, m, m.coords, sp,
                                                    Eigen::VectorXd::Zero(sp.n_dofs()), flux);
    CHECK((J.wrt_u * u - delta).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("r_x vanishes for a constant state (free stream over node motion)") {
    Mesh m = structured_rectangle(0, 1, 0, 1, 2, 2, 1);
    StraightShockLaw law;
    law.linear_inflow_data = true;
    law.inflow_coef = {1.0, 0.0, 0.0};
    const Space sp{1, 1, m.n_elems()};
    const auto J = assemble_residual_jacobians(law, m, m.coords, sp,
                                               Eigen::VectorXd::Ones(sp.n_dofs()),
                                               uniform_flux(m, FluxKind::upwind));
    CHECK(Eigen::MatrixXd(J.wrt_x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("curved-shock law jacobians and source derivatives match finite differences") {
    Mesh m = structured_rectangle(0, 1, 0, 1, 2, 2, 2);
    perturb_nodes(m, 0.02, 53);
    CurvedShockLaw law;
    const Space sp{1, 2, m.n_elems()};
    const auto flux = uniform_flux(m, FluxKind::upwind);
    const Eigen::VectorXd u = random_vec(sp.n_dofs(), 5, 0.2, 1.2);

    CHECK(verify_jacobian_u(law, m, m.coords, sp, u, flux) < 1e-6);
    CHECK(verify_jacobian_x(law, m, m.coords, sp, u, flux) < 1e-6);

    const Eigen::VectorXd w = random_vec(sp.n_dofs(), 7);
    const Eigen::Vector3d errs =
        verify_weighted_hessian(law, m, m.coords, sp, u, w, flux);
    CHECK(errs[0] < 1e-5);
    CHECK(errs[1] < 1e-5);
    CHECK(errs[2] < 1e-5);
}

TEST_CASE("euler jacobians, hessian contractions, and functional derivatives") {
    Mesh m = structured_rectangle(0, 2, 0, 1, 2, 2, 2);
    perturb_nodes(m, 0.02, 57);
    const EulerLaw law = supersonic_channel_law();
    const Space sp{1, 4, m.n_elems()};
    const auto flux = uniform_flux(m, FluxKind::roe_entropy_fix);

    // smooth perturbation of the freestream keeps all states physical;
    // an elementwise offset makes the field discontinuous across faces so
    // the dissipation terms carry nonzero second derivatives
    Eigen::VectorXd u = nodal_project(m, sp, [&](const Eigen::Vector2d &x) {
        Eigen::VectorXd v(4);
        const double b = 0.08 * std::sin(2.1 * x[0]) * std::cos(1.3 * x[1]);
        v << law.freestream[0] * (1 + b), law.freestream[1] * (1 - 0.5 * b),
            law.freestream[2] + 0.3 * b, law.freestream[3] * (1 + 0.7 * b);
        return v;
    });
    u += 0.015 * random_vec(sp.n_dofs(), 77).cwiseProduct(u);

    CHECK(verify_jacobian_u(law, m, m.coords, sp, u, flux) < 1e-6);
    CHECK(verify_jacobian_x(law, m, m.coords, sp, u, flux) < 1e-6);

    const Eigen::VectorXd w = random_vec(sp.n_dofs(), 11);
    const Eigen::Vector3d errs = verify_weighted_hessian(law, m, m.coords, sp, u, w, flux);
    CHECK(errs[0] < 1e-5);
    CHECK(errs[1] < 1e-5);
    CHECK(errs[2] < 1e-5);

    const Eigen::Vector3d ferrs = verify_functional_derivatives(law, m, m.coords, sp, u);
    CHECK(ferrs[0] < 1e-6);
    CHECK(ferrs[1] < 1e-5);
    CHECK(ferrs[2] < 1e-5);
}

TEST_CASE("euler derivatives through the projected-wall metric chain rule") {
    Mesh m = annulus_sector(2, 2, 2);
    const EulerLaw law = annulus_law();
    const Space sp{1, 4, m.n_elems()};
    const auto flux = uniform_flux(m, FluxKind::roe_entropy_fix);
    Eigen::VectorXd u = nodal_project(m, sp, [&](const Eigen::Vector2d &x) {
        Eigen::VectorXd v(4);
        const double b = 0.05 * std::sin(1.7 * x[0] + 0.4) * std::cos(1.1 * x[1]);
        v << law.freestream[0] * (1 + b), law.freestream[1] * (1 - 0.4 * b),
            law.freestream[2] + 0.2 * b, law.freestream[3] * (1 + 0.6 * b);
        return v;
    });
    u += 0.012 * random_vec(sp.n_dofs(), 79).cwiseProduct(u);

    CHECK(verify_jacobian_u(law, m, m.coords, sp, u, flux) < 1e-6);
    CHECK(verify_jacobian_x(law, m, m.coords, sp, u, flux) < 1e-6);

    const Eigen::VectorXd w = random_vec(sp.n_dofs(), 13);
    const Eigen::Vector3d errs = verify_weighted_hessian(law, m, m.coords, sp, u, w, flux);
    CHECK(errs[0] < 1e-5);
    CHECK(errs[1] < 1e-5);
    CHECK(errs[2] < 1e-5);

    const Eigen::Vector3d ferrs = verify_functional_derivatives(law, m, m.coords, sp, u);
    CHECK(ferrs[0] < 1e-6);
    CHECK(ferrs[1] < 1e-5);
    CHECK(ferrs[2] < 1e-5);
}

TEST_CASE("weighted hessian structure: symmetry and linear-flux degeneracy") {
    Mesh m = structured_rectangle(-1, 1, 0, 1, 2, 2, 1);
    perturb_nodes(m, 0.02, 61);
    StraightShockLaw law;
    const Space sp{1, 1, m.n_elems()};
    const Eigen::VectorXd u = random_vec(sp.n_dofs(), 17);
    const Eigen::VectorXd w = random_vec(sp.n_dofs(), 19);
    const HessianBlocks H = assemble_weighted_hessian(law, m, m.coords, sp, u, w,
                                                      uniform_flux(m, FluxKind::upwind));
    // advection: flux linear in u -> w^T r_uu = 0 identically
    CHECK(Eigen::MatrixXd(H.uu).cwiseAbs().maxCoeff() == 0.0);
    // symmetry of uu and xx blocks
    const Eigen::MatrixXd Hxx = Eigen::MatrixXd(H.xx);
    CHECK((Hxx - Hxx.transpose()).cwiseAbs().maxCoeff() <=
          1e-12 * std::max(1.0, Hxx.cwiseAbs().maxCoeff()));
}

TEST_CASE("boundary functional hessian equals twice the weighted boundary mass") {
    // For J = int g(y) u1^2 along the right boundary, J_UU restricted to that
    // boundary equals 2 * (g-weighted boundary mass matrix).
    Mesh m = structured_rectangle(0, 1, 0, 1, 2, 2, 1);
    CurvedShockLaw law;
    const Space sp{1, 2, m.n_elems()};
    const Eigen::VectorXd u = random_vec(sp.n_dofs(), 23);
    const FunctionalDerivatives D = functional_derivatives(law, m, m.coords, sp, u);

    // independent boundary mass assembly
    const int nq = quadrature_points(sp.p, m.q);
    const ElementTables &tab = ElementTables::get(m.q, sp.p, nq);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(sp.n_dofs(), sp.n_dofs());
    for (const auto &f : m.faces) {
        if (f.btag != 1) continue;
        for (int k = 0; k < nq; ++k) {
            const MetricData md = face_metric_at(m, f.elem_p, f.face_p,
                                                 gauss_legendre(nq).points[k], false);
            const Eigen::Vector2d xq = reference_to_physical(
                m, f.elem_p, RefQuadrature::face_point(f.face_p, gauss_legendre(nq).points[k]));
            const double g = 1.0 / (1.0 + std::exp(-230.0 * (xq[1] - 0.05)));
            const double w = tab.quad.face_w[k] * md.surf * g;
            for (int i = 0; i < sp.np(); ++i)
                for (int j = 0; j < sp.np(); ++j)
                    M(sp.dof(f.elem_p, i, 1), sp.dof(f.elem_p, j, 1)) +=
                        w * tab.field_face[f.face_p].val(k, i) * tab.field_face[f.face_p].val(k, j);
        }
    }
    CHECK((Eigen::MatrixXd(D.uu) - 2.0 * M).cwiseAbs().maxCoeff() <
          1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff()));
}
