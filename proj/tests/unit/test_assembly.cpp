#include "doctest.h"

#include <Eigen/SparseLU>
#include <cmath>

#include "shocktrack/assembly.hpp"
#include "test_helpers.hpp"

using namespace shocktrack;
using namespace shocktrack::testing;

TEST_CASE("free-stream preservation: advection on a curved q=2 mesh") {
    Mesh m = structured_rectangle(-1, 1, 0, 1, 3, 2, 2);
    perturb_nodes(m, 0.03, 41);
    StraightShockLaw law;
    law.linear_inflow_data = true;
    law.inflow_coef = {1.0, 0.0, 0.0};
    const Space sp{2, 1, m.n_elems()};
    const Eigen::VectorXd u = Eigen::VectorXd::Ones(sp.n_dofs());
    const Eigen::VectorXd r =
        assemble_residual(law, m, m.coords, sp, u, uniform_flux(m, FluxKind::upwind));
    CHECK(r.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("free-stream preservation: Euler on a curved q=2 mesh") {
    Mesh m = structured_rectangle(0, 2, 0, 1, 3, 2, 2);
    perturb_nodes(m, 0.02, 43);
    const EulerLaw law = supersonic_channel_law();
    const Space sp{1, 4, m.n_elems()};
    Eigen::VectorXd u(sp.n_dofs());
    for (int e = 0; e < sp.n_elems; ++e)
        for (int j = 0; j < sp.np(); ++j)
            for (int s = 0; s < 4; ++s) u[sp.dof(e, j, s)] = law.freestream[s];
    const Eigen::VectorXd r =
        assemble_residual(law, m, m.coords, sp, u, uniform_flux(m, FluxKind::roe_entropy_fix));
    CHECK(r.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exact discontinuous solution on a shock-aligned mesh has zero residual") {
    // map the x=0 grid line onto the shock x = -0.3y while keeping the
    // domain fixed (piecewise-linear stretch in x)
    Mesh m = structured_rectangle(-1, 1, 0, 1, 8, 4, 1);
    for (int i = 0; i < m.n_nodes(); ++i) {
        const double x = m.coords[2 * i], y = m.coords[2 * i + 1];
        const double xs = -0.3 * y;
        m.coords[2 * i] = x <= 0.0 ? -1.0 + (x + 1.0) * (xs + 1.0) : xs + x * (1.0 - xs);
    }
    StraightShockLaw law;
    const Space sp{0, 1, m.n_elems()};
    const Eigen::VectorXd u = nodal_project(m, sp, [&](const Eigen::Vector2d &x) {
        return Eigen::VectorXd::Constant(1, law.exact_solution(x));
    });
    const Eigen::VectorXd r =
        assemble_residual(law, m, m.coords, sp, u, uniform_flux(m, FluxKind::upwind));
    CHECK(r.cwiseAbs().maxCoeff() < 1e-12);

    // the exact functional value 1.755 is reproduced on the aligned mesh
    const double J = functional_value(law, m, m.coords, sp, u);
    CHECK(J == doctest::Approx(1.755).epsilon(1e-12));
}

TEST_CASE("solution constant along characteristics is residual-free for p>=1") {
    Mesh m = structured_rectangle(-1, 1, 0, 1, 3, 3, 1);
    StraightShockLaw law;
    law.linear_inflow_data = true;
    law.inflow_coef = {10.0, 1.0, 0.3};  // u = 10 + x + 0.3y, zeta.grad(u) = 0
    const Space sp{1, 1, m.n_elems()};
    const Eigen::VectorXd u = nodal_project(m, sp, [](const Eigen::Vector2d &x) {
        return Eigen::VectorXd::Constant(1, 10.0 + x[0] + 0.3 * x[1]);
    });
    const Eigen::VectorXd r =
        assemble_residual(law, m, m.coords, sp, u, uniform_flux(m, FluxKind::upwind));
    CHECK(r.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("functional on outflow boundary with constant state") {
    Mesh m = structured_rectangle(-1, 1, 0, 1, 4, 2, 1);
    StraightShockLaw law;
    const Space sp{0, 1, m.n_elems()};
    const Eigen::VectorXd u = Eigen::VectorXd::Ones(sp.n_dofs());
    // left boundary contributes 0 ((1+x)=0), top contributes int_{-1}^{1} (1+x) dx = 2
    const double J = functional_value(law, m, m.coords, sp, u);
    CHECK(J == doctest::Approx(2.0).epsilon(1e-13));
}

namespace {

// Test-only law: unit boundary integrand over the whole boundary.
struct PerimeterLaw {
    static constexpr int m = 1;
    static constexpr bool has_source = false;
    template <class T>
    void flux(const T *u, const T *, T F[][2]) const {
        F[0][0] = u[0];
        F[0][1] = u[0];
    }
    template <class T>
    void source(const T *, const T *, T *) const {}
    template <class T>
    void numerical_flux(FluxKind, const T *up, const T *, const T *n, const T *, T *H) const {
        H[0] = (n[0] + n[1]) * up[0];
    }
    template <class T>
    void boundary_state(int, const T *uin, const T *, const T *, T *ug) const {
        ug[0] = uin[0];
    }
    template <class T>
    T boundary_functional(int, const T *, const T *, const T *) const {
        return T(1.0);
    }
    template <class T>
    T volume_functional(const T *, const T *) const {
        return T(0.0);
    }
    bool admissible(const double *) const { return true; }
};

}  // namespace

TEST_CASE("constant boundary integrand integrates the perimeter") {
    Mesh m = structured_rectangle(0, 1, 0, 1, 3, 3, 1);
    PerimeterLaw law;
    const Space sp{1, 1, m.n_elems()};
    const Eigen::VectorXd u = Eigen::VectorXd::Ones(sp.n_dofs());
    CHECK(functional_value(law, m, m.coords, sp, u) == doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("enrichment reproduces the field pointwise") {
    Mesh m = structured_rectangle(0, 1, 0, 1, 2, 2, 1);

    SUBCASE("p=0 constants") {
        const Space c{0, 1, m.n_elems()}, f{1, 1, m.n_elems()};
        Eigen::VectorXd u(c.n_dofs());
        for (int e = 0; e < c.n_elems; ++e) u[e] = 1.0 + e;
        const Eigen::VectorXd U = interpolation_matrix(c, f) * u;
        for (int e = 0; e < c.n_elems; ++e)
            for (int j = 0; j < 4; ++j) CHECK(U[f.dof(e, j, 0)] == doctest::Approx(1.0 + e));
    }

    SUBCASE("globally linear p=1 field evaluates identically at p=2") {
        const Space c{1, 1, m.n_elems()}, f{2, 1, m.n_elems()};
        const Eigen::VectorXd u = nodal_project(m, c, [](const Eigen::Vector2d &x) {
            return Eigen::VectorXd::Constant(1, 2.0 * x[0] - 0.7 * x[1] + 0.1);
        });
        const Eigen::VectorXd U = interpolation_matrix(c, f) * u;
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> un(0, 1);
        for (int e = 0; e < c.n_elems; ++e)
            for (int t = 0; t < 10; ++t) {
                const Eigen::Vector2d xi(un(rng), un(rng));
                CHECK(eval_field(m, c, u, e, xi)[0] ==
                      doctest::Approx(eval_field(m, f, U, e, xi)[0]).epsilon(1e-13));
            }
    }

    SUBCASE("random p=2 field matches its p=3 interpolant") {
        const Space c{2, 2, m.n_elems()}, f{3, 2, m.n_elems()};
        std::mt19937 rng(9);
        std::uniform_real_distribution<double> un(-1, 1);
        Eigen::VectorXd u(c.n_dofs());
        for (int i = 0; i < u.size(); ++i) u[i] = un(rng);
        const Eigen::VectorXd U = interpolation_matrix(c, f) * u;
        const Eigen::VectorXd n3 = gauss_lobatto_nodes(3);
        for (int e = 0; e < c.n_elems; ++e)
            for (int j = 0; j < 4; ++j)
                for (int i = 0; i < 4; ++i) {
                    const Eigen::Vector2d xi(n3[i], n3[j]);
                    const Eigen::VectorXd a = eval_field(m, c, u, e, xi);
                    for (int s = 0; s < 2; ++s)
                        CHECK(U[f.dof(e, j * 4 + i, s)] == doctest::Approx(a[s]).epsilon(1e-13));
                }
        for (int t = 0; t < 20; ++t) {
            const int e = t % c.n_elems;
            const Eigen::Vector2d xi(un(rng) * 0.5 + 0.5, un(rng) * 0.5 + 0.5);
            const Eigen::VectorXd a = eval_field(m, c, u, e, xi);
            const Eigen::VectorXd b = eval_field(m, f, U, e, xi);
            CHECK((a - b).cwiseAbs().maxCoeff() < 1e-13);
        }
    }
}

TEST_CASE("linear flow solve then Galerkin-orthogonality transfer") {
    Mesh m = structured_rectangle(-1, 1, 0, 1, 4, 2, 1);
    StraightShockLaw law;
    law.linear_inflow_data = true;
    law.inflow_coef = {10.0, 1.0, 0.3};
    const Space sp{1, 1, m.n_elems()};
    const auto flux = uniform_flux(m, FluxKind::upwind);

    // advection residual is affine in u: one Newton step solves it exactly
    Eigen::VectorXd u = Eigen::VectorXd::Zero(sp.n_dofs());
    const Eigen::VectorXd r0 = assemble_residual(law, m, m.coords, sp, u, flux);
    const ResidualJacobians J = assemble_residual_jacobians(law, m, m.coords, sp, u, flux);
    Eigen::SparseLU<SpMat> lu(J.wrt_u);
    u -= lu.solve(r0);
    const Eigen::VectorXd r1 = assemble_residual(law, m, m.coords, sp, u, flux);
    CHECK(r1.cwiseAbs().maxCoeff() < 1e-12);

    // the p+1 test space contains the p test space: restricted enriched
    // residual vanishes for the solved field
    const Space fine{2, 1, m.n_elems()};
    const SpMat Ih = interpolation_matrix(sp, fine);
    const Eigen::VectorXd U = Ih * u;
    const Eigen::VectorXd R = assemble_residual(law, m, m.coords, fine, U, flux);
    CHECK((Ih.transpose() * R).cwiseAbs().maxCoeff() < 1e-11);
    // and the affine-in-u residual reproduces itself through the Jacobian
    const Eigen::VectorXd lin = J.wrt_u * u;
    CHECK((r1 - r0 - lin).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("mass matrix of p=0 space holds element volumes") {
    Mesh m = structured_rectangle(0, 2, 0, 1, 2, 1, 1);
    const Space sp{0, 1, m.n_elems()};
    const SpMat M = assemble_mass(m, m.coords, sp);
    for (int e = 0; e < m.n_elems(); ++e) CHECK(M.coeff(e, e) == doctest::Approx(1.0));
}
