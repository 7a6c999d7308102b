#include "doctest.h"

#include <random>

#include "shocktrack/assembly.hpp"
#include "shocktrack/krylov.hpp"
#include "test_helpers.hpp"

using namespace shocktrack;
using namespace shocktrack::testing;

namespace {

ApplyFn matrix_apply(const SpMat &A) {
    return [&A](const Eigen::VectorXd &v, Eigen::VectorXd &out) { out = A * v; };
}

SpMat sparse_from(const Eigen::MatrixXd &D) {
    SpMat A(D.rows(), D.cols());
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < D.rows(); ++i)
        for (int j = 0; j < D.cols(); ++j)
            if (D(i, j) != 0.0) t.emplace_back(i, j, D(i, j));
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

}  // namespace

TEST_CASE("gmres on the identity converges in one iteration") {
    const int n = 12;
    SpMat I(n, n);
    I.setIdentity();
    Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(n, 1, 2), x;
    const KrylovStats st = gmres(n, matrix_apply(I), b, x, {});
    CHECK(st.converged);
    CHECK(st.iterations <= 1);
    CHECK((x - b).norm() < 1e-13);
}

TEST_CASE("gmres solves a diagonal system") {
    const int n = 10;
    Eigen::MatrixXd D = Eigen::VectorXd::LinSpaced(n, 1, n).asDiagonal();
    const SpMat A = sparse_from(D);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(n), x;
    KrylovOptions opts;
    opts.rtol = 1e-12;
    const KrylovStats st = gmres(n, matrix_apply(A), b, x, opts);
    CHECK(st.converged);
    for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(1.0 / (i + 1)).epsilon(1e-11));
}

TEST_CASE("gmres matches a dense direct solve on a random SPD system") {
    const int n = 50;
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> un(-1, 1);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = un(rng);
    const Eigen::MatrixXd SPD = M * M.transpose() + double(n) * Eigen::MatrixXd::Identity(n, n);
    const SpMat A = sparse_from(SPD);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b[i] = un(rng);
    Eigen::VectorXd x;
    KrylovOptions opts;
    opts.rtol = 1e-13;
    opts.restart = 60;
    const KrylovStats st = gmres(n, matrix_apply(A), b, x, opts);
    const Eigen::VectorXd xs = SPD.ldlt().solve(b);
    CHECK(st.converged);
    CHECK((x - xs).norm() / xs.norm() < 1e-10);
}

TEST_CASE("fgmres with the identity preconditioner reduces to gmres") {
    const int n = 30;
    std::mt19937 rng(103);
    std::uniform_real_distribution<double> un(-1, 1);
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) * 4.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) += 0.3 * un(rng);
    const SpMat A = sparse_from(M);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b[i] = un(rng);

    Eigen::VectorXd xg, xf;
    KrylovOptions opts;
    opts.rtol = 1e-12;
    const ApplyFn ident = [](const Eigen::VectorXd &v, Eigen::VectorXd &o) { o = v; };
    const KrylovStats sg = gmres(n, matrix_apply(A), b, xg, opts);
    const KrylovStats sf = fgmres(n, matrix_apply(A), b, xf, opts, ident);
    CHECK(sg.converged);
    CHECK(sf.converged);
    CHECK(sg.iterations == sf.iterations);
    CHECK((xg - xf).norm() < 1e-12);

    // a perfect preconditioner converges in at most two iterations
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    const ApplyFn perfect = [&](const Eigen::VectorXd &v, Eigen::VectorXd &o) {
        o = lu.solve(v);
    };
    Eigen::VectorXd xp;
    const KrylovStats sp = fgmres(n, matrix_apply(A), b, xp, opts, perfect);
    CHECK(sp.converged);
    CHECK(sp.iterations <= 2);
}

TEST_CASE("residual preconditioner: diagonal is exact, transpose is adjoint") {
    const int n = 9;
    Eigen::MatrixXd D = Eigen::VectorXd::LinSpaced(n, 2, n + 1).asDiagonal();
    const SpMat A = sparse_from(D);
    ResidualPreconditioner P;
    P.build(A, 0);
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(n, 1, n), out;
    P.apply(v, out);
    for (int i = 0; i < n; ++i) CHECK(out[i] == doctest::Approx(v[i] / (i + 2)));

    std::mt19937 rng(107);
    std::uniform_real_distribution<double> un(-1, 1);
    Eigen::MatrixXd M = 5.0 * Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) += un(rng);
    ResidualPreconditioner P2;
    P2.build(sparse_from(M), 3);
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w[i] = un(rng);
    Eigen::VectorXd a, b2;
    P2.apply(v, a);
    P2.apply_transpose(w, b2);
    CHECK(a.dot(w) == doctest::Approx(v.dot(b2)).epsilon(1e-12));
}

TEST_CASE("p=0 upwind advection jacobian: ILU-preconditioned gmres converges fast") {
    Mesh m = structured_rectangle(-1, 1, 0, 1, 6, 3, 1);
    StraightShockLaw law;
    const Space sp{0, 1, m.n_elems()};
    const Eigen::VectorXd u = Eigen::VectorXd::Zero(sp.n_dofs());
    const auto J = assemble_residual_jacobians(law, m, m.coords, sp, u,
                                               uniform_flux(m, FluxKind::upwind));
    ResidualPreconditioner P;
    P.build(J.wrt_u, 0);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(sp.n_dofs()), x;
    KrylovOptions opts;
    opts.rtol = 1e-13;
    const ApplyFn M = [&](const Eigen::VectorXd &v, Eigen::VectorXd &o) { P.apply(v, o); };
    const KrylovStats st = gmres(sp.n_dofs(), matrix_apply(J.wrt_u), b, x, opts, &M);
    CHECK(st.converged);
    CHECK(st.iterations <= 5);
}

TEST_CASE("lbfgs reduced hessian") {
    const int n = 8;
    std::mt19937 rng(211);
    std::uniform_real_distribution<double> un(-1, 1);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = un(rng);
    const Eigen::MatrixXd Q = M * M.transpose() + 2.0 * Eigen::MatrixXd::Identity(n, n);

    SUBCASE("secant property on a quadratic model") {
        // Q-conjugate steps make the hereditary secant property exact, so
        // after n updates B reproduces Q on the whole explored space.
        LbfgsHessian B(n, 20);
        std::vector<Eigen::VectorXd> steps;
        for (int k = 0; k < n; ++k) {
            Eigen::VectorXd s = Eigen::VectorXd::Unit(n, k);
            for (const auto &prev : steps) s -= (prev.dot(Q * s) / prev.dot(Q * prev)) * prev;
            B.update(s, Q * s);
            steps.push_back(s);
        }
        for (const auto &s : steps) CHECK((B.apply(s) - Q * s).norm() < 1e-8 * (Q * s).norm());
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = un(rng);
        CHECK((B.apply(v) - Q * v).norm() < 1e-8 * (Q * v).norm());
        // inverse application is consistent with the forward one
        CHECK((B.apply(B.apply_inverse(v)) - v).norm() < 1e-10 * v.norm());
    }

    SUBCASE("consistent pair is a no-op and bad curvature is skipped") {
        LbfgsHessian B(n, 20);
        Eigen::VectorXd s = Eigen::VectorXd::Ones(n);
        B.update(s, Q * s);
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = un(rng);
        const Eigen::VectorXd before = B.apply(v);
        // delta_g = B delta_s: the secant condition already holds
        B.update(0.1 * s, B.apply((0.1 * s).eval()));
        CHECK((B.apply(v) - before).norm() < 1e-10 * before.norm());

        const Eigen::VectorXd b1 = B.apply(v);
        B.update(s, -s);  // negative curvature: skipped
        CHECK((B.apply(v) - b1).norm() == 0.0);
    }
}

TEST_CASE("p2 preconditioner block algebra") {
    const int nu = 7, ns = 3;
    std::mt19937 rng(223);
    std::uniform_real_distribution<double> un(-1, 1);

    Eigen::MatrixXd Ru = 4.0 * Eigen::MatrixXd::Identity(nu, nu);
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nu; ++j) Ru(i, j) += 0.4 * un(rng);
    Eigen::MatrixXd Rs(nu, ns);
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < ns; ++j) Rs(i, j) = un(rng);

    ResidualPreconditioner P;
    P.build(sparse_from(Ru), -1);  // exact factorization
    const SpMat RsS = sparse_from(Rs);
    LbfgsHessian B(ns, 10);
    for (int k = 0; k < ns; ++k) {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(ns);
        s[k] = 1.0 + 0.1 * k;
        B.update(s, (2.0 + k) * s);
    }

    P2Preconditioner p2{&P, &RsS, &B};
    Eigen::VectorXd v(2 * nu + ns);
    for (int i = 0; i < v.size(); ++i) v[i] = un(rng);

    SUBCASE("inverse then forward reproduces the input") {
        Eigen::VectorXd w, z;
        p2.apply_inverse(v, w);
        p2.apply(w, z);
        CHECK((z - v).norm() < 1e-12 * v.norm());
    }

    SUBCASE("identity blocks reduce to the u<->lambda swap") {
        Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nu, nu);
        ResidualPreconditioner Pi;
        Pi.build(sparse_from(I), -1);
        const SpMat Z = sparse_from(Eigen::MatrixXd::Zero(nu, ns));
        LbfgsHessian Bi(ns, 10);  // stays the identity
        P2Preconditioner swap{&Pi, &Z, &Bi};
        Eigen::VectorXd w;
        swap.apply_inverse(v, w);
        CHECK((w.segment(0, nu) - v.segment(nu + ns, nu)).norm() == 0.0);
        CHECK((w.segment(nu, ns) - v.segment(nu, ns)).norm() < 1e-14);
        CHECK((w.segment(nu + ns, nu) - v.segment(0, nu)).norm() == 0.0);
        Eigen::VectorXd z;
        swap.apply(w, z);
        CHECK((z - v).norm() < 1e-13 * v.norm());
    }
}
