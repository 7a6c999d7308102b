#include "doctest.h"

#include <cmath>
#include <random>

#include "shocktrack/laws.hpp"

using namespace shocktrack;

namespace {

// Random unit normal.
Eigen::Vector2d random_normal(std::mt19937 &rng) {
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    const double a = ang(rng);
    return {std::cos(a), std::sin(a)};
}

// Post-shock state of a stationary oblique/normal shock from the pre-shock
// state and the shock normal (Rankine-Hugoniot relations); tangential
// velocity carries through.
std::array<double, 4> rankine_hugoniot_post(const EulerLaw &law, const std::array<double, 4> &pre,
                                            const Eigen::Vector2d &n) {
    const double g = law.gamma;
    const double rho1 = pre[0];
    const Eigen::Vector2d v1(pre[1] / rho1, pre[2] / rho1);
    const double p1 = law.pressure(pre.data());
    const double a1 = std::sqrt(g * p1 / rho1);
    const double vn1 = v1.dot(n);
    const double vt1 = v1.dot(Eigen::Vector2d(-n[1], n[0]));
    const double M1 = vn1 / a1;
    const double M2 = M1 * M1;
    const double rho2 = rho1 * (g + 1.0) * M2 / ((g - 1.0) * M2 + 2.0);
    const double p2 = p1 * (2.0 * g * M2 - (g - 1.0)) / (g + 1.0);
    const double vn2 = vn1 * rho1 / rho2;
    const Eigen::Vector2d v2 = vn2 * n + vt1 * Eigen::Vector2d(-n[1], n[0]);
    return EulerLaw::conservative(rho2, v2[0], v2[1], p2, g);
}

EulerLaw make_euler() {
    EulerLaw law;
    law.freestream = EulerLaw::conservative(1.4, 3.0, 0.0, 1.0, 1.4);
    law.bc_kind = {0, 1, 2};
    law.functional_tag = {0, 1, 0};
    return law;
}

}  // namespace

TEST_CASE("scalar upwind flux: sign selection and ties") {
    StraightShockLaw law;
    double up = 1.0, um = 0.0, H;
    double n1[2] = {0.0, 1.0}, pos[2] = {0.0, 0.0};
    law.numerical_flux(FluxKind::upwind, &up, &um, n1, pos, &H);
    CHECK(H == doctest::Approx(1.0));  // zeta.n = 1 > 0 takes interior

    double n2[2] = {0.0, -1.0};
    law.numerical_flux(FluxKind::upwind, &up, &um, n2, pos, &H);
    CHECK(H == doctest::Approx(0.0));  // zeta.n = -1 < 0 takes exterior

    // tie: zeta.n = 0 along the shock direction
    const Eigen::Vector2d t(-0.3, 1.0);
    double n3[2] = {t[1] / t.norm(), -t[0] / t.norm()};
    law.numerical_flux(FluxKind::upwind, &up, &um, n3, pos, &H);
    CHECK(H == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("upwind flux conservation over random states") {
    StraightShockLaw law;
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> us(-2, 2);
    for (int k = 0; k < 1000; ++k) {
        const Eigen::Vector2d n = random_normal(rng);
        double a = us(rng), b = us(rng), H1, H2;
        double np[2] = {n[0], n[1]}, nm[2] = {-n[0], -n[1]}, pos[2] = {us(rng), us(rng)};
        law.numerical_flux(FluxKind::upwind, &a, &b, np, pos, &H1);
        law.numerical_flux(FluxKind::upwind, &b, &a, nm, pos, &H2);
        CHECK(H1 + H2 == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("vector advection flux consistency and conservation") {
    CurvedShockLaw law;
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> us(-2, 2);
    std::uniform_real_distribution<double> ps(0, 1);
    for (int k = 0; k < 1000; ++k) {
        const Eigen::Vector2d n = random_normal(rng);
        double u[2] = {us(rng), us(rng)}, v[2] = {us(rng), us(rng)};
        double np[2] = {n[0], n[1]}, nm[2] = {-n[0], -n[1]}, pos[2] = {ps(rng), ps(rng)};
        double H1[2], H2[2], Hc[2];
        law.numerical_flux(FluxKind::upwind, u, v, np, pos, H1);
        law.numerical_flux(FluxKind::upwind, v, u, nm, pos, H2);
        CHECK(H1[0] + H2[0] == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(H1[1] + H2[1] == doctest::Approx(0.0).epsilon(1e-14));

        // consistency H(u,u,n) = F(u).n
        law.numerical_flux(FluxKind::upwind, u, u, np, pos, Hc);
        double F[2][2];
        law.flux(u, pos, F);
        for (int s = 0; s < 2; ++s)
            CHECK(Hc[s] == doctest::Approx(F[s][0] * n[0] + F[s][1] * n[1]).epsilon(1e-13));
    }
}

TEST_CASE("roe flux with entropy fix: freestream consistency") {
    EulerLaw law = make_euler();
    const auto u = law.freestream;
    double n[2] = {1.0, 0.0}, pos[2] = {0, 0};
    double H[4], Fn[4];
    law.numerical_flux(FluxKind::roe_entropy_fix, u.data(), u.data(), n, pos, H);
    law.normal_flux(u.data(), n, Fn);
    // analytic F(u).n = (rho u, rho u^2 + p, rho u v, rho H u)
    const double rho = 1.4, vx = 3.0, p = 1.0;
    const double Hn = law.enthalpy(u.data());
    CHECK(Fn[0] == doctest::Approx(rho * vx));
    CHECK(Fn[1] == doctest::Approx(rho * vx * vx + p));
    CHECK(Fn[2] == doctest::Approx(0.0));
    CHECK(Fn[3] == doctest::Approx(rho * Hn * vx));
    for (int s = 0; s < 4; ++s) CHECK(H[s] == doctest::Approx(Fn[s]).epsilon(1e-13));
}

TEST_CASE("roe flux equals the upwind physical flux for supersonic flow") {
    EulerLaw law = make_euler();
    // both states supersonic left-to-right along n
    const auto ua = EulerLaw::conservative(1.4, 3.0, 0.1, 1.0, 1.4);
    const auto ub = EulerLaw::conservative(1.3, 2.9, -0.05, 0.9, 1.4);
    double n[2] = {1.0, 0.0}, pos[2] = {0, 0};
    double H[4], Fn[4];
    law.numerical_flux(FluxKind::roe_entropy_fix, ua.data(), ub.data(), n, pos, H);
    law.normal_flux(ua.data(), n, Fn);
    for (int s = 0; s < 4; ++s) CHECK(H[s] == doctest::Approx(Fn[s]).epsilon(1e-12));
}

TEST_CASE("roe flux conservation on random physical pairs") {
    EulerLaw law = make_euler();
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> rr(0.3, 2.5), vv(-2.5, 2.5), pp(0.4, 3.0);
    for (int k = 0; k < 1000; ++k) {
        const auto a = EulerLaw::conservative(rr(rng), vv(rng), vv(rng), pp(rng), 1.4);
        const auto b = EulerLaw::conservative(rr(rng), vv(rng), vv(rng), pp(rng), 1.4);
        const Eigen::Vector2d n = random_normal(rng);
        double np[2] = {n[0], n[1]}, nm[2] = {-n[0], -n[1]}, pos[2] = {0, 0};
        double H1[4], H2[4];
        law.numerical_flux(FluxKind::roe_entropy_fix, a.data(), b.data(), np, pos, H1);
        law.numerical_flux(FluxKind::roe_entropy_fix, b.data(), a.data(), nm, pos, H2);
        double scale = 0.0;
        for (int s = 0; s < 4; ++s) scale = std::max(scale, std::abs(H1[s]));
        for (int s = 0; s < 4; ++s) CHECK(std::abs(H1[s] + H2[s]) < 1e-12 * std::max(1.0, scale));
    }
}

TEST_CASE("pure upwind flux satisfies the jump conditions at a stationary shock") {
    EulerLaw law = make_euler();
    const Eigen::Vector2d n(1.0, 0.0);
    const auto pre = EulerLaw::conservative(1.4, 3.0, 0.0, 1.0, 1.4);
    const auto post = rankine_hugoniot_post(law, pre, n);

    double np[2] = {n[0], n[1]}, pos[2] = {0, 0};
    double Fp[4], Fm[4], H[4];
    law.normal_flux(pre.data(), np, Fp);
    law.normal_flux(post.data(), np, Fm);
    for (int s = 0; s < 4; ++s) CHECK(Fp[s] == doctest::Approx(Fm[s]).epsilon(1e-12));

    law.numerical_flux(FluxKind::pure_upwind, pre.data(), post.data(), np, pos, H);
    for (int s = 0; s < 4; ++s) CHECK(H[s] == doctest::Approx(Fp[s]).epsilon(1e-12));

    // consistency
    law.numerical_flux(FluxKind::pure_upwind, pre.data(), pre.data(), np, pos, H);
    for (int s = 0; s < 4; ++s) CHECK(H[s] == doctest::Approx(Fp[s]).epsilon(1e-13));

    // subsonic-normal pair: side selected by the Roe-averaged normal velocity
    const auto sa = EulerLaw::conservative(1.0, 0.3, 0.2, 1.0, 1.4);
    const auto sb = EulerLaw::conservative(1.1, 0.4, -0.1, 1.1, 1.4);
    law.numerical_flux(FluxKind::pure_upwind, sa.data(), sb.data(), np, pos, H);
    law.normal_flux(sa.data(), np, Fp);  // Roe-average normal velocity > 0
    for (int s = 0; s < 4; ++s) CHECK(H[s] == doctest::Approx(Fp[s]).epsilon(1e-13));
}

TEST_CASE("slip wall boundary state removes the normal velocity") {
    EulerLaw law = make_euler();
    const auto u = EulerLaw::conservative(1.0, 1.0, 1.0, 1.0, 1.4);
    double n[2] = {0.0, 1.0}, pos[2] = {0, 0}, ug[4];
    law.boundary_state(2, u.data(), pos, n, ug);
    CHECK(ug[0] == doctest::Approx(u[0]));
    CHECK(ug[1] == doctest::Approx(u[1]));       // tangential momentum kept
    CHECK(ug[2] == doctest::Approx(0.0));        // normal momentum removed
    CHECK(ug[3] == doctest::Approx(u[3]));       // energy kept

    // supersonic outflow extrapolates
    law.boundary_state(1, u.data(), pos, n, ug);
    for (int s = 0; s < 4; ++s) CHECK(ug[s] == doctest::Approx(u[s]));
}

TEST_CASE("curved shock exact solution satisfies the stated examples") {
    CurvedShockLaw law;
    CHECK(law.exact_solution({0.1, 0.5})[1] == doctest::Approx(0.4));
    CHECK(law.exact_solution({0.1, 0.5})[0] == doctest::Approx(1.0));
    // independent evaluation at (0.9, 0.05) via the backtraced characteristic
    const double yt = CurvedShockLaw::backtraced_y(0.9, 0.05);
    const double xt = CurvedShockLaw::shock_x(yt);
    CHECK(law.exact_solution({0.9, 0.05})[1] == doctest::Approx(0.3 + xt).epsilon(1e-14));

    // straight-shock exact solution from section values
    StraightShockLaw sl;
    CHECK(sl.exact_solution({0.5, 0.5}) == doctest::Approx(1.0));
    CHECK(sl.exact_solution({-0.5, 0.5}) == doctest::Approx(0.0));
}
