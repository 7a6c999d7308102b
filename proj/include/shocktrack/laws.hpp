#ifndef SHOCKTRACK_LAWS_HPP
#define SHOCKTRACK_LAWS_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "shocktrack/jet.hpp"

namespace shocktrack {

/// Numerical flux selection, per face.
enum class FluxKind {
    upwind,            // exact upwinding by the sign of the normal velocity
    smoothed_upwind,   // |.| replaced by sqrt(.^2 + kappa^2) (residual mode)
    roe_entropy_fix,   // Roe flux with Hartmann-Leicht eigenvalue smoothing
    pure_upwind,       // one-sided physical flux at tracked shock faces
};

/// Scalar linear advection with a Heaviside inflow trace: the straight-shock
/// problem on [-1,1] x [0,1]. Boundary tags follow structured_rectangle:
/// 0 bottom, 1 right, 2 top, 3 left. Bottom/right are inflow.
struct StraightShockLaw {
    static constexpr int m = 1;
    static constexpr bool has_source = false;
    Eigen::Vector2d zeta{-0.3, 1.0};
    double smooth_kappa = 1e-4;
    bool linear_inflow_data = false;       // c0 + c1 x + c2 y instead of H(x)
    Eigen::Vector3d inflow_coef{0, 0, 0};

    template <class T>
    void flux(const T *u, const T *, T F[][2]) const {
        F[0][0] = zeta[0] * u[0];
        F[0][1] = zeta[1] * u[0];
    }

    template <class T>
    void source(const T *, const T *, T *) const {}

    template <class T>
    void numerical_flux(FluxKind kind, const T *up, const T *um, const T *n, const T *,
                        T *H) const {
        const T bn = zeta[0] * n[0] + zeta[1] * n[1];
        if (kind == FluxKind::smoothed_upwind) {
            const T sm = sqrt(bn * bn + smooth_kappa * smooth_kappa);
            H[0] = 0.5 * bn * (up[0] + um[0]) - 0.5 * sm * (um[0] - up[0]);
        } else {
            H[0] = value(bn) > 0.0 ? bn * up[0] : bn * um[0];
        }
    }

    template <class T>
    void boundary_state(int btag, const T *uin, const T *pos, const T *, T *ug) const {
        if (btag == 0 || btag == 1) {
            if (linear_inflow_data)
                ug[0] = inflow_coef[0] + inflow_coef[1] * pos[0] + inflow_coef[2] * pos[1];
            else
                ug[0] = value(pos[0]) >= 0.0 ? T(1.0) : T(0.0);  // u = H(x) at inflow
        } else {
            ug[0] = uin[0];
        }
    }

    /// J = int_{Gamma+} (1+x) u dGamma over the left and top boundaries.
    template <class T>
    T boundary_functional(int btag, const T *ug, const T *pos, const T *) const {
        if (btag == 2 || btag == 3) return (1.0 + pos[0]) * ug[0];
        return T(0.0);
    }

    template <class T>
    T volume_functional(const T *, const T *) const { return T(0.0); }

    bool admissible(const double *) const { return true; }

    double exact_solution(const Eigen::Vector2d &p) const {
        return p[0] + 0.3 * p[1] >= 0.0 ? 1.0 : 0.0;
    }
};

/// Two-state advection with a curved shock in u0 feeding a source u0^2 into
/// u1, on the unit square. Inflow data is applied per state by the sign of
/// that state's normal velocity.
struct CurvedShockLaw {
    static constexpr int m = 2;
    static constexpr bool has_source = true;
    Eigen::Vector2d vel1{1.0, -1.0};
    bool smooth_functional_weight = true;
    double smooth_kappa = 1e-4;

    template <class T>
    static void beta(const T *pos, T *b) {
        b[0] = 0.8 * pos[1] - 0.4;
        b[1] = T(-1.0);
    }

    template <class T>
    void flux(const T *u, const T *pos, T F[][2]) const {
        T b[2];
        beta(pos, b);
        F[0][0] = b[0] * u[0];
        F[0][1] = b[1] * u[0];
        F[1][0] = vel1[0] * u[1];
        F[1][1] = vel1[1] * u[1];
    }

    template <class T>
    void source(const T *u, const T *, T *s) const {
        s[0] = T(0.0);
        s[1] = u[0] * u[0];
    }

    template <class T>
    void numerical_flux(FluxKind kind, const T *up, const T *um, const T *n, const T *pos,
                        T *H) const {
        T b[2];
        beta(pos, b);
        const T bn0 = b[0] * n[0] + b[1] * n[1];
        const T bn1 = vel1[0] * n[0] + vel1[1] * n[1];
        if (kind == FluxKind::smoothed_upwind) {
            const T s0 = sqrt(bn0 * bn0 + smooth_kappa * smooth_kappa);
            const T s1 = sqrt(bn1 * bn1 + smooth_kappa * smooth_kappa);
            H[0] = 0.5 * bn0 * (up[0] + um[0]) - 0.5 * s0 * (um[0] - up[0]);
            H[1] = 0.5 * bn1 * (up[1] + um[1]) - 0.5 * s1 * (um[1] - up[1]);
        } else {
            H[0] = value(bn0) > 0.0 ? bn0 * up[0] : bn0 * um[0];
            H[1] = value(bn1) > 0.0 ? bn1 * up[1] : bn1 * um[1];
        }
    }

    template <class T>
    void boundary_state(int, const T *uin, const T *pos, const T *n, T *ug) const {
        T b[2];
        beta(pos, b);
        const T bn0 = b[0] * n[0] + b[1] * n[1];
        const T bn1 = vel1[0] * n[0] + vel1[1] * n[1];
        ug[0] = value(bn0) <= 0.0 ? (value(pos[0]) <= 0.375 ? T(1.0) : T(0.0)) : uin[0];
        ug[1] = value(bn1) <= 0.0 ? T(0.3) : uin[1];
    }

    template <class T>
    T logistic_weight(const T &y) const {
        return 1.0 / (1.0 + exp(-230.0 * (y - 0.05)));
    }

    /// J = int_{Gamma_right} g(y) u1^2 dGamma.
    template <class T>
    T boundary_functional(int btag, const T *ug, const T *pos, const T *) const {
        if (btag != 1) return T(0.0);
        const T w = smooth_functional_weight ? logistic_weight(pos[1]) : T(1.0);
        return w * ug[1] * ug[1];
    }

    template <class T>
    T volume_functional(const T *, const T *) const { return T(0.0); }

    bool admissible(const double *) const { return true; }

    /// Shock curve of u0: x = -0.4 y^2 + 0.4 y + 0.375.
    static double shock_x(double y) { return -0.4 * y * y + 0.4 * y + 0.375; }

    Eigen::Vector2d exact_solution(const Eigen::Vector2d &p) const {
        const double x = p[0], y = p[1];
        const double u0 = x <= shock_x(y) ? 1.0 : 0.0;
        double u1;
        if (x <= shock_x(y)) {
            u1 = y > 1.0 - x ? 1.3 - y : 0.3 + x;
        } else if (y <= 1.0 - x) {
            u1 = 0.3 + shock_x(backtraced_y(x, y));
        } else if (y < 1.375 - x) {
            u1 = 1.3 - backtraced_y(x, y);
        } else {
            u1 = 0.3;
        }
        return {u0, u1};
    }

    /// y-coordinate where the characteristic through (x,y) meets the shock.
    static double backtraced_y(double x, double y) {
        return (1.4 - std::sqrt(1.4 * 1.4 + 1.6 * (0.375 - x - y))) / 0.8;
    }
};

/// Compressible Euler (m=4), Roe flux with the Hartmann-Leicht entropy fix
/// and optional pure upwinding at tracked shock faces. Boundary kinds are
/// assigned per tag.
struct EulerLaw {
    static constexpr int m = 4;
    static constexpr bool has_source = false;
    double gamma = 1.4;
    std::array<double, 4> freestream{};           // conservative state
    std::vector<int> bc_kind;                     // per btag: 0 inflow, 1 outflow, 2 slip wall
    std::vector<char> functional_tag;             // per btag: integrate mass flux here
    double entropy_fix_fraction = 0.1;

    template <class T>
    void primitives(const T *u, T &rho, T *v, T &p, T &H) const {
        rho = u[0];
        v[0] = u[1] / rho;
        v[1] = u[2] / rho;
        p = (gamma - 1.0) * (u[3] - 0.5 * rho * (v[0] * v[0] + v[1] * v[1]));
        H = (u[3] + p) / rho;
    }

    template <class T>
    void flux(const T *u, const T *, T F[][2]) const {
        T rho, v[2], p, H;
        primitives(u, rho, v, p, H);
        F[0][0] = u[1];
        F[0][1] = u[2];
        F[1][0] = u[1] * v[0] + p;
        F[1][1] = u[1] * v[1];
        F[2][0] = u[2] * v[0];
        F[2][1] = u[2] * v[1] + p;
        F[3][0] = rho * H * v[0];
        F[3][1] = rho * H * v[1];
    }

    template <class T>
    void source(const T *, const T *, T *) const {}

    template <class T>
    void normal_flux(const T *u, const T *n, T *Fn) const {
        T F[m][2];
        flux(u, static_cast<const T *>(nullptr), F);
        for (int s = 0; s < m; ++s) Fn[s] = F[s][0] * n[0] + F[s][1] * n[1];
    }

    template <class T>
    void numerical_flux(FluxKind kind, const T *up, const T *um, const T *n, const T *,
                        T *H) const {
        T rhoL, vL[2], pL, HL, rhoR, vR[2], pR, HR;
        primitives(up, rhoL, vL, pL, HL);
        primitives(um, rhoR, vR, pR, HR);

        const T r = sqrt(rhoR / rhoL);
        const T w = 1.0 / (1.0 + r);
        const T ut = (vL[0] + r * vR[0]) * w;
        const T vt = (vL[1] + r * vR[1]) * w;
        const T Ht = (HL + r * HR) * w;
        const T a2 = (gamma - 1.0) * (Ht - 0.5 * (ut * ut + vt * vt));
        const T a = sqrt(a2);
        const T vn = ut * n[0] + vt * n[1];

        if (kind == FluxKind::pure_upwind) {
            // one-sided physical flux; upwind side by the Roe-averaged
            // normal velocity (satisfies Rankine-Hugoniot at tracked shocks)
            if (value(vn) > 0.0) normal_flux(up, n, H);
            else normal_flux(um, n, H);
            return;
        }

        const T lam[4] = {vn - a, vn, vn, vn + a};
        // delta is differentiated along with the eigenvalues so the assembled
        // Jacobians stay exact derivatives of the implemented flux
        T maxabs = abs(lam[0]);
        for (int k = 1; k < 4; ++k) {
            const T al = abs(lam[k]);
            if (value(al) > value(maxabs)) maxabs = al;
        }
        const T delta = entropy_fix_fraction * maxabs;
        T lfix[4];
        for (int k = 0; k < 4; ++k) {
            const T al = abs(lam[k]);
            lfix[k] = (value(al) < value(delta) && value(delta) > 0.0)
                          ? (lam[k] * lam[k] + delta * delta) / (2.0 * delta)
                          : al;
        }

        const T tvec[2] = {-n[1], n[0]};
        const T rhot = r * rhoL;
        const T dp = pR - pL;
        const T dvn = (vR[0] - vL[0]) * n[0] + (vR[1] - vL[1]) * n[1];
        const T dvt = (vR[0] - vL[0]) * tvec[0] + (vR[1] - vL[1]) * tvec[1];
        const T drho = rhoR - rhoL;

        const T alpha1 = (dp - rhot * a * dvn) / (2.0 * a2);
        const T alpha2 = drho - dp / a2;
        const T alpha3 = rhot * dvt;
        const T alpha4 = (dp + rhot * a * dvn) / (2.0 * a2);

        const T vtan = ut * tvec[0] + vt * tvec[1];
        const T q2 = 0.5 * (ut * ut + vt * vt);
        T wave[4][4] = {
            {T(1.0), ut - a * n[0], vt - a * n[1], Ht - a * vn},
            {T(1.0), ut, vt, q2},
            {T(0.0), tvec[0], tvec[1], vtan},
            {T(1.0), ut + a * n[0], vt + a * n[1], Ht + a * vn},
        };
        const T alpha[4] = {alpha1, alpha2, alpha3, alpha4};

        T FnL[4], FnR[4];
        normal_flux(up, n, FnL);
        normal_flux(um, n, FnR);
        for (int s = 0; s < 4; ++s) {
            T diss = T(0.0);
            for (int k = 0; k < 4; ++k) diss += alpha[k] * lfix[k] * wave[k][s];
            H[s] = 0.5 * (FnL[s] + FnR[s]) - 0.5 * diss;
        }
    }

    template <class T>
    void boundary_state(int btag, const T *uin, const T *, const T *n, T *ug) const {
        switch (bc_kind[btag]) {
            case 0:  // supersonic inflow
                for (int s = 0; s < m; ++s) ug[s] = T(freestream[s]);
                break;
            case 2: {  // slip wall: remove the normal velocity, keep rho and E
                const T rho = uin[0];
                const T mvn = uin[1] * n[0] + uin[2] * n[1];
                ug[0] = rho;
                ug[1] = uin[1] - mvn * n[0];
                ug[2] = uin[2] - mvn * n[1];
                ug[3] = uin[3];
                break;
            }
            default:  // supersonic outflow: extrapolate
                for (int s = 0; s < m; ++s) ug[s] = uin[s];
        }
    }

    /// J = int_{Gamma_outflow} rho v . n dGamma (mass flow out).
    template <class T>
    T boundary_functional(int btag, const T *ug, const T *, const T *n) const {
        if (!functional_tag[btag]) return T(0.0);
        return ug[1] * n[0] + ug[2] * n[1];
    }

    template <class T>
    T volume_functional(const T *, const T *) const { return T(0.0); }

    bool admissible(const double *u) const {
        if (!(u[0] > 0.0)) return false;
        const double p = (gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0]);
        return p > 0.0;
    }

    double pressure(const double *u) const {
        return (gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0]);
    }
    double enthalpy(const double *u) const { return (u[3] + pressure(u)) / u[0]; }
    double mach(const double *u) const {
        const double p = pressure(u);
        const double vsq = (u[1] * u[1] + u[2] * u[2]) / (u[0] * u[0]);
        return std::sqrt(vsq / (gamma * p / u[0]));
    }

    static std::array<double, 4> conservative(double rho, double vx, double vy, double p,
                                              double gamma) {
        return {rho, rho * vx, rho * vy, p / (gamma - 1.0) + 0.5 * rho * (vx * vx + vy * vy)};
    }
};

using LawVariant = std::variant<StraightShockLaw, CurvedShockLaw, EulerLaw>;

}  // namespace shocktrack

#endif
