#ifndef SHOCKTRACK_JET_HPP
#define SHOCKTRACK_JET_HPP

#include <Eigen/Dense>
#include <cmath>

namespace shocktrack {

/// Capacity of the per-quadrature-point variable space. The largest kernel
/// (Euler interior face: two traces, metric Jacobian, position) uses exactly
/// 2*4 + 4 + 2 = 14 local variables.
inline constexpr int kJetCap = 14;

/// First-order forward-mode scalar: value plus gradient w.r.t. a small set
/// of local variables. Unused gradient slots are kept at zero so constants
/// and variables mix freely.
struct Jet1 {
    using Grad = Eigen::Matrix<double, kJetCap, 1>;

    double v = 0.0;
    Grad g = Grad::Zero();

    Jet1() = default;
    Jet1(double value) : v(value) {}  // NOLINT: implicit by design

    static Jet1 variable(double value, int slot) {
        Jet1 r(value);
        r.g[slot] = 1.0;
        return r;
    }

    Jet1 &operator+=(const Jet1 &o) { v += o.v; g += o.g; return *this; }
    Jet1 &operator-=(const Jet1 &o) { v -= o.v; g -= o.g; return *this; }
    Jet1 &operator*=(const Jet1 &o) { g = o.v * g + v * o.g; v *= o.v; return *this; }
    Jet1 &operator+=(double c) { v += c; return *this; }
    Jet1 &operator-=(double c) { v -= c; return *this; }
    Jet1 &operator*=(double c) { v *= c; g *= c; return *this; }
};

inline Jet1 operator+(Jet1 a, const Jet1 &b) { a += b; return a; }
inline Jet1 operator-(Jet1 a, const Jet1 &b) { a -= b; return a; }
inline Jet1 operator-(Jet1 a) { a.v = -a.v; a.g = -a.g; return a; }
inline Jet1 operator*(Jet1 a, const Jet1 &b) { a *= b; return a; }
inline Jet1 operator+(Jet1 a, double c) { a.v += c; return a; }
inline Jet1 operator+(double c, Jet1 a) { a.v += c; return a; }
inline Jet1 operator-(Jet1 a, double c) { a.v -= c; return a; }
inline Jet1 operator-(double c, const Jet1 &a) { return -a + c; }
inline Jet1 operator*(Jet1 a, double c) { a *= c; return a; }
inline Jet1 operator*(double c, Jet1 a) { a *= c; return a; }

inline Jet1 inverse(const Jet1 &a) {
    Jet1 r;
    const double iv = 1.0 / a.v;
    r.v = iv;
    r.g = -(iv * iv) * a.g;
    return r;
}
inline Jet1 operator/(const Jet1 &a, const Jet1 &b) { return a * inverse(b); }
inline Jet1 operator/(const Jet1 &a, double c) { return a * (1.0 / c); }
inline Jet1 operator/(double c, const Jet1 &b) { return inverse(b) * c; }

inline Jet1 sqrt(const Jet1 &a) {
    Jet1 r;
    r.v = std::sqrt(a.v);
    r.g = (0.5 / r.v) * a.g;
    return r;
}
inline Jet1 exp(const Jet1 &a) {
    Jet1 r;
    r.v = std::exp(a.v);
    r.g = r.v * a.g;
    return r;
}
inline Jet1 abs(const Jet1 &a) { return a.v >= 0.0 ? a : -a; }

/// Second-order forward-mode scalar: value, gradient and (symmetric) Hessian.
struct Jet2 {
    using Grad = Eigen::Matrix<double, kJetCap, 1>;
    using Hess = Eigen::Matrix<double, kJetCap, kJetCap>;

    double v = 0.0;
    Grad g = Grad::Zero();
    Hess h = Hess::Zero();

    Jet2() = default;
    Jet2(double value) : v(value) {}  // NOLINT: implicit by design

    static Jet2 variable(double value, int slot) {
        Jet2 r(value);
        r.g[slot] = 1.0;
        return r;
    }

    Jet2 &operator+=(const Jet2 &o) { v += o.v; g += o.g; h += o.h; return *this; }
    Jet2 &operator-=(const Jet2 &o) { v -= o.v; g -= o.g; h -= o.h; return *this; }
    Jet2 &operator*=(const Jet2 &o) {
        h = o.v * h + v * o.h + g * o.g.transpose() + o.g * g.transpose();
        g = o.v * g + v * o.g;
        v *= o.v;
        return *this;
    }
    Jet2 &operator+=(double c) { v += c; return *this; }
    Jet2 &operator-=(double c) { v -= c; return *this; }
    Jet2 &operator*=(double c) { v *= c; g *= c; h *= c; return *this; }
};

inline Jet2 operator+(Jet2 a, const Jet2 &b) { a += b; return a; }
inline Jet2 operator-(Jet2 a, const Jet2 &b) { a -= b; return a; }
inline Jet2 operator-(Jet2 a) { a.v = -a.v; a.g = -a.g; a.h = -a.h; return a; }
inline Jet2 operator*(Jet2 a, const Jet2 &b) { a *= b; return a; }
inline Jet2 operator+(Jet2 a, double c) { a.v += c; return a; }
inline Jet2 operator+(double c, Jet2 a) { a.v += c; return a; }
inline Jet2 operator-(Jet2 a, double c) { a.v -= c; return a; }
inline Jet2 operator-(double c, const Jet2 &a) { return -a + c; }
inline Jet2 operator*(Jet2 a, double c) { a *= c; return a; }
inline Jet2 operator*(double c, Jet2 a) { a *= c; return a; }

/// Chain rule for a smooth univariate map given f(v), f'(v), f''(v).
inline Jet2 compose(const Jet2 &a, double f, double fp, double fpp) {
    Jet2 r;
    r.v = f;
    r.g = fp * a.g;
    r.h = fp * a.h + fpp * (a.g * a.g.transpose());
    return r;
}

inline Jet2 inverse(const Jet2 &a) {
    const double iv = 1.0 / a.v;
    return compose(a, iv, -iv * iv, 2.0 * iv * iv * iv);
}
inline Jet2 operator/(const Jet2 &a, const Jet2 &b) { return a * inverse(b); }
inline Jet2 operator/(const Jet2 &a, double c) { return a * (1.0 / c); }
inline Jet2 operator/(double c, const Jet2 &b) { return inverse(b) * c; }

inline Jet2 sqrt(const Jet2 &a) {
    const double s = std::sqrt(a.v);
    return compose(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet2 exp(const Jet2 &a) {
    const double e = std::exp(a.v);
    return compose(a, e, e, e);
}
inline Jet2 abs(const Jet2 &a) { return a.v >= 0.0 ? a : -a; }

/// Extract the plain value of a scalar of any differentiation order.
inline double value(double x) { return x; }
inline double value(const Jet1 &x) { return x.v; }
inline double value(const Jet2 &x) { return x.v; }

/// Exact-match double overloads so unqualified calls in kernels templated
/// over the scalar type resolve without ambiguity.
inline double sqrt(double x) { return std::sqrt(x); }
inline double exp(double x) { return std::exp(x); }
inline double abs(double x) { return std::abs(x); }

}  // namespace shocktrack

#endif
