#include "shocktrack/basis.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace shocktrack {

namespace {

// Legendre P_n(x) and derivative on [-1,1] by recurrence.
std::pair<double, double> legendre(int n, double x) {
    double p0 = 1.0, p1 = x;
    if (n == 0) return {1.0, 0.0};
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

}  // namespace

Quad1D gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    Quad1D q;
    q.points.resize(n);
    q.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Chebyshev initial guess, Newton to machine precision.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            auto [p, dp] = legendre(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        auto [p, dp] = legendre(n, x);
        (void)p;
        // Map from [-1,1] to [0,1]; points come out in descending order.
        q.points[n - 1 - i] = 0.5 * (x + 1.0);
        q.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return q;
}

Eigen::VectorXd equispaced_nodes(int degree) {
    if (degree == 0) return Eigen::VectorXd::Constant(1, 0.5);
    Eigen::VectorXd n(degree + 1);
    for (int i = 0; i <= degree; ++i) n[i] = double(i) / degree;
    return n;
}

Eigen::VectorXd gauss_lobatto_nodes(int degree) {
    if (degree == 0) return Eigen::VectorXd::Constant(1, 0.5);
    Eigen::VectorXd n(degree + 1);
    n[0] = 0.0;
    n[degree] = 1.0;
    // Interior nodes are roots of P'_degree on [-1,1].
    for (int i = 1; i < degree; ++i) {
        double x = std::cos(M_PI * i / degree);  // descending init
        for (int it = 0; it < 100; ++it) {
            auto [p, dp] = legendre(degree, x);
            // Newton on P'_n using P''_n from the Legendre ODE:
            // (1-x^2) P'' = 2x P' - n(n+1) P
            const double ddp = (2.0 * x * dp - degree * (degree + 1.0) * p) / (1.0 - x * x);
            const double dx = dp / ddp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        n[degree - i] = 0.5 * (x + 1.0);
    }
    return n;
}

void lagrange_eval(const Eigen::VectorXd &nodes, double t,
                   Eigen::VectorXd &values, Eigen::VectorXd &derivs) {
    const int n = int(nodes.size());
    values.resize(n);
    derivs.resize(n);
    for (int i = 0; i < n; ++i) {
        double v = 1.0;
        double d = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double w = 1.0 / (nodes[i] - nodes[j]);
            d = d * (t - nodes[j]) * w + v * w;
            v *= (t - nodes[j]) * w;
        }
        values[i] = v;
        derivs[i] = d;
    }
}

BasisTable tensor_basis_at(const Eigen::VectorXd &nodes1d,
                           const std::vector<Eigen::Vector2d> &pts) {
    const int n1 = int(nodes1d.size());
    const int nb = n1 * n1;
    const int np = int(pts.size());
    BasisTable t;
    t.val.resize(np, nb);
    t.d0.resize(np, nb);
    t.d1.resize(np, nb);
    Eigen::VectorXd v0, d0, v1, d1;
    for (int k = 0; k < np; ++k) {
        lagrange_eval(nodes1d, pts[k][0], v0, d0);
        lagrange_eval(nodes1d, pts[k][1], v1, d1);
        for (int j = 0; j < n1; ++j)
            for (int i = 0; i < n1; ++i) {
                const int b = j * n1 + i;
                t.val(k, b) = v0[i] * v1[j];
                t.d0(k, b) = d0[i] * v1[j];
                t.d1(k, b) = v0[i] * d1[j];
            }
    }
    return t;
}

Eigen::Vector2d RefQuadrature::face_point(int f, double t) {
    switch (f) {
        case 0: return {t, 0.0};
        case 1: return {1.0, t};
        case 2: return {1.0 - t, 1.0};
        default: return {0.0, 1.0 - t};
    }
}

RefQuadrature RefQuadrature::make(int nq) {
    RefQuadrature r;
    r.nq = nq;
    const Quad1D g = gauss_legendre(nq);
    r.vol_pts.reserve(nq * nq);
    r.vol_w.resize(nq * nq);
    for (int b = 0; b < nq; ++b)
        for (int a = 0; a < nq; ++a) {
            r.vol_pts.push_back({g.points[a], g.points[b]});
            r.vol_w[b * nq + a] = g.weights[a] * g.weights[b];
        }
    r.face_w = g.weights;
    for (int f = 0; f < 4; ++f) {
        r.face_pts[f].reserve(nq);
        for (int k = 0; k < nq; ++k) r.face_pts[f].push_back(face_point(f, g.points[k]));
    }
    r.ref_normal = {Eigen::Vector2d{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
    return r;
}

const ElementTables &ElementTables::get(int q, int p, int nq) {
    static std::map<std::tuple<int, int, int>, ElementTables> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_tuple(q, p, nq);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    ElementTables t;
    t.q = q;
    t.p = p;
    t.nq = nq;
    t.quad = RefQuadrature::make(nq);
    const Eigen::VectorXd gn = equispaced_nodes(q);
    const Eigen::VectorXd fn = gauss_lobatto_nodes(p);
    t.geom_vol = tensor_basis_at(gn, t.quad.vol_pts);
    t.field_vol = tensor_basis_at(fn, t.quad.vol_pts);
    const Quad1D g1 = gauss_legendre(nq);
    for (int f = 0; f < 4; ++f) {
        t.geom_face[f] = tensor_basis_at(gn, t.quad.face_pts[f]);
        t.field_face[f] = tensor_basis_at(fn, t.quad.face_pts[f]);
        std::vector<Eigen::Vector2d> rev;
        rev.reserve(nq);
        for (int k = 0; k < nq; ++k)
            rev.push_back(RefQuadrature::face_point(f, 1.0 - g1.points[k]));
        t.field_face_rev[f] = tensor_basis_at(fn, rev);
    }
    return cache.emplace(key, std::move(t)).first->second;
}

}  // namespace shocktrack
