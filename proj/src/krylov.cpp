#include "shocktrack/krylov.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace shocktrack {

namespace {

// One GMRES/FGMRES cycle. For FGMRES the preconditioned directions Z are
// stored; for GMRES with a fixed right preconditioner the update direction
// is reconstructed as M(V y).
KrylovStats krylov_cycles(int n, const ApplyFn &A, const Eigen::VectorXd &b, Eigen::VectorXd &x,
                          const KrylovOptions &opts, const ApplyFn *precond, bool flexible) {
    KrylovStats stats;
    if (x.size() != n) x = Eigen::VectorXd::Zero(n);
    const double bnorm = b.norm();
    const double tol = std::max(opts.atol, opts.rtol * bnorm);
    if (bnorm == 0.0) {
        x.setZero();
        stats.converged = true;
        return stats;
    }

    const int m = std::min(opts.restart, n);
    Eigen::MatrixXd V(n, m + 1), Z;
    if (flexible) Z.resize(n, m);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs(m), sn(m), g(m + 1), w(n), z(n);

    while (stats.iterations < opts.max_iters) {
        A(x, w);
        Eigen::VectorXd r = b - w;
        double beta = r.norm();
        stats.residual = beta;
        if (beta <= tol) {
            stats.converged = true;
            return stats;
        }
        V.col(0) = r / beta;
        g.setZero();
        g[0] = beta;

        int k = 0;
        for (; k < m && stats.iterations < opts.max_iters; ++k, ++stats.iterations) {
            if (precond) {
                (*precond)(V.col(k), z);
            } else {
                z = V.col(k);
            }
            if (flexible) Z.col(k) = z;
            A(z, w);
            for (int i = 0; i <= k; ++i) {
                H(i, k) = V.col(i).dot(w);
                w -= H(i, k) * V.col(i);
            }
            const double hnext = w.norm();
            H(k + 1, k) = hnext;
            if (hnext > 1e-300) V.col(k + 1) = w / hnext;

            // apply accumulated Givens rotations to the new column
            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
                H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
                H(i, k) = t;
            }
            const double denom = std::hypot(H(k, k), H(k + 1, k));
            cs[k] = H(k, k) / denom;
            sn[k] = H(k + 1, k) / denom;
            H(k, k) = denom;
            H(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            stats.residual = std::abs(g[k + 1]);
            if (stats.residual <= tol || hnext <= 1e-300) {  // happy breakdown ends the cycle
                ++k;
                ++stats.iterations;
                break;
            }
        }

        // solve the small triangular system and update x
        Eigen::VectorXd y = Eigen::VectorXd::Zero(k);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
            y[i] = s / H(i, i);
        }
        if (flexible) {
            x += Z.leftCols(k) * y;
        } else if (precond) {
            Eigen::VectorXd vy = V.leftCols(k) * y;
            (*precond)(vy, z);
            x += z;
        } else {
            x += V.leftCols(k) * y;
        }

        A(x, w);
        stats.residual = (b - w).norm();
        if (stats.residual <= tol) {
            stats.converged = true;
            return stats;
        }
    }
    return stats;
}

}  // namespace

KrylovStats gmres(int n, const ApplyFn &A, const Eigen::VectorXd &b, Eigen::VectorXd &x,
                  const KrylovOptions &opts, const ApplyFn *right_precond) {
    return krylov_cycles(n, A, b, x, opts, right_precond, false);
}

KrylovStats fgmres(int n, const ApplyFn &A, const Eigen::VectorXd &b, Eigen::VectorXd &x,
                   const KrylovOptions &opts, const ApplyFn &right_precond) {
    return krylov_cycles(n, A, b, x, opts, &right_precond, true);
}

void IluPreconditioner::factor(const SpMat &A, int fill_level) {
    ok_ = false;
    const int n = int(A.rows());
    // working rows as (col -> (value, level)) maps; IKJ elimination
    std::vector<std::map<int, std::pair<double, int>>> rows(n);
    for (int i = 0; i < n; ++i)
        for (SpMat::InnerIterator it(A, i); it; ++it)
            rows[it.row()][int(it.col())] = {it.value(), 0};
    // make sure the diagonal exists
    for (int i = 0; i < n; ++i) rows[i].emplace(i, std::make_pair(0.0, 0));

    std::vector<double> diag(n, 0.0);
    for (int i = 0; i < n; ++i) {
        auto &row = rows[i];
        for (auto it = row.begin(); it != row.end() && it->first < i; ++it) {
            const int k = it->first;
            if (diag[k] == 0.0) return;
            it->second.first /= diag[k];
            const double lik = it->second.first;
            const int lev_ik = it->second.second;
            for (const auto &[j, uj] : rows[k]) {
                if (j <= k) continue;
                const int lev = lev_ik + uj.second + 1;
                if (lev > fill_level) continue;
                auto f = row.find(j);
                if (f == row.end()) {
                    row[j] = {-lik * uj.first, lev};
                } else {
                    f->second.first -= lik * uj.first;
                    f->second.second = std::min(f->second.second, lev);
                }
            }
        }
        const auto d = row.find(i);
        if (d == row.end() || std::abs(d->second.first) < 1e-300) return;
        diag[i] = d->second.first;
    }

    std::vector<Eigen::Triplet<double>> lt, ut;
    for (int i = 0; i < n; ++i) {
        lt.emplace_back(i, i, 1.0);
        for (const auto &[j, v] : rows[i]) {
            if (j < i) lt.emplace_back(i, j, v.first);
            else ut.emplace_back(i, j, v.first);
        }
    }
    L_.resize(n, n);
    U_.resize(n, n);
    L_.setFromTriplets(lt.begin(), lt.end());
    U_.setFromTriplets(ut.begin(), ut.end());
    Lt_ = L_.transpose();
    Ut_ = U_.transpose();
    ok_ = true;
}

void IluPreconditioner::solve(const Eigen::VectorXd &b, Eigen::VectorXd &x) const {
    x = L_.triangularView<Eigen::UnitLower>().solve(b);
    x = U_.triangularView<Eigen::Upper>().solve(x);
}

void IluPreconditioner::solve_transpose(const Eigen::VectorXd &b, Eigen::VectorXd &x) const {
    x = Ut_.triangularView<Eigen::Lower>().solve(b);
    x = Lt_.triangularView<Eigen::UnitUpper>().solve(x);
}

void IluPreconditioner::multiply(const Eigen::VectorXd &x, Eigen::VectorXd &y) const {
    y = L_ * (U_ * x);
}

void IluPreconditioner::multiply_transpose(const Eigen::VectorXd &x, Eigen::VectorXd &y) const {
    y = Ut_ * (Lt_ * x);
}

void ResidualPreconditioner::build(const SpMat &A, int fill_level) {
    A_ = A;
    At_ = A.transpose();
    direct_ = false;
    // escalation ladder: requested level, one stronger, exact factorization;
    // a negative level requests the exact factorization outright
    if (fill_level >= 0) {
        ilu_.factor(A, fill_level);
        if (!ilu_.ok()) ilu_.factor(A, fill_level + 2);
    }
    if (!ilu_.ok()) {
        lu_ = std::make_shared<Eigen::SparseLU<SpMat>>();
        lu_->compute(A_);
        lut_ = std::make_shared<Eigen::SparseLU<SpMat>>();
        lut_->compute(At_);
        if (lu_->info() != Eigen::Success || lut_->info() != Eigen::Success)
            throw std::runtime_error("preconditioner: factorization failed");
        direct_ = true;
    }
}

void ResidualPreconditioner::apply(const Eigen::VectorXd &v, Eigen::VectorXd &out) const {
    if (direct_) out = lu_->solve(v);
    else ilu_.solve(v, out);
}

void ResidualPreconditioner::apply_transpose(const Eigen::VectorXd &v, Eigen::VectorXd &out) const {
    if (direct_) out = lut_->solve(v);
    else ilu_.solve_transpose(v, out);
}

void ResidualPreconditioner::forward(const Eigen::VectorXd &v, Eigen::VectorXd &out) const {
    if (direct_) out = A_ * v;
    else ilu_.multiply(v, out);
}

void ResidualPreconditioner::forward_transpose(const Eigen::VectorXd &v,
                                               Eigen::VectorXd &out) const {
    if (direct_) out = At_ * v;
    else ilu_.multiply_transpose(v, out);
}

void InnerSolver::build(const SpMat &A, Mode mode, int fill_level, const KrylovOptions &opts) {
    A_ = A;
    At_ = A.transpose();
    mode_ = mode;
    opts_ = opts;
    if (mode == Mode::direct) {
        precond_.build(A, -1);  // forces the exact factorization path
    } else {
        precond_.build(A, fill_level);
    }
}

void InnerSolver::solve(const Eigen::VectorXd &b, Eigen::VectorXd &x) const {
    if (mode_ == Mode::precond_only) {
        precond_.apply(b, x);
        return;
    }
    if (mode_ == Mode::direct || precond_.direct()) {
        precond_.apply(b, x);
        last_iters_ = 1;
        return;
    }
    x.setZero(b.size());
    const ApplyFn A = [this](const Eigen::VectorXd &v, Eigen::VectorXd &out) { out = A_ * v; };
    const ApplyFn M = [this](const Eigen::VectorXd &v, Eigen::VectorXd &out) {
        precond_.apply(v, out);
    };
    const KrylovStats st = gmres(int(A_.rows()), A, b, x, opts_, &M);
    last_iters_ = st.iterations;
    if (!st.converged)
        throw std::runtime_error("inner linear solve failed to converge: residual " +
                                 std::to_string(st.residual));
}

void InnerSolver::solve_transpose(const Eigen::VectorXd &b, Eigen::VectorXd &x) const {
    if (mode_ == Mode::precond_only) {
        precond_.apply_transpose(b, x);
        return;
    }
    if (mode_ == Mode::direct || precond_.direct()) {
        precond_.apply_transpose(b, x);
        last_iters_ = 1;
        return;
    }
    x.setZero(b.size());
    const ApplyFn A = [this](const Eigen::VectorXd &v, Eigen::VectorXd &out) { out = At_ * v; };
    const ApplyFn M = [this](const Eigen::VectorXd &v, Eigen::VectorXd &out) {
        precond_.apply_transpose(v, out);
    };
    const KrylovStats st = gmres(int(A_.rows()), A, b, x, opts_, &M);
    last_iters_ = st.iterations;
    if (!st.converged)
        throw std::runtime_error("inner transpose solve failed to converge: residual " +
                                 std::to_string(st.residual));
}

void LbfgsHessian::update(const Eigen::VectorXd &step, const Eigen::VectorXd &grad_change) {
    const double sy = step.dot(grad_change);
    if (sy <= 1e-12 * step.norm() * grad_change.norm()) return;  // curvature safeguard
    pairs_.emplace_back(step, grad_change);
    if (int(pairs_.size()) > memory_) pairs_.pop_front();
    gamma_ = sy / grad_change.squaredNorm();
}

Eigen::VectorXd LbfgsHessian::apply_inverse(const Eigen::VectorXd &v) const {
    // standard two-loop recursion with H0 = gamma I
    Eigen::VectorXd q = v;
    const int k = int(pairs_.size());
    std::vector<double> alpha(k);
    for (int i = k - 1; i >= 0; --i) {
        const auto &[s, y] = pairs_[i];
        alpha[i] = s.dot(q) / s.dot(y);
        q -= alpha[i] * y;
    }
    q *= gamma_;
    for (int i = 0; i < k; ++i) {
        const auto &[s, y] = pairs_[i];
        const double beta = y.dot(q) / s.dot(y);
        q += (alpha[i] - beta) * s;
    }
    return q;
}

Eigen::VectorXd LbfgsHessian::apply(const Eigen::VectorXd &v) const {
    // compact representation: B = B0 - [B0 S, Y] W^{-1} [B0 S, Y]^T with
    // W = [[S^T B0 S, L], [L^T, -D]], B0 = gamma^{-1} I
    const int k = int(pairs_.size());
    if (k == 0) return v / gamma_;
    const double b0 = 1.0 / gamma_;
    Eigen::MatrixXd S(n_, k), Y(n_, k);
    for (int i = 0; i < k; ++i) {
        S.col(i) = pairs_[i].first;
        Y.col(i) = pairs_[i].second;
    }
    const Eigen::MatrixXd StS = S.transpose() * S;
    const Eigen::MatrixXd StY = S.transpose() * Y;
    Eigen::MatrixXd W(2 * k, 2 * k);
    W.topLeftCorner(k, k) = b0 * StS;
    Eigen::MatrixXd Lm = StY;  // strictly lower part of S^T Y
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) Lm(i, j) = 0.0;
    W.topRightCorner(k, k) = Lm;
    W.bottomLeftCorner(k, k) = Lm.transpose();
    W.bottomRightCorner(k, k) = (-StY.diagonal()).asDiagonal();

    Eigen::VectorXd rhs(2 * k);
    rhs.head(k) = b0 * (S.transpose() * v);
    rhs.tail(k) = Y.transpose() * v;
    const Eigen::VectorXd sol = W.ldlt().solve(rhs);
    return b0 * v - b0 * (S * sol.head(k)) - Y * sol.tail(k);
}

void P2Preconditioner::apply_inverse(const Eigen::VectorXd &in, Eigen::VectorXd &out) const {
    const int nu = int(rs->rows()), ns = int(rs->cols());
    const auto bu = in.segment(0, nu);
    const auto bs = in.segment(nu, ns);
    const auto bl = in.segment(nu + ns, nu);
    out.resize(2 * nu + ns);

    Eigen::VectorXd pl(nu), pu(nu);
    ru->apply_transpose(bu, pl);
    const Eigen::VectorXd ps = bz->apply_inverse(bs - rs->transpose() * pl);
    ru->apply(bl - (*rs) * ps, pu);
    out.segment(0, nu) = pu;
    out.segment(nu, ns) = ps;
    out.segment(nu + ns, nu) = pl;
}

void P2Preconditioner::apply(const Eigen::VectorXd &in, Eigen::VectorXd &out) const {
    const int nu = int(rs->rows()), ns = int(rs->cols());
    const auto pu = in.segment(0, nu);
    const auto ps = in.segment(nu, ns);
    const auto pl = in.segment(nu + ns, nu);
    out.resize(2 * nu + ns);

    Eigen::VectorXd t(nu);
    ru->forward_transpose(pl, t);
    out.segment(0, nu) = t;
    out.segment(nu, ns) = bz->apply(ps) + rs->transpose() * pl;
    ru->forward(pu, t);
    out.segment(nu + ns, nu) = t + (*rs) * ps;
}

}  // namespace shocktrack
