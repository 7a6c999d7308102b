#ifndef SHOCKTRACK_KRYLOV_HPP
#define SHOCKTRACK_KRYLOV_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <deque>
#include <functional>
#include <memory>

namespace shocktrack {

using SpMat = Eigen::SparseMatrix<double>;
using ApplyFn = std::function<void(const Eigen::VectorXd &, Eigen::VectorXd &)>;

struct KrylovOptions {
    double rtol = 1e-13;
    double atol = 0.0;
    int restart = 200;
    int max_iters = 2000;
};

struct KrylovStats {
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

/// Restarted GMRES with modified Gram-Schmidt and optional right
/// preconditioning. Converged when ||b - A x|| <= max(atol, rtol*||b||).
KrylovStats gmres(int n, const ApplyFn &A, const Eigen::VectorXd &b, Eigen::VectorXd &x,
                  const KrylovOptions &opts, const ApplyFn *right_precond = nullptr);

/// Flexible GMRES: the preconditioner may change between iterations
/// (inexact inner solves allowed).
KrylovStats fgmres(int n, const ApplyFn &A, const Eigen::VectorXd &b, Eigen::VectorXd &x,
                   const KrylovOptions &opts, const ApplyFn &right_precond);

/// Incomplete LU factorization with level-of-fill, plus the transposed
/// triangular solves needed by adjoint systems.
class IluPreconditioner {
public:
    void factor(const SpMat &A, int fill_level);
    bool ok() const { return ok_; }

    void solve(const Eigen::VectorXd &b, Eigen::VectorXd &x) const;
    void solve_transpose(const Eigen::VectorXd &b, Eigen::VectorXd &x) const;
    void multiply(const Eigen::VectorXd &x, Eigen::VectorXd &y) const;            // L U x
    void multiply_transpose(const Eigen::VectorXd &x, Eigen::VectorXd &y) const;  // (LU)^T x

private:
    SpMat L_, U_, Lt_, Ut_;
    bool ok_ = false;
};

/// Approximate inverse of a residual Jacobian (and its transpose). ILU with
/// an escalation ladder: requested fill level, then a stronger level, then
/// an exact sparse factorization.
class ResidualPreconditioner {
public:
    void build(const SpMat &A, int fill_level);
    bool direct() const { return direct_; }

    void apply(const Eigen::VectorXd &v, Eigen::VectorXd &out) const;
    void apply_transpose(const Eigen::VectorXd &v, Eigen::VectorXd &out) const;
    // Forward action of the preconditioning operator r~_u itself.
    void forward(const Eigen::VectorXd &v, Eigen::VectorXd &out) const;
    void forward_transpose(const Eigen::VectorXd &v, Eigen::VectorXd &out) const;

private:
    IluPreconditioner ilu_;
    std::shared_ptr<Eigen::SparseLU<SpMat>> lu_, lut_;
    SpMat A_, At_;
    bool direct_ = false;
};

/// Linear solver around a sparse matrix: preconditioned GMRES at machine
/// precision (default), an exact sparse factorization, or a single
/// preconditioner application (the Hessian-side economy mode).
class InnerSolver {
public:
    enum class Mode { gmres_ilu, direct, precond_only };

    void build(const SpMat &A, Mode mode, int fill_level, const KrylovOptions &opts);

    void solve(const Eigen::VectorXd &b, Eigen::VectorXd &x) const;
    void solve_transpose(const Eigen::VectorXd &b, Eigen::VectorXd &x) const;

    const ResidualPreconditioner &preconditioner() const { return precond_; }
    int last_iterations() const { return last_iters_; }

private:
    SpMat A_, At_;
    ResidualPreconditioner precond_;
    Mode mode_ = Mode::gmres_ilu;
    KrylovOptions opts_;
    mutable int last_iters_ = 0;
};

/// Limited-memory BFGS model of the reduced Hessian B_z: inverse application
/// by the two-loop recursion, forward application by the compact
/// representation. Updates with non-positive curvature are skipped.
class LbfgsHessian {
public:
    explicit LbfgsHessian(int n, int memory = 20) : n_(n), memory_(memory) {}

    void update(const Eigen::VectorXd &step, const Eigen::VectorXd &grad_change);
    void reset() { pairs_.clear(); gamma_ = 1.0; }

    Eigen::VectorXd apply_inverse(const Eigen::VectorXd &v) const;  // B^{-1} v
    Eigen::VectorXd apply(const Eigen::VectorXd &v) const;          // B v
    int n_pairs() const { return int(pairs_.size()); }
    int dim() const { return n_; }

private:
    int n_;
    int memory_;
    double gamma_ = 1.0;  // H0 = gamma I
    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs_;
};

/// Block preconditioner for the full-space KKT system, built from the
/// residual-Jacobian preconditioner r~_u, the control Jacobian r_s and the
/// quasi-Newton reduced Hessian B_z:
///   P2 = [0 0 r~_u^T; 0 B_z r_s^T; r~_u r_s 0]
/// applied through two triangular sweeps.
class P2Preconditioner {
public:
    const ResidualPreconditioner *ru = nullptr;
    const SpMat *rs = nullptr;  // n_u x n_s
    const LbfgsHessian *bz = nullptr;

    // in/out are stacked (u, s, lambda) vectors
    void apply_inverse(const Eigen::VectorXd &in, Eigen::VectorXd &out) const;
    void apply(const Eigen::VectorXd &in, Eigen::VectorXd &out) const;
};

}  // namespace shocktrack

#endif
