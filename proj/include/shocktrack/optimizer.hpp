#ifndef SHOCKTRACK_OPTIMIZER_HPP
#define SHOCKTRACK_OPTIMIZER_HPP

#include <functional>
#include <string>

#include "shocktrack/control_map.hpp"
#include "shocktrack/goal.hpp"

namespace shocktrack {

struct OptimizerSettings {
    double mu = 0.01;       // augmented-Lagrangian penalty
    double eps_u0 = 0.0;
    double eps_s0 = 0.01;
    bool poisson_regularization = false;  // D = control-space stiffness
    double tol = 1e-10;     // on the full Lagrangian gradient
    int max_iters = 200;
    double armijo_c1 = 1e-4;
    int max_backtracks = 30;
    KrylovOptions kkt{1e-6, 0.0, 300, 3000};
    GoalConfig goal;
    int bfgs_memory = 20;
};

struct IterationRecord {
    int iter = 0;
    double grad_us_norm = 0.0;   // ||(grad_u L, grad_s L)||
    double residual_norm = 0.0;  // ||r||
    double objective = 0.0;      // F~
    double delta_j = 0.0;        // psi^T R
    double step_length = 0.0;
    double eps_u = 0.0, eps_s = 0.0;
    int kkt_iters = 0;
    double merit = 0.0;
    double grad_norm = 0.0;      // full ||grad L||
    double functional = 0.0;     // J(U, x)
};

struct OptimizationResult {
    enum class Status { converged, max_iterations, line_search_failure };
    Status status = Status::max_iterations;
    std::vector<IterationRecord> history;
    Eigen::VectorXd u, s, lambda;
    double eps_u = 0.0, eps_s = 0.0;
    std::string message;
};

/// Hessian-regularization schedule driven by the control step length:
/// halve below 0.01, double above 0.1, keep otherwise.
inline double update_regularization(double eps, double ps_norm) {
    if (ps_norm < 0.01) return 0.5 * eps;
    if (ps_norm > 0.1) return 2.0 * eps;
    return eps;
}

/// Experimental floor on the control regularization.
inline double g_eps_floor = 0.0;
inline int g_eps_mode = 0;  // 1: floor at the current gradient norm

/// Scalar continuous stiffness matrix on the mesh nodes (the Poisson
/// regularization operator), projected onto the control space as
/// A^T (K (x) I_2) A.
SpMat control_space_stiffness(const Mesh &mesh, const Eigen::VectorXd &x, const ControlMap &cm);

/// Full-space optimizer: simultaneous Newton on (u, s, lambda) with the
/// regularized KKT system, the P2 block preconditioner and backtracking on
/// the augmented Lagrangian.
template <class Law>
class FullSpaceOptimizer {
public:
    FullSpaceOptimizer(const Law &law, Mesh &mesh, Space coarse, Space fine, ControlMap cmap,
                       std::vector<FluxKind> flux, OptimizerSettings settings)
        : law_(law),
          mesh_(mesh),
          coarse_(coarse),
          fine_(fine),
          cmap_(std::move(cmap)),
          flux_(std::move(flux)),
          set_(std::move(settings)),
          Ih_(interpolation_matrix(coarse, fine)),
          bz_(cmap_.n_controls(), settings.bfgs_memory) {
        if (set_.poisson_regularization)
            D_ = control_space_stiffness(mesh_, mesh_.coords, cmap_);
    }

    /// Optional hook run after each accepted mesh update (high-order node
    /// recentering); the control-map offset absorbs the displacement.
    std::function<void(Mesh &)> post_update;
    /// Per-iteration observer (logging, snapshots).
    std::function<void(const IterationRecord &)> on_iteration;

    OptimizationResult run(Eigen::VectorXd u, Eigen::VectorXd s);

    // -- exposed for verification ------------------------------------------
    void evaluate(const Eigen::VectorXd &u, const Eigen::VectorXd &s, bool derivatives = true);
    void init_multiplier();
    void compute_gradient();
    void assemble_contractions();
    Eigen::VectorXd kkt_apply(const Eigen::VectorXd &v) const;
    Eigen::VectorXd kkt_rhs() const;
    Eigen::VectorXd solve_kkt(KrylovStats &stats);
    double merit_value(const Eigen::VectorXd &u, const Eigen::VectorXd &s,
                       const Eigen::VectorXd &lambda, double mu_hat, bool &feasible);
    double line_search(const Eigen::VectorXd &p, double &merit_out);

    int n_u() const { return coarse_.n_dofs(); }
    int n_s() const { return cmap_.n_controls(); }
    int n_total() const { return 2 * n_u() + n_s(); }

    Eigen::VectorXd u_, s_, lambda_;
    Eigen::VectorXd g_u, g_s, g_lambda;
    Eigen::VectorXd r_;
    SpMat r_u, r_x;
    GoalEvaluation ev_;
    HessianBlocks C_lambda, C_z;
    double eps_u_ = 0.0, eps_s_ = 0.0;
    InnerSolver ru_solver_;
    SpMat D_;

private:
    const Law &law_;
    Mesh &mesh_;
    Space coarse_, fine_;
    ControlMap cmap_;
    std::vector<FluxKind> flux_;
    OptimizerSettings set_;
    SpMat Ih_;
    LbfgsHessian bz_;
};

template <class Law>
void FullSpaceOptimizer<Law>::evaluate(const Eigen::VectorXd &u, const Eigen::VectorXd &s,
                                       bool derivatives) {
    u_ = u;
    s_ = s;
    const Eigen::VectorXd x = cmap_.apply(s);
    mesh_.coords = x;
    evaluate_goal(law_, mesh_, x, fine_, Eigen::VectorXd(Ih_ * u), flux_, set_.goal, derivatives,
                  ev_);
    r_ = assemble_residual(law_, mesh_, x, coarse_, u, flux_);
    if (derivatives) {
        const ResidualJacobians RJ =
            assemble_residual_jacobians(law_, mesh_, x, coarse_, u, flux_);
        r_u = RJ.wrt_u;
        r_x = RJ.wrt_x;
        ru_solver_.build(r_u, set_.goal.exact_solve, set_.goal.ilu_fill, set_.goal.adjoint);
    }
}

template <class Law>
void FullSpaceOptimizer<Law>::init_multiplier() {
    // lambda = -r_u^{-T} (I_h^T F_U) zeroes the u-block of the gradient
    const Eigen::VectorXd Ftu = Ih_.transpose() * ev_.F_U;
    Eigen::VectorXd lam;
    ru_solver_.solve_transpose(Ftu, lam);
    lambda_ = -lam;
}

template <class Law>
void FullSpaceOptimizer<Law>::compute_gradient() {
    const Eigen::VectorXd Fx_total =
        ev_.F_x + set_.goal.alpha * ev_.fmsh_grad;
    g_u = Ih_.transpose() * ev_.F_U + r_u.transpose() * lambda_;
    g_s = cmap_.apply_transpose(Fx_total + r_x.transpose() * lambda_);
    g_lambda = r_;
}

template <class Law>
void FullSpaceOptimizer<Law>::assemble_contractions() {
    if (set_.goal.hessian == HessianModel::gauss_newton) {
        C_lambda = HessianBlocks{};
        C_z = HessianBlocks{};
        return;
    }
    const Eigen::VectorXd x = cmap_.apply(s_);
    C_lambda = assemble_weighted_hessian(law_, mesh_, x, coarse_, u_, lambda_, flux_);
    C_z = assemble_weighted_hessian(law_, mesh_, x, fine_, ev_.U, ev_.z, flux_);
}

template <class Law>
Eigen::VectorXd FullSpaceOptimizer<Law>::kkt_apply(const Eigen::VectorXd &v) const {
    const int nu = coarse_.n_dofs(), ns = cmap_.n_controls();
    const auto du = v.segment(0, nu);
    const auto ds = v.segment(nu, ns);
    const auto dl = v.segment(nu + ns, nu);
    const bool newton = set_.goal.hessian == HessianModel::newton;

    const Eigen::VectorXd wU = Ih_ * du;
    const Eigen::VectorXd wx = cmap_.A * ds;

    Eigen::VectorXd FU, Fx;
    goal_hessvec(ev_, C_z, set_.goal.hessian, set_.goal.mode, wU, wx, FU, Fx);
    if (set_.goal.alpha != 0.0) Fx += set_.goal.alpha * (ev_.fmsh_hess * wx);

    Eigen::VectorXd out(v.size());
    Eigen::VectorXd row_u = Ih_.transpose() * FU + eps_u_ * du + r_u.transpose() * dl;
    Eigen::VectorXd row_x = Fx + r_x.transpose() * dl;
    if (newton) {
        row_u += C_lambda.uu * du + C_lambda.ux * wx;
        row_x += C_lambda.ux.transpose() * du + C_lambda.xx * wx;
    }
    Eigen::VectorXd row_s = cmap_.apply_transpose(row_x);
    if (D_.nonZeros() > 0) row_s += eps_s_ * (D_ * ds);
    else row_s += eps_s_ * ds;

    out.segment(0, nu) = row_u;
    out.segment(nu, ns) = row_s;
    out.segment(nu + ns, nu) = r_u * du + r_x * wx;
    return out;
}

template <class Law>
Eigen::VectorXd FullSpaceOptimizer<Law>::kkt_rhs() const {
    const int nu = coarse_.n_dofs(), ns = cmap_.n_controls();
    Eigen::VectorXd rhs(2 * nu + ns);
    rhs.segment(0, nu) = -g_u;
    rhs.segment(nu, ns) = -g_s;
    rhs.segment(nu + ns, nu) = -g_lambda;
    return rhs;
}

template <class Law>
Eigen::VectorXd FullSpaceOptimizer<Law>::solve_kkt(KrylovStats &stats) {
    const int nu = coarse_.n_dofs(), ns = cmap_.n_controls();
    const SpMat rs = r_x * cmap_.A;
    P2Preconditioner p2{&ru_solver_.preconditioner(), &rs, &bz_};

    const ApplyFn A = [this](const Eigen::VectorXd &v, Eigen::VectorXd &o) { o = kkt_apply(v); };
    const ApplyFn M = [&p2](const Eigen::VectorXd &v, Eigen::VectorXd &o) {
        p2.apply_inverse(v, o);
    };
    Eigen::VectorXd p = Eigen::VectorXd::Zero(2 * nu + ns);
    stats = fgmres(2 * nu + ns, A, kkt_rhs(), p, set_.kkt, M);
    if (!stats.converged) {
        // steepest-descent-like fallback, flagged by the caller
        p.segment(0, nu) = -g_u;
        p.segment(nu, ns) = -bz_.apply_inverse(g_s);
        p.segment(nu + ns, nu) = -g_lambda;
    }
    return p;
}

template <class Law>
double FullSpaceOptimizer<Law>::merit_value(const Eigen::VectorXd &u, const Eigen::VectorXd &s,
                                            const Eigen::VectorXd &lambda, double mu_hat,
                                            bool &feasible) {
    feasible = false;
    const Eigen::VectorXd x = cmap_.apply(s);
    const std::vector<int> nqs = {quadrature_points(coarse_.p, mesh_.q),
                                  quadrature_points(fine_.p, mesh_.q)};
    if (!mesh_validity(mesh_, x, nqs)) return 0.0;
    const Eigen::VectorXd U = Ih_ * u;
    if (!states_admissible(law_, mesh_, x, fine_, U)) return 0.0;
    Eigen::VectorXd rt;
    GoalEvaluation evt;
    try {
        const Eigen::VectorXd saved = mesh_.coords;
        mesh_.coords = x;
        evaluate_goal(law_, mesh_, x, fine_, U, flux_, set_.goal, false, evt);
        rt = assemble_residual(law_, mesh_, x, coarse_, u, flux_);
        mesh_.coords = saved;
    } catch (const AssemblyError &) {
        return 0.0;
    } catch (const std::runtime_error &) {
        return 0.0;  // inner solve failure on a bad probe state
    }
    feasible = true;
    return evt.value.Ftilde + lambda.dot(rt) + 0.5 * mu_hat * rt.squaredNorm();
}

template <class Law>
double FullSpaceOptimizer<Law>::line_search(const Eigen::VectorXd &p, double &merit_out) {
    const int nu = coarse_.n_dofs(), ns = cmap_.n_controls();
    const auto pu = p.segment(0, nu);
    const auto ps = p.segment(nu, ns);
    const auto pl = p.segment(nu + ns, nu);

    const double mu_hat =
        std::max(1.0, set_.mu / std::max(g_s.norm(), 1e-300));
    bool feas = false;
    const double m0 = merit_value(u_, s_, lambda_, mu_hat, feas);
    if (!feas) return -1.0;

    // directional derivative of the augmented Lagrangian
    const Eigen::VectorXd rur = r_u.transpose() * r_;
    const Eigen::VectorXd rxr = cmap_.apply_transpose(r_x.transpose() * r_);
    const double dd = (g_u + mu_hat * rur).dot(pu) + (g_s + mu_hat * rxr).dot(ps) +
                      g_lambda.dot(pl);

    double gamma = 1.0;
    for (int k = 0; k <= set_.max_backtracks; ++k, gamma *= 0.5) {
        const double mt = merit_value(u_ + gamma * pu, s_ + gamma * ps, lambda_ + gamma * pl,
                                      mu_hat, feas);
        if (!feas) continue;
        if (mt <= m0 + set_.armijo_c1 * gamma * dd) {
            merit_out = mt;
            return gamma;
        }
    }
    return -1.0;
}

template <class Law>
OptimizationResult FullSpaceOptimizer<Law>::run(Eigen::VectorXd u, Eigen::VectorXd s) {
    OptimizationResult res;
    eps_u_ = set_.eps_u0;
    eps_s_ = set_.eps_s0;
    bz_.reset();

    evaluate(u, s, true);
    init_multiplier();
    compute_gradient();

    auto record = [&](int iter, double gamma, int kkt_iters, double merit) {
        IterationRecord rec;
        rec.iter = iter;
        rec.grad_us_norm = std::sqrt(g_u.squaredNorm() + g_s.squaredNorm());
        rec.residual_norm = r_.norm();
        rec.objective = ev_.value.Ftilde;
        rec.delta_j = ev_.value.deltaJ;
        rec.step_length = gamma;
        rec.eps_u = eps_u_;
        rec.eps_s = eps_s_;
        rec.kkt_iters = kkt_iters;
        rec.merit = merit;
        rec.grad_norm = std::sqrt(g_u.squaredNorm() + g_s.squaredNorm() + r_.squaredNorm());
        rec.functional = ev_.J;
        res.history.push_back(rec);
        if (on_iteration) on_iteration(rec);
    };
    record(0, 0.0, 0, 0.0);

    for (int iter = 1; iter <= set_.max_iters; ++iter) {
        if (res.history.back().grad_norm <= set_.tol) {
            res.status = OptimizationResult::Status::converged;
            break;
        }
        assemble_contractions();
        KrylovStats kkt_stats;
        const Eigen::VectorXd p = solve_kkt(kkt_stats);
        eps_u_ = update_regularization(eps_u_, p.segment(n_u(), n_s()).norm());
        double floor = g_eps_floor;
        if (g_eps_mode == 1)
            floor = std::max(floor, std::min(set_.eps_s0, res.history.back().grad_norm));
        eps_s_ = std::max(update_regularization(eps_s_, p.segment(n_u(), n_s()).norm()), floor);

        double merit = 0.0;
        const double gamma = line_search(p, merit);
        if (gamma < 0.0) {
            res.status = OptimizationResult::Status::line_search_failure;
            res.message = "no admissible step length";
            break;
        }

        const Eigen::VectorXd g_s_old = g_s;
        u_ += gamma * p.segment(0, n_u());
        s_ += gamma * p.segment(n_u(), n_s());
        lambda_ += gamma * p.segment(n_u() + n_s(), n_u());

        // mesh update plus the post-step node placement hook; the offset
        // absorbs displacements of non-control coordinates
        Eigen::VectorXd x = cmap_.apply(s_);
        mesh_.coords = x;
        if (post_update) {
            post_update(mesh_);
            cmap_.fixed_offset += mesh_.coords - x;
        }

        evaluate(u_, s_, true);
        compute_gradient();
        bz_.update(gamma * p.segment(n_u(), n_s()), g_s - g_s_old);
        record(iter, gamma, kkt_stats.iterations, merit);

        if (res.history.back().grad_norm <= set_.tol) {
            res.status = OptimizationResult::Status::converged;
            break;
        }
    }

    res.u = u_;
    res.s = s_;
    res.lambda = lambda_;
    res.eps_u = eps_u_;
    res.eps_s = eps_s_;
    return res;
}

}  // namespace shocktrack

#endif
