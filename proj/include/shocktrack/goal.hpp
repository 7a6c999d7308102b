#ifndef SHOCKTRACK_GOAL_HPP
#define SHOCKTRACK_GOAL_HPP

#include "shocktrack/assembly.hpp"
#include "shocktrack/krylov.hpp"

namespace shocktrack {

enum class ObjectiveMode { goal_oriented, residual_only };
enum class HessianModel { newton, gauss_newton };

struct GoalConfig {
    ObjectiveMode mode = ObjectiveMode::goal_oriented;
    HessianModel hessian = HessianModel::newton;
    double alpha = 0.0;  // mesh-distortion weight
    InnerSolver::Mode exact_solve = InnerSolver::Mode::gmres_ilu;
    InnerSolver::Mode hessian_solve = InnerSolver::Mode::gmres_ilu;
    int ilu_fill = 1;
    KrylovOptions adjoint{1e-13, 1e-13, 200, 2000};
};

/// F = 1/2 sum (psi_i R_i)^2 together with the augmented objective and the
/// functional-error estimate deltaJ = psi^T R.
struct IndicatorValue {
    double F = 0.0;
    double Ftilde = 0.0;
    double deltaJ = 0.0;
};
IndicatorValue indicator_value(const Eigen::VectorXd &psi, const Eigen::VectorXd &R,
                               double alpha, double f_msh);

/// Discrete adjoint R_U^T psi = -J_U^T at machine precision.
Eigen::VectorXd solve_adjoint(const InnerSolver &ru_solver, const Eigen::VectorXd &J_U);

/// Everything one optimizer iteration needs from the enriched space:
/// residual, adjoint, indicator, exact first derivatives and the matrices
/// entering the adjoint-derivative products.
struct GoalEvaluation {
    Eigen::VectorXd U;        // enriched field
    Eigen::VectorXd R;        // enriched residual
    Eigen::VectorXd psi;      // adjoint weights (ones in residual mode)
    Eigen::VectorXd eta;      // psi .* R
    Eigen::VectorXd z;        // psi .* eta
    double J = 0.0;           // functional value
    IndicatorValue value;
    double f_msh = 0.0;

    SpMat R_U, R_x;
    Eigen::VectorXd J_U;
    SpMat M_UU, M_Ux;         // J_UU + psi^T R_UU and J_Ux + psi^T R_Ux
    Eigen::VectorXd F_U, F_x; // column gradients of F (without the alpha term)
    Eigen::VectorXd fmsh_grad;
    SpMat fmsh_hess;

    InnerSolver exact_solver;    // machine-precision R_U solves (gradient side)
    InnerSolver hessian_solver;  // Hessian-side solves (may be the preconditioner)
};

/// Assemble the enriched-space state. With derivatives=false only the
/// pieces needed for the objective value are formed (line-search probes).
template <class Law>
void evaluate_goal(const Law &law, const Mesh &mesh, const Eigen::VectorXd &x,
                   const Space &fine, const Eigen::VectorXd &U,
                   const std::vector<FluxKind> &flux, const GoalConfig &cfg, bool derivatives,
                   GoalEvaluation &ev) {
    ev.U = U;
    ev.R = assemble_residual(law, mesh, x, fine, U, flux);

    if (cfg.mode == ObjectiveMode::goal_oriented) {
        const ResidualJacobians RJ = derivatives
            ? assemble_residual_jacobians(law, mesh, x, fine, U, flux)
            : ResidualJacobians{};
        if (derivatives) {
            ev.R_U = RJ.wrt_u;
            ev.R_x = RJ.wrt_x;
        } else {
            // the adjoint still needs R_U
            ev.R_U = assemble_residual_jacobians(law, mesh, x, fine, U, flux).wrt_u;
        }
        ev.exact_solver.build(ev.R_U, cfg.exact_solve, cfg.ilu_fill, cfg.adjoint);

        const FunctionalDerivatives JD = functional_derivatives(law, mesh, x, fine, U);
        ev.J = JD.value;
        ev.J_U = JD.wrt_u;
        ev.psi = solve_adjoint(ev.exact_solver, ev.J_U);

        if (derivatives) {
            const HessianBlocks psiR =
                assemble_weighted_hessian(law, mesh, x, fine, U, ev.psi, flux);
            ev.M_UU = JD.uu + psiR.uu;
            ev.M_Ux = JD.ux + psiR.ux;
            ev.hessian_solver.build(ev.R_U, cfg.hessian_solve, cfg.ilu_fill, cfg.adjoint);
        }
    } else {
        ev.psi = Eigen::VectorXd::Ones(ev.R.size());
        ev.J = 0.0;
        if (derivatives) {
            const ResidualJacobians RJ = assemble_residual_jacobians(law, mesh, x, fine, U, flux);
            ev.R_U = RJ.wrt_u;
            ev.R_x = RJ.wrt_x;
            ev.M_UU.resize(0, 0);
            ev.M_Ux.resize(0, 0);
            ev.exact_solver.build(ev.R_U, cfg.exact_solve, cfg.ilu_fill, cfg.adjoint);
            ev.hessian_solver.build(ev.R_U, cfg.hessian_solve, cfg.ilu_fill, cfg.adjoint);
        }
    }

    ev.eta = ev.psi.cwiseProduct(ev.R);
    ev.z = ev.psi.cwiseProduct(ev.eta);

    if (cfg.alpha != 0.0 || derivatives) {
        const int nq = quadrature_points(fine.p, mesh.q);
        if (derivatives)
            ev.f_msh = mesh_distortion_hessian(mesh, x, nq, ev.fmsh_grad, ev.fmsh_hess);
        else
            ev.f_msh = mesh_distortion(mesh, x, nq);
    } else {
        ev.f_msh = 0.0;
    }
    ev.value = indicator_value(ev.psi, ev.R, cfg.alpha, ev.f_msh);

    if (derivatives) {
        // F_U = R_U^T z - M_UU^T (R_U^{-1} g), g = R .* eta (adjoint
        // derivative terms enter through one extra machine-precision solve)
        if (cfg.mode == ObjectiveMode::goal_oriented) {
            const Eigen::VectorXd g = ev.R.cwiseProduct(ev.eta);
            Eigen::VectorXd wg;
            ev.exact_solver.solve(g, wg);
            ev.F_U = ev.R_U.transpose() * ev.z - ev.M_UU.transpose() * wg;
            ev.F_x = ev.R_x.transpose() * ev.z - ev.M_Ux.transpose() * wg;
        } else {
            ev.F_U = ev.R_U.transpose() * ev.z;
            ev.F_x = ev.R_x.transpose() * ev.z;
        }
    }
}

/// Hessian-vector products of F through the Eq.-style approximation that
/// drops the psi_Ux-bearing term: given directions (wU, wx) returns
/// (F_UU wU + F_Ux wx, F_xU wU + F_xx wx). Cz holds the z-weighted residual
/// contractions z^T R_{UU,Ux,xx}.
void goal_hessvec(const GoalEvaluation &ev, const HessianBlocks &Cz, HessianModel model,
                  ObjectiveMode mode, const Eigen::VectorXd &wU, const Eigen::VectorXd &wx,
                  Eigen::VectorXd &outU, Eigen::VectorXd &outx);

/// Cellwise |psi_k^T R_k| indicator for visualization.
Eigen::VectorXd cellwise_dwr(const Space &fine, const Eigen::VectorXd &psi,
                             const Eigen::VectorXd &R);

}  // namespace shocktrack

#endif
