#include "shocktrack/goal.hpp"

namespace shocktrack {

IndicatorValue indicator_value(const Eigen::VectorXd &psi, const Eigen::VectorXd &R,
                               double alpha, double f_msh) {
    IndicatorValue v;
    const Eigen::VectorXd eta = psi.cwiseProduct(R);
    v.F = 0.5 * eta.squaredNorm();
    v.deltaJ = eta.sum();
    v.Ftilde = v.F + alpha * f_msh;
    return v;
}

Eigen::VectorXd solve_adjoint(const InnerSolver &ru_solver, const Eigen::VectorXd &J_U) {
    Eigen::VectorXd psi;
    ru_solver.solve_transpose(-J_U, psi);
    return psi;
}

void goal_hessvec(const GoalEvaluation &ev, const HessianBlocks &Cz, HessianModel model,
                  ObjectiveMode mode, const Eigen::VectorXd &wU, const Eigen::VectorXd &wx,
                  Eigen::VectorXd &outU, Eigen::VectorXd &outx) {
    const bool adjoint_terms = (mode == ObjectiveMode::goal_oriented);
    const bool second_order = (model == HessianModel::newton);

    // direction through the residual: R_U wU + R_x wx
    const Eigen::VectorXd Rdir = ev.R_U * wU + ev.R_x * wx;

    // direction through the adjoint: psi_U wU + psi_x wx = -R_U^{-T}(M wU + M wx)
    Eigen::VectorXd psidir = Eigen::VectorXd::Zero(ev.R.size());
    if (adjoint_terms) {
        const Eigen::VectorXd mrhs = ev.M_UU * wU + ev.M_Ux * wx;
        ev.hessian_solver.solve_transpose(mrhs, psidir);
        psidir = -psidir;
    }

    const Eigen::VectorXd etadir = ev.R.cwiseProduct(psidir) + ev.psi.cwiseProduct(Rdir);

    // Gauss-Newton part: eta_dot^T eta_dot through the transposes
    Eigen::VectorXd y = ev.R.cwiseProduct(etadir);
    if (second_order) y += ev.eta.cwiseProduct(Rdir);

    outU = ev.R_U.transpose() * ev.psi.cwiseProduct(etadir);
    outx = ev.R_x.transpose() * ev.psi.cwiseProduct(etadir);
    if (second_order) {
        outU += ev.R_U.transpose() * ev.eta.cwiseProduct(psidir);
        outx += ev.R_x.transpose() * ev.eta.cwiseProduct(psidir);
        outU += Cz.uu * wU + Cz.ux * wx;
        outx += Cz.ux.transpose() * wU + Cz.xx * wx;
    }
    if (adjoint_terms) {
        Eigen::VectorXd wy;
        ev.hessian_solver.solve(y, wy);
        outU -= ev.M_UU.transpose() * wy;
        outx -= ev.M_Ux.transpose() * wy;
    }
}

Eigen::VectorXd cellwise_dwr(const Space &fine, const Eigen::VectorXd &psi,
                             const Eigen::VectorXd &R) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(fine.n_elems);
    const int block = fine.np() * fine.m;
    for (int e = 0; e < fine.n_elems; ++e) {
        double s = 0.0;
        for (int j = 0; j < block; ++j) s += psi[e * block + j] * R[e * block + j];
        out[e] = std::abs(s);
    }
    return out;
}

}  // namespace shocktrack
