#ifndef SHOCKTRACK_FLOW_SOLVER_HPP
#define SHOCKTRACK_FLOW_SOLVER_HPP

#include <Eigen/SparseLU>

#include "shocktrack/assembly.hpp"

namespace shocktrack {

struct FlowSolveOptions {
    double tol = 1e-10;       // on ||r||_2
    int max_iters = 100;
    double ptc_dt0 = 0.0;     // 0 disables pseudo-transient continuation
    double dt_growth_max = 1e12;
};

struct FlowSolveReport {
    int iterations = 0;
    double residual_norm = 0.0;
    bool converged = false;
};

/// Newton flow solve r(u, x) = 0 with residual-norm backtracking and an
/// admissibility guard; optional pseudo-transient continuation adds M/dt to
/// the Jacobian with the time step growing as the residual drops.
template <class Law>
FlowSolveReport solve_flow(const Law &law, const Mesh &mesh, const Eigen::VectorXd &x,
                           const Space &sp, Eigen::VectorXd &u,
                           const std::vector<FluxKind> &flux, const FlowSolveOptions &opts) {
    FlowSolveReport rep;
    SpMat M;
    if (opts.ptc_dt0 > 0.0) M = assemble_mass(mesh, x, sp);

    Eigen::VectorXd r = assemble_residual(law, mesh, x, sp, u, flux);
    double rnorm = r.norm();
    const double r0 = std::max(rnorm, 1e-300);
    double dt = opts.ptc_dt0;

    for (; rep.iterations < opts.max_iters; ++rep.iterations) {
        rep.residual_norm = rnorm;
        if (rnorm <= opts.tol) {
            rep.converged = true;
            return rep;
        }
        SpMat A = assemble_residual_jacobians(law, mesh, x, sp, u, flux).wrt_u;
        if (opts.ptc_dt0 > 0.0) A = A + SpMat((1.0 / dt) * M);
        Eigen::SparseLU<SpMat> lu(A);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("flow solve: jacobian factorization failed");
        const Eigen::VectorXd du = lu.solve(-r);

        // backtrack on the residual norm, rejecting non-physical states
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
            const Eigen::VectorXd trial = u + step * du;
            if (!states_admissible(law, mesh, x, sp, trial)) continue;
            Eigen::VectorXd rt;
            try {
                rt = assemble_residual(law, mesh, x, sp, trial, flux);
            } catch (const AssemblyError &) {
                continue;
            }
            const double tn = rt.norm();
            if (tn < rnorm || (opts.ptc_dt0 > 0.0 && tn < 2.0 * rnorm && step == 1.0)) {
                u = trial;
                r = rt;
                rnorm = tn;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (opts.ptc_dt0 > 0.0) {
                dt = std::max(dt * 0.25, 1e-12);  // retreat in pseudo-time
                continue;
            }
            rep.residual_norm = rnorm;
            return rep;
        }
        if (opts.ptc_dt0 > 0.0)
            dt = std::min(opts.ptc_dt0 * r0 / std::max(rnorm, 1e-300),
                          opts.ptc_dt0 * opts.dt_growth_max);
    }
    rep.residual_norm = rnorm;
    rep.converged = rnorm <= opts.tol;
    return rep;
}

}  // namespace shocktrack

#endif
