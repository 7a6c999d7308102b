#ifndef SHOCKTRACK_VERIFY_HPP
#define SHOCKTRACK_VERIFY_HPP

#include <random>

#include "shocktrack/assembly.hpp"

namespace shocktrack {

/// Finite-difference verification of the assembled derivatives. Every first
/// derivative is compared against central differences of the value; every
/// second-order contraction against central differences of the first
/// derivative. Errors are max-entry deviations relative to the largest
/// finite-difference entry of the same object.

namespace detail {

inline double denom(double max_abs_fd, double max_abs_assembled = 0.0) {
    // near-zero objects compare in an absolute sense
    return std::max({max_abs_fd, max_abs_assembled, 1e-6});
}

}  // namespace detail

template <class Law>
double verify_jacobian_u(const Law &law, const Mesh &mesh, const Eigen::VectorXd &x,
                         const Space &sp, const Eigen::VectorXd &u,
                         const std::vector<FluxKind> &flux, double h = 1e-7) {
    const ResidualJacobians J = assemble_residual_jacobians(law, mesh, x, sp, u, flux);
    Eigen::MatrixXd fd(sp.n_dofs(), sp.n_dofs());
    Eigen::VectorXd up = u, um = u;
    for (int j = 0; j < sp.n_dofs(); ++j) {
        const double hj = h * std::max(1.0, std::abs(u[j]));
        up[j] += hj;
        um[j] -= hj;
        fd.col(j) = (assemble_residual(law, mesh, x, sp, up, flux) -
                     assemble_residual(law, mesh, x, sp, um, flux)) /
                    (2 * hj);
        up[j] = u[j];
        um[j] = u[j];
    }
    const Eigen::MatrixXd A(J.wrt_u);
    return (A - fd).cwiseAbs().maxCoeff() /
           detail::denom(fd.cwiseAbs().maxCoeff(), A.cwiseAbs().maxCoeff());
}

template <class Law>
double verify_jacobian_x(const Law &law, const Mesh &mesh, const Eigen::VectorXd &x,
                         const Space &sp, const Eigen::VectorXd &u,
                         const std::vector<FluxKind> &flux, double h = 1e-7) {
    const ResidualJacobians J = assemble_residual_jacobians(law, mesh, x, sp, u, flux);
    Eigen::MatrixXd fd(sp.n_dofs(), x.size());
    Eigen::VectorXd xp = x, xm = x;
    for (int j = 0; j < x.size(); ++j) {
        const double hj = h * std::max(1.0, std::abs(x[j]));
        xp[j] += hj;
        xm[j] -= hj;
        fd.col(j) = (assemble_residual(law, mesh, xp, sp, u, flux) -
                     assemble_residual(law, mesh, xm, sp, u, flux)) /
                    (2 * hj);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    const Eigen::MatrixXd A(J.wrt_x);
    return (A - fd).cwiseAbs().maxCoeff() /
           detail::denom(fd.cwiseAbs().maxCoeff(), A.cwiseAbs().maxCoeff());
}

/// Max relative errors of (uu, ux, xx) blocks of d^2(w^T r) against central
/// differences of the first derivatives r_u^T w and r_x^T w.
template <class Law>
Eigen::Vector3d verify_weighted_hessian(const Law &law, const Mesh &mesh,
                                        const Eigen::VectorXd &x, const Space &sp,
                                        const Eigen::VectorXd &u, const Eigen::VectorXd &w,
                                        const std::vector<FluxKind> &flux, double h = 1e-6) {
    const HessianBlocks H = assemble_weighted_hessian(law, mesh, x, sp, u, w, flux);

    auto grad_u = [&](const Eigen::VectorXd &uu, const Eigen::VectorXd &xx) {
        const ResidualJacobians J = assemble_residual_jacobians(law, mesh, xx, sp, uu, flux);
        return std::make_pair(Eigen::VectorXd(J.wrt_u.transpose() * w),
                              Eigen::VectorXd(J.wrt_x.transpose() * w));
    };

    Eigen::MatrixXd fd_uu(sp.n_dofs(), sp.n_dofs()), fd_xu(x.size(), sp.n_dofs());
    Eigen::VectorXd up = u, um = u;
    for (int j = 0; j < sp.n_dofs(); ++j) {
        const double hj = h * std::max(1.0, std::abs(u[j]));
        up[j] += hj;
        um[j] -= hj;
        const auto [gup, gxp] = grad_u(up, x);
        const auto [gum, gxm] = grad_u(um, x);
        fd_uu.col(j) = (gup - gum) / (2 * hj);
        fd_xu.col(j) = (gxp - gxm) / (2 * hj);
        up[j] = u[j];
        um[j] = u[j];
    }
    Eigen::MatrixXd fd_ux(sp.n_dofs(), x.size()), fd_xx(x.size(), x.size());
    Eigen::VectorXd xp = x, xm = x;
    for (int j = 0; j < x.size(); ++j) {
        const double hj = h * std::max(1.0, std::abs(x[j]));
        xp[j] += hj;
        xm[j] -= hj;
        const auto [gup, gxp] = grad_u(u, xp);
        const auto [gum, gxm] = grad_u(u, xm);
        fd_ux.col(j) = (gup - gum) / (2 * hj);
        fd_xx.col(j) = (gxp - gxm) / (2 * hj);
        xp[j] = x[j];
        xm[j] = x[j];
    }

    Eigen::Vector3d err;
    const Eigen::MatrixXd Auu(H.uu), Aux(H.ux), Axx(H.xx);
    err[0] = (Auu - fd_uu).cwiseAbs().maxCoeff() /
             detail::denom(fd_uu.cwiseAbs().maxCoeff(), Auu.cwiseAbs().maxCoeff());
    const double eux = (Aux - fd_ux).cwiseAbs().maxCoeff();
    const double exu = (Aux.transpose() - fd_xu).cwiseAbs().maxCoeff();
    err[1] = std::max(eux, exu) /
             detail::denom(fd_ux.cwiseAbs().maxCoeff(), Aux.cwiseAbs().maxCoeff());
    err[2] = (Axx - fd_xx).cwiseAbs().maxCoeff() /
             detail::denom(fd_xx.cwiseAbs().maxCoeff(), Axx.cwiseAbs().maxCoeff());
    return err;
}

/// Max relative errors of (J_U, J_UU, J_Ux) against finite differences.
template <class Law>
Eigen::Vector3d verify_functional_derivatives(const Law &law, const Mesh &mesh,
                                              const Eigen::VectorXd &x, const Space &sp,
                                              const Eigen::VectorXd &u, double h = 1e-6) {
    const FunctionalDerivatives D = functional_derivatives(law, mesh, x, sp, u);

    Eigen::VectorXd fd_g(sp.n_dofs());
    Eigen::MatrixXd fd_uu(sp.n_dofs(), sp.n_dofs());
    Eigen::VectorXd up = u, um = u;
    for (int j = 0; j < sp.n_dofs(); ++j) {
        const double hj = h * std::max(1.0, std::abs(u[j]));
        up[j] += hj;
        um[j] -= hj;
        fd_g[j] = (functional_value(law, mesh, x, sp, up) -
                   functional_value(law, mesh, x, sp, um)) /
                  (2 * hj);
        fd_uu.col(j) = (functional_derivatives(law, mesh, x, sp, up).wrt_u -
                        functional_derivatives(law, mesh, x, sp, um).wrt_u) /
                       (2 * hj);
        up[j] = u[j];
        um[j] = u[j];
    }
    Eigen::MatrixXd fd_ux(sp.n_dofs(), x.size());
    Eigen::VectorXd xp = x, xm = x;
    for (int j = 0; j < x.size(); ++j) {
        const double hj = h * std::max(1.0, std::abs(x[j]));
        xp[j] += hj;
        xm[j] -= hj;
        fd_ux.col(j) = (functional_derivatives(law, mesh, xp, sp, u).wrt_u -
                        functional_derivatives(law, mesh, xm, sp, u).wrt_u) /
                       (2 * hj);
        xp[j] = x[j];
        xm[j] = x[j];
    }

    Eigen::Vector3d err;
    const Eigen::MatrixXd Auu(D.uu), Aux(D.ux);
    err[0] = (D.wrt_u - fd_g).cwiseAbs().maxCoeff() /
             detail::denom(fd_g.cwiseAbs().maxCoeff(), D.wrt_u.cwiseAbs().maxCoeff());
    err[1] = (Auu - fd_uu).cwiseAbs().maxCoeff() /
             detail::denom(fd_uu.cwiseAbs().maxCoeff(), Auu.cwiseAbs().maxCoeff());
    err[2] = (Aux - fd_ux).cwiseAbs().maxCoeff() /
             detail::denom(fd_ux.cwiseAbs().maxCoeff(), Aux.cwiseAbs().maxCoeff());
    return err;
}

}  // namespace shocktrack

#endif
