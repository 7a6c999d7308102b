#include "shocktrack/problems.hpp"

#include <cmath>

#include "shocktrack/flow_solver.hpp"

namespace shocktrack {

namespace {

// Interior nodes free, boundary nodes sliding along their straight boundary,
// corners and explicitly pinned nodes fixed.
ControlMap rectangle_controls(const Mesh &mesh, double x0, double x1, double y0, double y1,
                              const std::vector<Eigen::Vector2d> &pins, Eigen::VectorXd &s0) {
    ControlMapBuilder b(mesh.coords);
    const double tol = 1e-10 * (std::abs(x1 - x0) + std::abs(y1 - y0));
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        const Eigen::Vector2d p = mesh.node(i);
        bool pinned = false;
        for (const auto &q : pins)
            if ((p - q).norm() < tol) pinned = true;
        const bool on_l = std::abs(p[0] - x0) < tol, on_r = std::abs(p[0] - x1) < tol;
        const bool on_b = std::abs(p[1] - y0) < tol, on_t = std::abs(p[1] - y1) < tol;
        const int nb = int(on_l) + int(on_r) + int(on_b) + int(on_t);
        if (pinned || nb >= 2) b.fix_node(i);
        else if (on_b || on_t) b.slide_node(i, {1.0, 0.0});
        else if (on_l || on_r) b.slide_node(i, {0.0, 1.0});
        else b.free_node(i);
    }
    ControlMap cm = b.build();
    s0 = b.initial_controls();
    return cm;
}

template <class Law>
RunArtifacts run_rectangle_problem(const Law &law, Mesh mesh, int p,
                                   const ControlMap &cmap, const Eigen::VectorXd &s0,
                                   const std::vector<FluxKind> &flux,
                                   OptimizerSettings settings, double reference,
                                   const IterationHook &hook) {
    RunArtifacts out;
    const Space coarse{p, Law::m, mesh.n_elems()};
    const Space fine{p + 1, Law::m, mesh.n_elems()};

    Eigen::VectorXd u = Eigen::VectorXd::Zero(coarse.n_dofs());
    FlowSolveOptions fo;
    fo.tol = 1e-11;
    solve_flow(law, mesh, mesh.coords, coarse, u, flux, fo);

    FullSpaceOptimizer<Law> opt(law, mesh, coarse, fine, cmap, flux, settings);
    if (hook) opt.on_iteration = hook;
    out.result = opt.run(u, s0);

    out.mesh = mesh;
    out.coarse = coarse;
    out.fine = fine;
    out.u = out.result.u;
    out.functional = functional_value(law, mesh, mesh.coords, coarse, out.result.u);
    out.functional_error = std::abs(out.functional - reference);
    out.converged = out.result.status == OptimizationResult::Status::converged;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// straight shock

OptimizerSettings StraightShockProblem::settings() const {
    OptimizerSettings s;
    s.mu = 0.01;
    s.eps_s0 = 0.01;
    s.eps_u0 = 0.0;
    s.tol = 1e-10;
    s.max_iters = 200;
    s.goal.mode = mode;
    s.goal.alpha = 0.0;
    s.goal.exact_solve = InnerSolver::Mode::direct;
    s.goal.hessian_solve = InnerSolver::Mode::direct;
    return s;
}

Mesh StraightShockProblem::make_mesh() const { return structured_rectangle(-1, 1, 0, 1, nx, ny, q); }

ControlMap StraightShockProblem::make_controls(const Mesh &mesh, Eigen::VectorXd &s0) const {
    return rectangle_controls(mesh, -1, 1, 0, 1, {{0.0, 0.0}}, s0);
}

RunArtifacts StraightShockProblem::run(const IterationHook &hook) const {
    StraightShockLaw law;
    Mesh mesh = make_mesh();
    Eigen::VectorXd s0;
    const ControlMap cm = make_controls(mesh, s0);
    const auto flux = std::vector<FluxKind>(mesh.faces.size(), FluxKind::upwind);
    return run_rectangle_problem(law, std::move(mesh), p, cm, s0, flux, settings(),
                                 reference_functional(), hook);
}

double straight_shock_alignment(const Mesh &mesh, const Space &sp, const Eigen::VectorXd &u) {
    double worst = 0.0;
    for (const auto &f : mesh.faces) {
        if (f.elem_m < 0) continue;
        // face-center trace jump of the single state
        const Eigen::VectorXd nodes = gauss_lobatto_nodes(sp.p);
        Eigen::VectorXd v0, d0, v1, d1;
        double up = 0, um = 0;
        const Eigen::Vector2d xip = RefQuadrature::face_point(f.face_p, 0.5);
        const Eigen::Vector2d xim = RefQuadrature::face_point(f.face_m, 0.5);
        lagrange_eval(nodes, xip[0], v0, d0);
        lagrange_eval(nodes, xip[1], v1, d1);
        for (int j = 0; j <= sp.p; ++j)
            for (int i = 0; i <= sp.p; ++i)
                up += v0[i] * v1[j] * u[sp.dof(f.elem_p, j * (sp.p + 1) + i, 0)];
        lagrange_eval(nodes, xim[0], v0, d0);
        lagrange_eval(nodes, xim[1], v1, d1);
        for (int j = 0; j <= sp.p; ++j)
            for (int i = 0; i <= sp.p; ++i)
                um += v0[i] * v1[j] * u[sp.dof(f.elem_m, j * (sp.p + 1) + i, 0)];
        if (std::abs(up - um) <= 0.5) continue;
        for (int n : mesh.face_nodes(f.elem_p, f.face_p)) {
            const Eigen::Vector2d x = mesh.node(n);
            worst = std::max(worst, std::abs(x[0] + 0.3 * x[1]));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// curved shock

OptimizerSettings CurvedShockProblem::settings() const {
    OptimizerSettings s;
    s.mu = 0.001;
    s.eps_s0 = 1.0;
    s.eps_u0 = 0.0;
    s.tol = 1e-10;
    s.max_iters = 300;
    s.goal.mode = mode;
    s.goal.alpha = 5e-6;
    // machine-precision inner solves through a reused sparse factorization
    s.goal.exact_solve = InnerSolver::Mode::direct;
    s.goal.hessian_solve = InnerSolver::Mode::direct;
    return s;
}

Mesh CurvedShockProblem::make_mesh() const {
    Mesh m = structured_rectangle(0, 1, 0, 1, nx, ny, 1);
    if (q == 2) m = elevate_to_q2(m);
    return m;
}

ControlMap CurvedShockProblem::make_controls(const Mesh &mesh, Eigen::VectorXd &s0) const {
    return rectangle_controls(mesh, 0, 1, 0, 1, {{0.375, 1.0}}, s0);
}

double CurvedShockProblem::reference_functional() const {
    // 500-point Gauss-Legendre per right-boundary face of the initial grid
    const CurvedShockLaw law;
    const Quad1D g = gauss_legendre(500);
    double J = 0.0;
    for (int k = 0; k < ny; ++k) {
        const double ya = double(k) / ny, yb = double(k + 1) / ny;
        for (int i = 0; i < 500; ++i) {
            const double y = ya + (yb - ya) * g.points[i];
            const double u1 = law.exact_solution({1.0, y})[1];
            const double w = law.smooth_functional_weight ? 1.0 / (1.0 + std::exp(-230.0 * (y - 0.05)))
                                                          : 1.0;
            J += (yb - ya) * g.weights[i] * w * u1 * u1;
        }
    }
    return J;
}

RunArtifacts CurvedShockProblem::run(const IterationHook &hook) const {
    CurvedShockLaw law;
    Mesh mesh = make_mesh();
    Eigen::VectorXd s0;
    const ControlMap cm = make_controls(mesh, s0);
    const FluxKind kind =
        mode == ObjectiveMode::residual_only ? FluxKind::smoothed_upwind : FluxKind::upwind;
    const auto flux = std::vector<FluxKind>(mesh.faces.size(), kind);
    return run_rectangle_problem(law, std::move(mesh), p, cm, s0, flux, settings(),
                                 reference_functional(), hook);
}

ShockAlignment curved_shock_alignment(const Mesh &mesh, const Space &sp,
                                      const Eigen::VectorXd &u) {
    ShockAlignment out;
    const Eigen::VectorXd nodes = gauss_lobatto_nodes(sp.p);
    Eigen::VectorXd v0, d0, v1, d1;
    for (const auto &f : mesh.faces) {
        if (f.elem_m < 0) continue;
        double up = 0, um = 0;
        const Eigen::Vector2d xip = RefQuadrature::face_point(f.face_p, 0.5);
        const Eigen::Vector2d xim = RefQuadrature::face_point(f.face_m, 0.5);
        lagrange_eval(nodes, xip[0], v0, d0);
        lagrange_eval(nodes, xip[1], v1, d1);
        for (int j = 0; j <= sp.p; ++j)
            for (int i = 0; i <= sp.p; ++i)
                up += v0[i] * v1[j] * u[sp.dof(f.elem_p, j * (sp.p + 1) + i, 0)];
        lagrange_eval(nodes, xim[0], v0, d0);
        lagrange_eval(nodes, xim[1], v1, d1);
        for (int j = 0; j <= sp.p; ++j)
            for (int i = 0; i <= sp.p; ++i)
                um += v0[i] * v1[j] * u[sp.dof(f.elem_m, j * (sp.p + 1) + i, 0)];
        if (std::abs(up - um) <= 0.5) continue;

        const Eigen::Vector2d mid =
            reference_to_physical(mesh, f.elem_p, RefQuadrature::face_point(f.face_p, 0.5));
        double dist = 0.0;
        for (int n : mesh.face_nodes(f.elem_p, f.face_p)) {
            const Eigen::Vector2d x = mesh.node(n);
            dist = std::max(dist, std::abs(x[0] - CurvedShockLaw::shock_x(x[1])));
        }
        if (mid[0] + mid[1] > 1.0) {
            out.max_above = std::max(out.max_above, dist);
            ++out.n_above;
        } else {
            out.max_below = std::max(out.max_below, dist);
            ++out.n_below;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// cylinder

EulerLaw CylinderProblem::make_law() const {
    EulerLaw law;
    law.gamma = gamma;
    law.freestream = EulerLaw::conservative(1.4, mach, 0.0, 1.0, gamma);
    // tags: bottom (eta=0) outflow, right (xi=1) wall, top outflow, left inflow
    law.bc_kind = {1, 2, 1, 0};
    law.functional_tag = {1, 0, 1, 0};
    return law;
}

Mesh CylinderProblem::initial_mesh() const {
    Mesh m = structured_rectangle(0, 1, 0, 1, n_radial, n_angular, 1);
    m.node_on_ring.assign(m.n_nodes(), 0);
    for (int i = 0; i < m.n_nodes(); ++i) {
        const double xi = m.node_param[i][0], eta = m.node_param[i][1];
        if (std::abs(xi - 2.0 / 3.0) < 1e-9) m.node_on_ring[i] = 1;
        const double phi = theta * (2.0 * eta - 1.0);
        m.coords[2 * i] = -(3.0 - 2.0 * xi) * std::cos(phi);
        m.coords[2 * i + 1] = (6.0 - 5.0 * xi) * std::sin(phi);
    }
    m.boundary_names = {"outflow_bottom", "wall", "outflow_top", "inflow"};
    mark_wall(m);
    return m;
}

void CylinderProblem::mark_wall(Mesh &mesh) {
    for (auto &f : mesh.faces)
        if (f.btag == 1) f.wall_projected = true;
}

void CylinderProblem::project_wall_nodes(Mesh &mesh) {
    for (const auto &f : mesh.faces) {
        if (!f.wall_projected) continue;
        for (int n : mesh.face_nodes(f.elem_p, f.face_p)) {
            const double r = std::hypot(mesh.coords[2 * n], mesh.coords[2 * n + 1]);
            mesh.coords[2 * n] /= r;
            mesh.coords[2 * n + 1] /= r;
        }
    }
}

ControlMap CylinderProblem::make_controls(const Mesh &mesh, Eigen::VectorXd &s0) const {
    ControlMapBuilder b(mesh.coords);
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        if (!mesh.node_on_ring.empty() && mesh.node_on_ring[i]) {
            const double eta = mesh.node_param[i][1];
            const double phi = theta * (2.0 * eta - 1.0);
            // along the straight parameter line joining the outer boundary
            // to the wall (d x/d xi direction)
            b.slide_node(i, Eigen::Vector2d(2.0 * std::cos(phi), -5.0 * std::sin(phi)));
        } else {
            b.fix_node(i);
        }
    }
    ControlMap cm = b.build();
    s0 = b.initial_controls();
    return cm;
}

std::function<void(Mesh &)> CylinderProblem::recenter_hook(const Mesh &mesh) const {
    std::vector<char> is_control(mesh.n_nodes(), 0);
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (!mesh.node_on_ring.empty() && mesh.node_on_ring[i]) is_control[i] = 1;
    return [is_control](Mesh &m) {
        recenter_high_order_nodes(m, is_control);
        CylinderProblem::project_wall_nodes(m);
    };
}

OptimizerSettings CylinderProblem::settings() const {
    OptimizerSettings s;
    s.mu = 0.001;
    s.eps_s0 = 1.0;
    s.eps_u0 = 1.0;
    s.poisson_regularization = true;
    s.tol = 1e-10;
    s.max_iters = 100;
    s.goal.alpha = 0.0;
    s.goal.exact_solve = InnerSolver::Mode::direct;
    s.goal.hessian_solve = InnerSolver::Mode::precond_only;
    return s;
}

std::vector<FluxKind> CylinderProblem::face_fluxes(const Mesh &mesh,
                                                   bool pure_upwind_on_ring) const {
    std::vector<FluxKind> flux(mesh.faces.size(), FluxKind::roe_entropy_fix);
    if (!pure_upwind_on_ring || mesh.node_on_ring.empty()) return flux;
    for (size_t k = 0; k < mesh.faces.size(); ++k) {
        const auto &f = mesh.faces[k];
        for (int n : mesh.face_nodes(f.elem_p, f.face_p))
            if (mesh.node_on_ring[n]) flux[k] = FluxKind::pure_upwind;
    }
    return flux;
}

double CylinderProblem::enthalpy_error(const Mesh &mesh, const Space &sp,
                                       const Eigen::VectorXd &u) const {
    const EulerLaw law = make_law();
    const int nq = quadrature_points(sp.p + 1, mesh.q);
    const ElementTables &tab = ElementTables::get(mesh.q, sp.p, nq);
    double acc = 0.0;
    for (int e = 0; e < mesh.n_elems(); ++e) {
        for (int k = 0; k < int(tab.quad.vol_pts.size()); ++k) {
            Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
            for (int a = 0; a < mesh.nodes_per_elem(); ++a) {
                const Eigen::Vector2d xa = mesh.node(mesh.elems[e][a]);
                J.col(0) += tab.geom_vol.d0(k, a) * xa;
                J.col(1) += tab.geom_vol.d1(k, a) * xa;
            }
            double state[4] = {0, 0, 0, 0};
            for (int j = 0; j < sp.np(); ++j)
                for (int s = 0; s < 4; ++s)
                    state[s] += tab.field_vol.val(k, j) * u[sp.dof(e, j, s)];
            const double H = law.enthalpy(state);
            acc += tab.quad.vol_w[k] * J.determinant() * (H - exact_enthalpy) * (H - exact_enthalpy);
        }
    }
    return std::sqrt(acc);
}

double CylinderProblem::stagnation_pressure(const Mesh &mesh, const Space &sp,
                                            const Eigen::VectorXd &u) const {
    const EulerLaw law = make_law();
    const int nq = quadrature_points(sp.p, mesh.q);
    const Quad1D g = gauss_legendre(nq);
    const Eigen::VectorXd lob = gauss_lobatto_nodes(sp.p);
    double best_y = 1e300, p0 = 0.0;
    Eigen::VectorXd v0, d0, v1, d1;
    for (const auto &f : mesh.faces) {
        if (!f.wall_projected) continue;
        for (int k = 0; k < nq; ++k) {
            const Eigen::Vector2d xi = RefQuadrature::face_point(f.face_p, g.points[k]);
            const Eigen::Vector2d x = reference_to_physical(mesh, f.elem_p, xi);
            if (std::abs(x[1]) >= best_y) continue;
            best_y = std::abs(x[1]);
            lagrange_eval(lob, xi[0], v0, d0);
            lagrange_eval(lob, xi[1], v1, d1);
            double state[4] = {0, 0, 0, 0};
            for (int j = 0; j <= sp.p; ++j)
                for (int i = 0; i <= sp.p; ++i)
                    for (int s = 0; s < 4; ++s)
                        state[s] += v0[i] * v1[j] * u[sp.dof(f.elem_p, j * (sp.p + 1) + i, s)];
            const double p = law.pressure(state);
            const double M = law.mach(state);
            p0 = p * std::pow(1.0 + 0.5 * (law.gamma - 1.0) * M * M,
                              law.gamma / (law.gamma - 1.0));
        }
    }
    return p0;
}

namespace {

// Transfer a DG field to the uniformly refined mesh: children sample the
// parent polynomial at their interpolation nodes.
Eigen::VectorXd refine_solution(const Space &sp, const Eigen::VectorXd &u) {
    const Eigen::VectorXd lob = gauss_lobatto_nodes(sp.p);
    const int n1 = sp.p + 1;
    Eigen::VectorXd out(4 * sp.n_elems * sp.np() * sp.m);
    const Space ref{sp.p, sp.m, 4 * sp.n_elems};
    Eigen::VectorXd v0, d0, v1, d1;
    for (int e = 0; e < sp.n_elems; ++e)
        for (int cy = 0; cy < 2; ++cy)
            for (int cx = 0; cx < 2; ++cx) {
                const int ce = 4 * e + 2 * cy + cx;
                for (int j = 0; j < n1; ++j)
                    for (int i = 0; i < n1; ++i) {
                        const double xi = 0.5 * (cx + lob[i]);
                        const double et = 0.5 * (cy + lob[j]);
                        lagrange_eval(lob, xi, v0, d0);
                        lagrange_eval(lob, et, v1, d1);
                        for (int s = 0; s < sp.m; ++s) {
                            double val = 0.0;
                            for (int jj = 0; jj < n1; ++jj)
                                for (int ii = 0; ii < n1; ++ii)
                                    val += v0[ii] * v1[jj] * u[sp.dof(e, jj * n1 + ii, s)];
                            out[ref.dof(ce, j * n1 + i, s)] = val;
                        }
                    }
            }
    return out;
}

}  // namespace

CylinderProblem::Study CylinderProblem::run(int levels, int p2_levels,
                                            const IterationHook &hook) const {
    const EulerLaw law = make_law();
    Study study;

    Mesh mesh = initial_mesh();
    const int ne0 = mesh.n_elems();

    // p=0 flow solve on the coarse q=1 grid
    Space sp0{0, 4, ne0};
    Eigen::VectorXd u0(sp0.n_dofs());
    for (int e = 0; e < ne0; ++e)
        for (int s = 0; s < 4; ++s) u0[sp0.dof(e, 0, s)] = law.freestream[s];
    FlowSolveOptions fo;
    fo.tol = 1e-10;
    fo.max_iters = 400;
    fo.ptc_dt0 = 0.1;
    const FlowSolveReport frep =
        solve_flow(law, mesh, mesh.coords, sp0, u0, face_fluxes(mesh, false), fo);
    if (!frep.converged) throw std::runtime_error("cylinder: p=0 flow solve did not converge");

    // interpolate to p=1 and run 4 full-space iterations on the q=1 grid
    Space sp1{1, 4, ne0};
    Eigen::VectorXd u = interpolation_matrix(sp0, sp1) * u0;
    {
        OptimizerSettings set = settings();
        set.max_iters = 4;
        Eigen::VectorXd s0;
        const ControlMap cm = make_controls(mesh, s0);
        FullSpaceOptimizer<EulerLaw> opt(law, mesh, sp1, Space{2, 4, ne0}, cm,
                                         face_fluxes(mesh, false), set);
        if (hook) opt.on_iteration = hook;
        const OptimizationResult r = opt.run(u, s0);
        u = r.u;
    }

    // elevate the grid to q=2 and converge with pure upwinding at the ring
    mesh = elevate_to_q2(mesh);
    project_wall_nodes(mesh);

    std::vector<Mesh> meshes;           // optimal (p=1,q=2) mesh per level
    std::vector<Eigen::VectorXd> sols;  // matching p=1 solutions

    for (int level = 0; level < levels; ++level) {
        if (level > 0) {
            const Space prev{1, 4, mesh.n_elems()};
            u = refine_solution(prev, u);
            mesh = refine_uniform(mesh);
            project_wall_nodes(mesh);
        }
        const Space coarse{1, 4, mesh.n_elems()};
        const Space fine{2, 4, mesh.n_elems()};
        Eigen::VectorXd s0;
        const ControlMap cm = make_controls(mesh, s0);
        FullSpaceOptimizer<EulerLaw> opt(law, mesh, coarse, fine, cm,
                                         face_fluxes(mesh, true), settings());
        opt.post_update = recenter_hook(mesh);
        if (hook) opt.on_iteration = hook;
        const OptimizationResult r = opt.run(u, s0);
        u = r.u;

        GridResult gr;
        gr.level = level;
        gr.cells = mesh.n_elems();
        gr.h = 1.0 / std::sqrt(double(mesh.n_elems()));
        gr.enthalpy_err = enthalpy_error(mesh, coarse, u);
        gr.stagnation_err =
            std::abs(stagnation_pressure(mesh, coarse, u) - exact_stagnation_pressure);
        gr.grad_norm = r.history.back().grad_norm;
        gr.residual_norm = r.history.back().residual_norm;
        gr.converged = r.status == OptimizationResult::Status::converged;
        gr.iterations = int(r.history.size()) - 1;
        study.p1.push_back(gr);

        meshes.push_back(mesh);
        sols.push_back(u);
    }

    for (int level = 0; level < std::min(p2_levels, levels); ++level) {
        Mesh m2 = meshes[level];
        const Space c1{1, 4, m2.n_elems()};
        const Space c2{2, 4, m2.n_elems()};
        Eigen::VectorXd u2 = interpolation_matrix(c1, c2) * sols[level];
        Eigen::VectorXd s0;
        const ControlMap cm = make_controls(m2, s0);
        FullSpaceOptimizer<EulerLaw> opt(law, m2, c2, Space{3, 4, m2.n_elems()}, cm,
                                         face_fluxes(m2, true), settings());
        opt.post_update = recenter_hook(m2);
        if (hook) opt.on_iteration = hook;
        const OptimizationResult r = opt.run(u2, s0);

        GridResult gr;
        gr.level = level;
        gr.cells = m2.n_elems();
        gr.h = 1.0 / std::sqrt(double(m2.n_elems()));
        gr.enthalpy_err = enthalpy_error(m2, c2, r.u);
        gr.stagnation_err =
            std::abs(stagnation_pressure(m2, c2, r.u) - exact_stagnation_pressure);
        gr.grad_norm = r.history.back().grad_norm;
        gr.residual_norm = r.history.back().residual_norm;
        gr.converged = r.status == OptimizationResult::Status::converged;
        gr.iterations = int(r.history.size()) - 1;
        study.p2.push_back(gr);

        if (level == std::min(p2_levels, levels) - 1) {
            study.mesh = m2;
            study.u = r.u;
            study.p = 2;
        }
    }
    if (study.p2.empty() && !meshes.empty()) {
        study.mesh = meshes.back();
        study.u = sols.back();
        study.p = 1;
    }
    return study;
}

}  // namespace shocktrack
