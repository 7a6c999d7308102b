#ifndef SHOCKTRACK_PROBLEMS_HPP
#define SHOCKTRACK_PROBLEMS_HPP

#include "shocktrack/optimizer.hpp"

namespace shocktrack {

/// Per-iteration observer used by the drivers for logging and snapshots.
using IterationHook = std::function<void(const IterationRecord &)>;

struct RunArtifacts {
    OptimizationResult result;
    Mesh mesh;
    Space coarse, fine;
    Eigen::VectorXd u;
    double functional = 0.0;
    double functional_error = 0.0;  // vs the problem reference when available
    bool converged = false;
};

/// Linear advection with a straight shock on [-1,1] x [0,1] (Heaviside
/// inflow, outflow functional). Initial grid columns must be wider than the
/// total shock offset 0.3 so tracking needs no grid-line crossing.
struct StraightShockProblem {
    int nx = 6, ny = 4;
    int p = 0, q = 1;
    ObjectiveMode mode = ObjectiveMode::goal_oriented;

    OptimizerSettings settings() const;
    Mesh make_mesh() const;
    ControlMap make_controls(const Mesh &mesh, Eigen::VectorXd &s0) const;
    static double reference_functional() { return 1.755; }

    RunArtifacts run(const IterationHook &hook = {}) const;
};

/// Two-state advection with a curved shock on the unit square; the smoothed
/// boundary functional weights the upper segment of the shock.
struct CurvedShockProblem {
    int nx = 8, ny = 8;
    int p = 2, q = 2;
    ObjectiveMode mode = ObjectiveMode::goal_oriented;

    OptimizerSettings settings() const;
    Mesh make_mesh() const;
    ControlMap make_controls(const Mesh &mesh, Eigen::VectorXd &s0) const;
    /// Reference functional through the exact solution, 500 Gauss points per
    /// boundary face of the initial grid.
    double reference_functional() const;

    RunArtifacts run(const IterationHook &hook = {}) const;
};

/// Distances of shock-adjacent faces (u0 jump above 0.5 at the face center)
/// to the exact shock curve, split at the characteristic line x+y=1.
struct ShockAlignment {
    double max_above = 0.0;
    double max_below = 0.0;
    int n_above = 0, n_below = 0;
};
ShockAlignment curved_shock_alignment(const Mesh &mesh, const Space &sp,
                                      const Eigen::VectorXd &u);

/// Max |x + 0.3 y| over the nodes of shock-adjacent faces (straight shock).
double straight_shock_alignment(const Mesh &mesh, const Space &sp, const Eigen::VectorXd &u);

/// Supersonic flow over a cylinder: continuation from a p=0 coarse solve
/// through p=1/q=2 optimization and uniform refinements, then p=2 re-runs.
struct CylinderProblem {
    int n_radial = 6, n_angular = 4;
    double mach = 3.0, gamma = 1.4;
    double theta = 5.0 * M_PI / 12.0;

    EulerLaw make_law() const;
    Mesh initial_mesh() const;  // q=1, 24 cells
    ControlMap make_controls(const Mesh &mesh, Eigen::VectorXd &s0) const;
    std::function<void(Mesh &)> recenter_hook(const Mesh &mesh) const;
    OptimizerSettings settings() const;

    /// Mark wall-boundary faces for the exact-projection metric treatment.
    static void mark_wall(Mesh &mesh);
    /// Snap wall-face nodes onto the unit circle.
    static void project_wall_nodes(Mesh &mesh);
    /// Faces carrying control nodes use pure upwinding (tracked shock).
    std::vector<FluxKind> face_fluxes(const Mesh &mesh, bool pure_upwind_on_ring) const;

    double enthalpy_error(const Mesh &mesh, const Space &sp, const Eigen::VectorXd &u) const;
    double stagnation_pressure(const Mesh &mesh, const Space &sp,
                               const Eigen::VectorXd &u) const;
    static constexpr double exact_stagnation_pressure = 12.06096470126662;
    static constexpr double exact_enthalpy = 7.0;

    struct GridResult {
        int level = 0;
        int cells = 0;
        double h = 0.0;
        double enthalpy_err = 0.0;
        double stagnation_err = 0.0;
        double grad_norm = 0.0;
        double residual_norm = 0.0;
        bool converged = false;
        int iterations = 0;
    };
    struct Study {
        std::vector<GridResult> p1, p2;
        Mesh mesh;            // finest optimal mesh
        Eigen::VectorXd u;    // matching solution
        int p = 1;
    };

    /// Run the full continuation schedule on grids 1..levels for p=1 and,
    /// when p2_levels > 0, re-run the stored optimal states at p=2.
    Study run(int levels, int p2_levels, const IterationHook &hook = {}) const;
};

}  // namespace shocktrack

#endif
