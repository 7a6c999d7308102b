#ifndef SHOCKTRACK_CONTROL_MAP_HPP
#define SHOCKTRACK_CONTROL_MAP_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

namespace shocktrack {

/// Affine map from control variables to the flat node-coordinate vector,
///   x(s) = A s + fixed_offset.
/// A stays constant for the whole optimization run; each coordinate is
/// driven by at most one control entry.
class ControlMap {
public:
    Eigen::SparseMatrix<double> A;  // (2*n_nodes) x n_s
    Eigen::VectorXd fixed_offset;

    int n_controls() const { return int(A.cols()); }

    Eigen::VectorXd apply(const Eigen::VectorXd &s) const { return A * s + fixed_offset; }
    Eigen::VectorXd apply_transpose(const Eigen::VectorXd &vx) const { return A.transpose() * vx; }
};

/// Incremental builder. Nodes not mentioned stay fixed at their initial
/// position. The initial control vector reproduces the initial coordinates.
class ControlMapBuilder {
public:
    explicit ControlMapBuilder(const Eigen::VectorXd &initial_coords);

    /// Both coordinates of the node become independent controls.
    void free_node(int node);
    /// Node slides along the line through its initial position with the
    /// given direction (normalized internally); one control entry.
    void slide_node(int node, const Eigen::Vector2d &direction);
    void fix_node(int node);

    ControlMap build();
    /// Control values such that x(s0) equals the initial coordinates.
    /// Valid after build().
    const Eigen::VectorXd &initial_controls() const { return s0_; }
    /// True if the node was registered with any degree of freedom.
    bool is_design_node(int node) const { return design_[node]; }

private:
    Eigen::VectorXd x0_;
    std::vector<Eigen::Triplet<double>> trips_;
    std::vector<char> design_;
    Eigen::VectorXd offsets_;
    std::vector<double> s0v_;
    Eigen::VectorXd s0_;
};

}  // namespace shocktrack

#endif
