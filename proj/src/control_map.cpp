#include "shocktrack/control_map.hpp"

#include <stdexcept>

namespace shocktrack {

ControlMapBuilder::ControlMapBuilder(const Eigen::VectorXd &initial_coords)
    : x0_(initial_coords),
      design_(initial_coords.size() / 2, 0),
      offsets_(initial_coords) {}

void ControlMapBuilder::free_node(int node) {
    if (design_[node]) throw std::runtime_error("control map: node registered twice");
    design_[node] = 1;
    for (int c = 0; c < 2; ++c) {
        const int col = int(s0v_.size());
        trips_.emplace_back(2 * node + c, col, 1.0);
        offsets_[2 * node + c] = 0.0;
        s0v_.push_back(x0_[2 * node + c]);
    }
}

void ControlMapBuilder::slide_node(int node, const Eigen::Vector2d &direction) {
    if (design_[node]) throw std::runtime_error("control map: node registered twice");
    design_[node] = 1;
    const Eigen::Vector2d d = direction.normalized();
    const int col = int(s0v_.size());
    trips_.emplace_back(2 * node, col, d[0]);
    trips_.emplace_back(2 * node + 1, col, d[1]);
    // offset stays at the anchor (initial position); s=0 reproduces it
    s0v_.push_back(0.0);
}

void ControlMapBuilder::fix_node(int node) {
    if (design_[node]) throw std::runtime_error("control map: node registered twice");
    design_[node] = 1;
}

ControlMap ControlMapBuilder::build() {
    ControlMap cm;
    cm.A.resize(x0_.size(), long(s0v_.size()));
    cm.A.setFromTriplets(trips_.begin(), trips_.end());
    cm.fixed_offset = offsets_;
    s0_ = Eigen::Map<Eigen::VectorXd>(s0v_.data(), long(s0v_.size()));
    return cm;
}

}  // namespace shocktrack
