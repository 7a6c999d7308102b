#include "doctest.h"

#include <random>

#include "shocktrack/control_map.hpp"
#include "shocktrack/mesh.hpp"

using namespace shocktrack;

TEST_CASE("all-free control map is the identity") {
    Mesh m = structured_rectangle(0, 1, 0, 1, 2, 2, 1);
    ControlMapBuilder b(m.coords);
    for (int i = 0; i < m.n_nodes(); ++i) b.free_node(i);
    const ControlMap cm = b.build();
    CHECK(cm.n_controls() == 2 * m.n_nodes());
    CHECK((cm.apply(b.initial_controls()) - m.coords).norm() == 0.0);

    Eigen::VectorXd s = b.initial_controls();
    s[3] += 0.25;
    const Eigen::VectorXd x = cm.apply(s);
    CHECK(x[3] == doctest::Approx(m.coords[3] + 0.25));
}

TEST_CASE("slide node along boundary moves only the free coordinate") {
    Mesh m = structured_rectangle(0, 1, 0, 1, 2, 2, 1);
    ControlMapBuilder b(m.coords);
    b.slide_node(1, {1.0, 0.0});  // bottom boundary node slides along y=0
    const ControlMap cm = b.build();
    CHECK(cm.n_controls() == 1);
    Eigen::VectorXd s(1);
    s << 0.3;
    const Eigen::VectorXd x = cm.apply(s);
    CHECK(x[2] == doctest::Approx(m.coords[2] + 0.3));
    CHECK(x[3] == doctest::Approx(m.coords[3]));
}

TEST_CASE("radial constraint stores the direction as the column") {
    Mesh m = structured_rectangle(0, 1, 0, 1, 1, 1, 1);
    ControlMapBuilder b(m.coords);
    const Eigen::Vector2d d = Eigen::Vector2d(3.0, 4.0);
    b.slide_node(2, d);
    const ControlMap cm = b.build();
    Eigen::VectorXd s(1);
    s << 5.0;
    const Eigen::VectorXd x = cm.apply(s);
    CHECK(x[4] == doctest::Approx(m.coords[4] + 3.0));
    CHECK(x[5] == doctest::Approx(m.coords[5] + 4.0));
}

TEST_CASE("transpose is the exact adjoint") {
    Mesh m = structured_rectangle(0, 1, 0, 1, 3, 2, 1);
    ControlMapBuilder b(m.coords);
    for (int i = 0; i < m.n_nodes(); ++i) {
        if (i % 3 == 0) b.free_node(i);
        else if (i % 3 == 1) b.slide_node(i, {0.6, 0.8});
        else b.fix_node(i);
    }
    const ControlMap cm = b.build();
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> un(-1, 1);
    Eigen::VectorXd s(cm.n_controls()), v(2 * m.n_nodes());
    for (int i = 0; i < s.size(); ++i) s[i] = un(rng);
    for (int i = 0; i < v.size(); ++i) v[i] = un(rng);
    const double lhs = (cm.A * s).dot(v);
    const double rhs = s.dot(cm.apply_transpose(v));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
}
