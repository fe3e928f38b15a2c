#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "adhbem/steklov.hpp"

using namespace adhbem;

namespace {

BoundaryMesh scaled_square(int per_side, bool all_neumann = true) {
    RectanglePartSpec parts;
    if (all_neumann) parts.bottom = parts.right = parts.top = parts.left = Part::Neumann;
    BoundaryMesh m = build_rectangle_boundary(1.0, 1.0, 1.0 / per_side, parts);
    scale_mesh_for_capacity(m);
    return m;
}

}  // namespace

TEST_CASE("Steklov matrix is symmetric and elliptic on constrained dofs") {
    const LameParameters p = lame_from_engineering(210e3, 0.3);
    BoundaryMesh m = build_rectangle_boundary(100.0, 10.0, 5.0);
    scale_mesh_for_capacity(m);
    const OperatorBlocks blocks = assemble_operator_blocks(m, p);
    const SteklovSystem sys = assemble_steklov(blocks, m);
    CHECK(sys.asymmetry <= 1e-10);
    CHECK((sys.P - sys.P.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.P);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("unscaled large domain fails with the V_h diagnosis") {
    const LameParameters p = lame_from_engineering(210e3, 0.3);
    const BoundaryMesh m = build_rectangle_boundary(100.0, 10.0, 5.0);  // not scaled
    const OperatorBlocks blocks = assemble_operator_blocks(m, p);
    CHECK_THROWS_WITH(assemble_steklov(blocks, m), Catch::Matchers::ContainsSubstring("not SPD"));
}

TEST_CASE("rigid motions are in the kernel of the all-Neumann Steklov matrix") {
    const LameParameters p = lame_from_engineering(210.0, 0.3);
    const BoundaryMesh m = scaled_square(6);
    const SteklovSystem sys = assemble_steklov(assemble_operator_blocks(m, p), m);
    const double pmax = sys.P.cwiseAbs().maxCoeff();
    Eigen::VectorXd tx(sys.size()), rot(sys.size());
    for (int d = 0; d < sys.size(); ++d) {
        const int node = sys.node_of_dof[d] / 2, c = sys.node_of_dof[d] % 2;
        tx[d] = c == 0 ? 1.0 : 0.0;
        rot[d] = c == 0 ? -m.vertices[node].y() : m.vertices[node].x();
    }
    CHECK((sys.P * tx).cwiseAbs().maxCoeff() < 1e-8 * pmax);
    CHECK((sys.P * rot).cwiseAbs().maxCoeff() < 1e-6 * pmax);
}

TEST_CASE("Dirichlet-to-Neumann oracle: linear field on the unit square") {
    const LameParameters p = lame_from_engineering(210.0, 0.3);
    Mat2 A = Mat2::Zero();
    A(0, 0) = 1.0;  // u = (x1, 0)
    double prev_err = 0.0;
    for (int per_side : {16, 32}) {
        const BoundaryMesh m = scaled_square(per_side);
        const OperatorBlocks blocks = assemble_operator_blocks(m, p);
        Eigen::VectorXd u(2 * m.num_nodes());
        for (int i = 0; i < m.num_nodes(); ++i) u.segment<2>(2 * i) = A * m.vertices[i];
        const Eigen::MatrixXd t = density_traction(blocks, m, u) / m.scale;  // stored-unit traction
        double num = 0.0, den = 0.0;
        for (int e = 0; e < m.num_elements(); ++e) {
            const Vec2 texact = linear_field_traction(A, m.normal[e], p);
            const double L = m.element_length(e);
            num += L * (t.row(e).transpose() - texact).squaredNorm();
            den += L * texact.squaredNorm();
        }
        const double err = std::sqrt(num / den);
        CHECK(err < 0.05);
        if (prev_err > 0.0) CHECK(err < 0.8 * prev_err);
        prev_err = err;
    }
}

TEST_CASE("neumann load: constant traction on one element") {
    const LameParameters p = lame_from_engineering(210.0, 0.3);
    RectanglePartSpec parts;  // benchmark split
    BoundaryMesh m = build_rectangle_boundary(2.0, 1.0, 0.5, parts);
    scale_mesh_for_capacity(m);
    const SteklovSystem sys = assemble_steklov(assemble_operator_blocks(m, p), m);

    // top edge is Neumann: pick an element whose endpoints are both free
    int etop = -1;
    for (int e = 0; e < m.num_elements() && etop < 0; ++e)
        if (m.part[e] == Part::Neumann && m.normal[e].isApprox(Eigen::Vector2d(0, 1))
            && !m.dirichlet_node[m.elements[e][0]] && !m.dirichlet_node[m.elements[e][1]])
            etop = e;
    REQUIRE(etop >= 0);
    const Eigen::VectorXd g =
        assemble_neumann_load(m, sys, {{etop, Eigen::Vector2d(0.0, -1.0)}});
    const double Lphys = m.element_length(etop) / m.scale;
    const int n0 = m.elements[etop][0], n1 = m.elements[etop][1];
    CHECK(g[sys.dof_of_node[2 * n0 + 1]] == Catch::Approx(-Lphys / 2));
    CHECK(g[sys.dof_of_node[2 * n1 + 1]] == Catch::Approx(-Lphys / 2));
    CHECK(g.cwiseAbs().sum() == Catch::Approx(Lphys));

    // zero traction -> zero vector
    const Eigen::VectorXd gz = assemble_neumann_load(m, sys, [](const Eigen::Vector2d&) {
        return Eigen::Vector2d::Zero();
    });
    CHECK(gz.cwiseAbs().maxCoeff() == 0.0);

    // traction prescribed on a contact element is rejected
    int ec = -1;
    for (int e = 0; e < m.num_elements(); ++e)
        if (m.part[e] == Part::Contact) ec = e;
    CHECK_THROWS_AS(assemble_neumann_load(m, sys, {{ec, Eigen::Vector2d(0.0, 1.0)}}),
                    std::invalid_argument);
}

TEST_CASE("energy norm: homogeneity, triangle inequality, zero") {
    const LameParameters p = lame_from_engineering(210.0, 0.3);
    const BoundaryMesh m = scaled_square(4);
    const SteklovSystem sys = assemble_steklov(assemble_operator_blocks(m, p), m);
    CHECK(energy_norm(sys, Eigen::VectorXd::Zero(sys.size())) == 0.0);
    std::mt19937 rng(5);
    std::normal_distribution<double> N;
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd x(sys.size()), y(sys.size());
        for (int i = 0; i < sys.size(); ++i) {
            x[i] = N(rng);
            y[i] = N(rng);
        }
        CHECK(energy_norm(sys, 2.0 * x) == Catch::Approx(2.0 * energy_norm(sys, x)));
        CHECK(energy_norm(sys, x + y) <= energy_norm(sys, x) + energy_norm(sys, y) + 1e-10);
    }
}

TEST_CASE("galerkin energy of a fixed interpolated field converges under refinement") {
    const LameParameters p = lame_from_engineering(210.0, 0.3);
    auto smooth_field = [](const Eigen::Vector2d& x) {
        return Eigen::Vector2d(std::sin(x.x() + 0.3) * x.y(), std::cos(x.y()) * 0.2 + x.x() * x.x());
    };
    std::vector<double> energies;
    for (int per_side : {8, 16, 32}) {
        const BoundaryMesh m = scaled_square(per_side);
        const SteklovSystem sys = assemble_steklov(assemble_operator_blocks(m, p), m);
        Eigen::VectorXd u(sys.size());
        for (int d = 0; d < sys.size(); ++d) {
            const int node = sys.node_of_dof[d] / 2, c = sys.node_of_dof[d] % 2;
            u[d] = smooth_field(m.vertices[node])[c];
        }
        energies.push_back(energy_norm(sys, u));
    }
    CHECK(std::abs(energies[2] - energies[1]) < std::abs(energies[1] - energies[0]) + 0.01 * energies[2]);
}

TEST_CASE("matrix dump is dense row-major text") {
    Eigen::MatrixXd m(2, 3);
    m << 1, 2, 3, 4, 5, 0.5;
    std::ostringstream os;
    dump_matrix(m, os);
    CHECK(os.str() == "1 2 3\n4 5 0.5\n");
}
