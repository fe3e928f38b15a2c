#include <catch2/catch_amalgamated.hpp>

#include "adhbem/mesh.hpp"

using namespace adhbem;

namespace {

BoundaryMesh benchmark_mesh() { return build_rectangle_boundary(100.0, 10.0, 2.5); }

int count_free_contact_nodes(const BoundaryMesh& m) {
    std::vector<char> contact(m.num_nodes(), 0);
    for (int e = 0; e < m.num_elements(); ++e)
        if (m.part[e] == Part::Contact) contact[m.elements[e][0]] = contact[m.elements[e][1]] = 1;
    int n = 0;
    for (int i = 0; i < m.num_nodes(); ++i) n += contact[i] && !m.dirichlet_node[i];
    return n;
}

}  // namespace

TEST_CASE("benchmark rectangle reproduces the published dof counts") {
    const BoundaryMesh m = benchmark_mesh();
    CHECK(m.num_elements() == 88);
    CHECK(m.num_nodes() == 88);

    CHECK(count_free_contact_nodes(m) == 40);

    int free_nodes = 0;
    for (int i = 0; i < m.num_nodes(); ++i) free_nodes += !m.dirichlet_node[i];
    CHECK(2 * free_nodes == 166);                       // displacement unknowns
    CHECK(free_nodes - count_free_contact_nodes(m) == 43);  // nodes on Gamma_N

    CHECK(m.part_length(Part::Dirichlet) == Catch::Approx(10.0));
    CHECK(m.part_length(Part::Contact) == Catch::Approx(100.0));
    CHECK(m.part_length(Part::Neumann) == Catch::Approx(110.0));
}

TEST_CASE("unit square with one element per side") {
    RectanglePartSpec all_n;
    all_n.bottom = all_n.right = all_n.top = all_n.left = Part::Neumann;
    const BoundaryMesh m = build_rectangle_boundary(1.0, 1.0, 1.0, all_n);
    REQUIRE(m.num_nodes() == 4);
    REQUIRE(m.num_elements() == 4);
    CHECK(m.normal[0].isApprox(Eigen::Vector2d(0, -1)));
    CHECK(m.normal[1].isApprox(Eigen::Vector2d(1, 0)));
    CHECK(m.normal[2].isApprox(Eigen::Vector2d(0, 1)));
    CHECK(m.normal[3].isApprox(Eigen::Vector2d(-1, 0)));
}

TEST_CASE("closed loop: signed element vectors sum to zero") {
    const BoundaryMesh m = benchmark_mesh();
    Eigen::Vector2d s = Eigen::Vector2d::Zero();
    for (int e = 0; e < m.num_elements(); ++e)
        s += m.vertices[m.elements[e][1]] - m.vertices[m.elements[e][0]];
    CHECK(s.norm() < 1e-12);
}

TEST_CASE("uniform refinement bisects every element") {
    const BoundaryMesh m0 = benchmark_mesh();
    const BoundaryMesh m1 = refine_uniform(m0);
    CHECK(m1.num_elements() == 2 * m0.num_elements());
    CHECK(m1.num_nodes() == 176);
    CHECK(refine_uniform(m1).num_elements() == 4 * m0.num_elements());

    // children split at the midpoint; parent nodes keep their indices
    for (int i = 0; i < m0.num_nodes(); ++i) CHECK(m1.vertices[i] == m0.vertices[i]);
    const int e = 3;
    const Eigen::Vector2d mid = 0.5 * (m0.vertices[m0.elements[e][0]] + m0.vertices[m0.elements[e][1]]);
    CHECK(m1.vertices[m0.num_nodes() + e].isApprox(mid));
    CHECK(m1.part[2 * e] == m0.part[e]);
    CHECK(m1.part[2 * e + 1] == m0.part[e]);
    CHECK(m1.element_length(2 * e) == Catch::Approx(0.5 * m0.element_length(e)));
}

TEST_CASE("capacity scaling shrinks into the target disc, never grows") {
    BoundaryMesh m = benchmark_mesh();
    const double s = scale_mesh_for_capacity(m);
    CHECK(s == Catch::Approx(0.45 / std::sqrt(50.0 * 50.0 + 5.0 * 5.0)).epsilon(1e-12));
    CHECK(m.scale == Catch::Approx(s));

    BoundaryMesh tiny = build_rectangle_boundary(0.1, 0.1, 0.1);
    CHECK(scale_mesh_for_capacity(tiny) == 1.0);

    RectanglePartSpec all_n;
    all_n.bottom = all_n.right = all_n.top = all_n.left = Part::Neumann;
    BoundaryMesh sq = build_rectangle_boundary(1.0, 1.0, 0.5, all_n);
    CHECK(scale_mesh_for_capacity(sq) == Catch::Approx(0.45 / (std::sqrt(2.0) / 2.0)));
}

TEST_CASE("dual mesh: merge rule, corner half edge, tiling") {
    const BoundaryMesh m = benchmark_mesh();
    const DualMesh d = build_dual_mesh(m);
    REQUIRE(d.owner.size() == 40);

    // the Dirichlet-adjacent half cell is appended to its neighbour
    CHECK(d.weight(0) == Catch::Approx(3.75));
    // interior cells join edge midpoints
    CHECK(d.weight(1) == Catch::Approx(2.5));
    // the polygon vertex at the chain end owns half of its edge
    CHECK(d.weight(d.owner.size() - 1) == Catch::Approx(1.25));

    CHECK(d.total() == Catch::Approx(m.part_length(Part::Contact)).epsilon(1e-12));

    for (const auto& n : d.owner_normal) CHECK(n.isApprox(Eigen::Vector2d(0, -1)));
}

TEST_CASE("dual mesh tiles Gamma_C at every refinement level") {
    BoundaryMesh m = benchmark_mesh();
    for (int l = 0; l < 3; ++l) {
        const DualMesh d = build_dual_mesh(m);
        CHECK(d.total() == Catch::Approx(m.part_length(Part::Contact)).epsilon(1e-12));
        // cells tile without overlap: consecutive intervals meet exactly
        for (size_t k = 0; k + 1 < d.owner.size(); ++k)
            CHECK(d.cell_hi[k] == Catch::Approx(d.cell_lo[k + 1]).margin(1e-14));
        m = refine_uniform(m);
    }
}

TEST_CASE("two-element contact edge: one merged cell spans both halves") {
    // left edge Dirichlet, bottom two contact elements; the single interior
    // bottom node plus the corner node carry the whole edge
    RectanglePartSpec parts;
    const BoundaryMesh m = build_rectangle_boundary(2.0, 1.0, 1.0, parts);
    const DualMesh d = build_dual_mesh(m);
    REQUIRE(d.owner.size() == 2);
    CHECK(d.weight(0) == Catch::Approx(1.5));  // half edge + merged half edge
    CHECK(d.weight(1) == Catch::Approx(0.5));
    CHECK(d.total() == Catch::Approx(2.0));
}

TEST_CASE("empty contact part is a configuration error") {
    RectanglePartSpec parts;
    parts.bottom = Part::Neumann;
    const BoundaryMesh m = build_rectangle_boundary(1.0, 1.0, 0.5, parts);
    CHECK_THROWS_AS(build_dual_mesh(m), std::invalid_argument);
}

TEST_CASE("mesh dump lists nodes with parts and flags") {
    BoundaryMesh m = build_rectangle_boundary(2.0, 1.0, 0.5);
    scale_mesh_for_capacity(m);
    std::ostringstream os;
    dump_mesh_csv(m, os);
    const std::string csv = os.str();
    CHECK(csv.starts_with("node,x_mm,y_mm,part,constrained\n"));
    CHECK(csv.find("dirichlet") != std::string::npos);
    CHECK(csv.find("contact") != std::string::npos);
    // physical coordinates are restored in the dump
    CHECK(csv.find(",2,") != std::string::npos);
}
