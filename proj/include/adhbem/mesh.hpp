#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace adhbem {

enum class Part { Dirichlet, Neumann, Contact };

inline const char* part_name(Part p) {
    switch (p) {
        case Part::Dirichlet: return "dirichlet";
        case Part::Neumann: return "neumann";
        case Part::Contact: return "contact";
    }
    return "?";
}

/// Closed polygonal boundary mesh, elements oriented counterclockwise.
/// Coordinates may be capacity-scaled; `scale` maps stored -> physical
/// lengths via physical = stored / scale.
struct BoundaryMesh {
    std::vector<Eigen::Vector2d> vertices;
    std::vector<std::array<int, 2>> elements;   // (start node, end node)
    std::vector<Part> part;                     // per element
    std::vector<Eigen::Vector2d> normal;        // per element, unit outward
    std::vector<char> dirichlet_node;           // node on closure of Gamma_D
    double scale = 1.0;

    int num_nodes() const { return static_cast<int>(vertices.size()); }
    int num_elements() const { return static_cast<int>(elements.size()); }

    double element_length(int e) const {
        return (vertices[elements[e][1]] - vertices[elements[e][0]]).norm();
    }
    Eigen::Vector2d element_midpoint(int e) const {
        return 0.5 * (vertices[elements[e][0]] + vertices[elements[e][1]]);
    }
    double part_length(Part p) const {
        double s = 0.0;
        for (int e = 0; e < num_elements(); ++e)
            if (part[e] == p) s += element_length(e);
        return s;
    }
    int count_nodes_on(Part p) const {
        std::vector<char> seen(vertices.size(), 0);
        for (int e = 0; e < num_elements(); ++e)
            if (part[e] == p) seen[elements[e][0]] = seen[elements[e][1]] = 1;
        int n = 0;
        for (char c : seen) n += c;
        return n;
    }
};

namespace detail {

inline void finalize_mesh(BoundaryMesh& m) {
    const int ne = m.num_elements();
    m.normal.resize(ne);
    for (int e = 0; e < ne; ++e) {
        Eigen::Vector2d t = m.vertices[m.elements[e][1]] - m.vertices[m.elements[e][0]];
        const double len = t.norm();
        if (!(len > 0.0)) throw std::invalid_argument("mesh: zero-length element");
        t /= len;
        m.normal[e] = Eigen::Vector2d(t.y(), -t.x());  // outward for CCW loops
    }
    m.dirichlet_node.assign(m.vertices.size(), 0);
    for (int e = 0; e < ne; ++e)
        if (m.part[e] == Part::Dirichlet)
            m.dirichlet_node[m.elements[e][0]] = m.dirichlet_node[m.elements[e][1]] = 1;
    // closed-loop check: signed element vectors sum to zero
    Eigen::Vector2d s = Eigen::Vector2d::Zero();
    std::vector<int> indeg(m.vertices.size(), 0), outdeg(m.vertices.size(), 0);
    for (int e = 0; e < ne; ++e) {
        s += m.vertices[m.elements[e][1]] - m.vertices[m.elements[e][0]];
        outdeg[m.elements[e][0]]++;
        indeg[m.elements[e][1]]++;
    }
    for (size_t i = 0; i < m.vertices.size(); ++i)
        if (indeg[i] != 1 || outdeg[i] != 1)
            throw std::invalid_argument("mesh: boundary is not a single closed loop");
    if (s.norm() > 1e-12 * (1.0 + m.vertices.size()))
        throw std::invalid_argument("mesh: boundary loop does not close");
}

}  // namespace detail

/// Labels for the four sides of a rectangle, in loop order bottom, right,
/// top, left. The whole boundary must be covered, so there is one label per
/// side; anything else is a configuration error at parse time.
struct RectanglePartSpec {
    Part bottom = Part::Contact;
    Part right = Part::Neumann;
    Part top = Part::Neumann;
    Part left = Part::Dirichlet;
};

/// Uniform mesh of the rectangle (0,w) x (0,h); element size as close to
/// `target_h` as integer side counts allow, corners always nodes.
inline BoundaryMesh build_rectangle_boundary(double width, double height, double target_h,
                                             const RectanglePartSpec& parts = {}) {
    if (!(width > 0.0 && height > 0.0)) throw std::invalid_argument("build_rectangle_boundary: size must be positive");
    if (!(target_h > 0.0)) throw std::invalid_argument("build_rectangle_boundary: element size must be positive");
    const int nb = std::max(1, static_cast<int>(std::lround(width / target_h)));
    const int nr = std::max(1, static_cast<int>(std::lround(height / target_h)));
    BoundaryMesh m;
    auto add_side = [&m](const Eigen::Vector2d& a, const Eigen::Vector2d& b, int n, Part p) {
        for (int i = 0; i < n; ++i) {
            m.vertices.push_back(a + (static_cast<double>(i) / n) * (b - a));
            m.part.push_back(p);
        }
    };
    add_side({0.0, 0.0}, {width, 0.0}, nb, parts.bottom);
    add_side({width, 0.0}, {width, height}, nr, parts.right);
    add_side({width, height}, {0.0, height}, nb, parts.top);
    add_side({0.0, height}, {0.0, 0.0}, nr, parts.left);
    const int n = static_cast<int>(m.vertices.size());
    m.elements.resize(n);
    for (int i = 0; i < n; ++i) m.elements[i] = {i, (i + 1) % n};
    detail::finalize_mesh(m);
    return m;
}

/// Element-size target from a total node budget (perimeter / budget).
inline double element_size_from_budget(double width, double height, int node_budget) {
    if (node_budget < 4) throw std::invalid_argument("node budget too small");
    return 2.0 * (width + height) / node_budget;
}

/// Bisect every element; labels inherited, h halves exactly.
inline BoundaryMesh refine_uniform(const BoundaryMesh& mesh) {
    BoundaryMesh m;
    m.vertices = mesh.vertices;
    m.scale = mesh.scale;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const int i0 = mesh.elements[e][0], i1 = mesh.elements[e][1];
        const int mid = static_cast<int>(m.vertices.size());
        m.vertices.push_back(0.5 * (mesh.vertices[i0] + mesh.vertices[i1]));
        m.elements.push_back({i0, mid});
        m.elements.push_back({mid, i1});
        m.part.push_back(mesh.part[e]);
        m.part.push_back(mesh.part[e]);
    }
    detail::finalize_mesh(m);
    return m;
}

/// Shrink (never grow) so the polygon fits in a disc of radius <= 0.45,
/// keeping the single layer operator positive definite. Returns the factor
/// actually applied; mesh.scale accumulates it.
inline double scale_mesh_for_capacity(BoundaryMesh& mesh, double target_radius = 0.45) {
    Eigen::Vector2d lo = mesh.vertices.front(), hi = lo;
    for (const auto& v : mesh.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const Eigen::Vector2d c = 0.5 * (lo + hi);
    double radius = 0.0;
    for (const auto& v : mesh.vertices) radius = std::max(radius, (v - c).norm());
    const double s = (radius > target_radius) ? target_radius / radius : 1.0;
    if (s < 1.0)
        for (auto& v : mesh.vertices) v *= s;
    mesh.scale *= s;
    return s;
}

/// Dual (midpoint) partition of Gamma_C: one cell per free contact node.
/// Cells are contiguous arclength intervals along the contact chain; a cell
/// owned by a Dirichlet-constrained node is appended to its free neighbour.
struct DualMesh {
    std::vector<int> chain;            // contact chain node ids, in loop order
    std::vector<double> arclength;     // of chain nodes (stored units)
    std::vector<int> owner;            // free contact node per cell
    std::vector<double> cell_lo, cell_hi;  // arclength interval per cell
    std::vector<Eigen::Vector2d> owner_normal;

    double weight(size_t cell) const { return cell_hi[cell] - cell_lo[cell]; }
    double total() const {
        double s = 0.0;
        for (size_t i = 0; i < owner.size(); ++i) s += weight(i);
        return s;
    }
    /// point on the chain at a given arclength (linear in each edge)
    Eigen::Vector2d point_at(const BoundaryMesh& mesh, double s) const {
        for (size_t k = 0; k + 1 < chain.size(); ++k) {
            if (s <= arclength[k + 1] + 1e-14 || k + 2 == chain.size()) {
                const double t = (s - arclength[k]) / (arclength[k + 1] - arclength[k]);
                return mesh.vertices[chain[k]] + t * (mesh.vertices[chain[k + 1]] - mesh.vertices[chain[k]]);
            }
        }
        throw std::logic_error("DualMesh::point_at: arclength out of range");
    }
};

inline DualMesh build_dual_mesh(const BoundaryMesh& mesh) {
    // collect the contact elements; they must form one contiguous chain in
    // loop order
    const int ne = mesh.num_elements();
    int first = -1;
    for (int e = 0; e < ne; ++e)
        if (mesh.part[e] == Part::Contact && mesh.part[(e + ne - 1) % ne] != Part::Contact) first = e;
    int ncontact = 0;
    for (int e = 0; e < ne; ++e) ncontact += mesh.part[e] == Part::Contact;
    if (ncontact == 0) throw std::invalid_argument("build_dual_mesh: Gamma_C is empty");
    if (first < 0) throw std::invalid_argument("build_dual_mesh: Gamma_C covers the whole boundary loop");
    std::vector<int> cel;
    for (int k = 0; k < ncontact; ++k) {
        const int e = (first + k) % ne;
        if (mesh.part[e] != Part::Contact)
            throw std::invalid_argument("build_dual_mesh: Gamma_C is not a single chain");
        cel.push_back(e);
    }

    DualMesh d;
    d.chain.push_back(mesh.elements[cel.front()][0]);
    d.arclength.push_back(0.0);
    for (int e : cel) {
        d.chain.push_back(mesh.elements[e][1]);
        d.arclength.push_back(d.arclength.back() + mesh.element_length(e));
    }
    const size_t nn = d.chain.size();
    // midpoint cells; chain endpoints are polygon vertices and get half edges
    std::vector<double> lo(nn), hi(nn);
    for (size_t k = 0; k < nn; ++k) {
        lo[k] = (k == 0) ? d.arclength.front() : 0.5 * (d.arclength[k - 1] + d.arclength[k]);
        hi[k] = (k + 1 == nn) ? d.arclength.back() : 0.5 * (d.arclength[k] + d.arclength[k + 1]);
    }
    // merge Dirichlet-owned cells into their free neighbour
    std::vector<char> free_node(nn);
    for (size_t k = 0; k < nn; ++k) free_node[k] = !mesh.dirichlet_node[d.chain[k]];
    for (size_t k = 0; k < nn; ++k) {
        if (free_node[k]) continue;
        if (k + 1 < nn && free_node[k + 1]) lo[k + 1] = lo[k];
        else if (k > 0 && free_node[k - 1]) hi[k - 1] = hi[k];
        else throw std::invalid_argument("build_dual_mesh: no free contact node");
    }
    for (size_t k = 0; k < nn; ++k) {
        if (!free_node[k]) continue;
        d.owner.push_back(d.chain[k]);
        d.cell_lo.push_back(lo[k]);
        d.cell_hi.push_back(hi[k]);
        // owning element: the contact element touching the node (prefer the
        // preceding one inside the chain so the corner at the chain end uses
        // its own edge)
        const int e = (k > 0) ? cel[k - 1] : cel[0];
        d.owner_normal.push_back(mesh.normal[e]);
    }
    return d;
}

/// Debug dump: node id, x, y, part, constrained-flag (physical units).
inline void dump_mesh_csv(const BoundaryMesh& mesh, std::ostream& os) {
    std::vector<int> node_part(mesh.num_nodes(), 1);  // 0=D,1=N,2=C
    for (int e = 0; e < mesh.num_elements(); ++e) {
        for (int v : mesh.elements[e]) {
            const int p = mesh.part[e] == Part::Dirichlet ? 0 : mesh.part[e] == Part::Contact ? 2 : 1;
            if (p == 0 || (p == 2 && node_part[v] != 0)) node_part[v] = p;
        }
    }
    os << "node,x_mm,y_mm,part,constrained\n";
    const double inv = 1.0 / mesh.scale;
    char buf[160];
    for (int i = 0; i < mesh.num_nodes(); ++i) {
        const char* pn = node_part[i] == 0 ? "dirichlet" : node_part[i] == 2 ? "contact" : "neumann";
        std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%s,%d\n", i, mesh.vertices[i].x() * inv,
                      mesh.vertices[i].y() * inv, pn, static_cast<int>(mesh.dirichlet_node[i]));
        os << buf;
    }
}

}  // namespace adhbem
