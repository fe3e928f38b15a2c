#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "adhbem/assembly.hpp"
#include "adhbem/mesh.hpp"

namespace adhbem {

/// Discrete Poincare-Steklov (Dirichlet-to-Neumann) system on the free
/// displacement dofs, with the Neumann load vector in the same numbering.
/// Thanks to the 2D scale invariance of the elastic energy, P assembled on
/// the capacity-scaled mesh acts directly on physical displacements.
struct SteklovSystem {
    Eigen::MatrixXd P;                 // symmetric, free dofs only
    Eigen::VectorXd load;
    std::vector<int> dof_of_node;      // 2*node+c -> dof index or -1
    std::vector<int> node_of_dof;      // dof -> 2*node+c
    double asymmetry = 0.0;            // pre-symmetrization relative defect
    Eigen::LLT<Eigen::MatrixXd> chol;  // factor of P, kept for repeated solves

    int size() const { return static_cast<int>(P.rows()); }

    Eigen::VectorXd restrict_nodal(const Eigen::VectorXd& full) const {
        Eigen::VectorXd r(size());
        for (int k = 0; k < size(); ++k) r[k] = full[node_of_dof[k]];
        return r;
    }
    Eigen::VectorXd expand_to_nodal(const Eigen::VectorXd& free) const {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(dof_of_node.size());
        for (int k = 0; k < size(); ++k) full[node_of_dof[k]] = free[k];
        return full;
    }
};

/// P_h = W_h + (K_h + I_h/2)^T V_h^{-1} (K_h + I_h/2), restricted to the
/// dofs not on the closure of Gamma_D. V is inverted through its Cholesky
/// factor; failure means the mesh was not capacity-scaled.
inline SteklovSystem assemble_steklov(const OperatorBlocks& blocks, const BoundaryMesh& mesh) {
    const int N = mesh.num_nodes();
    Eigen::LLT<Eigen::MatrixXd> vchol(blocks.V);
    if (vchol.info() != Eigen::Success)
        throw std::runtime_error("assemble_steklov: V_h is not SPD (domain not capacity-scaled?)");
    const Eigen::MatrixXd B = blocks.K + 0.5 * blocks.I;
    Eigen::MatrixXd Pfull = blocks.W + B.transpose() * vchol.solve(B);

    SteklovSystem s;
    s.dof_of_node.assign(2 * N, -1);
    for (int i = 0; i < N; ++i) {
        if (mesh.dirichlet_node[i]) continue;
        for (int c = 0; c < 2; ++c) {
            s.dof_of_node[2 * i + c] = static_cast<int>(s.node_of_dof.size());
            s.node_of_dof.push_back(2 * i + c);
        }
    }
    const int n = static_cast<int>(s.node_of_dof.size());
    s.P.resize(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) s.P(a, b) = Pfull(s.node_of_dof[a], s.node_of_dof[b]);
    s.asymmetry = (s.P - s.P.transpose()).cwiseAbs().maxCoeff()
                / std::max(1e-300, s.P.cwiseAbs().maxCoeff());
    s.P = 0.5 * (s.P + s.P.transpose()).eval();
    s.load = Eigen::VectorXd::Zero(n);
    s.chol.compute(s.P);
    return s;
}

/// Load vector g_i = int_{Gamma_N} t . phi_i ds from a traction field given
/// in physical units at physical positions; integrates with physical element
/// lengths so the result pairs with physical displacements.
inline Eigen::VectorXd assemble_neumann_load(const BoundaryMesh& mesh, const SteklovSystem& sys,
                                             const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& traction,
                                             int gauss_order = 4) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(sys.size());
    const GaussRule rule(gauss_order);
    const double inv = 1.0 / mesh.scale;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (mesh.part[e] != Part::Neumann) continue;
        const int i0 = mesh.elements[e][0], i1 = mesh.elements[e][1];
        const double L = mesh.element_length(e) * inv;
        for (size_t k = 0; k < rule.x.size(); ++k) {
            const double s = 0.5 * (rule.x[k] + 1.0);
            const Eigen::Vector2d xphys = inv * (mesh.vertices[i0] + s * (mesh.vertices[i1] - mesh.vertices[i0]));
            const Eigen::Vector2d t = traction(xphys);
            const double w = 0.5 * rule.w[k] * L;
            for (int c = 0; c < 2; ++c) {
                if (const int d0 = sys.dof_of_node[2 * i0 + c]; d0 >= 0) g[d0] += w * (1.0 - s) * t[c];
                if (const int d1 = sys.dof_of_node[2 * i1 + c]; d1 >= 0) g[d1] += w * s * t[c];
            }
        }
    }
    return g;
}

/// Per-element constant traction list variant; rejects tractions prescribed
/// off Gamma_N.
inline Eigen::VectorXd assemble_neumann_load(const BoundaryMesh& mesh, const SteklovSystem& sys,
                                             const std::vector<std::pair<int, Eigen::Vector2d>>& per_element) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(sys.size());
    const double inv = 1.0 / mesh.scale;
    for (const auto& [e, t] : per_element) {
        if (e < 0 || e >= mesh.num_elements()) throw std::invalid_argument("assemble_neumann_load: bad element id");
        if (mesh.part[e] != Part::Neumann)
            throw std::invalid_argument("assemble_neumann_load: traction prescribed on a non-Neumann element");
        const double half = 0.5 * mesh.element_length(e) * inv;
        for (int c = 0; c < 2; ++c)
            for (int v : mesh.elements[e])
                if (const int d = sys.dof_of_node[2 * v + c]; d >= 0) g[d] += half * t[c];
    }
    return g;
}

/// Energy norm sqrt(x^T P x); a noticeably negative quadratic form signals
/// a broken assembly.
inline double energy_norm(const SteklovSystem& sys, const Eigen::VectorXd& x) {
    const double q = x.dot(sys.P * x);
    const double scale = sys.P.cwiseAbs().maxCoeff() * x.squaredNorm();
    if (q < -1e-12 * std::max(scale, 1e-300))
        throw std::runtime_error("energy_norm: negative quadratic form; P_h assembly is inconsistent");
    return std::sqrt(std::max(q, 0.0));
}

/// Calderon density traction t = V^{-1}(K + I/2) u on the element space;
/// the per-element traction content of P_h u (physical units).
inline Eigen::MatrixXd density_traction(const OperatorBlocks& blocks, const BoundaryMesh& mesh,
                                        const Eigen::VectorXd& u_nodal) {
    Eigen::LLT<Eigen::MatrixXd> vchol(blocks.V);
    if (vchol.info() != Eigen::Success) throw std::runtime_error("density_traction: V_h not SPD");
    const Eigen::VectorXd t = vchol.solve((blocks.K + 0.5 * blocks.I) * u_nodal);
    Eigen::MatrixXd per_element(mesh.num_elements(), 2);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        per_element(e, 0) = t[2 * e];
        per_element(e, 1) = t[2 * e + 1];
    }
    // tractions on the scaled mesh are 1/scale times the physical ones
    return per_element * mesh.scale;
}

/// Dense row-major text dump for cross-checking against external codes.
inline void dump_matrix(const Eigen::MatrixXd& m, std::ostream& os) {
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            os << buf << (j + 1 == m.cols() ? '\n' : ' ');
        }
    }
}

}  // namespace adhbem
