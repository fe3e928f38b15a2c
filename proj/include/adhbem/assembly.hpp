#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "adhbem/elastic.hpp"
#include "adhbem/mesh.hpp"
#include "adhbem/quadrature.hpp"

namespace adhbem {

/// Outer (test-side) quadrature choices. Inner integrals are analytic.
struct QuadratureConfig {
    int far_order = 12;        // plain Gauss for well-separated pairs
    int near_order = 10;       // per sub-interval of graded rules
    int adjacent_levels = 8;   // dyadic levels toward a shared vertex
    int near_levels = 4;       // dyadic levels for close non-touching pairs
    double near_factor = 2.0;  // "close" = centroid distance < factor*max(L)
};

/// Galerkin matrices of the boundary integral operators.
///   V: piecewise-constant vector densities (2E x 2E), symmetric
///   K: pw-linear displacements -> pw-constant test (2E x 2N)
///   I: mass coupling of the same spaces (2E x 2N)
///   W: pw-linear displacements (2N x 2N), symmetric positive semidefinite
struct OperatorBlocks {
    Eigen::MatrixXd V, K, I, W;
};

namespace detail {

enum class PairKind { Self, Adjacent, Far, Near };

struct PairInfo {
    PairKind kind;
    int outer_end;  // endpoint of the test element nearest the singularity
};

inline PairInfo classify_pair(const BoundaryMesh& m, int e, int f, const QuadratureConfig& cfg) {
    if (e == f) return {PairKind::Self, 0};
    const auto& ee = m.elements[e];
    const auto& fe = m.elements[f];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            if (ee[i] == fe[j]) return {PairKind::Adjacent, i};
    const double dist = (m.element_midpoint(e) - m.element_midpoint(f)).norm();
    const double len = std::max(m.element_length(e), m.element_length(f));
    if (dist < cfg.near_factor * len) {
        const Eigen::Vector2d fm = m.element_midpoint(f);
        const double d0 = (m.vertices[ee[0]] - fm).norm();
        const double d1 = (m.vertices[ee[1]] - fm).norm();
        return {PairKind::Near, d0 < d1 ? 0 : 1};
    }
    return {PairKind::Far, 0};
}

struct Rules {
    GaussRule far, near;
    explicit Rules(const QuadratureConfig& c) : far(c.far_order), near(c.near_order) {}
};

inline SegmentQuadrature outer_rule(const BoundaryMesh& m, int e, const PairInfo& pi,
                                    const QuadratureConfig& cfg, const Rules& rules) {
    const Eigen::Vector2d a = m.vertices[m.elements[e][0]];
    const Eigen::Vector2d b = m.vertices[m.elements[e][1]];
    switch (pi.kind) {
        case PairKind::Adjacent: return graded_rule(a, b, pi.outer_end, cfg.adjacent_levels, rules.near);
        case PairKind::Near: return graded_rule(a, b, pi.outer_end, cfg.near_levels, rules.near);
        default: return plain_rule(a, b, rules.far);
    }
}

inline void check_finite(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite()) throw std::runtime_error(std::string(what) + ": non-finite entries in assembly");
}

}  // namespace detail

/// Single layer Galerkin matrix <V psi_j, psi_i>; self blocks analytic,
/// touching/near pairs by graded outer rules over the exact inner integral.
inline Eigen::MatrixXd assemble_single_layer(const BoundaryMesh& mesh, const LameParameters& par,
                                             const QuadratureConfig& cfg = {}) {
    const int E = mesh.num_elements();
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(2 * E, 2 * E);
    const detail::Rules rules(cfg);
    const double c1 = par.log_coeff(), c3 = par.dyad_coeff();
    for (int e = 0; e < E; ++e) {
        const SegmentFrame fe(mesh.vertices[mesh.elements[e][0]], mesh.vertices[mesh.elements[e][1]]);
        for (int f = e; f < E; ++f) {
            Mat2 blk;
            if (f == e) {
                // int int log|s-t| = L^2 (log L - 3/2); rhat = +-d on the segment
                blk = c1 * fe.L * fe.L * (1.5 - std::log(fe.L)) * Mat2::Identity()
                    + c3 * fe.L * fe.L * (fe.d * fe.d.transpose());
            } else {
                const auto pi = detail::classify_pair(mesh, e, f, cfg);
                const auto q = detail::outer_rule(mesh, e, pi, cfg, rules);
                const SegmentFrame ff(mesh.vertices[mesh.elements[f][0]], mesh.vertices[mesh.elements[f][1]]);
                blk.setZero();
                for (size_t k = 0; k < q.points.size(); ++k)
                    blk += q.weights[k] * inner_log_dyad(q.points[k], ff, c1, c3);
            }
            V.block<2, 2>(2 * e, 2 * f) = blk;
            if (f != e) V.block<2, 2>(2 * f, 2 * e) = blk.transpose();
        }
    }
    detail::check_finite(V, "assemble_single_layer");
    return V;
}

/// Double layer Galerkin matrix <K phi_j, psi_i>; the flat self contribution
/// is the Cauchy principal value, computed in closed form.
inline Eigen::MatrixXd assemble_double_layer(const BoundaryMesh& mesh, const LameParameters& par,
                                             const QuadratureConfig& cfg = {}) {
    const int E = mesh.num_elements();
    const int N = mesh.num_nodes();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(2 * E, 2 * N);
    const detail::Rules rules(cfg);
    for (int e = 0; e < E; ++e) {
        for (int f = 0; f < E; ++f) {
            const int j0 = mesh.elements[f][0], j1 = mesh.elements[f][1];
            Mat2 blk[2];
            if (f == e) {
                // CPV of the skew 1/(s_y - s_x) kernel against linear weights
                const SegmentFrame fr(mesh.vertices[j0], mesh.vertices[j1]);
                const Mat2 A = par.mu / (2.0 * std::numbers::pi * (par.lambda + 2.0 * par.mu))
                             * (fr.d * fr.n.transpose() - fr.n * fr.d.transpose());
                blk[0] = A * (-0.5 * fr.L);
                blk[1] = A * (0.5 * fr.L);
            } else {
                const auto pi = detail::classify_pair(mesh, e, f, cfg);
                const auto q = detail::outer_rule(mesh, e, pi, cfg, rules);
                const SegmentFrame fr(mesh.vertices[j0], mesh.vertices[j1]);
                blk[0].setZero();
                blk[1].setZero();
                Mat2 part[2];
                for (size_t k = 0; k < q.points.size(); ++k) {
                    inner_double_layer(q.points[k], fr, par, part);
                    blk[0] += q.weights[k] * part[0];
                    blk[1] += q.weights[k] * part[1];
                }
            }
            K.block<2, 2>(2 * e, 2 * j0) += blk[0];
            K.block<2, 2>(2 * e, 2 * j1) += blk[1];
        }
    }
    detail::check_finite(K, "assemble_double_layer");
    return K;
}

/// Mass coupling <phi_j, psi_i>, exact for the linear x constant product.
inline Eigen::MatrixXd assemble_mass(const BoundaryMesh& mesh) {
    const int E = mesh.num_elements();
    const int N = mesh.num_nodes();
    Eigen::MatrixXd I = Eigen::MatrixXd::Zero(2 * E, 2 * N);
    for (int e = 0; e < E; ++e) {
        const double half = 0.5 * mesh.element_length(e);
        for (int v : mesh.elements[e]) {
            I(2 * e, 2 * v) += half;
            I(2 * e + 1, 2 * v + 1) += half;
        }
    }
    return I;
}

/// Hypersingular Galerkin matrix through the integration-by-parts
/// representation <W u, v> = cw * int int  dv/ds . [log(1/r) I + rhat rhat^T] du/ds,
/// cw = mu (lambda+mu) / (pi (lambda+2 mu)). Only weakly singular integrals
/// are evaluated; rigid motions lie in the kernel.
inline Eigen::MatrixXd assemble_hypersingular(const BoundaryMesh& mesh, const LameParameters& par,
                                              const QuadratureConfig& cfg = {}) {
    const int E = mesh.num_elements();
    const int N = mesh.num_nodes();
    const double cw = par.hyper_coeff();
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    const detail::Rules rules(cfg);
    auto scatter = [&](int e, int f, const Mat2& blk) {
        // d/ds of a hat is -1/L at the start node, +1/L at the end node
        const double se = 1.0 / mesh.element_length(e);
        const double sf = 1.0 / mesh.element_length(f);
        const int en[2] = {mesh.elements[e][0], mesh.elements[e][1]};
        const int fn[2] = {mesh.elements[f][0], mesh.elements[f][1]};
        const double sg[2] = {-1.0, 1.0};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                W.block<2, 2>(2 * en[i], 2 * fn[j]) += (sg[i] * se) * (sg[j] * sf) * blk;
    };
    for (int e = 0; e < E; ++e) {
        for (int f = e; f < E; ++f) {
            Mat2 blk;
            if (f == e) {
                const SegmentFrame fr(mesh.vertices[mesh.elements[e][0]], mesh.vertices[mesh.elements[e][1]]);
                blk = cw * fr.L * fr.L * ((1.5 - std::log(fr.L)) * Mat2::Identity() + fr.d * fr.d.transpose());
            } else {
                const auto pi = detail::classify_pair(mesh, e, f, cfg);
                const auto q = detail::outer_rule(mesh, e, pi, cfg, rules);
                const SegmentFrame fr(mesh.vertices[mesh.elements[f][0]], mesh.vertices[mesh.elements[f][1]]);
                blk.setZero();
                for (size_t k = 0; k < q.points.size(); ++k)
                    blk += q.weights[k] * inner_log_dyad(q.points[k], fr, cw, cw);
            }
            scatter(e, f, blk);
            if (f != e) scatter(f, e, blk.transpose());
        }
    }
    detail::check_finite(W, "assemble_hypersingular");
    return W;
}

inline OperatorBlocks assemble_operator_blocks(const BoundaryMesh& mesh, const LameParameters& par,
                                               const QuadratureConfig& cfg = {}) {
    OperatorBlocks b;
    b.V = assemble_single_layer(mesh, par, cfg);
    b.K = assemble_double_layer(mesh, par, cfg);
    b.I = assemble_mass(mesh);
    b.W = assemble_hypersingular(mesh, par, cfg);
    return b;
}

}  // namespace adhbem
