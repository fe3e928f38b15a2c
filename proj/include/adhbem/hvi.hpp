#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "adhbem/adhesion.hpp"
#include "adhbem/mesh.hpp"
#include "adhbem/steklov.hpp"

namespace adhbem {

/// Fischer-Burmeister function: zero exactly on a >= 0, b >= 0, a b = 0.
inline double fb(double a, double b) { return std::hypot(a, b) - (a + b); }

/// Generalized gradient of fb; at the origin the element
/// (sqrt(2)/2 - 1, sqrt(2)/2 - 1) is used.
inline Eigen::Vector2d fb_gradient(double a, double b) {
    const double r = std::hypot(a, b);
    if (r < 1e-300) {
        const double g = std::sqrt(2.0) / 2.0 - 1.0;
        return {g, g};
    }
    return {a / r - 1.0, b / r - 1.0};
}

/// One free contact node in the residual system.
struct ContactEntry {
    int node;            // mesh node id
    int dof[2];          // free-dof indices of its displacement components
    Eigen::Vector2d n;   // owner-element outward normal
    double weight;       // dual cell length |K_i| (physical units)
};

/// The discrete regularized problem: Steklov block, adhesive law, smoothing
/// parameter and the lumped contact map. Immutable after construction.
struct DiscreteHVI {
    const SteklovSystem* steklov = nullptr;
    const AdhesionLaw* law = nullptr;
    double eps = 0.1;
    bool law_enabled = true;
    bool constraints_enabled = true;
    std::vector<ContactEntry> contact;

    int num_dofs() const { return steklov->size(); }
    int num_multipliers() const { return constraints_enabled ? static_cast<int>(contact.size()) : 0; }
    int size() const { return num_dofs() + num_multipliers(); }
};

inline DiscreteHVI make_discrete_hvi(const SteklovSystem& sys, const BoundaryMesh& mesh, const DualMesh& dual,
                                     const AdhesionLaw& law, double eps) {
    if (!(eps > 0.0)) throw std::domain_error("make_discrete_hvi: eps must be positive");
    DiscreteHVI p;
    p.steklov = &sys;
    p.law = &law;
    p.eps = eps;
    const double to_phys = 1.0 / mesh.scale;
    for (size_t k = 0; k < dual.owner.size(); ++k) {
        const int i = dual.owner[k];
        ContactEntry c;
        c.node = i;
        c.dof[0] = sys.dof_of_node[2 * i];
        c.dof[1] = sys.dof_of_node[2 * i + 1];
        if (c.dof[0] < 0 || c.dof[1] < 0) throw std::logic_error("make_discrete_hvi: constrained contact node");
        c.n = dual.owner_normal[k];
        c.weight = dual.weight(k) * to_phys;
        p.contact.push_back(c);
    }
    return p;
}

inline double normal_displacement(const DiscreteHVI& p, const Eigen::VectorXd& u, const ContactEntry& c) {
    return c.n[0] * u[c.dof[0]] + c.n[1] * u[c.dof[1]];
}

/// Lumped Gateaux derivative of the regularized adhesive functional:
/// contribution |K_i| S_x(eps, u_n(P_i)) n_i per free contact node, plus the
/// diagonal-block derivative for the Jacobian.
inline void assemble_dj(const DiscreteHVI& p, const Eigen::VectorXd& u, Eigen::VectorXd& contribution,
                        std::vector<Eigen::Matrix2d>* dblocks = nullptr) {
    contribution.setZero(p.num_dofs());
    if (dblocks) dblocks->assign(p.contact.size(), Eigen::Matrix2d::Zero());
    if (!p.law_enabled) return;
    for (size_t k = 0; k < p.contact.size(); ++k) {
        const auto& c = p.contact[k];
        const double un = normal_displacement(p, u, c);
        const SmoothedEval s = p.law->smoothed(p.eps, un);
        contribution[c.dof[0]] += c.weight * s.slope * c.n[0];
        contribution[c.dof[1]] += c.weight * s.slope * c.n[1];
        if (dblocks) (*dblocks)[k] = c.weight * s.curvature * (c.n * c.n.transpose());
    }
}

/// Stacked nonlinear residual: equilibrium rows P u + DJ(u) + B^T lambda - g
/// followed by the complementarity rows fb(lambda_i, -u_n(P_i)).
struct ResidualSystem {
    const DiscreteHVI* problem = nullptr;

    int size() const { return problem->size(); }

    Eigen::VectorXd residual(const Eigen::VectorXd& z) const {
        const DiscreteHVI& p = *problem;
        if (z.size() != p.size()) throw std::invalid_argument("ResidualSystem::residual: size mismatch");
        const int n = p.num_dofs();
        const Eigen::VectorXd u = z.head(n);
        Eigen::VectorXd F(p.size());
        Eigen::VectorXd dj;
        assemble_dj(p, u, dj);
        F.head(n) = p.steklov->P * u + dj - p.steklov->load;
        if (p.constraints_enabled) {
            for (size_t k = 0; k < p.contact.size(); ++k) {
                const auto& c = p.contact[k];
                const double lam = z[n + k];
                F[c.dof[0]] += lam * c.n[0];
                F[c.dof[1]] += lam * c.n[1];
                F[n + k] = fb(lam, -normal_displacement(p, u, c));
            }
        }
        return F;
    }

    Eigen::MatrixXd jacobian(const Eigen::VectorXd& z) const {
        const DiscreteHVI& p = *problem;
        if (z.size() != p.size()) throw std::invalid_argument("ResidualSystem::jacobian: size mismatch");
        const int n = p.num_dofs();
        const Eigen::VectorXd u = z.head(n);
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(p.size(), p.size());
        J.topLeftCorner(n, n) = p.steklov->P;
        Eigen::VectorXd dj;
        std::vector<Eigen::Matrix2d> blocks;
        assemble_dj(p, u, dj, &blocks);
        for (size_t k = 0; k < p.contact.size(); ++k) {
            const auto& c = p.contact[k];
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) J(c.dof[a], c.dof[b]) += blocks[k](a, b);
        }
        if (p.constraints_enabled) {
            for (size_t k = 0; k < p.contact.size(); ++k) {
                const auto& c = p.contact[k];
                const double lam = z[n + k];
                const double un = normal_displacement(p, u, c);
                J(c.dof[0], n + k) = c.n[0];
                J(c.dof[1], n + k) = c.n[1];
                const Eigen::Vector2d g = fb_gradient(lam, -un);
                J(n + k, n + k) = g[0];
                J(n + k, c.dof[0]) = -g[1] * c.n[0];
                J(n + k, c.dof[1]) = -g[1] * c.n[1];
            }
        }
        return J;
    }
};

/// max_i |min(lambda_i, -u_n(P_i))| -- zero exactly at complementarity.
inline double complementarity_error(const DiscreteHVI& p, const Eigen::VectorXd& z) {
    const int n = p.num_dofs();
    double worst = 0.0;
    for (size_t k = 0; k < p.contact.size(); ++k) {
        const double lam = p.constraints_enabled ? z[n + k] : 0.0;
        const double b = -normal_displacement(p, z.head(n), p.contact[k]);
        worst = std::max(worst, std::abs(std::min(lam, b)));
    }
    return worst;
}

/// Contact-node traction recovered from P_h u by the dual-cell lumping, with
/// the normal stress reported compression-positive:
/// sigma_n = -(traction . n). Units are physical (N/mm^2).
struct ContactStress {
    std::vector<int> node;
    std::vector<double> u_n, u_t, sigma_n, lambda;
};

inline ContactStress recover_contact_stress(const DiscreteHVI& p, const Eigen::VectorXd& z) {
    const DiscreteHVI& prob = p;
    const int n = prob.num_dofs();
    const Eigen::VectorXd u = z.head(n);
    const Eigen::VectorXd r = prob.steklov->P * u;  // nodal forces, no load
    ContactStress out;
    for (size_t k = 0; k < prob.contact.size(); ++k) {
        const auto& c = prob.contact[k];
        const Eigen::Vector2d force(r[c.dof[0]], r[c.dof[1]]);
        const Eigen::Vector2d traction = force / c.weight;
        const Eigen::Vector2d tvec(-c.n[1], c.n[0]);
        out.node.push_back(c.node);
        out.u_n.push_back(normal_displacement(prob, u, c));
        out.u_t.push_back(tvec[0] * u[c.dof[0]] + tvec[1] * u[c.dof[1]]);
        out.sigma_n.push_back(-traction.dot(c.n));
        out.lambda.push_back(prob.constraints_enabled ? z[n + k] : 0.0);
    }
    return out;
}

}  // namespace adhbem
