#pragma once

#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

namespace adhbem {

struct TrustRegionConfig {
    int max_iterations = 100;
    double merit_tolerance = 1e-14;     // scaled by the problem size
    double gradient_tolerance = 1e-10;
    double initial_damping = 1e-10;     // tiny damping: first step ~ Gauss-Newton
    double damping_growth = 2.0;
    double damping_shrink_floor = 1.0 / 3.0;
    double max_damping = 1e18;
    double min_step = 1e-14;            // relative step-norm collapse threshold
    std::ostream* log = nullptr;        // per-iteration log target
};

enum class Termination { MeritTol, GradientTol, MaxIter, RadiusCollapse, InputError };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::MeritTol: return "merit_tol";
        case Termination::GradientTol: return "gradient_tol";
        case Termination::MaxIter: return "max_iter";
        case Termination::RadiusCollapse: return "radius_collapse";
        case Termination::InputError: return "input_error";
    }
    return "?";
}

struct SolveReport {
    int iterations = 0;
    double merit = 0.0;
    double gradient_norm = 0.0;
    std::vector<double> merit_history;  // nonincreasing across accepted steps
    Termination reason = Termination::MaxIter;
};

/// Damped Gauss-Newton / Levenberg-Marquardt minimization of 1/2 ||F||^2.
/// The damped step solves min ||J d + F||^2 + mu ||D d||^2 through a stacked
/// QR factorization (never the normal equations); D carries the column norms
/// of J. Damping adapts by the gain ratio; accepted steps strictly decrease
/// the merit.
template <class Residual, class Jacobian>
std::pair<Eigen::VectorXd, SolveReport> levenberg_marquardt(const Residual& residual, const Jacobian& jacobian,
                                                            Eigen::VectorXd z, const TrustRegionConfig& cfg = {}) {
    SolveReport rep;
    const int nz = static_cast<int>(z.size());
    Eigen::VectorXd F = residual(z);
    if (!F.allFinite()) throw std::invalid_argument("levenberg_marquardt: non-finite residual at start");
    Eigen::MatrixXd J = jacobian(z);
    double theta = 0.5 * F.squaredNorm();
    rep.merit_history.push_back(theta);
    double mu = cfg.initial_damping;
    double growth = cfg.damping_growth;
    const double merit_tol = cfg.merit_tolerance * nz;

    Eigen::MatrixXd stacked(F.size() + nz, nz);
    Eigen::VectorXd rhs(F.size() + nz);
    for (int it = 0; it < cfg.max_iterations; ++it) {
        const Eigen::VectorXd g = J.transpose() * F;
        rep.gradient_norm = g.cwiseAbs().maxCoeff();
        if (theta <= merit_tol) {
            rep.reason = Termination::MeritTol;
            break;
        }
        if (rep.gradient_norm <= cfg.gradient_tolerance) {
            rep.reason = Termination::GradientTol;
            break;
        }
        Eigen::VectorXd coln = J.colwise().norm();
        const double cmax = coln.maxCoeff();
        coln = coln.cwiseMax(cmax > 0 ? 1e-12 * cmax : 1.0);

        bool accepted = false;
        while (true) {
            stacked.topRows(F.size()) = J;
            stacked.bottomRows(nz) = (std::sqrt(mu) * coln).asDiagonal();
            rhs.head(F.size()) = -F;
            rhs.tail(nz).setZero();
            const Eigen::VectorXd dz = stacked.colPivHouseholderQr().solve(rhs);
            if (!dz.allFinite()) {
                mu = std::max(mu * 4.0, 1e-12);
                if (mu > cfg.max_damping) break;
                continue;
            }
            const Eigen::VectorXd zn = z + dz;
            const Eigen::VectorXd Fn = residual(zn);
            const double thn = Fn.allFinite() ? 0.5 * Fn.squaredNorm() : std::numeric_limits<double>::infinity();
            const Eigen::VectorXd Jdz = J * dz;
            const double predicted = -(F.dot(Jdz) + 0.5 * Jdz.squaredNorm());
            const double rho = (theta - thn) / std::max(predicted, 1e-300);
            if (thn < theta) {
                if (cfg.log)
                    (*cfg.log) << "lm it " << it << " merit " << thn << " damping " << mu
                               << " step " << dz.norm() << "\n";
                if (dz.norm() < cfg.min_step * (1.0 + z.norm())) {
                    z = zn;
                    F = residual(z);
                    theta = 0.5 * F.squaredNorm();
                    rep.merit_history.push_back(theta);
                    rep.reason = Termination::RadiusCollapse;
                    rep.iterations = it + 1;
                    rep.merit = theta;
                    rep.gradient_norm = (jacobian(z).transpose() * F).cwiseAbs().maxCoeff();
                    return {z, rep};
                }
                z = zn;
                F = Fn;
                J = jacobian(z);
                theta = thn;
                mu = std::max(mu * std::max(cfg.damping_shrink_floor, 1.0 - std::pow(2.0 * rho - 1.0, 3)),
                              1e-14 * cfg.initial_damping);
                growth = cfg.damping_growth;
                accepted = true;
                rep.merit_history.push_back(theta);
                break;
            }
            mu = std::max(mu * growth, cfg.initial_damping);
            growth *= 2.0;
            if (mu > cfg.max_damping) break;
        }
        rep.iterations = it + 1;
        if (!accepted) {
            rep.reason = Termination::RadiusCollapse;
            break;
        }
        if (it + 1 == cfg.max_iterations) rep.reason = Termination::MaxIter;
    }
    rep.merit = theta;
    rep.gradient_norm = (J.transpose() * F).cwiseAbs().maxCoeff();
    if (theta <= merit_tol) rep.reason = Termination::MeritTol;
    return {z, rep};
}

/// merit 1/2||F||^2 and its gradient J^T F at z.
template <class Residual, class Jacobian>
std::pair<double, Eigen::VectorXd> merit_and_gradient(const Residual& residual, const Jacobian& jacobian,
                                                      const Eigen::VectorXd& z) {
    const Eigen::VectorXd F = residual(z);
    return {0.5 * F.squaredNorm(), jacobian(z).transpose() * F};
}

}  // namespace adhbem
