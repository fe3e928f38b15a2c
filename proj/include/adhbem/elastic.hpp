#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace adhbem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Material constants of 2D linear elasticity. The Lame constants follow
/// lambda = E nu / (1 - nu^2), mu = E / (1 + nu); Hooke's law is
/// sigma = 2 mu eps + lambda div(u) I throughout.
struct LameParameters {
    double lambda = 0.0;
    double mu = 0.0;

    double log_coeff() const { return (lambda + 3.0 * mu) / (4.0 * std::numbers::pi * mu * (lambda + 2.0 * mu)); }
    double dyad_coeff() const { return (lambda + mu) / (4.0 * std::numbers::pi * mu * (lambda + 2.0 * mu)); }
    /// coefficient of the tangential-derivative form of the hypersingular operator
    double hyper_coeff() const { return mu * (lambda + mu) / (std::numbers::pi * (lambda + 2.0 * mu)); }
};

inline LameParameters lame_from_engineering(double youngs, double poisson) {
    if (!(youngs > 0.0)) throw std::domain_error("lame_from_engineering: E must be positive");
    if (!(poisson > 0.0 && poisson < 0.5)) throw std::domain_error("lame_from_engineering: nu must be in (0, 0.5)");
    LameParameters p;
    p.lambda = youngs * poisson / (1.0 - poisson * poisson);
    p.mu = youngs / (1.0 + poisson);
    return p;
}

inline LameParameters lame_explicit(double lambda, double mu) {
    if (!(lambda > 0.0 && mu > 0.0)) throw std::domain_error("lame_explicit: constants must be positive");
    return LameParameters{lambda, mu};
}

/// Kelvin fundamental solution of the 2D Navier-Lame equation,
/// E(x,y) = c1 log(1/r) I + c3 rhat rhat^T.  Symmetric in x<->y.
inline Mat2 fundamental_solution(const Vec2& x, const Vec2& y, const LameParameters& p) {
    const Vec2 d = x - y;
    const double r2 = d.squaredNorm();
    if (r2 == 0.0) throw std::domain_error("fundamental_solution: x == y");
    return p.log_coeff() * (-0.5 * std::log(r2)) * Mat2::Identity()
         + p.dyad_coeff() * (d * d.transpose()) / r2;
}

/// Traction operator applied (w.r.t. y, normal n_y) to each column of E(x,.).
/// For x inside a closed contour, the contour integral of this kernel is -I.
inline Mat2 traction_kernel(const Vec2& x, const Vec2& y, const Vec2& n_y, const LameParameters& p) {
    const Vec2 d = y - x;
    const double r = d.norm();
    if (r == 0.0) throw std::domain_error("traction_kernel: x == y");
    const Vec2 rh = d / r;
    const double rn = rh.dot(n_y);
    const double c = 1.0 / (2.0 * std::numbers::pi * (p.lambda + 2.0 * p.mu) * r);
    return c * (-p.mu * rn * Mat2::Identity()
                - p.mu * rh * n_y.transpose()
                + p.mu * n_y * rh.transpose()
                - 2.0 * (p.lambda + p.mu) * rn * rh * rh.transpose());
}

/// Kernel of the double layer potential K: the transpose of traction_kernel,
/// as required by the Somigliana representation.
inline Mat2 double_layer_kernel(const Vec2& x, const Vec2& y, const Vec2& n_y, const LameParameters& p) {
    return traction_kernel(x, y, n_y, p).transpose();
}

/// sigma(u) n for the linear field u(x) = A x.
inline Vec2 linear_field_traction(const Mat2& grad, const Vec2& n, const LameParameters& p) {
    const Mat2 sig = p.mu * (grad + grad.transpose()) + p.lambda * grad.trace() * Mat2::Identity();
    return sig * n;
}

}  // namespace adhbem
