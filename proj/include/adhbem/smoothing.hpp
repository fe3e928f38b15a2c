#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace adhbem {

/// Convolution smoothing of the plus function p(t) = max{t, 0} with the Zang
/// density (uniform on [-1/2, 1/2], first absolute moment kappa = 1/4).
inline double plus_smoothing(double eps, double t) {
    if (!(eps > 0.0)) throw std::domain_error("plus_smoothing: eps must be positive");
    if (t < -0.5 * eps) return 0.0;
    if (t > 0.5 * eps) return t;
    const double a = t + 0.5 * eps;
    return a * a / (2.0 * eps);
}

inline double plus_smoothing_derivative(double eps, double t) {
    if (!(eps > 0.0)) throw std::domain_error("plus_smoothing_derivative: eps must be positive");
    if (t < -0.5 * eps) return 0.0;
    if (t > 0.5 * eps) return 1.0;
    return (t + 0.5 * eps) / eps;
}

/// Second derivative, right-continuous at the two kinks.
inline double plus_smoothing_curvature(double eps, double t) {
    if (!(eps > 0.0)) throw std::domain_error("plus_smoothing_curvature: eps must be positive");
    return (t >= -0.5 * eps && t < 0.5 * eps) ? 1.0 / eps : 0.0;
}

constexpr double kZangMoment = 0.25;

/// One smooth branch g_i with slope and curvature.
struct BranchFunction {
    std::function<double(double)> value;
    std::function<double(double)> slope;
    std::function<double(double)> curvature;
};

/// Evaluation of the nested smoothing of f = max{g_1, ..., g_m} in the
/// stored branch order:
///   S = g_1 + P(eps, g_2 - g_1 + P(eps, ... + P(eps, g_m - g_{m-1}))).
struct SmoothedEval {
    double value, slope, curvature;
};

struct SmoothedPotential {
    std::vector<BranchFunction> branches;
    double moment = kZangMoment;  // first absolute moment of the density

    int num_branches() const { return static_cast<int>(branches.size()); }

    /// uniform approximation bound (m-1) kappa eps of the lemma
    double bound(double eps) const { return (num_branches() - 1) * moment * eps; }

    double max_value(double x) const {
        double v = branches.front().value(x);
        for (const auto& b : branches) v = std::max(v, b.value(x));
        return v;
    }

    SmoothedEval evaluate(double eps, double x) const {
        if (branches.empty()) throw std::logic_error("SmoothedPotential: no branches");
        const int m = num_branches();
        double A = 0.0, Ap = 0.0, App = 0.0;
        for (int i = m - 1; i >= 1; --i) {
            const double D = branches[i].value(x) - branches[i - 1].value(x) + A;
            const double Dp = branches[i].slope(x) - branches[i - 1].slope(x) + Ap;
            const double Dpp = branches[i].curvature(x) - branches[i - 1].curvature(x) + App;
            const double P1 = plus_smoothing_derivative(eps, D);
            App = plus_smoothing_curvature(eps, D) * Dp * Dp + P1 * Dpp;
            Ap = P1 * Dp;
            A = plus_smoothing(eps, D);
        }
        return {branches[0].value(x) + A, branches[0].slope(x) + Ap, branches[0].curvature(x) + App};
    }

    double value(double eps, double x) const { return evaluate(eps, x).value; }
    double derivative(double eps, double x) const { return evaluate(eps, x).slope; }
};

inline BranchFunction quadratic_branch(double a2, double a0) {
    // a2 x^2 + a0
    return {[a2, a0](double x) { return a2 * x * x + a0; },
            [a2](double x) { return 2.0 * a2 * x; },
            [a2](double) { return 2.0 * a2; }};
}

inline BranchFunction constant_branch(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

}  // namespace adhbem
