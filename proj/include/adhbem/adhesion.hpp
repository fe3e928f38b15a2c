#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "adhbem/smoothing.hpp"

namespace adhbem {

/// Parameters of the serrated adhesive law. The superpotential is
///   f(x) = min{ g_1(-x), ..., g_5(-x) },
/// g_1(y) = A1/(2 t1) y^2, g_i(y) = b_i (y^2 - t_{i-1}^2) + d_i (i=2..4),
/// g_5 = d5, with the d chain making f continuous at the crossovers.
struct AdhesionParams {
    double A1 = 0.5, A2 = 0.4375, A3 = 0.3125, A4 = 0.1875;  // N/mm^2
    double t1 = 0.1, t2 = 0.2, t3 = 0.3, t4 = 0.4;           // mm
};

struct ClarkeInterval {
    double lo, hi;
};

/// Min-type multibranch adhesive law with its nested smoothing. Stored as
/// the max representation -f(x) = max h_i(x), h_i(x) = -g_i(-x); the public
/// surface exposes f-side values.
///
/// Sign conventions used by the solver (documented once, here): the contact
/// condition is -sigma_n in df(u_n), equilibrium rows add
/// +|K_i| * slope_smoothed(eps, u_n) * n_i, and the reported contact stress
/// is compression-positive, so sigma_n = slope_smoothed(eps, u_n) at
/// lambda = 0 nodes.
class AdhesionLaw {
  public:
    explicit AdhesionLaw(const AdhesionParams& p = {}) : par_(p) {
        if (!(p.t1 > 0 && p.t2 > p.t1 && p.t3 > p.t2 && p.t4 > p.t3))
            throw std::domain_error("AdhesionLaw: crossover points must be positive and increasing");
        b2_ = p.A2 / (2 * p.t2);
        b3_ = p.A3 / (2 * p.t3);
        b4_ = p.A4 / (2 * p.t4);
        d2_ = p.A1 * p.t1 / 2;
        d3_ = b2_ * (p.t2 * p.t2 - p.t1 * p.t1) + d2_;
        d4_ = b3_ * (p.t3 * p.t3 - p.t2 * p.t2) + d3_;
        d5_ = b4_ * (p.t4 * p.t4 - p.t3 * p.t3) + d4_;
        // h_i(x) = -g_i(-x); quadratics in y are even, so h_i(x) = -g_i(x)
        pot_.branches = {
            quadratic_branch(-p.A1 / (2 * p.t1), 0.0),
            quadratic_branch(-b2_, b2_ * p.t1 * p.t1 - d2_),
            quadratic_branch(-b3_, b3_ * p.t2 * p.t2 - d3_),
            quadratic_branch(-b4_, b4_ * p.t3 * p.t3 - d4_),
            constant_branch(-d5_),
        };
    }

    const AdhesionParams& params() const { return par_; }
    const SmoothedPotential& potential() const { return pot_; }
    double d2() const { return d2_; }
    double d3() const { return d3_; }
    double d4() const { return d4_; }
    double d5() const { return d5_; }

    /// unregularized superpotential and its a.e. slope
    double value(double x) const { return -pot_.max_value(x); }
    double slope(double x) const {
        const double y = std::abs(x);
        const int i = branch_of(y);
        return branch_slope_y(i, y) * (x < 0 ? -1.0 : 1.0);
    }

    /// smoothed superpotential: value, slope, curvature at x
    SmoothedEval smoothed(double eps, double x) const {
        const SmoothedEval h = pot_.evaluate(eps, x);
        return {-h.value, -h.slope, -h.curvature};
    }
    double smoothed_value(double eps, double x) const { return smoothed(eps, x).value; }
    double smoothed_slope(double eps, double x) const { return smoothed(eps, x).slope; }

    /// Clarke subdifferential of the unregularized f at x (one-sided slopes)
    ClarkeInterval clarke(double x) const {
        const double h = 1e-12 * (1.0 + std::abs(x));
        const double lo = slope(x - h), hi = slope(x + h);
        return {std::min(lo, hi), std::max(lo, hi)};
    }

    double crossover(int i) const {
        switch (i) {
            case 1: return par_.t1;
            case 2: return par_.t2;
            case 3: return par_.t3;
            case 4: return par_.t4;
        }
        throw std::out_of_range("AdhesionLaw::crossover");
    }

  private:
    int branch_of(double y) const {
        if (y <= par_.t1) return 0;
        if (y <= par_.t2) return 1;
        if (y <= par_.t3) return 2;
        if (y <= par_.t4) return 3;
        return 4;
    }
    double branch_slope_y(int i, double y) const {
        switch (i) {
            case 0: return par_.A1 / par_.t1 * y;
            case 1: return 2 * b2_ * y;
            case 2: return 2 * b3_ * y;
            case 3: return 2 * b4_ * y;
            default: return 0.0;
        }
    }

    AdhesionParams par_;
    SmoothedPotential pot_;
    double b2_, b3_, b4_, d2_, d3_, d4_, d5_;
};

inline AdhesionLaw build_benchmark_adhesion(const AdhesionParams& p = {}) { return AdhesionLaw(p); }

/// One-sided Lipschitz constant estimate of df on a sample grid:
///   alpha_hat = max over pairs and subgradient endpoints of
///               -(xi* - eta*)(xi - eta)/|xi - eta|^2.
/// Grows without bound under grid refinement across downward jumps; that is
/// reported, not an error.
template <class SlopeIntervalFn>
double one_sided_lipschitz_estimate(const SlopeIntervalFn& clarke, const std::vector<double>& grid) {
    if (grid.size() < 2) throw std::invalid_argument("one_sided_lipschitz_estimate: need at least 2 points");
    double alpha = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
        for (size_t j = i + 1; j < grid.size(); ++j) {
            const double dx = grid[j] - grid[i];
            if (dx == 0.0) continue;
            const ClarkeInterval a = clarke(grid[i]);
            const ClarkeInterval b = clarke(grid[j]);
            for (double sa : {a.lo, a.hi})
                for (double sb : {b.lo, b.hi})
                    alpha = std::max(alpha, -(sb - sa) * dx / (dx * dx));
        }
    }
    return alpha;
}

inline double one_sided_lipschitz_estimate(const AdhesionLaw& law, const std::vector<double>& grid) {
    return one_sided_lipschitz_estimate([&law](double x) { return law.clarke(x); }, grid);
}

/// Fig.-style tabulation: x, f, f_x, S, S_x, clarke_lo, clarke_hi.
inline void tabulate_law_csv(const AdhesionLaw& law, double eps, double x_min, double x_max, int samples,
                             std::ostream& os) {
    os << "x,f,f_x,S,S_x,clarke_lo,clarke_hi\n";
    char buf[256];
    for (int k = 0; k < samples; ++k) {
        const double x = x_min + (x_max - x_min) * k / (samples - 1);
        const auto s = law.smoothed(eps, x);
        const auto c = law.clarke(x);
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", x, law.value(x),
                      law.slope(x), s.value, s.slope, c.lo, c.hi);
        os << buf;
    }
}

}  // namespace adhbem
