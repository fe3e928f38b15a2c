#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "adhbem/elastic.hpp"

namespace adhbem {

/// Gauss-Legendre nodes/weights on [-1, 1].
struct GaussRule {
    std::vector<double> x, w;

    explicit GaussRule(int n) {
        x.resize(n);
        w.resize(n);
        // Newton iteration on Legendre polynomials
        for (int i = 0; i < n; ++i) {
            double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double p0, p1;
            for (int it = 0; it < 100; ++it) {
                p0 = 1.0;
                p1 = t;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = n * (t * p1 - p0) / (t * t - 1.0);
                const double dt = p1 / dp;
                t -= dt;
                if (std::abs(dt) < 1e-15) break;
            }
            p0 = 1.0;
            p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (t * p1 - p0) / (t * t - 1.0);
            x[n - 1 - i] = t;
            w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
    }
};

/// Quadrature points on a segment [a,b]: plain Gauss, or a dyadically graded
/// composite rule refined toward one endpoint (for pairs touching there).
struct SegmentQuadrature {
    std::vector<Eigen::Vector2d> points;
    std::vector<double> weights;
};

inline SegmentQuadrature plain_rule(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const GaussRule& g) {
    SegmentQuadrature q;
    const double L = (b - a).norm();
    for (size_t i = 0; i < g.x.size(); ++i) {
        const double s = 0.5 * (g.x[i] + 1.0);
        q.points.push_back(a + s * (b - a));
        q.weights.push_back(0.5 * g.w[i] * L);
    }
    return q;
}

inline SegmentQuadrature graded_rule(const Eigen::Vector2d& a, const Eigen::Vector2d& b, int toward_end,
                                     int levels, const GaussRule& g) {
    SegmentQuadrature q;
    const double L = (b - a).norm();
    double s1 = 1.0;
    for (int l = 0; l <= levels; ++l) {
        const double s0 = (l == levels) ? 0.0 : s1 * 0.5;
        for (size_t i = 0; i < g.x.size(); ++i) {
            double s = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * g.x[i];
            if (toward_end == 1) s = 1.0 - s;
            q.points.push_back(a + s * (b - a));
            q.weights.push_back(0.5 * (s1 - s0) * g.w[i] * L);
        }
        s1 = s0;
    }
    return q;
}

/// Local frame of a straight segment [a,b] and the field point coordinates
/// p (along the tangent) and q (along the left normal m).
struct SegmentFrame {
    Eigen::Vector2d a, d, m, n;  // origin, tangent, left normal, outward normal
    double L;

    SegmentFrame(const Eigen::Vector2d& a_, const Eigen::Vector2d& b_) : a(a_) {
        const Eigen::Vector2d t = b_ - a_;
        L = t.norm();
        d = t / L;
        m = Eigen::Vector2d(-d.y(), d.x());
        n = -m;
    }
};

/// Elementary antiderivative-based integrals over tau in [-p, L-p] of the
/// families 1/r^2, 1/r^4 and log r with tau-weights up to cubic,
/// r^2 = tau^2 + q^2. Valid whenever r > 0 on the segment.
struct BaseIntegrals {
    double T0, T1, T2, T3;   // int tau^k / r^2
    double Q0, Q1, Q2, Q3;   // int tau^k / r^4
    double Llog0, Llog1;     // int tau^k log r

    BaseIntegrals(double p, double q, double L) {
        const double a0 = -p, a1 = L - p;
        const double r0s = a0 * a0 + q * q, r1s = a1 * a1 + q * q;
        if (std::abs(q) > 1e-300) {
            T0 = (std::atan(a1 / q) - std::atan(a0 / q)) / q;
            Q0 = (a1 / r1s - a0 / r0s) / (2.0 * q * q) + T0 / (2.0 * q * q);
            Llog0 = (a1 * 0.5 * std::log(r1s) - a1 + q * std::atan(a1 / q))
                  - (a0 * 0.5 * std::log(r0s) - a0 + q * std::atan(a0 / q));
        } else {
            T0 = -1.0 / a1 + 1.0 / a0;
            Q0 = (-1.0 / (a1 * a1 * a1) + 1.0 / (a0 * a0 * a0)) / 3.0;
            Llog0 = a1 * (std::log(std::abs(a1)) - 1.0) - a0 * (std::log(std::abs(a0)) - 1.0);
        }
        T1 = 0.5 * std::log(r1s / r0s);
        T2 = L - q * q * T0;
        T3 = 0.5 * (a1 * a1 - a0 * a0) - q * q * T1;
        Q1 = -0.5 * (1.0 / r1s - 1.0 / r0s);
        Q2 = T0 - q * q * Q0;
        Q3 = T1 - q * q * Q1;
        Llog1 = 0.25 * (r1s * (std::log(r1s) - 1.0)) - 0.25 * (r0s * (std::log(r0s) - 1.0));
    }
};

/// Exact integral over the segment of c_log * log(1/r) I + c_rr rhat rhat^T
/// (the single-layer and hypersingular kernel family).
inline Mat2 inner_log_dyad(const Eigen::Vector2d& x, const SegmentFrame& f, double c_log, double c_rr) {
    const double p = (x - f.a).dot(f.d), q = (x - f.a).dot(f.m);
    const BaseIntegrals B(p, q, f.L);
    Eigen::Matrix2d F;
    F.col(0) = f.d;
    F.col(1) = f.m;
    Mat2 J;
    J << B.T2, -q * B.T1, -q * B.T1, q * q * B.T0;
    return c_log * (-B.Llog0) * Mat2::Identity() + c_rr * (F * J * F.transpose());
}

/// Exact integrals over the segment of the double layer kernel
/// D(x,y) = traction_kernel^T against the linear weights (1 - s/L, s/L);
/// out[k] pairs with the node at s = k L.
inline void inner_double_layer(const Eigen::Vector2d& x, const SegmentFrame& f, const LameParameters& par,
                               Mat2 out[2]) {
    const double p = (x - f.a).dot(f.d), q = (x - f.a).dot(f.m);
    const BaseIntegrals B(p, q, f.L);
    const double C = 1.0 / (2.0 * std::numbers::pi * (par.lambda + 2.0 * par.mu));
    Eigen::Matrix2d F;
    F.col(0) = f.d;
    F.col(1) = f.m;
    Mat2 raw[2];  // weights 1 and s
    for (int k = 0; k < 2; ++k) {
        const double w0 = (k == 0) ? 1.0 : 0.0;
        const double w1 = 1.0 - w0;
        // int w (rhat.n)/r = int w q / r^2   with rhat = (tau d - q m)/r, n = -m
        const double iq = q * B.T0 * w0 + (q * B.T1 + p * q * B.T0) * w1;
        // int w rhat / r : frame components (tau/r^2, -q/r^2)
        const double ird = B.T1 * w0 + (B.T2 + p * B.T1) * w1;
        const double irm = -(q * B.T0 * w0 + (q * B.T1 + p * q * B.T0) * w1);
        const Eigen::Vector2d ir = F * Eigen::Vector2d(ird, irm);
        // int w (rhat.n) rhat rhat^T / r = q * int w [tau^2, -q tau; ., q^2]/r^4
        const double tdd = B.Q2 * w0 + (B.Q3 + p * B.Q2) * w1;
        const double tdm = -(q * B.Q1 * w0 + q * (B.Q2 + p * B.Q1) * w1);
        const double tmm = q * q * B.Q0 * w0 + q * q * (B.Q1 + p * B.Q0) * w1;
        Mat2 Jq;
        Jq << tdd, tdm, tdm, tmm;
        Jq = q * (F * Jq * F.transpose());
        // traction kernel, then transpose for the double layer
        const Mat2 M = C * (-par.mu * iq * Mat2::Identity() - par.mu * ir * f.n.transpose()
                            + par.mu * f.n * ir.transpose() - 2.0 * (par.lambda + par.mu) * Jq);
        raw[k] = M.transpose();
    }
    out[0] = raw[0] - raw[1] / f.L;
    out[1] = raw[1] / f.L;
}

}  // namespace adhbem
