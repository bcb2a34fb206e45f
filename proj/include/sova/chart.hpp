#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace sova {

// Margin excluding degenerate chart points (r = 0, u = c, q2 = 0, ...): the
// Jacobian lifts blow up there.
inline constexpr double kChartMargin = 1e-8;

struct Chart {
    std::string name;
    int dim = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> to_cartesian;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> from_cartesian;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> inverse_metric;  // g^{jl}
    std::function<bool(const Eigen::VectorXd&)> domain;
    // d(to_cartesian)/d(chart coords); optional, finite differences otherwise.
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
    // Box [lo, hi] of valid coordinates used for randomized sampling.
    Eigen::VectorXd sample_lo, sample_hi;
};

namespace charts {

inline Chart cartesian(int dim) {
    Chart c;
    c.name = "cartesian";
    c.dim = dim;
    c.to_cartesian = [](const Eigen::VectorXd& q) { return q; };
    c.from_cartesian = [](const Eigen::VectorXd& x) { return x; };
    c.inverse_metric = [dim](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(dim, dim); };
    c.domain = [](const Eigen::VectorXd&) { return true; };
    c.jacobian = [dim](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(dim, dim); };
    c.sample_lo = Eigen::VectorXd::Constant(dim, -2.0);
    c.sample_hi = Eigen::VectorXd::Constant(dim, 2.0);
    return c;
}

// (r, theta), r > 0.
inline Chart polar() {
    Chart c;
    c.name = "polar";
    c.dim = 2;
    c.to_cartesian = [](const Eigen::VectorXd& q) {
        Eigen::VectorXd x(2);
        x << q[0] * std::cos(q[1]), q[0] * std::sin(q[1]);
        return x;
    };
    c.from_cartesian = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd q(2);
        q << std::hypot(x[0], x[1]), std::atan2(x[1], x[0]);
        return q;
    };
    c.inverse_metric = [](const Eigen::VectorXd& q) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
        g(0, 0) = 1.0;
        g(1, 1) = 1.0 / (q[0] * q[0]);
        return g;
    };
    c.domain = [](const Eigen::VectorXd& q) { return q[0] > kChartMargin; };
    c.jacobian = [](const Eigen::VectorXd& q) {
        Eigen::MatrixXd J(2, 2);
        J << std::cos(q[1]), -q[0] * std::sin(q[1]), std::sin(q[1]), q[0] * std::cos(q[1]);
        return J;
    };
    c.sample_lo = Eigen::VectorXd(2);
    c.sample_hi = Eigen::VectorXd(2);
    c.sample_lo << 0.3, -3.0;
    c.sample_hi << 3.0, 3.0;
    return c;
}

// (r, psi, z), axis along z.
inline Chart cylindrical() {
    Chart c;
    c.name = "cylindrical";
    c.dim = 3;
    c.to_cartesian = [](const Eigen::VectorXd& q) {
        Eigen::VectorXd x(3);
        x << q[0] * std::cos(q[1]), q[0] * std::sin(q[1]), q[2];
        return x;
    };
    c.from_cartesian = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd q(3);
        q << std::hypot(x[0], x[1]), std::atan2(x[1], x[0]), x[2];
        return q;
    };
    c.inverse_metric = [](const Eigen::VectorXd& q) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
        g(0, 0) = 1.0;
        g(1, 1) = 1.0 / (q[0] * q[0]);
        g(2, 2) = 1.0;
        return g;
    };
    c.domain = [](const Eigen::VectorXd& q) { return q[0] > kChartMargin; };
    c.jacobian = [](const Eigen::VectorXd& q) {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3, 3);
        J(0, 0) = std::cos(q[1]);
        J(0, 1) = -q[0] * std::sin(q[1]);
        J(1, 0) = std::sin(q[1]);
        J(1, 1) = q[0] * std::cos(q[1]);
        J(2, 2) = 1.0;
        return J;
    };
    c.sample_lo = Eigen::VectorXd(3);
    c.sample_hi = Eigen::VectorXd(3);
    c.sample_lo << 0.3, -3.0, -2.0;
    c.sample_hi << 3.0, 3.0, 2.0;
    return c;
}

// (lambda1, lambda2) with lambda1 > 0 > lambda2, covering the half plane
// q2 > 0 through q1 = lambda1 + lambda2, q2 = 2 sqrt(-lambda1 lambda2).
inline Chart parabolic() {
    Chart c;
    c.name = "parabolic";
    c.dim = 2;
    c.to_cartesian = [](const Eigen::VectorXd& q) {
        Eigen::VectorXd x(2);
        x << q[0] + q[1], 2.0 * std::sqrt(-q[0] * q[1]);
        return x;
    };
    c.from_cartesian = [](const Eigen::VectorXd& x) {
        const double R = std::hypot(x[0], x[1]);
        Eigen::VectorXd q(2);
        q << 0.5 * (x[0] + R), 0.5 * (x[0] - R);
        return q;
    };
    c.inverse_metric = [](const Eigen::VectorXd& q) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
        g(0, 0) = q[0] / (q[0] - q[1]);
        g(1, 1) = q[1] / (q[1] - q[0]);
        return g;
    };
    c.domain = [](const Eigen::VectorXd& q) { return q[0] > kChartMargin && q[1] < -kChartMargin; };
    c.jacobian = [](const Eigen::VectorXd& q) {
        const double s = std::sqrt(-q[0] * q[1]);
        Eigen::MatrixXd J(2, 2);
        J << 1.0, 1.0, -q[1] / s, -q[0] / s;
        return J;
    };
    c.sample_lo = Eigen::VectorXd(2);
    c.sample_hi = Eigen::VectorXd(2);
    c.sample_lo << 0.2, -3.0;
    c.sample_hi << 3.0, -0.2;
    return c;
}

// Confocal elliptic (u, v) with foci (+-c, 0): x = u v / c,
// y = branch * sqrt((u^2 - c^2)(c^2 - v^2)) / c, u >= c >= |v|.
inline Chart elliptic(double c_focus, int branch = +1) {
    if (c_focus <= 0.0) throw std::invalid_argument("elliptic chart needs c > 0");
    if (branch != 1 && branch != -1) throw std::invalid_argument("branch must be +-1");
    Chart c;
    c.name = "elliptic";
    c.dim = 2;
    const double cf = c_focus;
    const double sgn = branch;
    c.to_cartesian = [cf, sgn](const Eigen::VectorXd& q) {
        const double u = q[0], v = q[1];
        Eigen::VectorXd x(2);
        x << u * v / cf, sgn * std::sqrt((u * u - cf * cf) * (cf * cf - v * v)) / cf;
        return x;
    };
    c.from_cartesian = [cf](const Eigen::VectorXd& x) {
        const double r1 = std::hypot(x[0] + cf, x[1]);
        const double r2 = std::hypot(x[0] - cf, x[1]);
        Eigen::VectorXd q(2);
        q << 0.5 * (r1 + r2), 0.5 * (r1 - r2);
        return q;
    };
    c.inverse_metric = [cf](const Eigen::VectorXd& q) {
        const double u = q[0], v = q[1];
        const double den = u * u - v * v;
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
        g(0, 0) = (u * u - cf * cf) / den;
        g(1, 1) = (cf * cf - v * v) / den;
        return g;
    };
    c.domain = [cf](const Eigen::VectorXd& q) {
        return q[0] > cf + kChartMargin && std::abs(q[1]) < cf - kChartMargin;
    };
    c.jacobian = [cf, sgn](const Eigen::VectorXd& q) {
        const double u = q[0], v = q[1];
        const double w = std::sqrt((u * u - cf * cf) * (cf * cf - v * v));
        Eigen::MatrixXd J(2, 2);
        J << v / cf, u / cf, sgn * u * (cf * cf - v * v) / (cf * w), -sgn * v * (u * u - cf * cf) / (cf * w);
        return J;
    };
    c.sample_lo = Eigen::VectorXd(2);
    c.sample_hi = Eigen::VectorXd(2);
    c.sample_lo << cf * 1.05, -0.9 * cf;
    c.sample_hi << cf + 2.5, 0.9 * cf;
    return c;
}

}  // namespace charts
}  // namespace sova
