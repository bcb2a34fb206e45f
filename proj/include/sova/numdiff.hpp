#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

namespace sova {

// Step for central differences in configuration variables.
inline double fd_step(double x) { return 1e-6 * std::max(1.0, std::abs(x)); }

inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& q) {
    Eigen::VectorXd g(q.size());
    Eigen::VectorXd qp = q, qm = q;
    for (int j = 0; j < q.size(); ++j) {
        const double h = fd_step(q[j]);
        qp[j] = q[j] + h;
        qm[j] = q[j] - h;
        g[j] = (f(qp) - f(qm)) / (2.0 * h);
        qp[j] = q[j];
        qm[j] = q[j];
    }
    return g;
}

inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& q) {
    const Eigen::VectorXd f0 = f(q);
    Eigen::MatrixXd J(f0.size(), q.size());
    Eigen::VectorXd qp = q, qm = q;
    for (int j = 0; j < q.size(); ++j) {
        const double h = fd_step(q[j]);
        qp[j] = q[j] + h;
        qm[j] = q[j] - h;
        J.col(j) = (f(qp) - f(qm)) / (2.0 * h);
        qp[j] = q[j];
        qm[j] = q[j];
    }
    return J;
}

struct Quadrature {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre nodes/weights by Newton iteration on P_n.
inline Quadrature gauss_legendre(int n) {
    Quadrature q;
    q.nodes.resize(n);
    q.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        q.nodes[i] = -x;
        q.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        q.weights[i] = w;
        q.weights[n - 1 - i] = w;
    }
    return q;
}

}  // namespace sova
