#include "sova/cofactor.hpp"

#include <cmath>
#include <stdexcept>

#include "sova/numdiff.hpp"

namespace sova {

namespace {

std::vector<Eigen::VectorXd> grid_points(const GridRegion& region) {
    const int d = static_cast<int>(region.lo.size());
    const int npts = region.points_per_axis;
    if (d < 1 || region.hi.size() != d || npts < 2)
        throw std::invalid_argument("degenerate grid region");
    std::vector<int> idx(static_cast<size_t>(d), 0);
    std::vector<Eigen::VectorXd> pts;
    while (true) {
        Eigen::VectorXd x(d);
        for (int a = 0; a < d; ++a)
            x[a] = region.lo[a] + (region.hi[a] - region.lo[a]) * idx[static_cast<size_t>(a)] /
                                      static_cast<double>(npts - 1);
        pts.push_back(x);
        int a = 0;
        while (a < d && ++idx[static_cast<size_t>(a)] == npts) {
            idx[static_cast<size_t>(a)] = 0;
            ++a;
        }
        if (a == d) break;
    }
    return pts;
}

double segment_integral(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& w,
                        const Eigen::VectorXd& from, const Eigen::VectorXd& to) {
    static const Quadrature gl = gauss_legendre(64);
    const Eigen::VectorXd d = to - from;
    double s = 0.0;
    for (size_t i = 0; i < gl.nodes.size(); ++i) {
        const double t = 0.5 * (gl.nodes[i] + 1.0);
        s += 0.5 * gl.weights[i] * w(from + t * d).dot(d);
    }
    return s;
}

// Axis-by-axis polyline from `from` to `to`.
double staircase_integral(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& w,
                          const Eigen::VectorXd& from, const Eigen::VectorXd& to) {
    Eigen::VectorXd cur = from;
    double s = 0.0;
    for (int a = 0; a < from.size(); ++a) {
        Eigen::VectorXd next = cur;
        next[a] = to[a];
        s += segment_integral(w, cur, next);
        cur = next;
    }
    return s;
}

}  // namespace

double triangular_residual(const NewtonSystem& system, const std::vector<Eigen::VectorXd>& probes) {
    double worst = 0.0;
    for (const auto& x : probes) {
        const Eigen::MatrixXd J = fd_jacobian(system.force, x);
        for (int i = 0; i < system.dim; ++i)
            for (int j = i + 1; j < system.dim; ++j) worst = std::max(worst, std::abs(J(i, j)));
    }
    return worst;
}

Eigen::MatrixXd cofactor_matrix(const SymmetricTensorField& J, const Eigen::VectorXd& at) {
    const Eigen::MatrixXd m = J(at);
    const auto lu = m.partialPivLu();
    const double det = lu.determinant();
    if (std::abs(det) < 1e-12) throw std::domain_error("singular tensor in cofactor_matrix");
    return det * lu.inverse();
}

CofactorResult check_cofactor(const NewtonSystem& system, const SymmetricTensorField& G,
                              const GridRegion& region) {
    // captured by value: the returned k outlives the arguments
    const auto w = [G, force = system.force](const Eigen::VectorXd& x) {
        return (-cofactor_matrix(G, x) * force(x)).eval();
    };

    CofactorResult res;
    for (const auto& x : grid_points(region)) {
        if (std::abs(G(x).determinant()) < 1e-12)
            throw std::domain_error("G is singular on the region");
        const Eigen::MatrixXd Jw = fd_jacobian(w, x);
        for (int i = 0; i < system.dim; ++i)
            for (int j = i + 1; j < system.dim; ++j) {
                const double a = Jw(i, j), b = Jw(j, i);
                res.closedness_residual = std::max(
                    res.closedness_residual, std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}));
            }
    }
    if (res.closedness_residual >= 1e-6) return res;

    const Eigen::VectorXd base = 0.5 * (region.lo + region.hi);
    res.path_agreement =
        std::abs(segment_integral(w, base, region.hi) - staircase_integral(w, base, region.hi));
    if (res.path_agreement >= 1e-8) return res;

    res.ok = true;
    res.k = ScalarField::make([w, base](const Eigen::VectorXd& x) { return segment_integral(w, base, x); },
                              [w](const Eigen::VectorXd& x) { return w(x); });
    return res;
}

TriangularFlowReport triangular_flow_check(const Eigen::Vector2d& x0, const Eigen::Vector2d& v0,
                                           double t_end) {
    using State = Eigen::Vector4d;  // (x1, x2, v1, v2)
    const auto rhs = [](const State& y) {
        State d;
        d << y[2], y[3], -4.0 * y[0], 6.0 * y[0] * y[0] - 4.0 * y[1];
        return d;
    };

    const double h_sample = 0.05;
    const int substeps = 50;
    const double h = h_sample / substeps;
    const int n_samples = static_cast<int>(std::round(t_end / h_sample)) + 1;

    std::vector<double> u1(static_cast<size_t>(n_samples)), u2(static_cast<size_t>(n_samples)),
        du1(static_cast<size_t>(n_samples)), du2(static_cast<size_t>(n_samples));
    State y;
    y << x0[0], x0[1], v0[0], v0[1];

    TriangularFlowReport rep;
    rep.u = [](const Eigen::Vector2d& x) {
        return Eigen::Vector2d(x[0], 0.5 * x[0] * x[0] + x[1]);
    };

    const double E0 = 0.5 * v0[0] * v0[0] + 2.0 * x0[0] * x0[0];
    const double e_scale = std::abs(E0) > 1e-12 ? std::abs(E0) : 1.0;
    rep.e1 = E0;

    for (int s = 0; s < n_samples; ++s) {
        u1[static_cast<size_t>(s)] = y[0];
        u2[static_cast<size_t>(s)] = 0.5 * y[0] * y[0] + y[1];
        du1[static_cast<size_t>(s)] = y[2];
        du2[static_cast<size_t>(s)] = y[0] * y[2] + y[3];
        const double E = 0.5 * y[2] * y[2] + 2.0 * y[0] * y[0];
        rep.energy_drift = std::max(rep.energy_drift, std::abs(E - E0) / e_scale);
        rep.state_sup_norm = std::max(rep.state_sup_norm, y.lpNorm<Eigen::Infinity>());
        if (s + 1 == n_samples) break;
        for (int step = 0; step < substeps; ++step) {
            const State k1 = rhs(y);
            const State k2 = rhs(y + 0.5 * h * k1);
            const State k3 = rhs(y + 0.5 * h * k2);
            const State k4 = rhs(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }

    // interior second derivatives from the sampled trajectory
    const auto second = [&](const std::vector<double>& f, int c) {
        return (2.0 * f[static_cast<size_t>(c - 3)] - 27.0 * f[static_cast<size_t>(c - 2)] +
                270.0 * f[static_cast<size_t>(c - 1)] - 490.0 * f[static_cast<size_t>(c)] +
                270.0 * f[static_cast<size_t>(c + 1)] - 27.0 * f[static_cast<size_t>(c + 2)] +
                2.0 * f[static_cast<size_t>(c + 3)]) /
               (180.0 * h_sample * h_sample);
    };
    for (int c = 3; c < n_samples - 3; ++c) {
        const size_t sc = static_cast<size_t>(c);
        rep.harmonic_residual = std::max(rep.harmonic_residual, std::abs(second(u1, c) + 4.0 * u1[sc]));
        const double expect = du1[sc] * du1[sc] + 4.0 * u1[sc] * u1[sc] - 4.0 * u2[sc];
        rep.u2_residual = std::max(rep.u2_residual, std::abs(second(u2, c) - expect));
    }

    rep.ok = rep.harmonic_residual < 1e-6 && rep.energy_drift < 1e-6 && rep.u2_residual < 1e-6;
    return rep;
}

}  // namespace sova
