#include "sova/flow.hpp"

#include <cmath>
#include <stdexcept>

namespace sova {

namespace {

double monomial(const Eigen::VectorXd& p, const MultiIndex& idx) {
    double m = 1.0;
    for (size_t j = 0; j < idx.size(); ++j)
        for (int e = 0; e < idx[j]; ++e) m *= p[static_cast<long>(j)];
    return m;
}

// d(p^idx)/dp_j evaluated at p
double monomial_dp(const Eigen::VectorXd& p, const MultiIndex& idx, int j) {
    const int e = idx[static_cast<size_t>(j)];
    if (e == 0) return 0.0;
    MultiIndex lower = idx;
    --lower[static_cast<size_t>(j)];
    return e * monomial(p, lower);
}

struct Dopri5 {
    // Dormand-Prince coefficients
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
};

using Rhs = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// One trial step; returns false when a stage evaluation leaves the vector
// field's domain or produces non-finite values (caller shrinks the step).
bool try_step(const Rhs& f, const Eigen::VectorXd& y, const Eigen::VectorXd& k1, double h,
              Eigen::VectorXd& y_new, double& err, double rel_tol) {
    using D = Dopri5;
    try {
        const Eigen::VectorXd k2 = f(y + h * (D::a21 * k1));
        const Eigen::VectorXd k3 = f(y + h * (D::a31 * k1 + D::a32 * k2));
        const Eigen::VectorXd k4 = f(y + h * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3));
        const Eigen::VectorXd k5 = f(y + h * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4));
        const Eigen::VectorXd k6 =
            f(y + h * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 + D::a65 * k5));
        y_new = y + h * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 + D::b6 * k6);
        const Eigen::VectorXd k7 = f(y_new);
        const Eigen::VectorXd e =
            h * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 + D::e7 * k7);
        if (!y_new.allFinite() || !e.allFinite()) return false;
        double s = 0.0;
        for (long i = 0; i < y.size(); ++i) {
            const double sk = rel_tol * (1.0 + std::max(std::abs(y[i]), std::abs(y_new[i])));
            s += (e[i] / sk) * (e[i] / sk);
        }
        err = std::sqrt(s / static_cast<double>(y.size()));
        return true;
    } catch (const std::domain_error&) {
        return false;
    }
}

Trajectory run_adaptive(const Rhs& f, const Eigen::VectorXd& y0, double t_end, double rel_tol,
                        const std::function<bool(const Eigen::VectorXd&)>& inside) {
    if (!(rel_tol >= 1e-12 && rel_tol <= 1e-3))
        throw std::invalid_argument("rel_tol outside [1e-12, 1e-3]");
    if (!inside(y0)) throw std::domain_error("initial state outside the chart domain");

    Trajectory traj;
    std::vector<Eigen::VectorXd> cols;
    double t = 0.0;
    Eigen::VectorXd y = y0;
    traj.times.push_back(0.0);
    cols.push_back(y);

    double h = t_end * 1e-3;
    const double h_min = 1e-14 * t_end;
    constexpr int kStepBudget = 5'000'000;
    while (t < t_end) {
        h = std::min(h, t_end - t);
        if (h < h_min) throw std::runtime_error("step size underflow");
        if (traj.accepted + traj.rejected > kStepBudget)
            throw std::runtime_error("step budget exhausted");
        const Eigen::VectorXd k1 = f(y);
        Eigen::VectorXd y_new;
        double err = 0.0;
        if (!try_step(f, y, k1, h, y_new, err, rel_tol) || err > 1.0) {
            ++traj.rejected;
            const double shrink = err > 1.0 ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.5;
            h *= shrink;
            continue;
        }
        t += h;
        y = y_new;
        ++traj.accepted;
        traj.times.push_back(t);
        cols.push_back(y);
        if (!inside(y)) throw std::domain_error("trajectory left the chart domain");
        h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
    }

    traj.states.resize(y0.size(), static_cast<long>(cols.size()));
    for (size_t c = 0; c < cols.size(); ++c) traj.states.col(static_cast<long>(c)) = cols[c];
    return traj;
}

Rhs hamilton_rhs(const MomentumPolynomial& H, int n) {
    return [H, n](const Eigen::VectorXd& y) {
        const Eigen::VectorXd q = y.head(n), p = y.tail(n);
        Eigen::VectorXd d(2 * n);
        const NumericPoly at_q = H.coefficients_at(q);
        for (int j = 0; j < n; ++j) d[j] = at_q.dp(j).eval(p);
        Eigen::VectorXd dq = Eigen::VectorXd::Zero(n);
        for (const auto& [idx, field] : H.terms) dq += field.grad(q) * monomial(p, idx);
        d.tail(n) = -dq;
        return d;
    };
}

}  // namespace

Trajectory integrate_hamiltonian(const MomentumPolynomial& H, const Chart& chart,
                                 const Eigen::VectorXd& q0, const Eigen::VectorXd& p0, double t_end,
                                 double rel_tol) {
    const int n = H.dim;
    Eigen::VectorXd y0(2 * n);
    y0 << q0, p0;
    return run_adaptive(hamilton_rhs(H, n), y0, t_end, rel_tol, [&chart, n](const Eigen::VectorXd& y) {
        return chart.domain(y.head(n));
    });
}

Trajectory integrate_hamiltonian_fixed(const MomentumPolynomial& H, const Chart& chart,
                                       const Eigen::VectorXd& q0, const Eigen::VectorXd& p0,
                                       double t_end, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
    const int n = H.dim;
    const Rhs f = hamilton_rhs(H, n);
    Eigen::VectorXd y(2 * n);
    y << q0, p0;

    Trajectory traj;
    const int steps = static_cast<int>(std::round(t_end / step));
    std::vector<Eigen::VectorXd> cols;
    traj.times.push_back(0.0);
    cols.push_back(y);
    for (int s = 0; s < steps; ++s) {
        Eigen::VectorXd y_new;
        double err = 0.0;
        if (!try_step(f, y, f(y), step, y_new, err, 1.0))
            throw std::domain_error("vector field undefined along the fixed-step path");
        y = y_new;
        ++traj.accepted;
        traj.times.push_back((s + 1) * step);
        cols.push_back(y);
        if (!chart.domain(y.head(n))) throw std::domain_error("trajectory left the chart domain");
    }
    traj.states.resize(2 * n, static_cast<long>(cols.size()));
    for (size_t c = 0; c < cols.size(); ++c) traj.states.col(static_cast<long>(c)) = cols[c];
    return traj;
}

Trajectory integrate_newton(const NewtonSystem& system, const Eigen::VectorXd& x0,
                            const Eigen::VectorXd& v0, double t_end, double rel_tol) {
    const int n = system.dim;
    const Rhs f = [force = system.force, n](const Eigen::VectorXd& y) {
        Eigen::VectorXd d(2 * n);
        d.head(n) = y.tail(n);
        d.tail(n) = force(y.head(n));
        return d;
    };
    Eigen::VectorXd y0(2 * n);
    y0 << x0, v0;
    return run_adaptive(f, y0, t_end, rel_tol,
                        [](const Eigen::VectorXd& y) { return y.allFinite(); });
}

std::vector<double> conservation_report(const Trajectory& traj,
                                        const std::vector<MomentumPolynomial>& observables) {
    std::vector<double> drifts;
    const long n = traj.states.rows() / 2;
    for (const auto& F : observables) {
        const double f0 = F.eval(traj.states.col(0).head(n), traj.states.col(0).tail(n));
        double worst = 0.0;
        for (long c = 1; c < traj.states.cols(); ++c) {
            const double fc = F.eval(traj.states.col(c).head(n), traj.states.col(c).tail(n));
            worst = std::max(worst, std::abs(fc - f0));
        }
        drifts.push_back(worst / std::max(1.0, std::abs(f0)));
    }
    return drifts;
}

}  // namespace sova
