#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sova/chart.hpp"
#include "sova/cofactor.hpp"
#include "sova/mompoly.hpp"

namespace sova {

// Sampled solution; one column per accepted step, states stacked (q; p) for
// Hamiltonian flows and (x; v) for Newton flows.
struct Trajectory {
    std::vector<double> times;
    Eigen::MatrixXd states;
    int accepted = 0;
    int rejected = 0;
};

// Adaptive embedded Runge-Kutta 5(4) on Hamilton's equations for H in the
// given chart; momentum derivatives exact, position derivatives follow the
// coefficient fields. rel_tol must lie in [1e-12, 1e-3]. Throws
// std::domain_error when the solution exits the chart domain and
// std::runtime_error on step-size underflow (below 1e-14 t_end).
Trajectory integrate_hamiltonian(const MomentumPolynomial& H, const Chart& chart,
                                 const Eigen::VectorXd& q0, const Eigen::VectorXd& p0, double t_end,
                                 double rel_tol);

// Same right-hand side with a fixed step; for convergence-order checks.
Trajectory integrate_hamiltonian_fixed(const MomentumPolynomial& H, const Chart& chart,
                                       const Eigen::VectorXd& q0, const Eigen::VectorXd& p0,
                                       double t_end, double step);

// x'' = force(x) under the same adaptive scheme.
Trajectory integrate_newton(const NewtonSystem& system, const Eigen::VectorXd& x0,
                            const Eigen::VectorXd& v0, double t_end, double rel_tol);

// Per-observable max over samples of |F(t) - F(0)| / max(1, |F(0)|).
std::vector<double> conservation_report(const Trajectory& traj,
                                        const std::vector<MomentumPolynomial>& observables);

}  // namespace sova
