#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "sova/field.hpp"

namespace sova {

// Second-order system x'' = force(x); not assumed to come from a potential.
struct NewtonSystem {
    int dim = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> force;
    bool triangular = false;
};

// Worst |d force_i / dx_j| over j > i at the probe points. Zero (up to the
// finite-difference floor) certifies the triangular structure.
double triangular_residual(const NewtonSystem& system, const std::vector<Eigen::VectorXd>& probes);

// det(J(at)) J(at)^{-1}; throws std::domain_error when det vanishes within 1e-12.
Eigen::MatrixXd cofactor_matrix(const SymmetricTensorField& J, const Eigen::VectorXd& at);

// Axis-aligned sampling box with a uniform grid on each axis.
struct GridRegion {
    Eigen::VectorXd lo, hi;
    int points_per_axis = 21;
};

struct CofactorResult {
    bool ok = false;
    double closedness_residual = 0.0;  // worst normalized curl of w on the grid
    double path_agreement = 0.0;       // |k via straight path - k via staircase path|
    ScalarField k;                     // valid only when ok
};

// Tests whether force = -cof(G)^{-1} grad k for some k: forms w = -cof(G) force,
// checks dw = 0 on the grid, and on success integrates w from the region
// midpoint. Throws std::domain_error when G is singular somewhere on the grid.
CofactorResult check_cofactor(const NewtonSystem& system, const SymmetricTensorField& G,
                              const GridRegion& region);

struct TriangularFlowReport {
    std::function<Eigen::Vector2d(const Eigen::Vector2d&)> u;  // separable coordinates
    double e1 = 0.0;                 // initial E1 = 1/2 u1'^2 + 2 u1^2
    double harmonic_residual = 0.0;  // max |u1'' + 4 u1| along the flow
    double energy_drift = 0.0;       // drift of E1 = 1/2 u1'^2 + 2 u1^2, relative when E1 != 0
    double u2_residual = 0.0;        // max |u2'' - (u1'^2 + 4 u1^2 - 4 u2)|
    double state_sup_norm = 0.0;     // max |(x, v)| along the flow, for the fixed-point check
    bool ok = false;
};

// Integrates x1'' = -4 x1, x2'' = 6 x1^2 - 4 x2 and certifies the decoupling
// coordinates u1 = x1, u2 = 1/2 x1^2 + x2 by differentiating the sampled
// trajectory. All residual thresholds are 1e-6.
TriangularFlowReport triangular_flow_check(const Eigen::Vector2d& x0 = Eigen::Vector2d(1.0, 0.0),
                                           const Eigen::Vector2d& v0 = Eigen::Vector2d(0.0, 0.0),
                                           double t_end = 10.0);

}  // namespace sova
