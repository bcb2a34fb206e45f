#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "sova/chart.hpp"
#include "sova/field.hpp"
#include "sova/mompoly.hpp"

namespace sova {

// Interaction of three points on a line whose single-point form in space is
// F(psi)/r^2 in cylindrical coordinates around the total-collision axis.
struct ThreeBodyPotential {
    std::string name;
    Eigen::Vector3d k = Eigen::Vector3d::Zero();
    ScalarField F;  // one angle variable
    std::function<double(const Eigen::Vector3d&)> V;  // on line positions
};

struct JacobiPoint {
    double r = 0.0, psi = 0.0, z = 0.0;
};

// Orthonormal change to (r cos psi, r sin psi, z); throws std::domain_error
// within 1e-8 of the total-collision axis x1 = x2 = x3.
JacobiPoint jacobi_map(const Eigen::Vector3d& x);
Eigen::Vector3d jacobi_inverse(double r, double psi, double z);

// Phase-space counterpart: momenta conjugate to (r, psi, z) from line
// positions and velocities.
std::pair<Eigen::Vector3d, Eigen::Vector3d> phase_from_line(const Eigen::Vector3d& x,
                                                            const Eigen::Vector3d& xdot);

ThreeBodyPotential potential_calogero(const Eigen::Vector3d& k);
ThreeBodyPotential potential_wolfes(const Eigen::Vector3d& k);
ThreeBodyPotential potential_new(const Eigen::Vector3d& k);
// Arbitrary interaction given directly as the angle profile F.
ThreeBodyPotential potential_from_angle_profile(std::string name, ScalarField F);

// Worst relative deviation of r^2 V between two radii on rays of fixed angle.
double form_invariant_residual(const ThreeBodyPotential& P, int rays = 40, unsigned seed = 2026);

// The five quadratic conserved quantities {H, H1, H2, H3, H4} in the
// cylindrical chart.
std::vector<MomentumPolynomial> integrals(const ThreeBodyPotential& P);

// Numerical rank of the phase-space gradients at (q, p); singular values
// below 1e-8 of the largest are treated as zero.
int independence_rank(const std::vector<MomentumPolynomial>& observables, const Eigen::VectorXd& q,
                      const Eigen::VectorXd& p);

}  // namespace sova
