#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "sova/chart.hpp"
#include "sova/field.hpp"
#include "sova/mompoly.hpp"

namespace sova {

// Separation curve sum_j H_j lambda^{n-j} = 1/2 lambda^m mu^2 + lambda^k.
struct SeparationCurveSpec {
    int n = 1;
    int m = 0;  // metric exponent, >= 0
    int k = 2;  // potential exponent, any integer
};

struct BenentiFamily {
    SeparationCurveSpec spec;
    std::vector<MomentumPolynomial> hamiltonians;   // in the (lambda, mu) chart
    std::vector<SymmetricTensorField> tensors;      // K_i, diagonal in lambda
    std::vector<ScalarField> potentials;            // V_i^{(k)}
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> char_coeffs;     // q_1..q_n
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> config_map;      // lambda -> q
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> config_inverse;  // q -> lambda
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> config_jacobian;  // d(config_map)/d(lambda)
    // ordered-simplex sampling box for the lambda coordinates
    Eigen::VectorXd sample_lo, sample_hi;
};

// Coefficients q_1..q_n of the monic characteristic polynomial
// prod_i (xi - lambda_i) = sum_s q_s xi^{n-s}, q_0 = 1.
Eigen::VectorXd characteristic_coefficients(const Eigen::VectorXd& lambda);

// Diagonal of K_r from K_1 = I, K_{r+1} = L K_r + q_r I; r may run to n+1,
// where Cayley-Hamilton forces zero.
Eigen::VectorXd benenti_k_diagonal(const Eigen::VectorXd& lambda, int r);

// V_1^{(k)}..V_n^{(k)} at a lambda point, seeded by the curve identity
// (V_i^{(k)} = delta_{i,n-k} for 0 <= k < n) and moved by
// V_i^{(k)} = V_{i+1}^{(k-1)} - q_i V_1^{(k-1)} in either direction.
Eigen::VectorXd potential_vector(const Eigen::VectorXd& lambda, int n, int k);

// Constructs H_i = 1/2 mu^T K_i G^{(m)} mu + V_i^{(k)},
// G^{(m)} = L^m diag(1/Delta_i). The configuration map carried for the
// dispersionless system is q = (lambda1 + lambda2, 2 sqrt(-lambda1 lambda2))
// for n = 2 (the map under which the quoted PDE display holds) and the
// characteristic coefficients otherwise.
BenentiFamily build_family(const SeparationCurveSpec& spec);

// The (n=2, m=1, k=4) family pushed through q1 = l1 + l2, q2 = 2 sqrt(-l1 l2)
// with the canonical momentum lift; coefficient fields are reconstructed as
// polynomials so the pair is evaluable on the whole plane including q2 = 0.
std::pair<MomentumPolynomial, MomentumPolynomial> henon_heiles_cartesian();

// dq_j/dt_i = [K_i(q)]^j_l dq_l/dx on a uniform grid with spacing dx;
// q_samples is n x N (one row per field). x-derivatives use 4th-order
// central differences with one-sided closures, so N >= 5.
Eigen::MatrixXd dispersionless_rhs(const BenentiFamily& family, int i,
                                   const Eigen::MatrixXd& q_samples, double dx);

}  // namespace sova
