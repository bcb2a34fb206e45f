#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sova/chart.hpp"
#include "sova/field.hpp"
#include "sova/mompoly.hpp"

namespace sova {

// Symmetric contravariant tensor acting as a (1,1) endomorphism through the
// chart metric: L^j_l = K^{jm} g_{ml}.
struct LTensorCandidate {
    SymmetricTensorField tensor;
    Chart chart;

    Eigen::MatrixXd endo(const Eigen::VectorXd& q) const {
        return tensor(q) * chart.inverse_metric(q).inverse();
    }
};

// Pairwise relative eigenvalue gaps of the (1,1) action exceed `gap` at every
// probe point (eigenvalues must also be real).
bool eigenvalues_real_simple(const LTensorCandidate& L, int probes = 25, double gap = 1e-8);

// K_0 = I, K_a = (1/a) tr(K_{a-1} L) I - K_{a-1} L on (1,1) matrices, returned
// as contravariant tensor fields. Degenerate eigenvalues on the probe sample
// set *warning (the recursion itself stays well-defined).
std::vector<SymmetricTensorField> benenti_hierarchy(const LTensorCandidate& L, int n,
                                                    bool* warning = nullptr);

// N^k_{ij} = L^a_i d_a L^k_j - L^a_j d_a L^k_i - L^k_a (d_i L^a_j - d_j L^a_i),
// result[k](i, j).
std::vector<Eigen::MatrixXd> nijenhuis_torsion(const LTensorCandidate& L, const Eigen::VectorXd& at);

struct KillingReport {
    bool ok = false;
    double worst_residual = 0.0;
};

// Cubic-in-momenta part of {1/2 g(p,p), 1/2 K(p,p)} below 1e-6 at all samples.
KillingReport is_killing(const SymmetricTensorField& K, const Chart& chart, int samples,
                         unsigned seed = 12345);

struct ConformalKillingReport {
    bool ok = false;
    double worst_residual = 0.0;
    // one recovered factor (covector l_k) per sampled point
    std::vector<Eigen::VectorXd> factors;
};

// Divisibility of the cubic bracket part by g^{jl} p_j p_l, solved per point
// in least squares; residual < 1e-6 everywhere.
ConformalKillingReport is_conformal_killing(const SymmetricTensorField& K, const Chart& chart,
                                            int samples, unsigned seed = 12345);

// R_{ij} = d_i (K_j^l d_l V) - d_j (K_i^l d_l V).
Eigen::MatrixXd characteristic_residual(const SymmetricTensorField& K, const ScalarField& V,
                                        const Chart& chart, const Eigen::VectorXd& at);

// Path integral of the one-form K dV along the straight chart segment from
// base to target (64-point Gauss-Legendre). Throws if the characteristic
// residual exceeds `tol` at path samples: the one-form is not closed and the
// result would be path-dependent.
double integrate_potential(const SymmetricTensorField& K, const ScalarField& V, const Chart& chart,
                           const Eigen::VectorXd& base, const Eigen::VectorXd& target,
                           double tol = 1e-6);

}  // namespace sova
