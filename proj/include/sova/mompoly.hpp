#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "sova/chart.hpp"
#include "sova/field.hpp"

namespace sova {

// Exponent vector over (p_1 .. p_dim).
using MultiIndex = std::vector<int>;

// Polynomial in the momenta with numeric coefficients; the momentum algebra
// (products, derivatives) is carried exactly.
struct NumericPoly {
    int dim = 0;
    std::map<MultiIndex, double> terms;

    explicit NumericPoly(int d = 0) : dim(d) {}

    void add(const MultiIndex& idx, double c);
    NumericPoly operator+(const NumericPoly& o) const;
    NumericPoly operator-(const NumericPoly& o) const;
    NumericPoly operator*(const NumericPoly& o) const;
    NumericPoly scaled(double s) const;
    NumericPoly dp(int j) const;  // d/dp_j

    double eval(const Eigen::VectorXd& p) const;
    double coeff(const MultiIndex& idx) const;
    double max_abs_coeff() const;
    int degree() const;
    void prune(double eps = 0.0);
};

// Polynomial in the momenta with scalar-field coefficients.
struct MomentumPolynomial {
    int dim = 0;
    std::map<MultiIndex, ScalarField> terms;

    explicit MomentumPolynomial(int d = 0) : dim(d) {}

    // Zero-flagged fields are dropped so the term map stays pruned.
    void add_term(const MultiIndex& idx, const ScalarField& f);
    double eval(const Eigen::VectorXd& q, const Eigen::VectorXd& p) const;
    NumericPoly coefficients_at(const Eigen::VectorXd& q) const;
    int degree() const;

    static MomentumPolynomial coordinate(int dim, int j);  // q_j as degree-0 term
    static MomentumPolynomial momentum(int dim, int j);    // p_j
};

// Canonical bracket sum_j (dF/dq_j dG/dp_j - dF/dp_j dG/dq_j) frozen at a
// configuration point; momentum algebra exact, q-derivatives analytic when
// the coefficient carries a gradient, otherwise central differences.
NumericPoly poisson_bracket(const MomentumPolynomial& F, const MomentumPolynomial& G,
                            const Eigen::VectorXd& at);

// 1/2 K^{jl} p_j p_l + V.
MomentumPolynomial quadratic_observable(const SymmetricTensorField& K, const ScalarField& V);

// Observable re-expressed in the target chart through the canonical point
// transformation lift p_from = A^T p_to, A = d(q_to)/d(q_from). `at` is in
// target-chart coordinates.
NumericPoly pushforward_observable(const MomentumPolynomial& F, const Chart& from, const Chart& to,
                                   const Eigen::VectorXd& at);

}  // namespace sova
