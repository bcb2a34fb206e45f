#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sova/chart.hpp"
#include "sova/field.hpp"

namespace sova {

// V(x, y) = G/r + (D/r^3)(3 x^2/r^2 - 1), analytic gradient; undefined at the
// origin.
ScalarField quadrupole_potential(double G, double D);

// One-parameter family of orthogonally separable systems in the plane: chart
// and characteristic Killing tensor (Cartesian components) per parameter
// value. The polar and parabolic members carry no parameter and ignore it.
struct SeparableFamily {
    std::string kind;
    bool parametric = false;
    std::function<Chart(double)> chart;
    std::function<SymmetricTensorField(double)> tensor;

    static SeparableFamily confocal_elliptic();
    static SeparableFamily polar();
    static SeparableFamily parabolic();
};

// Quadrature region in the Cartesian plane. Midpoint rules keep nodes off the
// coordinate axes, where the inverse-coordinate basis terms degenerate.
struct FitRegion {
    bool annular = true;
    double r_in = 0.0, r_out = 0.0;
    Eigen::Vector2d lo{0.0, 0.0}, hi{0.0, 0.0};
    int resolution = 48;
    std::function<double(const Eigen::Vector2d&)> weight;  // density, default 1

    static FitRegion annulus(double r_in, double r_out, int resolution = 48);
    static FitRegion rectangle(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi,
                               int resolution = 48);
};

struct QuadratureGrid {
    Eigen::Matrix2Xd points;
    Eigen::VectorXd weights;
};

QuadratureGrid region_grid(const FitRegion& region);

// Confocal elliptic coordinates of a Cartesian point through the focal radii,
// with analytic gradients; u >= c >= |v|, sign(v) = sign(x). Valid on both
// half planes, throws at the foci.
struct EllipticCoordinates {
    double u = 0.0, v = 0.0;
    Eigen::Vector2d grad_u{0.0, 0.0}, grad_v{0.0, 0.0};
};
EllipticCoordinates elliptic_coordinates(double c, const Eigen::Vector2d& x);

// mu = g_{jl} m^j m^l with m^j = K^{jl} d_l V - g^{jl} d_l V_K, the
// linear-in-momenta coefficient vector of {1/2 g(p,p) + V, 1/2 K(p,p) + V_K}.
double mu_scalar(const SymmetricTensorField& K, const ScalarField& V, const ScalarField& V_K,
                 const Chart& chart, const Eigen::VectorXd& at);

// Without a candidate partner potential the obstruction is measured from the
// characteristic two-form R = d(K dV) alone: mu = 1/2 R_{ij} R^{ij}.
double mu_scalar(const SymmetricTensorField& K, const ScalarField& V, const Chart& chart,
                 const Eigen::VectorXd& at);

struct SeparableProjection {
    ScalarField W;        // best separable representative of V on the region
    ScalarField partner;  // W_K with dW_K = K dW, exact per basis element
    double rms = 0.0;     // weighted RMS of V - W over the grid
    Eigen::VectorXd coefficients;
    double c = 0.0;
};

// Least-squares fit of V on the region by W = (f(u) - g(v))/(u^2 - v^2) with
// f, g polynomials of degree <= 8 plus 1/u and 1/v terms. Implemented for the
// confocal-elliptic family.
SeparableProjection separable_projection(const ScalarField& V, const SeparableFamily& family,
                                         double c, const FitRegion& region);

// Weighted RMS misfit of S against the two-term focal form
// (alpha u + beta/u)/(u^2 - v^2) over the region grid.
double focal_form_rms(const ScalarField& S, double c, const FitRegion& region);

struct FamilyFit {
    double c_star = 0.0;
    double objective = 0.0;                        // J(c_star)
    std::vector<std::pair<double, double>> curve;  // sampled (c, J), ascending c
    SeparableProjection projection;                // at c_star
};

// J(c) = weighted mean over the region of mu with V_K the projection partner
// at c; coarse scan over [c_lo, c_hi] followed by golden-section refinement.
FamilyFit fit_family(const ScalarField& V, const SeparableFamily& family, const FitRegion& region,
                     double c_lo, double c_hi);

// Candidate numeric readings of the two sides of d mu = d(K) d(V), which is
// stated without a definite meaning for the right side: the gradient norm of
// mu against the characteristic two-form component. Callers report the rows;
// nothing is asserted about them.
struct MuIdentityRow {
    Eigen::Vector2d at{0.0, 0.0};
    double mu = 0.0;
    double dmu_norm = 0.0;
    double char_form = 0.0;
};
std::vector<MuIdentityRow> mu_identity_table(const SymmetricTensorField& K, const ScalarField& V,
                                             const ScalarField& V_K, const Chart& chart,
                                             const std::vector<Eigen::Vector2d>& points);

}  // namespace sova
