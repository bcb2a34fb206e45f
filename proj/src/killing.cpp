#include "sova/killing.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace sova {

namespace {

Eigen::VectorXd sample_point(const Chart& c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd q(c.dim);
    do {
        for (int j = 0; j < c.dim; ++j)
            q[j] = c.sample_lo[j] + u(rng) * (c.sample_hi[j] - c.sample_lo[j]);
    } while (!c.domain(q));
    return q;
}

MomentumPolynomial geodesic_hamiltonian(const Chart& c) {
    auto g = SymmetricTensorField::make(c.dim, c.inverse_metric);
    return quadratic_observable(g, ScalarField::constant(0.0));
}

NumericPoly cubic_part(const NumericPoly& poly) {
    NumericPoly r(poly.dim);
    for (const auto& [idx, c] : poly.terms) {
        int deg = 0;
        for (int e : idx) deg += e;
        if (deg == 3) r.add(idx, c);
    }
    return r;
}

}  // namespace

bool eigenvalues_real_simple(const LTensorCandidate& L, int probes, double gap) {
    std::mt19937_64 rng(777);
    for (int t = 0; t < probes; ++t) {
        const Eigen::VectorXd q = sample_point(L.chart, rng);
        Eigen::EigenSolver<Eigen::MatrixXd> es(L.endo(q));
        const Eigen::VectorXcd ev = es.eigenvalues();
        double scale = 0.0;
        for (int i = 0; i < ev.size(); ++i) scale = std::max(scale, std::abs(ev[i]));
        if (scale == 0.0) return false;
        for (int i = 0; i < ev.size(); ++i) {
            if (std::abs(ev[i].imag()) > gap * scale) return false;
            for (int j = i + 1; j < ev.size(); ++j)
                if (std::abs(ev[i] - ev[j]) < gap * scale) return false;
        }
    }
    return true;
}

std::vector<SymmetricTensorField> benenti_hierarchy(const LTensorCandidate& L, int n, bool* warning) {
    if (warning) *warning = !eigenvalues_real_simple(L);
    std::vector<SymmetricTensorField> out;
    const LTensorCandidate Lc = L;
    for (int a = 0; a < n; ++a) {
        out.push_back(SymmetricTensorField::make(L.tensor.dim, [Lc, a](const Eigen::VectorXd& q) {
            const Eigen::MatrixXd M = Lc.endo(q);
            const int dim = static_cast<int>(M.rows());
            Eigen::MatrixXd A = Eigen::MatrixXd::Identity(dim, dim);
            for (int s = 1; s <= a; ++s) {
                const Eigen::MatrixXd AM = A * M;
                A = (AM.trace() / s) * Eigen::MatrixXd::Identity(dim, dim) - AM;
            }
            return Eigen::MatrixXd(A * Lc.chart.inverse_metric(q));
        }));
    }
    return out;
}

std::vector<Eigen::MatrixXd> nijenhuis_torsion(const LTensorCandidate& L, const Eigen::VectorXd& at) {
    if (!L.chart.domain(at)) throw std::domain_error("point outside chart domain");
    const int n = L.chart.dim;
    const Eigen::MatrixXd M = L.endo(at);
    // dL[a](k, j) = d_a L^k_j
    std::vector<Eigen::MatrixXd> dL(static_cast<size_t>(n));
    Eigen::VectorXd qp = at, qm = at;
    for (int a = 0; a < n; ++a) {
        const double h = fd_step(at[a]);
        qp[a] = at[a] + h;
        qm[a] = at[a] - h;
        dL[a] = (L.endo(qp) - L.endo(qm)) / (2.0 * h);
        qp[a] = at[a];
        qm[a] = at[a];
    }
    std::vector<Eigen::MatrixXd> N(static_cast<size_t>(n), Eigen::MatrixXd::Zero(n, n));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int a = 0; a < n; ++a) {
                    s += M(a, i) * dL[a](k, j) - M(a, j) * dL[a](k, i);
                    s -= M(k, a) * (dL[i](a, j) - dL[j](a, i));
                }
                N[k](i, j) = s;
            }
    return N;
}

KillingReport is_killing(const SymmetricTensorField& K, const Chart& chart, int samples,
                         unsigned seed) {
    std::mt19937_64 rng(seed);
    const auto Hg = geodesic_hamiltonian(chart);
    const auto HK = quadratic_observable(K, ScalarField::constant(0.0));
    KillingReport rep;
    for (int t = 0; t < samples; ++t) {
        const Eigen::VectorXd q = sample_point(chart, rng);
        const double res = cubic_part(poisson_bracket(Hg, HK, q)).max_abs_coeff();
        rep.worst_residual = std::max(rep.worst_residual, res);
    }
    rep.ok = rep.worst_residual < 1e-6;
    return rep;
}

ConformalKillingReport is_conformal_killing(const SymmetricTensorField& K, const Chart& chart,
                                            int samples, unsigned seed) {
    std::mt19937_64 rng(seed);
    const auto Hg = geodesic_hamiltonian(chart);
    const auto HK = quadratic_observable(K, ScalarField::constant(0.0));
    const int n = chart.dim;
    ConformalKillingReport rep;
    rep.ok = true;
    for (int t = 0; t < samples; ++t) {
        const Eigen::VectorXd q = sample_point(chart, rng);
        const NumericPoly cubic = cubic_part(poisson_bracket(Hg, HK, q));

        // quadratic form Q = g^{jl} p_j p_l as a polynomial
        NumericPoly Q(n);
        const Eigen::MatrixXd g = chart.inverse_metric(q);
        for (int j = 0; j < n; ++j)
            for (int l = j; l < n; ++l) {
                MultiIndex idx(static_cast<size_t>(n), 0);
                idx[j] += 1;
                idx[l] += 1;
                Q.add(idx, (j == l) ? g(j, j) : 2.0 * g(j, l));
            }

        // residual(l) = cubic - Q * (l_k p_k), solved in least squares over l
        std::map<MultiIndex, int> rows;
        std::vector<NumericPoly> ql(static_cast<size_t>(n), NumericPoly(n));
        for (int k = 0; k < n; ++k) {
            MultiIndex idx(static_cast<size_t>(n), 0);
            idx[k] = 1;
            NumericPoly pk(n);
            pk.add(idx, 1.0);
            ql[k] = Q * pk;
            for (const auto& [i, c] : ql[k].terms) rows.try_emplace(i, static_cast<int>(rows.size()));
        }
        for (const auto& [i, c] : cubic.terms) rows.try_emplace(i, static_cast<int>(rows.size()));

        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<int>(rows.size()), n);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<int>(rows.size()));
        for (int k = 0; k < n; ++k)
            for (const auto& [i, c] : ql[k].terms) A(rows.at(i), k) = c;
        for (const auto& [i, c] : cubic.terms) b(rows.at(i)) = c;

        const Eigen::VectorXd l = A.colPivHouseholderQr().solve(b);
        const double res = (A * l - b).lpNorm<Eigen::Infinity>();
        rep.worst_residual = std::max(rep.worst_residual, res);
        rep.factors.push_back(l);
        if (res >= 1e-6) rep.ok = false;
    }
    return rep;
}

namespace {

// omega_j = g_{jm} K^{ml} d_l V
Eigen::VectorXd char_one_form(const SymmetricTensorField& K, const ScalarField& V, const Chart& chart,
                              const Eigen::VectorXd& q) {
    const Eigen::MatrixXd g_low = chart.inverse_metric(q).inverse();
    return g_low * (K(q) * V.grad(q));
}

}  // namespace

Eigen::MatrixXd characteristic_residual(const SymmetricTensorField& K, const ScalarField& V,
                                        const Chart& chart, const Eigen::VectorXd& at) {
    if (!chart.domain(at)) throw std::domain_error("point outside chart domain");
    const int n = chart.dim;
    // domega[i](j) = d_i omega_j. Without an analytic gradient the inner
    // differences carry ~1e-10 roundoff which the outer division amplifies,
    // so the outer step is widened to keep the total error near 1e-7.
    const double h0 = V.gradient ? 1e-6 : 2e-4;
    Eigen::MatrixXd domega(n, n);
    Eigen::VectorXd qp = at, qm = at;
    for (int i = 0; i < n; ++i) {
        const double h = h0 * std::max(1.0, std::abs(at[i]));
        qp[i] = at[i] + h;
        qm[i] = at[i] - h;
        domega.row(i) = ((char_one_form(K, V, chart, qp) - char_one_form(K, V, chart, qm)) / (2.0 * h))
                            .transpose();
        qp[i] = at[i];
        qm[i] = at[i];
    }
    return domega - domega.transpose();
}

double integrate_potential(const SymmetricTensorField& K, const ScalarField& V, const Chart& chart,
                           const Eigen::VectorXd& base, const Eigen::VectorXd& target, double tol) {
    const Eigen::VectorXd d = target - base;
    for (int s = 0; s <= 8; ++s) {
        const Eigen::VectorXd q = base + (s / 8.0) * d;
        const double r = characteristic_residual(K, V, chart, q).lpNorm<Eigen::Infinity>();
        if (r > tol) throw std::domain_error("one-form not closed along path: residual " + std::to_string(r));
    }
    static const Quadrature gl = gauss_legendre(64);
    double s = 0.0;
    for (int i = 0; i < 64; ++i) {
        const double t = 0.5 * (gl.nodes[i] + 1.0);
        s += 0.5 * gl.weights[i] * char_one_form(K, V, chart, base + t * d).dot(d);
    }
    return s;
}

}  // namespace sova
