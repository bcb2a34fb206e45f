#include "sova/mompoly.hpp"

#include <cmath>
#include <stdexcept>

namespace sova {

namespace {

MultiIndex zero_index(int dim) { return MultiIndex(static_cast<size_t>(dim), 0); }

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void NumericPoly::add(const MultiIndex& idx, double c) {
    if (static_cast<int>(idx.size()) != dim) throw std::invalid_argument("multi-index dim mismatch");
    if (c == 0.0) return;
    auto [it, inserted] = terms.try_emplace(idx, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0.0) terms.erase(it);
    }
}

NumericPoly NumericPoly::operator+(const NumericPoly& o) const {
    if (dim != o.dim) throw std::invalid_argument("poly dim mismatch");
    NumericPoly r = *this;
    for (const auto& [idx, c] : o.terms) r.add(idx, c);
    return r;
}

NumericPoly NumericPoly::operator-(const NumericPoly& o) const { return *this + o.scaled(-1.0); }

NumericPoly NumericPoly::operator*(const NumericPoly& o) const {
    if (dim != o.dim) throw std::invalid_argument("poly dim mismatch");
    NumericPoly r(dim);
    for (const auto& [ia, ca] : terms)
        for (const auto& [ib, cb] : o.terms) {
            MultiIndex idx(ia);
            for (int j = 0; j < dim; ++j) idx[j] += ib[j];
            r.add(idx, ca * cb);
        }
    return r;
}

NumericPoly NumericPoly::scaled(double s) const {
    NumericPoly r(dim);
    if (s == 0.0) return r;
    r.terms = terms;
    for (auto& [idx, c] : r.terms) c *= s;
    return r;
}

NumericPoly NumericPoly::dp(int j) const {
    NumericPoly r(dim);
    for (const auto& [idx, c] : terms) {
        if (idx[j] == 0) continue;
        MultiIndex d(idx);
        d[j] -= 1;
        r.add(d, c * idx[j]);
    }
    return r;
}

double NumericPoly::eval(const Eigen::VectorXd& p) const {
    double s = 0.0;
    for (const auto& [idx, c] : terms) {
        double m = c;
        for (int j = 0; j < dim; ++j)
            for (int k = 0; k < idx[j]; ++k) m *= p[j];
        s += m;
    }
    return s;
}

double NumericPoly::coeff(const MultiIndex& idx) const {
    auto it = terms.find(idx);
    return it == terms.end() ? 0.0 : it->second;
}

double NumericPoly::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [idx, c] : terms) m = std::max(m, std::abs(c));
    return m;
}

int NumericPoly::degree() const {
    int d = 0;
    for (const auto& [idx, c] : terms) {
        int t = 0;
        for (int e : idx) t += e;
        d = std::max(d, t);
    }
    return d;
}

void NumericPoly::prune(double eps) {
    for (auto it = terms.begin(); it != terms.end();) {
        if (std::abs(it->second) <= eps)
            it = terms.erase(it);
        else
            ++it;
    }
}

void MomentumPolynomial::add_term(const MultiIndex& idx, const ScalarField& f) {
    if (static_cast<int>(idx.size()) != dim) throw std::invalid_argument("multi-index dim mismatch");
    if (f.zero) return;
    auto [it, inserted] = terms.try_emplace(idx, f);
    if (!inserted) {
        ScalarField a = it->second, b = f;
        it->second = ScalarField::make(
            [a, b](const Eigen::VectorXd& q) { return a(q) + b(q); },
            (a.gradient && b.gradient)
                ? std::function<Eigen::VectorXd(const Eigen::VectorXd&)>(
                      [a, b](const Eigen::VectorXd& q) { return (a.grad(q) + b.grad(q)).eval(); })
                : std::function<Eigen::VectorXd(const Eigen::VectorXd&)>{});
    }
}

double MomentumPolynomial::eval(const Eigen::VectorXd& q, const Eigen::VectorXd& p) const {
    return coefficients_at(q).eval(p);
}

NumericPoly MomentumPolynomial::coefficients_at(const Eigen::VectorXd& q) const {
    NumericPoly r(dim);
    for (const auto& [idx, f] : terms) {
        const double c = f(q);
        if (!finite(c)) throw std::domain_error("non-finite coefficient evaluation");
        r.add(idx, c);
    }
    return r;
}

int MomentumPolynomial::degree() const {
    int d = 0;
    for (const auto& [idx, f] : terms) {
        int t = 0;
        for (int e : idx) t += e;
        d = std::max(d, t);
    }
    return d;
}

MomentumPolynomial MomentumPolynomial::coordinate(int dim, int j) {
    MomentumPolynomial f(dim);
    f.add_term(zero_index(dim),
               ScalarField::make([j](const Eigen::VectorXd& q) { return q[j]; },
                                 [j](const Eigen::VectorXd& q) {
                                     Eigen::VectorXd g = Eigen::VectorXd::Zero(q.size());
                                     g[j] = 1.0;
                                     return g;
                                 }));
    return f;
}

MomentumPolynomial MomentumPolynomial::momentum(int dim, int j) {
    MomentumPolynomial f(dim);
    MultiIndex idx = zero_index(dim);
    idx[j] = 1;
    f.add_term(idx, ScalarField::constant(1.0));
    return f;
}

namespace {

// d/dq_j of every coefficient, frozen at `at`.
NumericPoly dq_at(const MomentumPolynomial& F, int j, const Eigen::VectorXd& at) {
    NumericPoly r(F.dim);
    for (const auto& [idx, f] : F.terms) {
        const double d = f.grad(at)[j];
        if (!finite(d)) throw std::domain_error("non-finite coefficient derivative");
        r.add(idx, d);
    }
    return r;
}

NumericPoly dp_at(const MomentumPolynomial& F, int j, const Eigen::VectorXd& at) {
    return F.coefficients_at(at).dp(j);
}

}  // namespace

NumericPoly poisson_bracket(const MomentumPolynomial& F, const MomentumPolynomial& G,
                            const Eigen::VectorXd& at) {
    if (F.dim != G.dim) throw std::invalid_argument("bracket dim mismatch");
    NumericPoly r(F.dim);
    for (int j = 0; j < F.dim; ++j) {
        r = r + dq_at(F, j, at) * dp_at(G, j, at) - dp_at(F, j, at) * dq_at(G, j, at);
    }
    return r;
}

MomentumPolynomial quadratic_observable(const SymmetricTensorField& K, const ScalarField& V) {
    MomentumPolynomial H(K.dim);
    for (int j = 0; j < K.dim; ++j)
        for (int l = j; l < K.dim; ++l) {
            const double w = (j == l) ? 0.5 : 1.0;
            MultiIndex idx = zero_index(K.dim);
            idx[j] += 1;
            idx[l] += 1;
            SymmetricTensorField Kc = K;
            H.add_term(idx, ScalarField::make([Kc, j, l, w](const Eigen::VectorXd& q) {
                return w * Kc(q)(j, l);
            }));
        }
    H.add_term(zero_index(K.dim), V);
    return H;
}

NumericPoly pushforward_observable(const MomentumPolynomial& F, const Chart& from, const Chart& to,
                                   const Eigen::VectorXd& at) {
    if (from.dim != to.dim) throw std::invalid_argument("chart dim mismatch");
    if (!to.domain(at)) throw std::domain_error("point outside target chart domain");
    const Eigen::VectorXd q_from = from.from_cartesian(to.to_cartesian(at));
    if (!from.domain(q_from)) throw std::domain_error("point outside source chart domain");

    // d(q_to)/d(q_from); chain through Cartesian when both charts carry
    // closed-form Jacobians, since finite differences here bound the accuracy
    // of everything built on the pushforward.
    Eigen::MatrixXd A;
    if (from.jacobian && to.jacobian) {
        A = to.jacobian(at).partialPivLu().solve(from.jacobian(q_from));
    } else {
        const auto fwd = [&](const Eigen::VectorXd& q) {
            return to.from_cartesian(from.to_cartesian(q)).eval();
        };
        A = fd_jacobian(fwd, q_from);
    }
    if (std::abs(A.determinant()) < 1e-12) throw std::domain_error("singular Jacobian");

    // p_from_j = sum_k A_kj p_to_k, substituted exactly into each monomial.
    const int n = F.dim;
    std::vector<NumericPoly> p_from(n, NumericPoly(n));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            MultiIndex idx(static_cast<size_t>(n), 0);
            idx[k] = 1;
            p_from[j].add(idx, A(k, j));
        }

    NumericPoly r(n);
    for (const auto& [idx, f] : F.terms) {
        NumericPoly mono(n);
        mono.add(MultiIndex(static_cast<size_t>(n), 0), f(q_from));
        for (int j = 0; j < n; ++j)
            for (int e = 0; e < idx[j]; ++e) mono = mono * p_from[j];
        r = r + mono;
    }
    return r;
}

}  // namespace sova
