#include "sova/sepcurve.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "sova/numdiff.hpp"

namespace sova {

Eigen::VectorXd characteristic_coefficients(const Eigen::VectorXd& lambda) {
    const int n = static_cast<int>(lambda.size());
    std::vector<double> c(static_cast<size_t>(n) + 1, 0.0);
    c[0] = 1.0;
    for (int i = 0; i < n; ++i)
        for (int s = i + 1; s >= 1; --s) c[static_cast<size_t>(s)] -= lambda[i] * c[static_cast<size_t>(s) - 1];
    Eigen::VectorXd q(n);
    for (int s = 1; s <= n; ++s) q[s - 1] = c[static_cast<size_t>(s)];
    return q;
}

Eigen::VectorXd benenti_k_diagonal(const Eigen::VectorXd& lambda, int r) {
    const int n = static_cast<int>(lambda.size());
    if (r < 1 || r > n + 1) throw std::invalid_argument("tensor index out of range");
    const Eigen::VectorXd q = characteristic_coefficients(lambda);
    Eigen::VectorXd k = Eigen::VectorXd::Ones(n);
    for (int s = 1; s < r; ++s)
        for (int j = 0; j < n; ++j) k[j] = lambda[j] * k[j] + q[s - 1];
    return k;
}

Eigen::VectorXd potential_vector(const Eigen::VectorXd& lambda, int n, int k) {
    const Eigen::VectorXd q = characteristic_coefficients(lambda);
    Eigen::VectorXd V = Eigen::VectorXd::Zero(n);
    if (k >= 0 && k < n) {
        V[n - 1 - k] = 1.0;
        return V;
    }
    if (k >= n) {
        V[0] = 1.0;  // V^{(n-1)}
        for (int kk = n - 1; kk < k; ++kk) {
            Eigen::VectorXd next(n);
            for (int i = 0; i < n; ++i)
                next[i] = ((i + 1 < n) ? V[i + 1] : 0.0) - q[i] * V[0];
            V = next;
        }
        return V;
    }
    V[n - 1] = 1.0;  // V^{(0)}
    for (int kk = 0; kk > k; --kk) {
        if (q[n - 1] == 0.0) throw std::domain_error("q_n vanishes: negative exponents undefined");
        Eigen::VectorXd prev(n);
        prev[0] = -V[n - 1] / q[n - 1];
        for (int i = 0; i < n - 1; ++i) prev[i + 1] = V[i] + q[i] * prev[0];
        V = prev;
    }
    return V;
}

namespace {

double delta_product(const Eigen::VectorXd& lambda, int j) {
    double d = 1.0;
    for (int l = 0; l < lambda.size(); ++l)
        if (l != j) d *= lambda[j] - lambda[l];
    return d;
}

void check_distinct(const Eigen::VectorXd& lambda) {
    for (int a = 0; a < lambda.size(); ++a)
        for (int b = a + 1; b < lambda.size(); ++b)
            if (std::abs(lambda[a] - lambda[b]) < 1e-10)
                throw std::domain_error("coincident lambda coordinates");
}

Eigen::VectorXd viete_inverse(const Eigen::VectorXd& q) {
    const int n = static_cast<int>(q.size());
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int s = 0; s < n; ++s) companion(0, s) = -q[s];
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion);
    Eigen::VectorXd lambda = es.eigenvalues().real();
    std::sort(lambda.data(), lambda.data() + n, std::greater<double>());
    return lambda;
}

}  // namespace

BenentiFamily build_family(const SeparationCurveSpec& spec) {
    if (spec.n < 1) throw std::invalid_argument("need n >= 1");
    if (spec.m < 0) throw std::invalid_argument("need m >= 0");
    const int n = spec.n, m = spec.m, k = spec.k;

    BenentiFamily fam;
    fam.spec = spec;
    fam.char_coeffs = [](const Eigen::VectorXd& lambda) {
        check_distinct(lambda);
        return characteristic_coefficients(lambda);
    };

    for (int i = 1; i <= n; ++i) {
        fam.tensors.push_back(SymmetricTensorField::make(n, [i](const Eigen::VectorXd& lambda) {
            return Eigen::MatrixXd(benenti_k_diagonal(lambda, i).asDiagonal());
        }));
        fam.potentials.push_back(ScalarField::make([n, k, i](const Eigen::VectorXd& lambda) {
            check_distinct(lambda);
            return potential_vector(lambda, n, k)[i - 1];
        }));

        MomentumPolynomial H(n);
        for (int j = 0; j < n; ++j) {
            MultiIndex idx(static_cast<size_t>(n), 0);
            idx[j] = 2;
            H.add_term(idx, ScalarField::make([i, j, m](const Eigen::VectorXd& lambda) {
                check_distinct(lambda);
                const double kd = benenti_k_diagonal(lambda, i)[j];
                return 0.5 * kd * std::pow(lambda[j], m) / delta_product(lambda, j);
            }));
        }
        H.add_term(MultiIndex(static_cast<size_t>(n), 0), fam.potentials.back());
        fam.hamiltonians.push_back(std::move(H));
    }

    if (n == 2) {
        fam.config_map = [](const Eigen::VectorXd& l) {
            if (!(l[0] > 0.0 && l[1] < 0.0)) throw std::domain_error("need lambda1 > 0 > lambda2");
            Eigen::VectorXd q(2);
            q << l[0] + l[1], 2.0 * std::sqrt(-l[0] * l[1]);
            return q;
        };
        fam.config_inverse = [](const Eigen::VectorXd& q) {
            const double R = std::hypot(q[0], q[1]);
            Eigen::VectorXd l(2);
            l << 0.5 * (q[0] + R), 0.5 * (q[0] - R);
            return l;
        };
        fam.config_jacobian = [](const Eigen::VectorXd& l) {
            const double s = std::sqrt(-l[0] * l[1]);
            Eigen::MatrixXd J(2, 2);
            J << 1.0, 1.0, -l[1] / s, -l[0] / s;
            return J;
        };
        fam.sample_lo = Eigen::VectorXd(2);
        fam.sample_hi = Eigen::VectorXd(2);
        fam.sample_lo << 0.6, -1.4;
        fam.sample_hi << 1.4, -0.6;
    } else {
        fam.config_map = [](const Eigen::VectorXd& l) {
            return characteristic_coefficients(l).eval();
        };
        fam.config_inverse = viete_inverse;
        fam.config_jacobian = [n](const Eigen::VectorXd& l) {
            // dq_s/dlambda_i = (-1)^s e_{s-1}(lambda with lambda_i deleted);
            // reduced elementaries by synthetic division, e_s = (-1)^s q_s
            const Eigen::VectorXd q = characteristic_coefficients(l);
            Eigen::MatrixXd J(n, n);
            for (int i = 0; i < n; ++i) {
                double ehat = 1.0;
                double sign = -1.0;
                for (int s = 1; s <= n; ++s) {
                    J(s - 1, i) = sign * ehat;
                    ehat = sign * q[s - 1] - l[i] * ehat;
                    sign = -sign;
                }
            }
            return J;
        };
        fam.sample_lo = Eigen::VectorXd(n);
        fam.sample_hi = Eigen::VectorXd(n);
        for (int j = 0; j < n; ++j) {
            fam.sample_lo[j] = n - j - 0.4;
            fam.sample_hi[j] = n - j + 0.4;
        }
    }
    return fam;
}

std::pair<MomentumPolynomial, MomentumPolynomial> henon_heiles_cartesian() {
    const auto fam = build_family({2, 1, 4});
    const Chart par = charts::parabolic();
    const Chart cart = charts::cartesian(2);

    // sample the pushforward on a grid clear of the q2 = 0 degeneracy
    std::vector<Eigen::Vector2d> pts;
    for (int a = 0; a < 12; ++a)
        for (int b = 0; b < 12; ++b)
            pts.emplace_back(-1.5 + 3.0 * a / 11.0, 0.4 + 1.8 * b / 11.0);

    constexpr int kDeg = 6;
    std::vector<std::pair<int, int>> monos;
    for (int a = 0; a <= kDeg; ++a)
        for (int b = 0; a + b <= kDeg; ++b) monos.emplace_back(a, b);

    auto reconstruct = [&](const MomentumPolynomial& H) {
        std::map<MultiIndex, Eigen::VectorXd> samples;
        for (size_t s = 0; s < pts.size(); ++s) {
            const NumericPoly np = pushforward_observable(H, par, cart, pts[s]);
            for (const auto& [idx, c] : np.terms) {
                auto [it, fresh] = samples.try_emplace(idx, Eigen::VectorXd::Zero(static_cast<int>(pts.size())));
                it->second[static_cast<int>(s)] = c;
            }
        }
        MomentumPolynomial out(2);
        Eigen::MatrixXd A(static_cast<int>(pts.size()), static_cast<int>(monos.size()));
        for (size_t s = 0; s < pts.size(); ++s)
            for (size_t c = 0; c < monos.size(); ++c)
                A(static_cast<int>(s), static_cast<int>(c)) =
                    std::pow(pts[s][0], monos[c].first) * std::pow(pts[s][1], monos[c].second);
        const auto qr = A.colPivHouseholderQr();
        for (const auto& [idx, vals] : samples) {
            Eigen::VectorXd coef = qr.solve(vals);
            if ((A * coef - vals).lpNorm<Eigen::Infinity>() > 1e-7)
                throw std::runtime_error("pushforward is not polynomial at the expected degree");
            std::map<std::pair<int, int>, double> poly;
            for (size_t c = 0; c < monos.size(); ++c)
                if (std::abs(coef[static_cast<int>(c)]) > 1e-9) poly[monos[c]] = coef[static_cast<int>(c)];
            if (poly.empty()) continue;
            out.add_term(idx, ScalarField::make(
                                  [poly](const Eigen::VectorXd& q) {
                                      double s = 0.0;
                                      for (const auto& [e, c] : poly)
                                          s += c * std::pow(q[0], e.first) * std::pow(q[1], e.second);
                                      return s;
                                  },
                                  [poly](const Eigen::VectorXd& q) {
                                      Eigen::VectorXd g = Eigen::VectorXd::Zero(2);
                                      for (const auto& [e, c] : poly) {
                                          if (e.first > 0)
                                              g[0] += c * e.first * std::pow(q[0], e.first - 1) *
                                                      std::pow(q[1], e.second);
                                          if (e.second > 0)
                                              g[1] += c * e.second * std::pow(q[0], e.first) *
                                                      std::pow(q[1], e.second - 1);
                                      }
                                      return g;
                                  }));
        }
        return out;
    };

    return {reconstruct(fam.hamiltonians[0]), reconstruct(fam.hamiltonians[1])};
}

namespace {

Eigen::MatrixXd grid_derivative(const Eigen::MatrixXd& f, double dx) {
    const int N = static_cast<int>(f.cols());
    if (N < 5) throw std::invalid_argument("grid too short for the finite-difference stencil");
    Eigen::MatrixXd d(f.rows(), N);
    for (int c = 2; c < N - 2; ++c)
        d.col(c) = (-f.col(c + 2) + 8.0 * f.col(c + 1) - 8.0 * f.col(c - 1) + f.col(c - 2)) / (12.0 * dx);
    d.col(0) = (-25.0 * f.col(0) + 48.0 * f.col(1) - 36.0 * f.col(2) + 16.0 * f.col(3) - 3.0 * f.col(4)) /
               (12.0 * dx);
    d.col(1) = (-3.0 * f.col(0) - 10.0 * f.col(1) + 18.0 * f.col(2) - 6.0 * f.col(3) + f.col(4)) / (12.0 * dx);
    const int L = N - 1;
    d.col(L) = (25.0 * f.col(L) - 48.0 * f.col(L - 1) + 36.0 * f.col(L - 2) - 16.0 * f.col(L - 3) +
                3.0 * f.col(L - 4)) /
               (12.0 * dx);
    d.col(L - 1) =
        (3.0 * f.col(L) + 10.0 * f.col(L - 1) - 18.0 * f.col(L - 2) + 6.0 * f.col(L - 3) - f.col(L - 4)) /
        (12.0 * dx);
    return d;
}

}  // namespace

Eigen::MatrixXd dispersionless_rhs(const BenentiFamily& family, int i, const Eigen::MatrixXd& q_samples,
                                   double dx) {
    const int n = family.spec.n;
    if (q_samples.rows() != n) throw std::invalid_argument("field count must match n");
    if (i < 1 || i > n) throw std::invalid_argument("flow index out of range");
    const Eigen::MatrixXd qx = grid_derivative(q_samples, dx);
    Eigen::MatrixXd qt(n, q_samples.cols());
    for (int c = 0; c < q_samples.cols(); ++c) {
        const Eigen::VectorXd lambda = family.config_inverse(q_samples.col(c));
        const Eigen::MatrixXd A = family.config_jacobian ? family.config_jacobian(lambda)
                                                         : fd_jacobian(family.config_map, lambda);
        const Eigen::MatrixXd Ki = benenti_k_diagonal(lambda, i).asDiagonal();
        qt.col(c) = A * Ki * A.partialPivLu().solve(qx.col(c));
    }
    return qt;
}

}  // namespace sova
