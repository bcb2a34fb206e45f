#include "sova/superint3.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "sova/numdiff.hpp"

namespace sova {

namespace {

constexpr double kCollisionMargin = 1e-8;

Eigen::Matrix3d jacobi_rows() {
    Eigen::Matrix3d M;
    M << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0,
         1.0 / std::sqrt(6.0), 1.0 / std::sqrt(6.0), -2.0 / std::sqrt(6.0),
         1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0);
    return M;
}

Eigen::Vector3d differences(const Eigen::Vector3d& x) {
    return Eigen::Vector3d(x[0] - x[1], x[1] - x[2], x[2] - x[0]);
}

ThreeBodyPotential wrap(std::string name, const Eigen::Vector3d& k,
                        std::function<double(const Eigen::Vector3d&)> V) {
    ThreeBodyPotential P;
    P.name = std::move(name);
    P.k = k;
    P.V = std::move(V);
    P.F = ScalarField::make([V = P.V](const Eigen::VectorXd& psi) {
        return V(jacobi_inverse(1.0, psi[0], 0.0));
    });
    return P;
}

}  // namespace

JacobiPoint jacobi_map(const Eigen::Vector3d& x) {
    const Eigen::Vector3d y = jacobi_rows() * x;
    JacobiPoint j;
    j.r = std::hypot(y[0], y[1]);
    if (j.r < kCollisionMargin) throw std::domain_error("total-collision configuration");
    j.psi = std::atan2(y[1], y[0]);
    j.z = y[2];
    return j;
}

Eigen::Vector3d jacobi_inverse(double r, double psi, double z) {
    return jacobi_rows().transpose() * Eigen::Vector3d(r * std::cos(psi), r * std::sin(psi), z);
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> phase_from_line(const Eigen::Vector3d& x,
                                                            const Eigen::Vector3d& xdot) {
    const JacobiPoint j = jacobi_map(x);
    const Eigen::Vector3d y = jacobi_rows() * x;
    const Eigen::Vector3d yd = jacobi_rows() * xdot;
    const double rd = (y[0] * yd[0] + y[1] * yd[1]) / j.r;
    const double psid = (y[0] * yd[1] - y[1] * yd[0]) / (j.r * j.r);
    Eigen::Vector3d q(j.r, j.psi, j.z);
    Eigen::Vector3d p(rd, j.r * j.r * psid, yd[2]);
    return {q, p};
}

ThreeBodyPotential potential_calogero(const Eigen::Vector3d& k) {
    return wrap("calogero", k, [k](const Eigen::Vector3d& x) {
        const Eigen::Vector3d X = differences(x);
        double v = 0.0;
        for (int i = 0; i < 3; ++i) {
            if (std::abs(X[i]) < kCollisionMargin) throw std::domain_error("two-body collision");
            v += k[i] / (X[i] * X[i]);
        }
        return v;
    });
}

ThreeBodyPotential potential_wolfes(const Eigen::Vector3d& k) {
    return wrap("wolfes", k, [k](const Eigen::Vector3d& x) {
        const Eigen::Vector3d X = differences(x);
        double v = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double d = X[(i + 1) % 3] - X[(i + 2) % 3];
            if (std::abs(d) < kCollisionMargin) throw std::domain_error("singular configuration");
            v += k[(i + 1) % 3] / (d * d);
        }
        return v;
    });
}

ThreeBodyPotential potential_new(const Eigen::Vector3d& k) {
    return wrap("pair-sum", k, [k](const Eigen::Vector3d& x) {
        const Eigen::Vector3d X = differences(x);
        double v = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double d = X[i] * X[i] + X[(i + 1) % 3] * X[(i + 1) % 3];
            if (d < kCollisionMargin) throw std::domain_error("singular configuration");
            v += k[i] / d;
        }
        return v;
    });
}

ThreeBodyPotential potential_from_angle_profile(std::string name, ScalarField F) {
    ThreeBodyPotential P;
    P.name = std::move(name);
    P.F = F;
    P.V = [F](const Eigen::Vector3d& x) {
        const JacobiPoint j = jacobi_map(x);
        Eigen::VectorXd psi(1);
        psi << j.psi;
        return F(psi) / (j.r * j.r);
    };
    return P;
}

double form_invariant_residual(const ThreeBodyPotential& P, int rays, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    std::uniform_real_distribution<double> offset(-1.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < rays; ++t) {
        const double psi = angle(rng);
        const double z = offset(rng);
        double vals[2];
        bool usable = true;
        for (int s = 0; s < 2; ++s) {
            const double r = s == 0 ? 0.7 : 1.3;
            try {
                vals[s] = r * r * P.V(jacobi_inverse(r, psi, z));
            } catch (const std::domain_error&) {
                usable = false;  // ray hits a singular set; certify the others
                break;
            }
        }
        if (!usable) continue;
        worst = std::max(worst,
                         std::abs(vals[0] - vals[1]) / std::max(1.0, std::max(std::abs(vals[0]), std::abs(vals[1]))));
    }
    return worst;
}

std::vector<MomentumPolynomial> integrals(const ThreeBodyPotential& P) {
    const int n = 3;
    const auto F = P.F;
    const auto f_of = [F](double psi) {
        Eigen::VectorXd a(1);
        a << psi;
        return F(a);
    };
    const auto field = [](std::function<double(const Eigen::VectorXd&)> v) {
        return ScalarField::make(std::move(v));
    };
    MultiIndex pr{2, 0, 0}, ppsi{0, 2, 0}, pz{0, 0, 2}, prpz{1, 0, 1}, unit{0, 0, 0};

    MomentumPolynomial H(n);
    H.add_term(pr, ScalarField::constant(0.5));
    H.add_term(ppsi, field([](const Eigen::VectorXd& q) { return 0.5 / (q[0] * q[0]); }));
    H.add_term(pz, ScalarField::constant(0.5));
    H.add_term(unit, field([f_of](const Eigen::VectorXd& q) { return f_of(q[1]) / (q[0] * q[0]); }));

    MomentumPolynomial H1(n);
    H1.add_term(ppsi, ScalarField::constant(0.5));
    H1.add_term(unit, field([f_of](const Eigen::VectorXd& q) { return f_of(q[1]); }));

    MomentumPolynomial H2(n);
    H2.add_term(pz, ScalarField::constant(0.5));

    MomentumPolynomial H3(n);
    H3.add_term(pr, field([](const Eigen::VectorXd& q) { return 0.5 * q[2] * q[2]; }));
    H3.add_term(pz, field([](const Eigen::VectorXd& q) { return 0.5 * q[0] * q[0]; }));
    H3.add_term(prpz, field([](const Eigen::VectorXd& q) { return -q[0] * q[2]; }));
    H3.add_term(ppsi, field([](const Eigen::VectorXd& q) {
        return 0.5 * (1.0 + q[2] * q[2] / (q[0] * q[0]));
    }));
    H3.add_term(unit, field([f_of](const Eigen::VectorXd& q) {
        return (1.0 + q[2] * q[2] / (q[0] * q[0])) * f_of(q[1]);
    }));

    MomentumPolynomial H4(n);
    H4.add_term(pr, field([](const Eigen::VectorXd& q) { return 0.5 * q[2]; }));
    H4.add_term(ppsi, field([](const Eigen::VectorXd& q) { return 0.5 * q[2] / (q[0] * q[0]); }));
    H4.add_term(prpz, field([](const Eigen::VectorXd& q) { return -0.5 * q[0]; }));
    H4.add_term(unit, field([f_of](const Eigen::VectorXd& q) { return q[2] * f_of(q[1]) / (q[0] * q[0]); }));

    return {H, H1, H2, H3, H4};
}

int independence_rank(const std::vector<MomentumPolynomial>& observables, const Eigen::VectorXd& q,
                      const Eigen::VectorXd& p) {
    const int n = static_cast<int>(q.size());
    Eigen::MatrixXd grads(static_cast<int>(observables.size()), 2 * n);
    for (size_t i = 0; i < observables.size(); ++i) {
        for (int j = 0; j < n; ++j) {
            const double hq = fd_step(q[j]);
            Eigen::VectorXd qp = q, qm = q;
            qp[j] += hq;
            qm[j] -= hq;
            grads(static_cast<int>(i), j) = (observables[i].eval(qp, p) - observables[i].eval(qm, p)) / (2 * hq);
            const double hp = fd_step(p[j]);
            Eigen::VectorXd pp = p, pm = p;
            pp[j] += hp;
            pm[j] -= hp;
            grads(static_cast<int>(i), n + j) =
                (observables[i].eval(q, pp) - observables[i].eval(q, pm)) / (2 * hp);
        }
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(grads);
    const double top = svd.singularValues()(0);
    if (top <= 0.0) return 0;
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-8 * top) ++rank;
    return rank;
}

}  // namespace sova
