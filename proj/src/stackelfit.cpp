#include "sova/stackelfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sova/killing.hpp"

namespace sova {
namespace {

double ipow(double x, int a) {
    if (a < 0) return 1.0 / ipow(x, -a);
    double r = 1.0;
    while (a-- > 0) r *= x;
    return r;
}

// f(u) runs over 1, t..t^8, 1/u; g(v) over s..s^8, 1/v, where t and s are the
// coordinates rescaled onto roughly [-1, 1] over the region. The span is the
// same as for raw powers; the rescaling keeps the fitted coefficients O(1), so
// downstream finite differences of W do not sit on a cancellation floor. A
// constant on the g side would duplicate the constant on the f side exactly
// (s is not shifted, so no constant appears in its powers).
struct BasisElement {
    bool u_side = true;
    int expo = 0;
};

// affine arguments t = (u - u0) su, s = v sv for the polynomial elements
struct BasisScale {
    double u0 = 0.0, su = 1.0, sv = 1.0;
};

const std::vector<BasisElement>& separable_basis() {
    static const std::vector<BasisElement> basis = [] {
        std::vector<BasisElement> b;
        for (int a = 0; a <= 8; ++a) b.push_back({true, a});
        b.push_back({true, -1});
        for (int a = 1; a <= 8; ++a) b.push_back({false, a});
        b.push_back({false, -1});
        return b;
    }();
    return basis;
}

// One ansatz element B and its partner B' with dB' = K dB exactly:
// u side  B = b(u)/(u^2-v^2),  B' = v^2 b(u)/(u^2-v^2);
// v side  B = -b(v)/(u^2-v^2), B' = -u^2 b(v)/(u^2-v^2).
struct ElementEval {
    double val = 0.0, pval = 0.0;
    Eigen::Vector2d grad{0.0, 0.0}, pgrad{0.0, 0.0};
};

ElementEval eval_element(const BasisElement& e, const EllipticCoordinates& ec,
                         const BasisScale& sc) {
    const double u = ec.u, v = ec.v;
    const double inv = 1.0 / (u * u - v * v);
    const double inv2 = inv * inv;
    ElementEval out;
    if (e.u_side) {
        double b, db;
        if (e.expo >= 0) {
            const double t = (u - sc.u0) * sc.su;
            b = ipow(t, e.expo);
            db = e.expo * ipow(t, e.expo - 1) * sc.su;
        } else {
            b = ipow(u, e.expo);
            db = e.expo * ipow(u, e.expo - 1);
        }
        out.val = b * inv;
        out.grad = (db * inv - 2.0 * u * b * inv2) * ec.grad_u + (2.0 * v * b * inv2) * ec.grad_v;
        out.pval = v * v * b * inv;
        out.pgrad = (v * v * (db * inv - 2.0 * u * b * inv2)) * ec.grad_u +
                    (2.0 * v * b * inv + 2.0 * v * v * v * b * inv2) * ec.grad_v;
    } else {
        double b, db;
        if (e.expo >= 0) {
            const double s = v * sc.sv;
            b = ipow(s, e.expo);
            db = e.expo * ipow(s, e.expo - 1) * sc.sv;
        } else {
            b = ipow(v, e.expo);
            db = e.expo * ipow(v, e.expo - 1);
        }
        out.val = -b * inv;
        out.grad = (2.0 * u * b * inv2) * ec.grad_u + (-db * inv - 2.0 * v * b * inv2) * ec.grad_v;
        out.pval = -u * u * b * inv;
        out.pgrad = (-2.0 * u * b * inv + 2.0 * u * u * u * b * inv2) * ec.grad_u +
                    (-u * u * db * inv - 2.0 * v * u * u * b * inv2) * ec.grad_v;
    }
    return out;
}

// Quadrature nodes with valid, nondegenerate elliptic coordinates; nodes too
// close to a focus or to the x = 0 axis (where 1/v blows up) are dropped.
struct GridData {
    QuadratureGrid grid;
    std::vector<EllipticCoordinates> coords;
    std::vector<std::vector<ElementEval>> evals;
    BasisScale scale;
};

GridData assemble_grid(double c, const FitRegion& region) {
    const QuadratureGrid raw = region_grid(region);
    const double eps_focus = 1e-10 * std::max(c * c, 1.0);
    const double eps_axis = 1e-9 * std::max(c, 1.0);
    GridData g;
    std::vector<Eigen::Vector2d> pts;
    std::vector<double> w;
    for (long i = 0; i < raw.points.cols(); ++i) {
        const Eigen::Vector2d x = raw.points.col(i);
        EllipticCoordinates ec;
        try {
            ec = elliptic_coordinates(c, x);
        } catch (const std::domain_error&) {
            continue;
        }
        if (ec.u * ec.u - ec.v * ec.v < eps_focus || std::abs(ec.v) < eps_axis) continue;
        pts.push_back(x);
        w.push_back(raw.weights[i]);
        g.coords.push_back(ec);
    }
    double u_min = std::numeric_limits<double>::infinity(), u_max = 0.0, v_abs = 0.0;
    for (const auto& ec : g.coords) {
        u_min = std::min(u_min, ec.u);
        u_max = std::max(u_max, ec.u);
        v_abs = std::max(v_abs, std::abs(ec.v));
    }
    if (!g.coords.empty() && u_max - u_min > 1e-12) {
        g.scale.u0 = 0.5 * (u_min + u_max);
        g.scale.su = 2.0 / (u_max - u_min);
    }
    if (v_abs > 1e-12) g.scale.sv = 1.0 / v_abs;
    for (const auto& ec : g.coords) {
        std::vector<ElementEval> row;
        row.reserve(separable_basis().size());
        for (const auto& e : separable_basis()) row.push_back(eval_element(e, ec, g.scale));
        g.evals.push_back(std::move(row));
    }
    g.grid.points.resize(2, static_cast<long>(pts.size()));
    g.grid.weights.resize(static_cast<long>(pts.size()));
    for (size_t i = 0; i < pts.size(); ++i) {
        g.grid.points.col(static_cast<long>(i)) = pts[i];
        g.grid.weights[static_cast<long>(i)] = w[i];
    }
    return g;
}

struct ProjectionCore {
    Eigen::VectorXd coeffs;
    double rms = 0.0;
};

ProjectionCore solve_projection(const ScalarField& V, const GridData& g) {
    const long m = static_cast<long>(separable_basis().size());
    const long n = g.grid.points.cols();
    if (n < 2 * m) throw std::invalid_argument("separable projection: region grid too small or degenerate");
    Eigen::MatrixXd A(n, m);
    Eigen::VectorXd b(n);
    double wsum = 0.0;
    for (long i = 0; i < n; ++i) {
        const double sw = std::sqrt(g.grid.weights[i]);
        wsum += g.grid.weights[i];
        b[i] = sw * V(g.grid.points.col(i));
        for (long j = 0; j < m; ++j) A(i, j) = sw * g.evals[i][j].val;
    }
    Eigen::VectorXd scale(m);
    for (long j = 0; j < m; ++j) {
        scale[j] = A.col(j).norm();
        if (!std::isfinite(scale[j]) || scale[j] <= 0.0)
            throw std::runtime_error("separable projection: degenerate basis column on the region");
        A.col(j) /= scale[j];
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    if (svd.rank() == 0) throw std::runtime_error("separable projection: normal equations are singular");
    const Eigen::VectorXd chat = svd.solve(b);
    ProjectionCore core;
    core.coeffs = chat.cwiseQuotient(scale);
    core.rms = (A * chat - b).norm() / std::sqrt(wsum);
    return core;
}

ScalarField coefficient_field(double c, const BasisScale& sc, const Eigen::VectorXd& coeffs,
                               bool partner) {
    auto value = [c, sc, coeffs, partner](const Eigen::VectorXd& x) {
        const auto ec = elliptic_coordinates(c, Eigen::Vector2d(x[0], x[1]));
        const auto& basis = separable_basis();
        double s = 0.0;
        for (size_t j = 0; j < basis.size(); ++j) {
            const auto ev = eval_element(basis[j], ec, sc);
            s += coeffs[static_cast<long>(j)] * (partner ? ev.pval : ev.val);
        }
        return s;
    };
    auto gradient = [c, sc, coeffs, partner](const Eigen::VectorXd& x) {
        const auto ec = elliptic_coordinates(c, Eigen::Vector2d(x[0], x[1]));
        const auto& basis = separable_basis();
        Eigen::Vector2d s = Eigen::Vector2d::Zero();
        for (size_t j = 0; j < basis.size(); ++j) {
            const auto ev = eval_element(basis[j], ec, sc);
            s += coeffs[static_cast<long>(j)] * (partner ? ev.pgrad : ev.grad);
        }
        return Eigen::VectorXd(s);
    };
    return ScalarField::make(std::move(value), std::move(gradient));
}

// weighted mean of |K grad V - grad W_K|^2 over the region at parameter c
double objective_at(const ScalarField& V, const SeparableFamily& family, const FitRegion& region,
                    double c) {
    const GridData g = assemble_grid(c, region);
    const ProjectionCore core = solve_projection(V, g);
    const SymmetricTensorField K = family.tensor(c);
    const long m = static_cast<long>(separable_basis().size());
    double num = 0.0, den = 0.0;
    for (long i = 0; i < g.grid.points.cols(); ++i) {
        const Eigen::VectorXd x = g.grid.points.col(i);
        Eigen::Vector2d pk = Eigen::Vector2d::Zero();
        for (long j = 0; j < m; ++j) pk += core.coeffs[j] * g.evals[i][j].pgrad;
        const Eigen::Vector2d mvec = Eigen::Vector2d(K(x) * V.grad(x)) - pk;
        num += g.grid.weights[i] * mvec.squaredNorm();
        den += g.grid.weights[i];
    }
    return num / den;
}

}  // namespace

ScalarField quadrupole_potential(double G, double D) {
    return ScalarField::make(
        [G, D](const Eigen::VectorXd& q) {
            const double r = q.norm();
            if (r < 1e-12) throw std::domain_error("quadrupole potential: undefined at the origin");
            return G / r + (D / (r * r * r)) * (3.0 * q[0] * q[0] / (r * r) - 1.0);
        },
        [G, D](const Eigen::VectorXd& q) {
            const double r = q.norm();
            if (r < 1e-12) throw std::domain_error("quadrupole potential: undefined at the origin");
            const double r3 = r * r * r, r5 = r3 * r * r, r7 = r5 * r * r;
            const double x = q[0], y = q[1];
            Eigen::VectorXd g(2);
            g << -G * x / r3 + D * (9.0 * x / r5 - 15.0 * x * x * x / r7),
                -G * y / r3 + D * (3.0 * y / r5 - 15.0 * x * x * y / r7);
            return g;
        });
}

SeparableFamily SeparableFamily::confocal_elliptic() {
    SeparableFamily fam;
    fam.kind = "confocal-elliptic";
    fam.parametric = true;
    fam.chart = [](double c) { return charts::elliptic(c); };
    fam.tensor = [](double c) {
        return SymmetricTensorField::make(2, [c](const Eigen::VectorXd& x) {
            Eigen::MatrixXd m(2, 2);
            m << x[1] * x[1] + c * c, -x[0] * x[1], -x[0] * x[1], x[0] * x[0];
            return m;
        });
    };
    return fam;
}

SeparableFamily SeparableFamily::polar() {
    SeparableFamily fam;
    fam.kind = "polar";
    fam.chart = [](double) { return charts::polar(); };
    fam.tensor = [](double) {
        // squared angular momentum
        return SymmetricTensorField::make(2, [](const Eigen::VectorXd& x) {
            Eigen::MatrixXd m(2, 2);
            m << x[1] * x[1], -x[0] * x[1], -x[0] * x[1], x[0] * x[0];
            return m;
        });
    };
    return fam;
}

SeparableFamily SeparableFamily::parabolic() {
    SeparableFamily fam;
    fam.kind = "parabolic";
    fam.chart = [](double) { return charts::parabolic(); };
    fam.tensor = [](double) {
        return SymmetricTensorField::make(2, [](const Eigen::VectorXd& x) {
            Eigen::MatrixXd m(2, 2);
            m << 0.0, 0.5 * x[1], 0.5 * x[1], -x[0];
            return m;
        });
    };
    return fam;
}

FitRegion FitRegion::annulus(double r_in, double r_out, int resolution) {
    if (!(r_in > 0.0) || !(r_out > r_in)) throw std::invalid_argument("fit region: need 0 < r_in < r_out");
    FitRegion r;
    r.annular = true;
    r.r_in = r_in;
    r.r_out = r_out;
    r.resolution = resolution;
    return r;
}

FitRegion FitRegion::rectangle(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi, int resolution) {
    if (!(lo[0] < hi[0] && lo[1] < hi[1])) throw std::invalid_argument("fit region: empty rectangle");
    FitRegion r;
    r.annular = false;
    r.lo = lo;
    r.hi = hi;
    r.resolution = resolution;
    return r;
}

QuadratureGrid region_grid(const FitRegion& region) {
    if (region.resolution < 4) throw std::invalid_argument("fit region: resolution must be at least 4");
    std::function<double(const Eigen::Vector2d&)> rho = region.weight;
    if (!rho) rho = [](const Eigen::Vector2d&) { return 1.0; };
    std::vector<Eigen::Vector2d> pts;
    std::vector<double> w;
    if (region.annular) {
        if (!(region.r_in > 0.0) || !(region.r_out > region.r_in))
            throw std::invalid_argument("fit region: need 0 < r_in < r_out");
        const int nr = region.resolution;
        const int nt = 4 * region.resolution;  // multiple of 4: midpoints miss both axes
        const double dr = (region.r_out - region.r_in) / nr;
        const double dt = 2.0 * M_PI / nt;
        for (int a = 0; a < nr; ++a) {
            const double r = region.r_in + (a + 0.5) * dr;
            for (int b = 0; b < nt; ++b) {
                const double t = (b + 0.5) * dt;
                const Eigen::Vector2d x(r * std::cos(t), r * std::sin(t));
                pts.push_back(x);
                w.push_back(rho(x) * r * dr * dt);
            }
        }
    } else {
        const int n = region.resolution;
        const double dx = (region.hi[0] - region.lo[0]) / n;
        const double dy = (region.hi[1] - region.lo[1]) / n;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                const Eigen::Vector2d x(region.lo[0] + (a + 0.5) * dx, region.lo[1] + (b + 0.5) * dy);
                pts.push_back(x);
                w.push_back(rho(x) * dx * dy);
            }
    }
    QuadratureGrid g;
    g.points.resize(2, static_cast<long>(pts.size()));
    g.weights.resize(static_cast<long>(pts.size()));
    for (size_t i = 0; i < pts.size(); ++i) {
        g.points.col(static_cast<long>(i)) = pts[i];
        g.weights[static_cast<long>(i)] = w[i];
    }
    return g;
}

EllipticCoordinates elliptic_coordinates(double c, const Eigen::Vector2d& x) {
    if (!(c > 0.0)) throw std::invalid_argument("elliptic coordinates need c > 0");
    const double r1 = std::hypot(x[0] + c, x[1]);
    const double r2 = std::hypot(x[0] - c, x[1]);
    if (r1 < 1e-14 || r2 < 1e-14) throw std::domain_error("elliptic coordinates degenerate at a focus");
    EllipticCoordinates ec;
    ec.u = 0.5 * (r1 + r2);
    ec.v = 0.5 * (r1 - r2);
    ec.grad_u = 0.5 * Eigen::Vector2d((x[0] + c) / r1 + (x[0] - c) / r2, x[1] / r1 + x[1] / r2);
    ec.grad_v = 0.5 * Eigen::Vector2d((x[0] + c) / r1 - (x[0] - c) / r2, x[1] / r1 - x[1] / r2);
    return ec;
}

double mu_scalar(const SymmetricTensorField& K, const ScalarField& V, const ScalarField& V_K,
                 const Chart& chart, const Eigen::VectorXd& at) {
    if (!chart.domain(at)) throw std::domain_error("mu_scalar: point outside the chart domain");
    const Eigen::MatrixXd ginv = chart.inverse_metric(at);
    const Eigen::VectorXd m = K(at) * V.grad(at) - ginv * V_K.grad(at);
    return m.dot(ginv.ldlt().solve(m));
}

double mu_scalar(const SymmetricTensorField& K, const ScalarField& V, const Chart& chart,
                 const Eigen::VectorXd& at) {
    if (!chart.domain(at)) throw std::domain_error("mu_scalar: point outside the chart domain");
    const Eigen::MatrixXd ginv = chart.inverse_metric(at);
    const Eigen::MatrixXd R = characteristic_residual(K, V, chart, at);
    return 0.5 * R.cwiseProduct(ginv * R * ginv).sum();
}

SeparableProjection separable_projection(const ScalarField& V, const SeparableFamily& family,
                                         double c, const FitRegion& region) {
    if (family.kind != "confocal-elliptic")
        throw std::invalid_argument("separable projection: basis implemented for the confocal-elliptic family");
    if (!(c > 0.0)) throw std::invalid_argument("separable projection: need c > 0");
    const GridData g = assemble_grid(c, region);
    const ProjectionCore core = solve_projection(V, g);
    SeparableProjection out;
    out.c = c;
    out.coefficients = core.coeffs;
    out.rms = core.rms;
    out.W = coefficient_field(c, g.scale, core.coeffs, false);
    out.partner = coefficient_field(c, g.scale, core.coeffs, true);
    return out;
}

double focal_form_rms(const ScalarField& S, double c, const FitRegion& region) {
    const GridData g = assemble_grid(c, region);
    const long n = g.grid.points.cols();
    if (n < 8) throw std::invalid_argument("focal form fit: region grid too small");
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    double wsum = 0.0;
    for (long i = 0; i < n; ++i) {
        const double sw = std::sqrt(g.grid.weights[i]);
        wsum += g.grid.weights[i];
        const double u = g.coords[i].u, v = g.coords[i].v;
        const double inv = 1.0 / (u * u - v * v);
        A(i, 0) = sw * u * inv;
        A(i, 1) = sw * inv / u;
        b[i] = sw * S(g.grid.points.col(i));
    }
    const Eigen::Vector2d ab = A.colPivHouseholderQr().solve(b);
    return (A * ab - b).norm() / std::sqrt(wsum);
}

FamilyFit fit_family(const ScalarField& V, const SeparableFamily& family, const FitRegion& region,
                     double c_lo, double c_hi) {
    if (!family.parametric) throw std::invalid_argument("fit_family needs a parametrized family");
    if (!(0.0 < c_lo && c_lo < c_hi)) throw std::invalid_argument("fit_family: need 0 < c_lo < c_hi");
    constexpr int kScan = 25;
    const double inf = std::numeric_limits<double>::infinity();
    auto J_of = [&](double c) {
        try {
            const double j = objective_at(V, family, region, c);
            return std::isfinite(j) ? j : inf;
        } catch (const std::exception&) {
            return inf;
        }
    };

    FamilyFit fit;
    std::vector<double> cs(kScan), js(kScan);
    int best = -1;
    for (int k = 0; k < kScan; ++k) {
        cs[k] = c_lo + (c_hi - c_lo) * k / (kScan - 1.0);
        js[k] = J_of(cs[k]);
        if (std::isfinite(js[k])) {
            fit.curve.emplace_back(cs[k], js[k]);
            if (best < 0 || js[k] < js[best]) best = k;
        }
    }
    if (best < 0) throw std::runtime_error("fit_family: objective not finite anywhere on the range");

    double a = cs[std::max(0, best - 1)];
    double b = cs[std::min(kScan - 1, best + 1)];
    const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = J_of(x1), f2 = J_of(x2);
    while (b - a > 1e-5 * std::max(1.0, b)) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = J_of(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = J_of(x2);
        }
    }
    fit.c_star = 0.5 * (a + b);
    fit.objective = J_of(fit.c_star);
    fit.projection = separable_projection(V, family, fit.c_star, region);
    return fit;
}

std::vector<MuIdentityRow> mu_identity_table(const SymmetricTensorField& K, const ScalarField& V,
                                             const ScalarField& V_K, const Chart& chart,
                                             const std::vector<Eigen::Vector2d>& points) {
    std::vector<MuIdentityRow> rows;
    rows.reserve(points.size());
    for (const auto& p : points) {
        MuIdentityRow row;
        row.at = p;
        const Eigen::VectorXd q = p;
        row.mu = mu_scalar(K, V, V_K, chart, q);
        row.dmu_norm = fd_gradient([&](const Eigen::VectorXd& y) { return mu_scalar(K, V, V_K, chart, y); }, q).norm();
        row.char_form = characteristic_residual(K, V, chart, q)(0, 1);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sova
