#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <random>
#include <string>
#include <vector>

#include "sova/cofactor.hpp"
#include "sova/flow.hpp"
#include "sova/killing.hpp"
#include "sova/mompoly.hpp"
#include "sova/report.hpp"
#include "sova/sepcurve.hpp"
#include "sova/stackelfit.hpp"
#include "sova/superint3.hpp"

using namespace sova;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

struct CommonOpts {
    std::uint64_t seed = 12345;
    std::string out_dir;
};

void add_common(CLI::App* sub, CommonOpts& c) {
    sub->add_option("--seed", c.seed, "seed for all sampled checks");
    sub->add_option("--out-dir", c.out_dir,
                    "output directory (default: $SOVA_OUTPUT_DIR, else current directory)");
}

std::string resolve_dir(const CommonOpts& c) {
    return c.out_dir.empty() ? default_output_dir() : c.out_dir;
}

void print_checks(const Report& rep) {
    for (const auto& c : rep.checks)
        std::printf("[%s] %-36s value=%-13.6g tolerance=%g\n", c.pass ? "PASS" : "FAIL",
                    c.check_id.c_str(), c.value, c.tolerance);
}

int finish(Report& rep, const std::string& dir, const std::string& stem) {
    print_checks(rep);
    const std::string path = dir + "/" + stem + "_report.json";
    write_text_file(path, rep.to_json());
    std::size_t passed = 0;
    for (const auto& c : rep.checks) passed += c.pass ? 1 : 0;
    std::printf("%zu/%zu checks passed; report written to %s\n", passed, rep.checks.size(),
                path.c_str());
    return rep.all_pass() ? 0 : 1;
}

std::string multi_index_key(const MultiIndex& idx) {
    std::string s;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (j) s += ',';
        s += std::to_string(idx[static_cast<size_t>(j)]);
    }
    return s;
}

nlohmann::ordered_json poly_to_json(const NumericPoly& poly) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [idx, c] : poly.terms) j[multi_index_key(idx)] = c;
    return j;
}

std::string trajectory_csv(const Trajectory& traj, int dim, const char* coord, const char* conj) {
    std::string csv = "t";
    for (int i = 1; i <= dim; ++i) csv += "," + std::string(coord) + std::to_string(i);
    for (int i = 1; i <= dim; ++i) csv += "," + std::string(conj) + std::to_string(i);
    csv += "\n";
    char buf[64];
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        std::snprintf(buf, sizeof buf, "%.17g", traj.times[s]);
        csv += buf;
        for (int i = 0; i < 2 * dim; ++i) {
            std::snprintf(buf, sizeof buf, ",%.17g", traj.states(i, static_cast<long>(s)));
            csv += buf;
        }
        csv += "\n";
    }
    return csv;
}

// ---------------------------------------------------------------- benenti --

struct BenentiOpts {
    std::string chart = "elliptic";
    std::string potential = "auto";
    double c = 1.0;
    int samples = 60;
    CommonOpts common;
};

int run_benenti(const BenentiOpts& o) {
    const auto cart = charts::cartesian(2);
    SymmetricTensorField Lt;
    if (o.chart == "cartesian") {
        Lt = SymmetricTensorField::constant(Eigen::DiagonalMatrix<double, 2>(1.0, 2.0));
    } else if (o.chart == "polar") {
        Lt = SymmetricTensorField::make(
            2, [](const VectorXd& x) { return MatrixXd(x * x.transpose()); });
    } else if (o.chart == "elliptic") {
        const double c2 = o.c * o.c;
        Lt = SymmetricTensorField::make(2, [c2](const VectorXd& x) {
            MatrixXd m = x * x.transpose();
            m(0, 0) += c2;
            return m;
        });
    } else {  // parabolic
        Lt = SymmetricTensorField::make(2, [](const VectorXd& x) {
            MatrixXd m(2, 2);
            m << x[0], 0.5 * x[1], 0.5 * x[1], 0.0;
            return m;
        });
    }
    std::string pot = o.potential;
    if (pot == "auto") pot = (o.chart == "parabolic") ? "kepler" : "harmonic";

    ScalarField V;
    if (pot == "harmonic") {
        V = ScalarField::make([](const VectorXd& x) { return 0.5 * x.squaredNorm(); },
                              [](const VectorXd& x) { return VectorXd(x); });
    } else if (pot == "kepler") {
        V = ScalarField::make([](const VectorXd& x) { return -1.0 / x.norm(); },
                              [](const VectorXd& x) { return VectorXd(x / std::pow(x.norm(), 3)); });
    }

    const LTensorCandidate L{Lt, cart};
    Report rep;
    rep.subcommand = "benenti";
    rep.seed = o.common.seed;
    std::mt19937_64 rng(o.common.seed);

    // the kepler pairing is singular at the origin; keep sample points and the
    // integration segments between them inside a half-plane strip
    const bool keep_right = (pot == "kepler");
    auto sample_point = [&rng, keep_right]() {
        std::uniform_real_distribution<double> ux(keep_right ? 0.4 : -1.8, 1.8), uy(-1.5, 1.5);
        for (;;) {
            VectorXd q(2);
            q << ux(rng), uy(rng);
            if (q.norm() > 0.3) return q;
        }
    };

    bool warn = false;
    const auto Ks = benenti_hierarchy(L, 2, &warn);
    rep.add_exact("eigenvalues_simple", warn ? 0.0 : 1.0, 1.0);

    double torsion = 0.0;
    for (int t = 0; t < o.samples; ++t) {
        for (const auto& N : nijenhuis_torsion(L, sample_point()))
            torsion = std::max(torsion, N.lpNorm<Eigen::Infinity>());
    }
    rep.add_residual("nijenhuis_torsion_max", torsion, 1e-6);

    const auto rep0 = is_killing(Ks[0], cart, o.samples, static_cast<unsigned>(o.common.seed));
    const auto rep1 = is_killing(Ks[1], cart, o.samples, static_cast<unsigned>(o.common.seed) + 1);
    rep.add("hierarchy_k0_killing", rep0.worst_residual, 1e-6, rep0.ok);
    rep.add("hierarchy_k1_killing", rep1.worst_residual, 1e-6, rep1.ok);

    if (pot != "none") {
        double closed = 0.0;
        for (int t = 0; t < o.samples; ++t) {
            const VectorXd q = sample_point();
            closed = std::max(closed,
                              characteristic_residual(Ks[1], V, cart, q).lpNorm<Eigen::Infinity>());
        }
        rep.add_residual("potential_pairing_closedness", closed, 1e-6);

        VectorXd base(2);
        base << 1.0, 0.5;
        auto paired = [&](const SymmetricTensorField& K) {
            return ScalarField::make(
                [K, V, cart, base](const VectorXd& q) {
                    return integrate_potential(K, V, cart, base, q);
                },
                [K, V](const VectorXd& q) { return VectorXd(K(q) * V.grad(q)); });
        };
        const auto V0 = paired(Ks[0]);
        const auto V1 = paired(Ks[1]);

        // the integrated potential must differentiate back to K dV
        double consistency = 0.0;
        for (int t = 0; t < 5; ++t) {
            const VectorXd q = sample_point();
            const double h = 1e-5;
            for (int j = 0; j < 2; ++j) {
                VectorXd qp = q, qm = q;
                qp[j] += h;
                qm[j] -= h;
                const double fd = (V1(qp) - V1(qm)) / (2.0 * h);
                consistency = std::max(consistency, std::abs(fd - V1.grad(q)[j]));
            }
        }
        rep.add_residual("integrated_potential_consistency", consistency, 1e-4);

        const auto H0 = quadratic_observable(Ks[0], V0);
        const auto H1 = quadratic_observable(Ks[1], V1);
        double commute = 0.0;
        for (int t = 0; t < o.samples; ++t)
            commute = std::max(commute, poisson_bracket(H0, H1, sample_point()).max_abs_coeff());
        rep.add_residual("observable_commutation_max", commute, 1e-6);
    }

    return finish(rep, resolve_dir(o.common), "benenti");
}

// --------------------------------------------------------------- sepcurve --

struct SepcurveOpts {
    int n = 2, m = 1, k = 4;
    int points = 200;
    CommonOpts common;
};

int run_sepcurve(const SepcurveOpts& o) {
    const auto fam = build_family({o.n, o.m, o.k});
    Report rep;
    rep.subcommand = "sepcurve";
    rep.seed = o.common.seed;
    std::mt19937_64 rng(o.common.seed);
    std::uniform_real_distribution<double> uu(0.0, 1.0), um(-1.5, 1.5);
    const int n = o.n;

    auto sample_lambda = [&]() {
        VectorXd l(n);
        for (int j = 0; j < n; ++j)
            l[j] = fam.sample_lo[j] + uu(rng) * (fam.sample_hi[j] - fam.sample_lo[j]);
        return l;
    };

    double curve = 0.0;
    for (int t = 0; t < o.points; ++t) {
        const VectorXd l = sample_lambda();
        VectorXd mu(n);
        for (int j = 0; j < n; ++j) mu[j] = um(rng);
        std::vector<double> h;
        for (const auto& H : fam.hamiltonians) h.push_back(H.eval(l, mu));
        for (int i = 0; i < n; ++i) {
            double lhs = 0.0;
            for (int j = 0; j < n; ++j) lhs += h[static_cast<size_t>(j)] * std::pow(l[i], n - 1 - j);
            const double rhs =
                0.5 * std::pow(l[i], o.m) * mu[i] * mu[i] + std::pow(l[i], o.k);
            curve = std::max(curve, std::abs(lhs - rhs));
        }
    }
    rep.add_residual("curve_identity_max", curve, 1e-8);

    double commute = 0.0;
    for (int t = 0; t < o.points; ++t) {
        const VectorXd l = sample_lambda();
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                commute = std::max(commute, poisson_bracket(fam.hamiltonians[static_cast<size_t>(a)],
                                                            fam.hamiltonians[static_cast<size_t>(b)], l)
                                                .max_abs_coeff());
    }
    rep.add_residual("hamiltonian_commutation_max", commute, 1e-6);

    const std::string dir = resolve_dir(o.common);

    nlohmann::ordered_json tables = nlohmann::ordered_json::array();
    for (int t = 0; t < 5; ++t) {
        const VectorXd l = sample_lambda();
        nlohmann::ordered_json row;
        row["lambda"] = std::vector<double>(l.data(), l.data() + n);
        for (int i = 0; i < n; ++i)
            row["H" + std::to_string(i + 1)] =
                poly_to_json(fam.hamiltonians[static_cast<size_t>(i)].coefficients_at(l));
        tables.push_back(std::move(row));
    }
    write_text_file(dir + "/sepcurve_hamiltonians.json", tables.dump(2) + "\n");

    // one dispersionless flow sampled on smooth in-band profiles
    const int grid = 128;
    const double dx = 1.0 / (grid - 1);
    MatrixXd q(n, grid);
    for (int c = 0; c < grid; ++c) {
        const double x = c * dx;
        VectorXd l(n);
        for (int j = 0; j < n; ++j) {
            const double s = 0.25 + 0.05 * j + 0.3 * x * (1.0 - x);
            l[j] = fam.sample_lo[j] + s * (fam.sample_hi[j] - fam.sample_lo[j]);
        }
        q.col(c) = fam.config_map(l);
    }
    const int flow_index = std::min(2, n);
    const MatrixXd qt = dispersionless_rhs(fam, flow_index, q, dx);
    nlohmann::ordered_json dl;
    dl["flow"] = flow_index;
    dl["dx"] = dx;
    for (int j = 0; j < n; ++j) {
        std::vector<double> qs(grid), qts(grid);
        for (int c = 0; c < grid; ++c) {
            qs[static_cast<size_t>(c)] = q(j, c);
            qts[static_cast<size_t>(c)] = qt(j, c);
        }
        dl["q" + std::to_string(j + 1)] = qs;
        dl["q" + std::to_string(j + 1) + "_t"] = qts;
    }
    write_text_file(dir + "/sepcurve_dispersionless.json", dl.dump(2) + "\n");

    return finish(rep, dir, "sepcurve");
}

// ----------------------------------------------------------- henon-heiles --

struct HenonOpts {
    int points = 100;
    CommonOpts common;
};

int run_henon(const HenonOpts& o) {
    const auto [H1, H2] = henon_heiles_cartesian();
    Report rep;
    rep.subcommand = "henon-heiles";
    rep.seed = o.common.seed;
    std::mt19937_64 rng(o.common.seed);
    std::uniform_real_distribution<double> u(-1.5, 1.5);

    MomentumPolynomial target(2);
    target.add_term({2, 0}, ScalarField::constant(0.5));
    target.add_term({0, 2}, ScalarField::constant(0.5));
    target.add_term({0, 0}, ScalarField::make([](const VectorXd& q) {
        return q[0] * q[0] * q[0] + 0.5 * q[0] * q[1] * q[1];
    }));

    double coeff = 0.0;
    for (int t = 0; t < 20; ++t) {
        VectorXd q(2);
        q << u(rng), u(rng);
        coeff = std::max(coeff, (H1.coefficients_at(q) - target.coefficients_at(q)).max_abs_coeff());
    }
    rep.add_residual("h1_cubic_form_coefficient_max", coeff, 1e-8);

    double commute = 0.0;
    for (int t = 0; t < o.points; ++t) {
        VectorXd q(2);
        q << u(rng), u(rng);
        commute = std::max(commute, poisson_bracket(H1, H2, q).max_abs_coeff());
    }
    rep.add_residual("pair_commutation_max", commute, 1e-6);

    const std::string dir = resolve_dir(o.common);
    nlohmann::ordered_json tables = nlohmann::ordered_json::array();
    for (int t = 0; t < 5; ++t) {
        VectorXd q(2);
        q << u(rng), u(rng);
        nlohmann::ordered_json row;
        row["q"] = std::vector<double>{q[0], q[1]};
        row["H1"] = poly_to_json(H1.coefficients_at(q));
        row["H2"] = poly_to_json(H2.coefficients_at(q));
        tables.push_back(std::move(row));
    }
    write_text_file(dir + "/henon_heiles_coefficients.json", tables.dump(2) + "\n");

    return finish(rep, dir, "henon_heiles");
}

// --------------------------------------------------------------- cofactor --

struct CofactorOpts {
    int grid = 21;
    double t_final = 10.0;
    CommonOpts common;
};

int run_cofactor(const CofactorOpts& o) {
    NewtonSystem sys;
    sys.dim = 2;
    sys.triangular = true;
    sys.force = [](const VectorXd& x) {
        VectorXd f(2);
        f << -4.0 * x[0], 6.0 * x[0] * x[0] - 4.0 * x[1];
        return f;
    };
    const auto G = SymmetricTensorField::make(2, [](const VectorXd& x) {
        MatrixXd m(2, 2);
        m << 1.0, -x[0], -x[0], -2.0 * x[1];
        return m;
    });
    GridRegion region;
    region.lo = Vector2d(-1.0, 0.1);
    region.hi = Vector2d(1.0, 2.0);
    region.points_per_axis = o.grid;

    Report rep;
    rep.subcommand = "cofactor";
    rep.seed = o.common.seed;

    const auto res = check_cofactor(sys, G, region);
    rep.add("cofactor_pair_detected", res.ok ? 1.0 : 0.0, 1.0, res.ok);
    rep.add_residual("closedness_residual_max", res.closedness_residual, 1e-6);
    rep.add_residual("path_independence", res.path_agreement, 1e-6);

    const auto k_ref = [](double x1, double x2) {
        return -(1.5 * x1 * x1 * x1 * x1 + 2.0 * x1 * x1 * x2 - 2.0 * x2 * x2);
    };
    double mean = 0.0, rms = 0.0;
    std::vector<double> diffs;
    if (res.ok) {
        for (int a = 0; a < o.grid; ++a)
            for (int b = 0; b < o.grid; ++b) {
                VectorXd x(2);
                x << region.lo[0] + (region.hi[0] - region.lo[0]) * a / (o.grid - 1.0),
                    region.lo[1] + (region.hi[1] - region.lo[1]) * b / (o.grid - 1.0);
                diffs.push_back(res.k(x) - k_ref(x[0], x[1]));
            }
        for (double d : diffs) mean += d;
        mean /= static_cast<double>(diffs.size());
        for (double d : diffs) rms += (d - mean) * (d - mean);
        rms = std::sqrt(rms / static_cast<double>(diffs.size()));
    }
    rep.add_residual("recovered_k_rms_vs_reference", res.ok ? rms : 1.0, 1e-8);

    const auto flow = triangular_flow_check(Vector2d(1.0, 0.0), Vector2d(0.0, 0.0), o.t_final);
    rep.add_residual("u1_harmonic_residual", flow.harmonic_residual, 1e-6);
    rep.add_residual("u2_forced_residual", flow.u2_residual, 1e-6);
    rep.add_residual("e1_energy_drift", flow.energy_drift, 1e-6);

    const std::string dir = resolve_dir(o.common);
    std::string closecsv = "x1,x2,normalized_curl\n";
    std::string kcsv = "x1,x2,k_recovered,k_reference\n";
    char buf[160];
    for (int a = 0; a < o.grid; ++a)
        for (int b = 0; b < o.grid; ++b) {
            VectorXd x(2);
            x << region.lo[0] + (region.hi[0] - region.lo[0]) * a / (o.grid - 1.0),
                region.lo[1] + (region.hi[1] - region.lo[1]) * b / (o.grid - 1.0);
            auto w = [&](const VectorXd& y) {
                return VectorXd(-cofactor_matrix(G, y) * sys.force(y));
            };
            const double h = 1e-5;
            VectorXd xp = x, xm = x, yp = x, ym = x;
            xp[0] += h;
            xm[0] -= h;
            yp[1] += h;
            ym[1] -= h;
            const double curl = (w(xp)[1] - w(xm)[1]) / (2 * h) - (w(yp)[0] - w(ym)[0]) / (2 * h);
            const double scale = std::max(1.0, w(x).norm());
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x[0], x[1],
                          std::abs(curl) / scale);
            closecsv += buf;
            if (res.ok) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", x[0], x[1], res.k(x),
                              k_ref(x[0], x[1]) + mean);
                kcsv += buf;
            }
        }
    write_text_file(dir + "/cofactor_closedness.csv", closecsv);
    if (res.ok) write_text_file(dir + "/cofactor_k.csv", kcsv);

    return finish(rep, dir, "cofactor");
}

// -------------------------------------------------------------- superint3 --

struct Superint3Opts {
    std::string potential = "calogero";
    std::vector<double> k{1.0, 1.0, 1.0};
    double t_final = 5.0;
    double rel_tol = 1e-10;
    int rank_points = 20;
    CommonOpts common;
};

Vector3d safe_cylindrical_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ur(0.5, 2.5), upsi(-3.0, 3.0), uz(-1.5, 1.5);
    for (;;) {
        const Vector3d q(ur(rng), upsi(rng), uz(rng));
        const Vector3d x = jacobi_inverse(q[0], q[1], q[2]);
        const Vector3d X(x[0] - x[1], x[1] - x[2], x[2] - x[0]);
        double margin = 1e9;
        for (int i = 0; i < 3; ++i) {
            margin = std::min(margin, std::abs(X[i]));
            margin = std::min(margin, std::abs(X[(i + 1) % 3] - X[(i + 2) % 3]));
        }
        if (margin > 0.25 * q[0]) return q;
    }
}

int run_superint3(const Superint3Opts& o) {
    const Vector3d k(o.k[0], o.k[1], o.k[2]);
    ThreeBodyPotential P;
    if (o.potential == "calogero")
        P = potential_calogero(k);
    else if (o.potential == "wolfes")
        P = potential_wolfes(k);
    else
        P = potential_new(k);

    Report rep;
    rep.subcommand = "superint3";
    rep.seed = o.common.seed;
    std::mt19937_64 rng(o.common.seed);

    rep.add_residual("form_invariant_residual", form_invariant_residual(P), 1e-10);

    const auto five = integrals(P);
    // line configuration clear of every pairwise and three-body coincidence
    const auto [q0, p0] = phase_from_line(Vector3d(1.0, -0.3, -0.7), Vector3d(0.05, -0.15, 0.10));
    const auto traj = integrate_hamiltonian(five[0], charts::cylindrical(), q0, p0, o.t_final,
                                            o.rel_tol);
    const auto drifts = conservation_report(traj, five);
    const char* names[5] = {"drift_h", "drift_h1", "drift_h2", "drift_h3", "drift_h4"};
    for (int i = 0; i < 5; ++i) rep.add_residual(names[i], drifts[static_cast<size_t>(i)], 1e-6);

    int rmin = 5, rmax = 0;
    std::uniform_real_distribution<double> up(-1.5, 1.5);
    for (int t = 0; t < o.rank_points; ++t) {
        const Vector3d q = safe_cylindrical_point(rng);
        VectorXd p(3);
        p << up(rng), up(rng), up(rng);
        const int r = independence_rank(five, q, p);
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    rep.add_exact("independence_rank_min", rmin, 4.0);
    rep.add_exact("independence_rank_max", rmax, 4.0);

    const std::string dir = resolve_dir(o.common);
    write_text_file(dir + "/superint3_trajectory.csv", trajectory_csv(traj, 3, "q", "p"));
    return finish(rep, dir, "superint3");
}

// ------------------------------------------------------------- stackel-fit --

struct StackelOpts {
    double G = 1.0, D = 0.1;
    double r_min = 0.8, r_max = 2.5;
    int resolution = 48;
    double c_min = 0.05, c_max = 1.2;
    CommonOpts common;
};

int run_stackel(const StackelOpts& o) {
    const auto V = quadrupole_potential(o.G, o.D);
    const auto fam = SeparableFamily::confocal_elliptic();
    const auto region = FitRegion::annulus(o.r_min, o.r_max, o.resolution);
    const auto fit = fit_family(V, fam, region, o.c_min, o.c_max);
    const double c2 = fit.c_star * fit.c_star;
    std::printf("fit: c*^2 = %.6g, objective = %.6g, projection rms = %.6g\n", c2, fit.objective,
                fit.projection.rms);

    Report rep;
    rep.subcommand = "stackel-fit";
    rep.seed = o.common.seed;
    std::mt19937_64 rng(o.common.seed);

    if (o.G > 0.0 && o.D > 0.0) {
        const double target = 2.0 * o.D / o.G;
        rep.add_residual("focus_squared_relative_error", std::abs(c2 - target) / target, 0.05);
    }
    rep.add_residual("w_form_rms", focal_form_rms(fit.projection.W, fit.c_star, region),
                     10.0 * fit.projection.rms);

    const auto cart = charts::cartesian(2);
    const auto K = fam.tensor(fit.c_star);
    std::uniform_real_distribution<double> ur(o.r_min, o.r_max), ut(-M_PI, M_PI);
    double char_res = 0.0, mu_min = 0.0;
    for (int t = 0; t < 40; ++t) {
        VectorXd q(2);
        const double r = ur(rng), th = ut(rng);
        q << r * std::cos(th), r * std::sin(th);
        char_res = std::max(char_res,
                            std::abs(characteristic_residual(K, fit.projection.W, cart, q)(0, 1)));
        mu_min = std::min(mu_min, mu_scalar(K, V, fit.projection.partner, cart, q));
    }
    rep.add_residual("characteristic_residual_at_fit", char_res, 1e-6);
    rep.add_residual("mu_negative_part", std::max(0.0, -mu_min), 0.0);

    const std::string dir = resolve_dir(o.common);
    std::string curve = "c,objective\n";
    char buf[96];
    for (const auto& [c, J] : fit.curve) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", c, J);
        curve += buf;
    }
    write_text_file(dir + "/stackel_fit_objective.csv", curve);

    const auto grid = region_grid(region);
    const long stride = std::max<long>(1, grid.points.cols() / 500);
    nlohmann::ordered_json samples = nlohmann::ordered_json::array();
    for (long i = 0; i < grid.points.cols(); i += stride) {
        const VectorXd q = grid.points.col(i);
        nlohmann::ordered_json row;
        row["x"] = q[0];
        row["y"] = q[1];
        row["V"] = V(q);
        row["W"] = fit.projection.W(q);
        samples.push_back(std::move(row));
    }
    nlohmann::ordered_json wjson;
    wjson["c_star"] = fit.c_star;
    wjson["c_star_squared"] = c2;
    wjson["objective"] = fit.objective;
    wjson["projection_rms"] = fit.projection.rms;
    wjson["samples"] = std::move(samples);
    write_text_file(dir + "/stackel_fit_w.json", wjson.dump(2) + "\n");

    return finish(rep, dir, "stackel_fit");
}

// ------------------------------------------------------------------- flow --

struct FlowOpts {
    double t_final = 100.0;
    double rel_tol = 1e-10;
    CommonOpts common;
};

int run_flow(const FlowOpts& o) {
    const auto cart = charts::cartesian(1);
    MomentumPolynomial H(1);
    H.add_term({2}, ScalarField::constant(0.5));
    H.add_term({0}, ScalarField::make([](const VectorXd& q) { return 0.5 * q[0] * q[0]; },
                                      [](const VectorXd& q) { return VectorXd(q); }));

    Report rep;
    rep.subcommand = "flow";
    rep.seed = o.common.seed;
    std::mt19937_64 rng(o.common.seed);
    std::uniform_real_distribution<double> u(0.4, 1.5);
    VectorXd q0(1), p0(1);
    q0 << u(rng);
    p0 << u(rng);

    const auto traj = integrate_hamiltonian(H, cart, q0, p0, o.t_final, o.rel_tol);
    const double drift = conservation_report(traj, {H})[0];
    rep.add_residual("energy_drift", drift, 100.0 * o.rel_tol);

    const auto half = integrate_hamiltonian(H, cart, q0, p0, o.t_final, 0.5 * o.rel_tol);
    const double ratio = drift / std::max(conservation_report(half, {H})[0], 1e-300);
    rep.add("halving_rel_tol_drift_ratio", ratio, 4.0, ratio >= 4.0);

    const auto coarse = integrate_hamiltonian_fixed(H, cart, q0, p0, 20.0, 0.1);
    const auto fine = integrate_hamiltonian_fixed(H, cart, q0, p0, 20.0, 0.05);
    const double fixed_ratio = conservation_report(coarse, {H})[0] /
                               std::max(conservation_report(fine, {H})[0], 1e-300);
    rep.add("halving_step_drift_ratio", fixed_ratio, 4.0, fixed_ratio >= 4.0);

    // forward, negate momenta, integrate the same duration again
    const double rev_tol = 1e-9;
    const auto fwd = integrate_hamiltonian(H, cart, q0, p0, o.t_final, rev_tol);
    const long last = static_cast<long>(fwd.times.size()) - 1;
    VectorXd q1 = fwd.states.col(last).head(1), p1 = -fwd.states.col(last).tail(1);
    const auto bwd = integrate_hamiltonian(H, cart, q1, p1, o.t_final, rev_tol);
    const long lb = static_cast<long>(bwd.times.size()) - 1;
    const double ret = std::max((bwd.states.col(lb).head(1) - q0).norm(),
                                (bwd.states.col(lb).tail(1) + p0).norm());
    const double scale = std::max({1.0, q0.norm(), p0.norm()});
    const double budget = 10.0 * rev_tol * static_cast<double>(fwd.accepted + bwd.accepted) * scale;
    rep.add_residual("time_reversal_return", ret, budget);

    const std::string dir = resolve_dir(o.common);
    write_text_file(dir + "/flow_trajectory.csv", trajectory_csv(traj, 1, "q", "p"));
    return finish(rep, dir, "flow");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certification front-end for separable and integrable Hamiltonian structures"};
    app.require_subcommand(0, 1);

    BenentiOpts bo;
    auto* ben = app.add_subcommand("benenti", "L-tensor hierarchy certification");
    ben->add_option("--chart", bo.chart, "web type: cartesian, polar, elliptic, parabolic")
        ->check(CLI::IsMember({"cartesian", "polar", "elliptic", "parabolic"}));
    ben->add_option("--c", bo.c, "focal parameter of the elliptic web");
    ben->add_option("--potential", bo.potential, "potential pairing: auto, harmonic, kepler, none")
        ->check(CLI::IsMember({"auto", "harmonic", "kepler", "none"}));
    ben->add_option("--samples", bo.samples, "sample points per check")->check(CLI::PositiveNumber);
    add_common(ben, bo.common);

    SepcurveOpts so;
    auto* sep = app.add_subcommand("sepcurve", "separation-curve family certification");
    sep->add_option("--n", so.n, "degrees of freedom")->check(CLI::Range(1, 6));
    sep->add_option("--m", so.m, "momentum weight exponent");
    sep->add_option("--k", so.k, "potential exponent");
    sep->add_option("--points", so.points, "sample points per check")->check(CLI::PositiveNumber);
    add_common(sep, so.common);

    HenonOpts ho;
    auto* hh = app.add_subcommand("henon-heiles", "separable cubic pair in cartesian variables");
    hh->add_option("--points", ho.points, "sample points for the bracket check")
        ->check(CLI::PositiveNumber);
    add_common(hh, ho.common);

    CofactorOpts co;
    auto* cof = app.add_subcommand("cofactor", "cofactor-pair detection on the triangular example");
    cof->add_option("--grid", co.grid, "grid points per axis")->check(CLI::Range(5, 201));
    cof->add_option("--t-final", co.t_final, "flow horizon")->check(CLI::PositiveNumber);
    add_common(cof, co.common);

    Superint3Opts io;
    auto* si = app.add_subcommand("superint3", "three-body superintegrability certification");
    si->add_option("--potential", io.potential, "calogero, wolfes, or new")
        ->check(CLI::IsMember({"calogero", "wolfes", "new"}));
    si->add_option("--k", io.k, "coupling triple, e.g. 1,1,1")->delimiter(',')->expected(3);
    si->add_option("--t-final", io.t_final, "flow horizon")->check(CLI::PositiveNumber);
    si->add_option("--rel-tol", io.rel_tol, "integrator tolerance");
    si->add_option("--rank-points", io.rank_points, "points for the rank certificate")
        ->check(CLI::PositiveNumber);
    add_common(si, io.common);

    StackelOpts to;
    auto* st = app.add_subcommand("stackel-fit", "best separable approximation of the quadrupole");
    st->add_option("--G", to.G, "monopole strength");
    st->add_option("--D", to.D, "quadrupole strength");
    st->add_option("--r-min", to.r_min, "annulus inner radius")->check(CLI::PositiveNumber);
    st->add_option("--r-max", to.r_max, "annulus outer radius")->check(CLI::PositiveNumber);
    st->add_option("--resolution", to.resolution, "radial grid resolution")
        ->check(CLI::Range(4, 256));
    st->add_option("--c-min", to.c_min, "focal search lower bound")->check(CLI::PositiveNumber);
    st->add_option("--c-max", to.c_max, "focal search upper bound")->check(CLI::PositiveNumber);
    add_common(st, to.common);

    FlowOpts fo;
    auto* fl = app.add_subcommand("flow", "integrator drift, order, and reversibility checks");
    fl->add_option("--t-final", fo.t_final, "flow horizon")->check(CLI::PositiveNumber);
    fl->add_option("--rel-tol", fo.rel_tol, "integrator tolerance");
    add_common(fl, fo.common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (app.get_subcommands().empty()) {
        std::puts(app.help().c_str());
        return 2;
    }

    try {
        if (ben->parsed()) return run_benenti(bo);
        if (sep->parsed()) return run_sepcurve(so);
        if (hh->parsed()) return run_henon(ho);
        if (cof->parsed()) return run_cofactor(co);
        if (si->parsed()) return run_superint3(io);
        if (st->parsed()) return run_stackel(to);
        if (fl->parsed()) return run_flow(fo);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
