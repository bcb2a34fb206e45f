#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <utility>

#include "sova/numdiff.hpp"

namespace sova {

// Scalar function of a configuration point. An analytic gradient is optional;
// grad() falls back to central differences when none is supplied.
struct ScalarField {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;  // may be empty
    bool zero = false;

    double operator()(const Eigen::VectorXd& q) const { return zero ? 0.0 : value(q); }

    Eigen::VectorXd grad(const Eigen::VectorXd& q) const {
        if (zero) return Eigen::VectorXd::Zero(q.size());
        if (gradient) return gradient(q);
        return fd_gradient(value, q);
    }

    static ScalarField constant(double c) {
        ScalarField f;
        f.value = [c](const Eigen::VectorXd&) { return c; };
        f.gradient = [](const Eigen::VectorXd& q) { return Eigen::VectorXd::Zero(q.size()); };
        f.zero = (c == 0.0);
        return f;
    }

    static ScalarField make(std::function<double(const Eigen::VectorXd&)> v,
                            std::function<Eigen::VectorXd(const Eigen::VectorXd&)> g = {}) {
        ScalarField f;
        f.value = std::move(v);
        f.gradient = std::move(g);
        return f;
    }
};

// Symmetric matrix-valued function of a configuration point (contravariant
// components unless a consuming operation states otherwise). The returned
// matrix is symmetrized so downstream algebra can rely on exact symmetry.
struct SymmetricTensorField {
    int dim = 0;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> raw;

    Eigen::MatrixXd operator()(const Eigen::VectorXd& q) const {
        Eigen::MatrixXd m = raw(q);
        if (m.rows() != dim || m.cols() != dim) throw std::invalid_argument("tensor dim mismatch");
        return 0.5 * (m + m.transpose());
    }

    static SymmetricTensorField make(int dim, std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> f) {
        SymmetricTensorField t;
        t.dim = dim;
        t.raw = std::move(f);
        return t;
    }

    static SymmetricTensorField identity(int dim) {
        return make(dim, [dim](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(dim, dim); });
    }

    static SymmetricTensorField constant(const Eigen::MatrixXd& m) {
        return make(static_cast<int>(m.rows()), [m](const Eigen::VectorXd&) { return m; });
    }
};

}  // namespace sova
