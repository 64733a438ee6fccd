#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dgpenalty/ml/dataset.hpp"

namespace dgp::ml {

enum class LinearKind { Regression, Logistic };

struct LinearModel {
    LinearKind kind = LinearKind::Regression;
    double intercept = 0.0;
    Eigen::VectorXd coef;

    [[nodiscard]] Eigen::VectorXd decision(const Eigen::MatrixXd& X) const;
    /// Regression value, or P(class 1) for the logistic kind.
    [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
    /// 1 iff P(class 1) >= 0.5.
    [[nodiscard]] Eigen::VectorXd predict_class(const Eigen::MatrixXd& X) const;
};

struct LinearFitOptions {
    // SGD (regression)
    int epochs = 200;
    double lr = 1e-2;
    double lr_decay = 1e-2; // lr / (1 + decay * epoch)
    std::uint64_t seed = 0;
    // gradient descent (logistic)
    int max_iter = 10000;
    double grad_tol = 1e-6;
    double coef_cap = 50.0;
};

struct LinearFitReport {
    std::vector<double> loss; // per epoch (regression) or per iteration (logistic)
    int iterations = 0;
    bool capped = false;
    std::string warning;
};

/// Least squares by per-sample SGD on shuffled rows.
LinearModel fit_linear_regression(const Dataset& train, const LinearFitOptions& options = {},
                                  LinearFitReport* report = nullptr);

/// Mean binary cross entropy by full-batch gradient descent with Armijo backtracking.
LinearModel fit_logistic_regression(const Dataset& train, const LinearFitOptions& options = {},
                                    LinearFitReport* report = nullptr);

double sigmoid(double z) noexcept;
/// log(1 + exp(z)) without overflow.
double softplus(double z) noexcept;

} // namespace dgp::ml
