#pragma once

#include <optional>

#include <Eigen/Dense>

namespace dgp::ml {

double mse(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);
/// 1 - SS_res / SS_tot; empty when SS_tot = 0.
std::optional<double> r2_score(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);
/// 1 - Var(y - y_hat) / Var(y); empty when Var(y) = 0.
std::optional<double> explained_variance(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);
/// Mean binary cross entropy with probabilities clipped to [1e-12, 1 - 1e-12].
double binary_cross_entropy(const Eigen::VectorXd& y, const Eigen::VectorXd& proba);
double accuracy(const Eigen::VectorXd& y, const Eigen::VectorXd& predicted_class);

struct ConfusionMatrix {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;

    [[nodiscard]] long total() const noexcept { return tp + fp + fn + tn; }
    [[nodiscard]] double accuracy() const;
};

ConfusionMatrix confusion_matrix(const Eigen::VectorXd& y, const Eigen::VectorXd& predicted_class);

} // namespace dgp::ml
