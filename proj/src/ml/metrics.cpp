#include "dgpenalty/ml/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dgpenalty/error.hpp"

namespace dgp::ml {

namespace {

void same_length(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    if (a.size() != b.size() || a.size() == 0) {
        throw Error(ErrorKind::InvalidArgument, "metric inputs must be nonempty and of equal length");
    }
}

double variance(const Eigen::VectorXd& v)
{
    return (v.array() - v.mean()).square().mean();
}

} // namespace

double mse(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat)
{
    same_length(y, y_hat);
    return (y - y_hat).squaredNorm() / static_cast<double>(y.size());
}

std::optional<double> r2_score(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat)
{
    same_length(y, y_hat);
    const double ss_tot = (y.array() - y.mean()).square().sum();
    if (ss_tot == 0.0) {
        return std::nullopt;
    }
    return 1.0 - (y - y_hat).squaredNorm() / ss_tot;
}

std::optional<double> explained_variance(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat)
{
    same_length(y, y_hat);
    const double vy = variance(y);
    if (vy == 0.0) {
        return std::nullopt;
    }
    return 1.0 - variance(y - y_hat) / vy;
}

double binary_cross_entropy(const Eigen::VectorXd& y, const Eigen::VectorXd& proba)
{
    same_length(y, proba);
    constexpr double eps = 1e-12;
    double s = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double p = std::clamp(proba(i), eps, 1.0 - eps);
        s -= y(i) * std::log(p) + (1.0 - y(i)) * std::log(1.0 - p);
    }
    return s / static_cast<double>(y.size());
}

double accuracy(const Eigen::VectorXd& y, const Eigen::VectorXd& predicted_class)
{
    same_length(y, predicted_class);
    long hits = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        hits += y(i) == predicted_class(i) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(y.size());
}

double ConfusionMatrix::accuracy() const
{
    if (total() == 0) {
        throw Error(ErrorKind::InvalidArgument, "empty confusion matrix");
    }
    return static_cast<double>(tp + tn) / static_cast<double>(total());
}

ConfusionMatrix confusion_matrix(const Eigen::VectorXd& y, const Eigen::VectorXd& predicted_class)
{
    same_length(y, predicted_class);
    ConfusionMatrix cm;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const bool truth = y(i) == 1.0;
        const bool pred = predicted_class(i) == 1.0;
        if (truth && pred) {
            ++cm.tp;
        } else if (!truth && pred) {
            ++cm.fp;
        } else if (truth && !pred) {
            ++cm.fn;
        } else {
            ++cm.tn;
        }
    }
    return cm;
}

} // namespace dgp::ml
