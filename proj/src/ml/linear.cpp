#include "dgpenalty/ml/linear.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "dgpenalty/error.hpp"

namespace dgp::ml {

double sigmoid(double z) noexcept
{
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double z) noexcept
{
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

Eigen::VectorXd LinearModel::decision(const Eigen::MatrixXd& X) const
{
    if (X.cols() != coef.size()) {
        throw Error(ErrorKind::SchemaMismatch, "feature count does not match the model");
    }
    return (X * coef).array() + intercept;
}

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& X) const
{
    Eigen::VectorXd z = decision(X);
    if (kind == LinearKind::Logistic) {
        z = z.unaryExpr([](double v) { return sigmoid(v); });
    }
    return z;
}

Eigen::VectorXd LinearModel::predict_class(const Eigen::MatrixXd& X) const
{
    return predict(X).unaryExpr([](double v) { return v >= 0.5 ? 1.0 : 0.0; });
}

LinearModel fit_linear_regression(const Dataset& train, const LinearFitOptions& options, LinearFitReport* report)
{
    train.validate(false);
    if (options.epochs < 1 || !(options.lr > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "need epochs >= 1 and lr > 0");
    }
    const Eigen::Index n = train.rows();
    LinearModel m;
    m.kind = LinearKind::Regression;
    m.coef = Eigen::VectorXd::Zero(train.features());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(options.seed);
    LinearFitReport rep;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        const double lr = options.lr / (1.0 + options.lr_decay * epoch);
        for (Eigen::Index i : order) {
            const double r = m.intercept + train.X.row(i).dot(m.coef) - train.y(i);
            m.intercept -= lr * r;
            m.coef -= lr * r * train.X.row(i).transpose();
        }
        const double loss = ((train.X * m.coef).array() + m.intercept - train.y.array()).square().mean();
        if (!std::isfinite(loss)) {
            throw Error(ErrorKind::TrainingDiverged, "SGD loss became non-finite at lr = " + std::to_string(options.lr));
        }
        rep.loss.push_back(loss);
    }
    rep.iterations = options.epochs;
    if (report != nullptr) {
        *report = std::move(rep);
    }
    return m;
}

namespace {

struct LogisticEval {
    double loss = 0.0;
    double g0 = 0.0;
    Eigen::VectorXd g;
};

LogisticEval logistic_eval(const Dataset& d, double b, const Eigen::VectorXd& w)
{
    const Eigen::VectorXd z = (d.X * w).array() + b;
    const double n = static_cast<double>(d.rows());
    LogisticEval e;
    Eigen::VectorXd r(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        e.loss += softplus(z(i)) - d.y(i) * z(i);
        r(i) = sigmoid(z(i)) - d.y(i);
    }
    e.loss /= n;
    e.g0 = r.sum() / n;
    e.g = d.X.transpose() * r / n;
    return e;
}

} // namespace

LinearModel fit_logistic_regression(const Dataset& train, const LinearFitOptions& options, LinearFitReport* report)
{
    train.validate(true);
    LinearModel m;
    m.kind = LinearKind::Logistic;
    m.coef = Eigen::VectorXd::Zero(train.features());
    LinearFitReport rep;
    LogisticEval cur = logistic_eval(train, m.intercept, m.coef);
    double step = 1.0;
    for (int it = 0; it < options.max_iter; ++it) {
        const double gmax = std::max(std::abs(cur.g0), cur.g.size() > 0 ? cur.g.cwiseAbs().maxCoeff() : 0.0);
        if (gmax < options.grad_tol) {
            break;
        }
        const double gg = cur.g0 * cur.g0 + cur.g.squaredNorm();
        step = std::min(step * 2.0, 1e6);
        double b = 0.0;
        Eigen::VectorXd w;
        LogisticEval next;
        for (;;) {
            b = m.intercept - step * cur.g0;
            w = m.coef - step * cur.g;
            next = logistic_eval(train, b, w);
            if (next.loss <= cur.loss - 1e-4 * step * gg || step < 1e-16) {
                break;
            }
            step *= 0.5;
        }
        if (!std::isfinite(next.loss)) {
            throw Error(ErrorKind::TrainingDiverged, "logistic loss became non-finite");
        }
        m.intercept = b;
        m.coef = w;
        cur = next;
        rep.loss.push_back(cur.loss);
        rep.iterations = it + 1;
        const double wmax = m.coef.size() > 0 ? m.coef.cwiseAbs().maxCoeff() : 0.0;
        if (wmax > options.coef_cap) {
            // separable data: the loss keeps falling as the weights grow
            const double s = options.coef_cap / wmax;
            m.coef *= s;
            m.intercept *= s;
            rep.capped = true;
            rep.warning = "coefficients reached the cap " + std::to_string(options.coef_cap)
                          + "; data look separable";
            break;
        }
    }
    if (report != nullptr) {
        *report = std::move(rep);
    }
    return m;
}

} // namespace dgp::ml
