#include "dgpenalty/ml/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dgpenalty/error.hpp"
#include "dgpenalty/ml/linear.hpp"
#include "dgpenalty/ml/metrics.hpp"
#include "dgpenalty/sweeps.hpp"

namespace dgp::ml {

const char* to_string(Activation a) noexcept
{
    switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    }
    return "unknown";
}

Activation activation_from_string(const std::string& name)
{
    for (Activation a : {Activation::Identity, Activation::Relu, Activation::Sigmoid}) {
        if (name == to_string(a)) {
            return a;
        }
    }
    throw Error(ErrorKind::InvalidArgument, "unknown activation '" + name + "'");
}

const char* to_string(MlpTask t) noexcept
{
    return t == MlpTask::Regression ? "regression" : "classification";
}

MlpTask mlp_task_from_string(const std::string& name)
{
    if (name == "regression") {
        return MlpTask::Regression;
    }
    if (name == "classification") {
        return MlpTask::Classification;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown task '" + name + "'");
}

const char* to_string(OptimizerKind k) noexcept
{
    return k == OptimizerKind::Adam ? "adam" : "sgd";
}

OptimizerKind optimizer_from_string(const std::string& name)
{
    if (name == "adam") {
        return OptimizerKind::Adam;
    }
    if (name == "sgd") {
        return OptimizerKind::Sgd;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown optimizer '" + name + "'");
}

namespace {

void activate(Activation act, const Eigen::MatrixXd& z, Eigen::MatrixXd& a)
{
    switch (act) {
    case Activation::Identity: a = z; break;
    case Activation::Relu: a = z.cwiseMax(0.0); break;
    case Activation::Sigmoid: a = z.unaryExpr([](double v) { return sigmoid(v); }); break;
    }
}

// elementwise derivative of the activation at z, given a = act(z)
Eigen::MatrixXd activation_slope(Activation act, const Eigen::MatrixXd& z, const Eigen::MatrixXd& a)
{
    switch (act) {
    case Activation::Identity: return Eigen::MatrixXd::Ones(z.rows(), z.cols());
    case Activation::Relu: return (z.array() > 0.0).cast<double>().matrix();
    case Activation::Sigmoid: return (a.array() * (1.0 - a.array())).matrix();
    }
    return {};
}

} // namespace

Mlp::Mlp(std::vector<int> layer_sizes, Activation hidden, Activation output)
    : sizes_(std::move(layer_sizes)), hidden_(hidden), output_(output)
{
    if (sizes_.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "network needs an input and an output layer");
    }
    for (int s : sizes_) {
        if (s < 1) {
            throw Error(ErrorKind::InvalidArgument, "layer sizes must be positive");
        }
    }
    if (sizes_.back() != 1) {
        throw Error(ErrorKind::InvalidArgument, "network has a single output");
    }
    Eigen::Index off = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        offsets_.push_back(off);
        off += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
    }
    params_ = Eigen::VectorXd::Zero(off);
}

void Mlp::init_he(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    for (int l = 0; l < n_weight_layers(); ++l) {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / sizes_[static_cast<std::size_t>(l)]));
        auto W = weight(l);
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
            for (Eigen::Index i = 0; i < W.rows(); ++i) {
                W(i, j) = dist(rng);
            }
        }
        bias(l).setZero();
    }
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int l) const
{
    const auto ul = static_cast<std::size_t>(l);
    return {params_.data() + offsets_[ul], sizes_[ul + 1], sizes_[ul]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(int l) const
{
    const auto ul = static_cast<std::size_t>(l);
    return {params_.data() + offsets_[ul] + static_cast<Eigen::Index>(sizes_[ul + 1]) * sizes_[ul], sizes_[ul + 1]};
}

Eigen::Map<Eigen::MatrixXd> Mlp::weight(int l)
{
    const auto ul = static_cast<std::size_t>(l);
    return {params_.data() + offsets_[ul], sizes_[ul + 1], sizes_[ul]};
}

Eigen::Map<Eigen::VectorXd> Mlp::bias(int l)
{
    const auto ul = static_cast<std::size_t>(l);
    return {params_.data() + offsets_[ul] + static_cast<Eigen::Index>(sizes_[ul + 1]) * sizes_[ul], sizes_[ul + 1]};
}

void Mlp::forward_all(const Eigen::MatrixXd& X, std::vector<Eigen::MatrixXd>& z, std::vector<Eigen::MatrixXd>& a) const
{
    if (X.cols() != n_inputs()) {
        throw Error(ErrorKind::SchemaMismatch, "input has " + std::to_string(X.cols()) + " features, network expects "
                                                   + std::to_string(n_inputs()));
    }
    const int L = n_weight_layers();
    z.resize(static_cast<std::size_t>(L));
    a.resize(static_cast<std::size_t>(L) + 1);
    a[0] = X.transpose();
    for (int l = 0; l < L; ++l) {
        const auto ul = static_cast<std::size_t>(l);
        z[ul] = (weight(l) * a[ul]).colwise() + bias(l);
        activate(l + 1 == L ? output_ : hidden_, z[ul], a[ul + 1]);
        if (!a[ul + 1].allFinite()) {
            throw Error(ErrorKind::NonFinite, "non-finite activation in layer " + std::to_string(l + 1));
        }
    }
}

Eigen::VectorXd Mlp::forward(const Eigen::MatrixXd& X) const
{
    std::vector<Eigen::MatrixXd> z;
    std::vector<Eigen::MatrixXd> a;
    forward_all(X, z, a);
    return a.back().row(0).transpose();
}

namespace {

// loss and d(loss)/d(z_out) for each sample
double head_loss(Activation out, const Eigen::RowVectorXd& z, const Eigen::RowVectorXd& a, const Eigen::VectorXd& y,
                 Eigen::RowVectorXd* dz)
{
    const double n = static_cast<double>(y.size());
    double loss = 0.0;
    if (out == Activation::Sigmoid) {
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            loss += softplus(z(i)) - y(i) * z(i);
        }
        if (dz != nullptr) {
            *dz = (a - y.transpose()) / n;
        }
    } else {
        const Eigen::RowVectorXd r = a - y.transpose();
        loss = r.squaredNorm();
        if (dz != nullptr) {
            *dz = 2.0 * r / n;
            if (out == Activation::Relu) {
                *dz = dz->cwiseProduct((z.array() > 0.0).cast<double>().matrix());
            }
        }
    }
    return loss / n;
}

} // namespace

double Mlp::loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const
{
    std::vector<Eigen::MatrixXd> z;
    std::vector<Eigen::MatrixXd> a;
    forward_all(X, z, a);
    return head_loss(output_, z.back().row(0), a.back().row(0), y, nullptr);
}

double Mlp::loss_and_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Eigen::VectorXd& grad) const
{
    if (X.rows() != y.size() || y.size() == 0) {
        throw Error(ErrorKind::InvalidArgument, "batch inputs and targets differ in length");
    }
    std::vector<Eigen::MatrixXd> z;
    std::vector<Eigen::MatrixXd> a;
    forward_all(X, z, a);
    const int L = n_weight_layers();
    grad.setZero(params_.size());
    Eigen::RowVectorXd dz_out;
    const double loss = head_loss(output_, z.back().row(0), a.back().row(0), y, &dz_out);
    Eigen::MatrixXd delta = dz_out;
    for (int l = L - 1; l >= 0; --l) {
        const auto ul = static_cast<std::size_t>(l);
        Eigen::Map<Eigen::MatrixXd>(grad.data() + offsets_[ul], sizes_[ul + 1], sizes_[ul]) = delta * a[ul].transpose();
        Eigen::Map<Eigen::VectorXd>(grad.data() + offsets_[ul] + static_cast<Eigen::Index>(sizes_[ul + 1]) * sizes_[ul],
                                    sizes_[ul + 1]) = delta.rowwise().sum();
        if (l > 0) {
            const Eigen::MatrixXd back = weight(l).transpose() * delta;
            delta = back.cwiseProduct(activation_slope(hidden_, z[ul - 1], a[ul]));
        }
    }
    return loss;
}

Mlp make_mlp(int n_in, int n_hl, int n_n, MlpTask task, Activation hidden)
{
    if (n_hl < 0 || (n_hl > 0 && n_n < 1)) {
        throw Error(ErrorKind::InvalidArgument, "invalid architecture");
    }
    std::vector<int> sizes{n_in};
    for (int i = 0; i < n_hl; ++i) {
        sizes.push_back(n_n);
    }
    sizes.push_back(1);
    return {sizes, hidden, task == MlpTask::Regression ? Activation::Identity : Activation::Sigmoid};
}

MlpFit train_mlp(const Dataset& train, const Dataset& val, int n_hl, int n_n, MlpTask task,
                 const MlpTrainOptions& options)
{
    train.validate(task == MlpTask::Classification);
    val.validate(task == MlpTask::Classification);
    if (val.rows() == 0) {
        throw Error(ErrorKind::InvalidArgument, "validation split is empty");
    }
    if (options.epochs < 1 || options.batch < 1 || !(options.lr > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "need epochs >= 1, batch >= 1 and lr > 0");
    }
    MlpFit fit;
    fit.model = make_mlp(static_cast<int>(train.features()), n_hl, n_n, task, options.hidden);
    Mlp& net = fit.model;
    net.init_he(options.seed);
    std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);

    const Eigen::Index np = net.n_params();
    Eigen::VectorXd m = Eigen::VectorXd::Zero(np);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(np);
    Eigen::VectorXd g(np);
    long t = 0;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(train.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Eigen::VectorXd best = net.params();
    double best_val = std::numeric_limits<double>::infinity();
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(options.batch)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(options.batch));
            const auto bs = static_cast<Eigen::Index>(stop - start);
            Eigen::MatrixXd Xb(bs, train.features());
            Eigen::VectorXd yb(bs);
            for (Eigen::Index i = 0; i < bs; ++i) {
                const Eigen::Index r = order[start + static_cast<std::size_t>(i)];
                Xb.row(i) = train.X.row(r);
                yb(i) = train.y(r);
            }
            net.loss_and_gradient(Xb, yb, g);
            if (options.optimizer == OptimizerKind::Adam) {
                ++t;
                m = options.beta1 * m + (1.0 - options.beta1) * g;
                v = options.beta2 * v + (1.0 - options.beta2) * g.cwiseAbs2();
                const double c1 = 1.0 - std::pow(options.beta1, static_cast<double>(t));
                const double c2 = 1.0 - std::pow(options.beta2, static_cast<double>(t));
                net.params().array() -=
                    options.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + options.eps);
            } else {
                net.params() -= options.lr * g;
            }
        }
        double tl = 0.0;
        double vl = 0.0;
        try {
            tl = net.loss(train.X, train.y);
            vl = net.loss(val.X, val.y);
        } catch (const Error& e) {
            throw Error(ErrorKind::TrainingDiverged, std::string(e.what()) + " at epoch " + std::to_string(epoch)
                                                         + ", lr = " + std::to_string(options.lr));
        }
        if (!std::isfinite(tl) || !std::isfinite(vl)) {
            throw Error(ErrorKind::TrainingDiverged,
                        "loss became non-finite at epoch " + std::to_string(epoch) + ", lr = " + std::to_string(options.lr));
        }
        fit.history.train_loss.push_back(tl);
        fit.history.val_loss.push_back(vl);
        if (vl < best_val) {
            best_val = vl;
            best = net.params();
            fit.history.best_epoch = epoch;
        } else if (options.patience > 0 && epoch - fit.history.best_epoch >= options.patience) {
            break;
        }
    }
    net.params() = best;
    return fit;
}

double validation_score(const Mlp& model, const Dataset& val, MlpTask task)
{
    const Eigen::VectorXd out = model.forward(val.X);
    if (task == MlpTask::Regression) {
        return mse(val.y, out);
    }
    return accuracy(val.y, out.unaryExpr([](double p) { return p >= 0.5 ? 1.0 : 0.0; }));
}

GridResult hyperparameter_grid(const Dataset& train, const Dataset& val, const std::vector<int>& n_hls,
                               const std::vector<int>& n_ns, MlpTask task, const MlpTrainOptions& options, int jobs)
{
    if (n_hls.empty() || n_ns.empty()) {
        throw Error(ErrorKind::InvalidArgument, "architecture grids must be nonempty");
    }
    const std::size_t nc = n_hls.size() * n_ns.size();
    std::vector<MlpFit> fits(nc);
    GridResult res;
    res.cells.resize(nc);
    parallel_for(static_cast<int>(nc), jobs, [&](int c) {
        const auto uc = static_cast<std::size_t>(c);
        GridCell& cell = res.cells[uc];
        cell.n_hl = n_hls[uc / n_ns.size()];
        cell.n_n = n_ns[uc % n_ns.size()];
        fits[uc] = train_mlp(train, val, cell.n_hl, cell.n_n, task, options);
        cell.score = validation_score(fits[uc].model, val, task);
    });
    auto better = [task](const GridCell& a, const GridCell& b) {
        if (a.score != b.score) {
            return task == MlpTask::Regression ? a.score < b.score : a.score > b.score;
        }
        if (a.n_hl != b.n_hl) {
            return a.n_hl < b.n_hl;
        }
        return a.n_n < b.n_n;
    };
    for (std::size_t c = 1; c < nc; ++c) {
        if (better(res.cells[c], res.cells[res.best])) {
            res.best = c;
        }
    }
    res.best_fit = std::move(fits[res.best]);
    return res;
}

} // namespace dgp::ml
