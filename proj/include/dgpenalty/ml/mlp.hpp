#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dgpenalty/ml/dataset.hpp"

namespace dgp::ml {

enum class Activation { Identity, Relu, Sigmoid };
enum class MlpTask { Regression, Classification };

const char* to_string(Activation a) noexcept;
Activation activation_from_string(const std::string& name);
const char* to_string(MlpTask t) noexcept;
MlpTask mlp_task_from_string(const std::string& name);

/// Fully connected network with all weights and biases in one flat vector,
/// layer by layer: W_l (column-major, out x in) followed by b_l.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::vector<int> layer_sizes, Activation hidden, Activation output);

    /// Weights ~ N(0, 2 / fan_in), biases 0.
    void init_he(std::uint64_t seed);

    [[nodiscard]] const std::vector<int>& layer_sizes() const noexcept { return sizes_; }
    [[nodiscard]] int n_inputs() const { return sizes_.front(); }
    [[nodiscard]] Activation hidden_activation() const noexcept { return hidden_; }
    [[nodiscard]] Activation output_activation() const noexcept { return output_; }
    [[nodiscard]] Eigen::Index n_params() const noexcept { return params_.size(); }
    [[nodiscard]] Eigen::VectorXd& params() noexcept { return params_; }
    [[nodiscard]] const Eigen::VectorXd& params() const noexcept { return params_; }

    [[nodiscard]] Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
    [[nodiscard]] Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
    [[nodiscard]] Eigen::Map<Eigen::MatrixXd> weight(int layer);
    [[nodiscard]] Eigen::Map<Eigen::VectorXd> bias(int layer);

    /// One output per row of X.
    [[nodiscard]] Eigen::VectorXd forward(const Eigen::MatrixXd& X) const;

    /// Mean squared error for an identity head, mean cross entropy for a sigmoid head.
    [[nodiscard]] double loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const;
    double loss_and_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Eigen::VectorXd& grad) const;

private:
    [[nodiscard]] int n_weight_layers() const { return static_cast<int>(sizes_.size()) - 1; }
    // pre-activations per layer, samples as columns
    void forward_all(const Eigen::MatrixXd& X, std::vector<Eigen::MatrixXd>& z, std::vector<Eigen::MatrixXd>& a) const;

    std::vector<int> sizes_;
    std::vector<Eigen::Index> offsets_;
    Activation hidden_ = Activation::Relu;
    Activation output_ = Activation::Identity;
    Eigen::VectorXd params_;
};

/// [n_in, n_n x n_hl, 1]; identity head for regression, sigmoid for classification.
Mlp make_mlp(int n_in, int n_hl, int n_n, MlpTask task, Activation hidden = Activation::Relu);

enum class OptimizerKind { Adam, Sgd };

const char* to_string(OptimizerKind k) noexcept;
OptimizerKind optimizer_from_string(const std::string& name);

struct MlpTrainOptions {
    int epochs = 200;
    int batch = 10;
    int patience = 20; // <= 0 disables early stopping
    OptimizerKind optimizer = OptimizerKind::Adam;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    Activation hidden = Activation::Relu;
    std::uint64_t seed = 0;
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    int best_epoch = -1;
};

struct MlpFit {
    Mlp model;
    TrainHistory history;
};

/// Mini-batch training, rows reshuffled every epoch; returns the parameters of
/// the epoch with the lowest validation loss.
MlpFit train_mlp(const Dataset& train, const Dataset& val, int n_hl, int n_n, MlpTask task,
                 const MlpTrainOptions& options = {});

/// Validation score: MSE for regression (lower wins), accuracy for classification (higher wins).
double validation_score(const Mlp& model, const Dataset& val, MlpTask task);

struct GridCell {
    int n_hl = 0;
    int n_n = 0;
    double score = 0.0;
};

struct GridResult {
    std::vector<GridCell> cells; // n_hl-major
    std::size_t best = 0;
    MlpFit best_fit;
};

/// One model per (n_hl, n_n); ties go to fewer layers, then fewer neurons.
GridResult hyperparameter_grid(const Dataset& train, const Dataset& val, const std::vector<int>& n_hls,
                               const std::vector<int>& n_ns, MlpTask task, const MlpTrainOptions& options = {},
                               int jobs = 1);

} // namespace dgp::ml
