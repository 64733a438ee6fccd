#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dgpenalty/ml/dataset.hpp"
#include "dgpenalty/ml/linear.hpp"
#include "dgpenalty/ml/metrics.hpp"
#include "dgpenalty/ml/mlp.hpp"

namespace dgp::ml {

enum class ModelType { Linear, Logistic, MlpRegression, MlpClassification };

const char* to_string(ModelType t) noexcept;
ModelType model_type_from_string(const std::string& name);
bool is_classifier(ModelType t) noexcept;

/// A fitted model together with everything needed to apply it to raw rows.
struct TrainedModel {
    ModelType type = ModelType::Linear;
    std::vector<std::string> features;
    std::vector<std::string> log_features; // subset of `features` fed as log10(value)
    std::string target;
    Standardizer x_scaler;
    double y_mean = 0.0; // regression targets are standardized for fitting
    double y_std = 1.0;
    LinearModel linear;
    Mlp mlp;
    std::uint64_t seed = 0; // split and initialization seed
    SplitRatios ratios;
    std::map<std::string, std::string> hyperparameters;
    std::map<std::string, double> metrics;

    /// Raw feature rows to the model's input space (log10 columns, before standardization).
    [[nodiscard]] Eigen::MatrixXd encode(const Eigen::MatrixXd& X_raw) const;
    /// Target-unit predictions, or P(class 1) for classifiers.
    [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& X_raw) const;
    [[nodiscard]] Eigen::VectorXd predict_class(const Eigen::MatrixXd& X_raw) const;
};

/// Intercept and coefficients of a linear or logistic model on encoded (not
/// standardized) features, and raw target units for regression.
LinearModel raw_coordinates(const TrainedModel& model);

void write_model(std::ostream& os, const TrainedModel& model);
TrainedModel read_model(std::istream& is);
void save_model(const std::string& path, const TrainedModel& model);
TrainedModel load_model(const std::string& path);

struct TrainSpec {
    ModelType type = ModelType::Linear;
    std::vector<std::string> features;
    std::vector<std::string> log_features;
    std::string target;
    SplitRatios ratios;
    std::uint64_t seed = 0;
    LinearFitOptions linear;
    MlpTrainOptions mlp;
    std::vector<int> n_hls{2};
    std::vector<int> n_ns{10};
    int jobs = 1;
};

struct TrainOutcome {
    TrainedModel model;
    SplitIndices split;
    std::optional<GridResult> grid;
    LinearFitReport linear_report;
};

/// Split, standardize on the training rows, fit; MLP types run the
/// architecture grid against the validation rows.
TrainOutcome train_model(const Table& table, const TrainSpec& spec);

struct Evaluation {
    long n = 0;
    // regression
    double mse = 0.0;
    std::optional<double> r2;
    std::optional<double> evs;
    // classification
    double bce = 0.0;
    double acc = 0.0;
    ConfusionMatrix cm;
};

Evaluation evaluate(const TrainedModel& model, const Dataset& data);
/// Evaluation on the test rows of the split recorded in the model.
Evaluation evaluate_test_split(const TrainedModel& model, const Table& table);

} // namespace dgp::ml
