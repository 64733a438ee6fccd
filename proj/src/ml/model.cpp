#include "dgpenalty/ml/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "dgpenalty/error.hpp"

namespace dgp::ml {

using nlohmann::json;

const char* to_string(ModelType t) noexcept
{
    switch (t) {
    case ModelType::Linear: return "linear";
    case ModelType::Logistic: return "logistic";
    case ModelType::MlpRegression: return "mlp-regression";
    case ModelType::MlpClassification: return "mlp-classification";
    }
    return "unknown";
}

ModelType model_type_from_string(const std::string& name)
{
    for (ModelType t : {ModelType::Linear, ModelType::Logistic, ModelType::MlpRegression, ModelType::MlpClassification}) {
        if (name == to_string(t)) {
            return t;
        }
    }
    throw Error(ErrorKind::InvalidArgument, "unknown model type '" + name + "'");
}

bool is_classifier(ModelType t) noexcept
{
    return t == ModelType::Logistic || t == ModelType::MlpClassification;
}

namespace {

bool is_linear(ModelType t) noexcept
{
    return t == ModelType::Linear || t == ModelType::Logistic;
}

std::vector<double> to_vec(const Eigen::VectorXd& v)
{
    return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd from_vec(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

Eigen::MatrixXd TrainedModel::encode(const Eigen::MatrixXd& X_raw) const
{
    Eigen::MatrixXd X = X_raw;
    for (const auto& name : log_features) {
        const auto it = std::find(features.begin(), features.end(), name);
        if (it == features.end()) {
            throw Error(ErrorKind::SchemaMismatch, "log feature '" + name + "' is not a model feature");
        }
        auto col = X.col(it - features.begin());
        if ((col.array() <= 0.0).any()) {
            throw Error(ErrorKind::InvalidArgument, "log feature '" + name + "' has non-positive values");
        }
        col = col.array().log10().matrix();
    }
    return X;
}

Eigen::VectorXd TrainedModel::predict(const Eigen::MatrixXd& X_raw) const
{
    const Eigen::MatrixXd Z = x_scaler.transform(encode(X_raw));
    Eigen::VectorXd out = is_linear(type) ? linear.predict(Z) : mlp.forward(Z);
    if (!is_classifier(type)) {
        out = (out.array() * y_std + y_mean).matrix();
    }
    return out;
}

Eigen::VectorXd TrainedModel::predict_class(const Eigen::MatrixXd& X_raw) const
{
    if (!is_classifier(type)) {
        throw Error(ErrorKind::InvalidArgument, "class predictions need a classifier");
    }
    return predict(X_raw).unaryExpr([](double p) { return p >= 0.5 ? 1.0 : 0.0; });
}

LinearModel raw_coordinates(const TrainedModel& model)
{
    if (!is_linear(model.type)) {
        throw Error(ErrorKind::InvalidArgument, "raw coefficients exist only for linear models");
    }
    const Eigen::VectorXd& mu = model.x_scaler.mean();
    const Eigen::VectorXd& sd = model.x_scaler.stddev();
    LinearModel out = model.linear;
    out.coef = model.linear.coef.cwiseQuotient(sd);
    out.intercept = model.linear.intercept - out.coef.dot(mu);
    if (!is_classifier(model.type)) {
        out.coef *= model.y_std;
        out.intercept = out.intercept * model.y_std + model.y_mean;
    }
    return out;
}

void write_model(std::ostream& os, const TrainedModel& m)
{
    json j;
    j["format"] = "dgpenalty-model";
    j["version"] = 1;
    j["type"] = to_string(m.type);
    j["features"] = m.features;
    j["log_features"] = m.log_features;
    j["target"] = m.target;
    j["seed"] = m.seed;
    j["split"] = {{"train", m.ratios.train}, {"validation", m.ratios.validation}, {"test", m.ratios.test}};
    j["x_mean"] = to_vec(m.x_scaler.mean());
    j["x_std"] = to_vec(m.x_scaler.stddev());
    j["y_mean"] = m.y_mean;
    j["y_std"] = m.y_std;
    if (is_linear(m.type)) {
        j["intercept"] = m.linear.intercept;
        j["coef"] = to_vec(m.linear.coef);
    } else {
        j["layers"] = m.mlp.layer_sizes();
        j["hidden_activation"] = to_string(m.mlp.hidden_activation());
        j["output_activation"] = to_string(m.mlp.output_activation());
        j["params"] = to_vec(m.mlp.params());
    }
    j["hyperparameters"] = m.hyperparameters;
    j["metrics"] = m.metrics;
    os << j.dump(2) << '\n';
}

TrainedModel read_model(std::istream& is)
{
    TrainedModel m;
    try {
        const json j = json::parse(is);
        if (j.at("format") != "dgpenalty-model") {
            throw Error(ErrorKind::SchemaMismatch, "not a model file");
        }
        m.type = model_type_from_string(j.at("type").get<std::string>());
        m.features = j.at("features").get<std::vector<std::string>>();
        m.log_features = j.value("log_features", std::vector<std::string>{});
        m.target = j.at("target").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.ratios.train = j.at("split").at("train").get<double>();
        m.ratios.validation = j.at("split").at("validation").get<double>();
        m.ratios.test = j.at("split").at("test").get<double>();
        m.x_scaler = Standardizer(from_vec(j.at("x_mean").get<std::vector<double>>()),
                                  from_vec(j.at("x_std").get<std::vector<double>>()));
        m.y_mean = j.at("y_mean").get<double>();
        m.y_std = j.at("y_std").get<double>();
        if (is_linear(m.type)) {
            m.linear.kind = m.type == ModelType::Logistic ? LinearKind::Logistic : LinearKind::Regression;
            m.linear.intercept = j.at("intercept").get<double>();
            m.linear.coef = from_vec(j.at("coef").get<std::vector<double>>());
        } else {
            m.mlp = Mlp(j.at("layers").get<std::vector<int>>(),
                        activation_from_string(j.at("hidden_activation").get<std::string>()),
                        activation_from_string(j.at("output_activation").get<std::string>()));
            const Eigen::VectorXd p = from_vec(j.at("params").get<std::vector<double>>());
            if (p.size() != m.mlp.n_params()) {
                throw Error(ErrorKind::SchemaMismatch, "parameter count does not match the layer sizes");
            }
            m.mlp.params() = p;
        }
        m.hyperparameters = j.at("hyperparameters").get<std::map<std::string, std::string>>();
        m.metrics = j.at("metrics").get<std::map<std::string, double>>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaMismatch, std::string("malformed model file: ") + e.what());
    }
    if (m.x_scaler.mean().size() != static_cast<Eigen::Index>(m.features.size())) {
        throw Error(ErrorKind::SchemaMismatch, "standardization stats do not match the feature list");
    }
    return m;
}

void save_model(const std::string& path, const TrainedModel& model)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    }
    write_model(out, model);
}

TrainedModel load_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    }
    return read_model(in);
}

TrainOutcome train_model(const Table& table, const TrainSpec& spec)
{
    const Dataset all = make_dataset(table, spec.features, spec.target);
    const bool classifier = is_classifier(spec.type);
    all.validate(classifier);
    TrainOutcome out;
    out.split = split(static_cast<int>(all.rows()), spec.ratios, spec.seed);
    Dataset train = subset(all, out.split.train);
    Dataset val = subset(all, out.split.validation);

    TrainedModel& m = out.model;
    m.type = spec.type;
    m.features = spec.features;
    m.log_features = spec.log_features;
    m.target = spec.target;
    m.seed = spec.seed;
    m.ratios = spec.ratios;
    train.X = m.encode(train.X);
    val.X = m.encode(val.X);
    m.x_scaler.fit(train.X);
    train.X = m.x_scaler.transform(train.X);
    val.X = m.x_scaler.transform(val.X);
    if (!classifier) {
        m.y_mean = train.y.mean();
        const double var = (train.y.array() - m.y_mean).square().mean();
        m.y_std = var > 0.0 ? std::sqrt(var) : 1.0;
        train.y = (train.y.array() - m.y_mean) / m.y_std;
        val.y = (val.y.array() - m.y_mean) / m.y_std;
    }

    switch (spec.type) {
    case ModelType::Linear:
        m.linear = fit_linear_regression(train, spec.linear, &out.linear_report);
        m.hyperparameters = {{"epochs", std::to_string(spec.linear.epochs)}, {"lr", std::to_string(spec.linear.lr)},
                             {"lr_decay", std::to_string(spec.linear.lr_decay)}};
        break;
    case ModelType::Logistic:
        m.linear = fit_logistic_regression(train, spec.linear, &out.linear_report);
        m.hyperparameters = {{"max_iter", std::to_string(spec.linear.max_iter)},
                             {"iterations", std::to_string(out.linear_report.iterations)},
                             {"capped", out.linear_report.capped ? "1" : "0"}};
        break;
    case ModelType::MlpRegression:
    case ModelType::MlpClassification: {
        MlpTrainOptions opts = spec.mlp;
        opts.seed = spec.seed;
        const MlpTask task = classifier ? MlpTask::Classification : MlpTask::Regression;
        out.grid = hyperparameter_grid(train, val, spec.n_hls, spec.n_ns, task, opts, spec.jobs);
        const GridCell& best = out.grid->cells[out.grid->best];
        m.mlp = out.grid->best_fit.model;
        m.hyperparameters = {{"n_hl", std::to_string(best.n_hl)},
                             {"n_n", std::to_string(best.n_n)},
                             {"optimizer", to_string(opts.optimizer)},
                             {"lr", std::to_string(opts.lr)},
                             {"batch", std::to_string(opts.batch)},
                             {"epochs", std::to_string(opts.epochs)},
                             {"patience", std::to_string(opts.patience)},
                             {"best_epoch", std::to_string(out.grid->best_fit.history.best_epoch)}};
        m.metrics["validation_score"] = best.score;
        break;
    }
    }
    return out;
}

Evaluation evaluate(const TrainedModel& model, const Dataset& data)
{
    Evaluation e;
    e.n = static_cast<long>(data.rows());
    const Eigen::VectorXd out = model.predict(data.X);
    if (is_classifier(model.type)) {
        data.validate(true);
        e.bce = binary_cross_entropy(data.y, out);
        const Eigen::VectorXd cls = out.unaryExpr([](double p) { return p >= 0.5 ? 1.0 : 0.0; });
        e.cm = confusion_matrix(data.y, cls);
        e.acc = e.cm.accuracy();
    } else {
        e.mse = mse(data.y, out);
        e.r2 = r2_score(data.y, out);
        e.evs = explained_variance(data.y, out);
    }
    return e;
}

Evaluation evaluate_test_split(const TrainedModel& model, const Table& table)
{
    const Dataset all = make_dataset(table, model.features, model.target);
    const SplitIndices s = split(static_cast<int>(all.rows()), model.ratios, model.seed);
    return evaluate(model, subset(all, s.test));
}

} // namespace dgp::ml
