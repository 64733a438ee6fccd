#include "dgpenalty/ml/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "dgpenalty/error.hpp"

namespace dgp::ml {

int Table::column_index(const std::string& name) const
{
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

Eigen::VectorXd Table::column(const std::string& name) const
{
    const int i = column_index(name);
    if (i < 0) {
        throw Error(ErrorKind::SchemaMismatch, "column '" + name + "' not found");
    }
    return values.col(i);
}

namespace {

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
            cell.pop_back();
        }
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

} // namespace

Table read_csv(std::istream& is)
{
    Table t;
    std::string line;
    if (!std::getline(is, line)) {
        throw Error(ErrorKind::SchemaMismatch, "CSV is empty (missing header row)");
    }
    t.columns = split_line(line);
    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split_line(line);
        if (cells.size() != t.columns.size()) {
            throw Error(ErrorKind::SchemaMismatch, "line " + std::to_string(lineno) + ": expected "
                                                       + std::to_string(t.columns.size()) + " fields");
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(c, &used));
                if (used != c.size()) {
                    throw std::invalid_argument(c);
                }
            } catch (const std::exception&) {
                throw Error(ErrorKind::SchemaMismatch, "line " + std::to_string(lineno) + ": non-numeric field '" + c + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.columns.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return t;
}

Table read_csv_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    }
    return read_csv(in);
}

void Dataset::validate(bool binary) const
{
    if (!X.allFinite() || !y.allFinite()) {
        throw Error(ErrorKind::NonFinite, "dataset contains non-finite entries");
    }
    if (binary) {
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (y(i) != 0.0 && y(i) != 1.0) {
                throw Error(ErrorKind::InvalidArgument, "binary target must contain only 0 and 1");
            }
        }
    }
}

Dataset make_dataset(const Table& table, const std::vector<std::string>& features, const std::string& target)
{
    std::vector<std::string> missing;
    for (const auto& f : features) {
        if (table.column_index(f) < 0) {
            missing.push_back(f);
        }
    }
    if (table.column_index(target) < 0) {
        missing.push_back(target);
    }
    if (!missing.empty()) {
        std::string msg = "missing columns:";
        for (const auto& m : missing) {
            msg += " " + m;
        }
        msg += "; present:";
        for (const auto& c : table.columns) {
            msg += " " + c;
        }
        throw Error(ErrorKind::SchemaMismatch, msg);
    }
    Dataset d;
    d.feature_names = features;
    d.target_name = target;
    d.X.resize(table.values.rows(), static_cast<Eigen::Index>(features.size()));
    for (std::size_t j = 0; j < features.size(); ++j) {
        d.X.col(static_cast<Eigen::Index>(j)) = table.column(features[j]);
    }
    d.y = table.column(target);
    return d;
}

Dataset subset(const Dataset& data, const std::vector<int>& rows)
{
    Dataset out;
    out.feature_names = data.feature_names;
    out.target_name = data.target_name;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), data.X.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = data.X.row(rows[i]);
        out.y(static_cast<Eigen::Index>(i)) = data.y(rows[i]);
    }
    return out;
}

Standardizer::Standardizer(Eigen::VectorXd mean, Eigen::VectorXd std)
    : mean_(std::move(mean)), std_(std::move(std)), fitted_(true)
{
    if (mean_.size() != std_.size()) {
        throw Error(ErrorKind::InvalidArgument, "standardizer mean/std length mismatch");
    }
}

void Standardizer::fit(const Eigen::MatrixXd& X)
{
    if (X.rows() == 0) {
        throw Error(ErrorKind::InvalidArgument, "cannot fit a standardizer on zero rows");
    }
    mean_ = X.colwise().mean().transpose();
    std_.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double var = (X.col(j).array() - mean_(j)).square().mean();
        std_(j) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    fitted_ = true;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& X) const
{
    if (!fitted_ || X.cols() != mean_.size()) {
        throw Error(ErrorKind::InvalidArgument, "standardizer not fitted for this column count");
    }
    return (X.rowwise() - mean_.transpose()).array().rowwise() / std_.transpose().array();
}

Eigen::MatrixXd Standardizer::inverse_transform(const Eigen::MatrixXd& Z) const
{
    if (!fitted_ || Z.cols() != mean_.size()) {
        throw Error(ErrorKind::InvalidArgument, "standardizer not fitted for this column count");
    }
    return (Z.array().rowwise() * std_.transpose().array()).rowwise() + mean_.transpose().array();
}

SplitIndices split(int n, const SplitRatios& ratios, std::uint64_t seed)
{
    if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
        throw Error(ErrorKind::InvalidArgument, "split ratios must sum to 1");
    }
    if (ratios.train < 0.0 || ratios.validation < 0.0 || ratios.test < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "split ratios must be nonnegative");
    }
    if (n < 10) {
        throw Error(ErrorKind::InvalidArgument, "need at least 10 rows to split");
    }
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::floor(ratios.train * n + 1e-9));
    const auto n_val = static_cast<std::size_t>(std::floor(ratios.validation * n + 1e-9));
    SplitIndices s;
    s.seed = seed;
    s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.validation.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                        perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
    return s;
}

} // namespace dgp::ml
