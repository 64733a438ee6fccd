#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dgp::ml {

/// Numeric table read from a CSV with a header row.
struct Table {
    std::vector<std::string> columns;
    Eigen::MatrixXd values; // rows x columns

    [[nodiscard]] int column_index(const std::string& name) const; // -1 if absent
    [[nodiscard]] Eigen::VectorXd column(const std::string& name) const;
};

Table read_csv(std::istream& is);
Table read_csv_file(const std::string& path);

struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> feature_names;
    std::string target_name;

    [[nodiscard]] Eigen::Index rows() const noexcept { return X.rows(); }
    [[nodiscard]] Eigen::Index features() const noexcept { return X.cols(); }
    /// Throws non-finite on NaN/inf entries, invalid-argument on non-binary targets when `binary`.
    void validate(bool binary) const;
};

/// Picks feature and target columns from a table; a missing column raises
/// schema-mismatch listing the columns that are present.
Dataset make_dataset(const Table& table, const std::vector<std::string>& features, const std::string& target);

Dataset subset(const Dataset& data, const std::vector<int>& rows);

/// Per-column mean and standard deviation; constant columns get std = 1.
class Standardizer {
public:
    Standardizer() = default;
    Standardizer(Eigen::VectorXd mean, Eigen::VectorXd std);

    void fit(const Eigen::MatrixXd& X);
    [[nodiscard]] Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
    [[nodiscard]] Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& Z) const;
    [[nodiscard]] bool fitted() const noexcept { return fitted_; }
    [[nodiscard]] const Eigen::VectorXd& mean() const noexcept { return mean_; }
    [[nodiscard]] const Eigen::VectorXd& stddev() const noexcept { return std_; }

private:
    Eigen::VectorXd mean_;
    Eigen::VectorXd std_;
    bool fitted_ = false;
};

struct SplitIndices {
    std::vector<int> train;
    std::vector<int> validation;
    std::vector<int> test;
    std::uint64_t seed = 0;
};

struct SplitRatios {
    double train = 0.8;
    double validation = 0.1;
    double test = 0.1;
};

/// Seeded permutation, then contiguous slices: train = floor(r_train n),
/// validation = floor(r_val n), test = the rest.
SplitIndices split(int n, const SplitRatios& ratios, std::uint64_t seed);

} // namespace dgp::ml
