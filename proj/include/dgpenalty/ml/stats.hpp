#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dgpenalty/ml/dataset.hpp"

namespace dgp::ml {

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double gamma_q(double a, double x);

/// P(X >= stat) for a chi-squared variable with `dof` degrees of freedom.
double chi2_survival(double stat, double dof);

/// Category label per row: distinct values when there are at most `n_bins`
/// of them, otherwise quantile bins.
std::vector<int> bin_column(const Eigen::VectorXd& v, int n_bins);

struct Chi2Result {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

/// Pearson chi-squared test of independence between two categorical columns.
Chi2Result chi2_independence(const std::vector<int>& a, const std::vector<int>& b);

/// p-value of each feature against the (binned) target.
std::vector<Chi2Result> chi2_screen(const Dataset& data, int n_bins = 10);

} // namespace dgp::ml
