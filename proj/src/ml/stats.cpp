#include "dgpenalty/ml/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "dgpenalty/error.hpp"

namespace dgp::ml {

namespace {

// lower regularized P(a, x) by its power series; valid for x < a + 1
double gamma_p_series(double a, double x)
{
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-17) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// upper regularized Q(a, x) by the modified Lentz continued fraction; x >= a + 1
double gamma_q_fraction(double a, double x)
{
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) {
            d = tiny;
        }
        c = b + an / c;
        if (std::abs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) {
            break;
        }
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double gamma_q(double a, double x)
{
    if (!(a > 0.0) || x < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "gamma_q needs a > 0 and x >= 0");
    }
    if (x == 0.0) {
        return 1.0;
    }
    if (x < a + 1.0) {
        return 1.0 - gamma_p_series(a, x);
    }
    return gamma_q_fraction(a, x);
}

double chi2_survival(double stat, double dof)
{
    if (dof <= 0.0) {
        return 1.0;
    }
    return gamma_q(0.5 * dof, 0.5 * std::max(stat, 0.0));
}

std::vector<int> bin_column(const Eigen::VectorXd& v, int n_bins)
{
    if (n_bins < 1) {
        throw Error(ErrorKind::InvalidArgument, "need at least one bin");
    }
    const auto n = static_cast<std::size_t>(v.size());
    std::vector<double> sorted(v.data(), v.data() + v.size());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> uniq = sorted;
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<int> out(n);
    if (static_cast<int>(uniq.size()) <= n_bins) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), v(static_cast<Eigen::Index>(i))) - uniq.begin());
        }
        return out;
    }
    // interior quantile edges; a value goes to the number of edges <= it
    std::vector<double> edges;
    for (int b = 1; b < n_bins; ++b) {
        edges.push_back(sorted[static_cast<std::size_t>(b) * n / static_cast<std::size_t>(n_bins)]);
    }
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = static_cast<int>(std::upper_bound(edges.begin(), edges.end(), v(static_cast<Eigen::Index>(i))) - edges.begin());
    }
    return out;
}

Chi2Result chi2_independence(const std::vector<int>& a, const std::vector<int>& b)
{
    if (a.size() != b.size() || a.empty()) {
        throw Error(ErrorKind::InvalidArgument, "chi-squared inputs must be nonempty and of equal length");
    }
    std::map<int, int> ra;
    std::map<int, int> rb;
    for (int v : a) {
        ra.emplace(v, 0);
    }
    for (int v : b) {
        rb.emplace(v, 0);
    }
    int i = 0;
    for (auto& [k, idx] : ra) {
        idx = i++;
    }
    i = 0;
    for (auto& [k, idx] : rb) {
        idx = i++;
    }
    const auto r = static_cast<Eigen::Index>(ra.size());
    const auto c = static_cast<Eigen::Index>(rb.size());
    Chi2Result res;
    if (r < 2 || c < 2) {
        return res;
    }
    Eigen::MatrixXd obs = Eigen::MatrixXd::Zero(r, c);
    for (std::size_t n = 0; n < a.size(); ++n) {
        obs(ra[a[n]], rb[b[n]]) += 1.0;
    }
    const Eigen::VectorXd rows = obs.rowwise().sum();
    const Eigen::VectorXd cols = obs.colwise().sum().transpose();
    const double total = obs.sum();
    for (Eigen::Index p = 0; p < r; ++p) {
        for (Eigen::Index q = 0; q < c; ++q) {
            const double e = rows(p) * cols(q) / total;
            res.statistic += (obs(p, q) - e) * (obs(p, q) - e) / e;
        }
    }
    res.dof = static_cast<double>((r - 1) * (c - 1));
    res.p_value = chi2_survival(res.statistic, res.dof);
    return res;
}

std::vector<Chi2Result> chi2_screen(const Dataset& data, int n_bins)
{
    if (data.rows() < 50) {
        throw Error(ErrorKind::InvalidArgument, "chi-squared screening needs at least 50 rows");
    }
    const std::vector<int> target = bin_column(data.y, n_bins);
    std::vector<Chi2Result> out;
    for (Eigen::Index j = 0; j < data.features(); ++j) {
        out.push_back(chi2_independence(bin_column(data.X.col(j), n_bins), target));
    }
    return out;
}

} // namespace dgp::ml
