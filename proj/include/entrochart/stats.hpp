#pragma once

#include <Eigen/Core>

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "entrochart/rng.hpp"

namespace entrochart {

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_se = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;  ///< two-sided, t with n - 2 df
    Eigen::Index n = 0;
    bool degenerate = false;  ///< y has zero variance; slope 0, R^2/t not meaningful
};

/// Simple linear regression y ~ a + b x. Throws InvalidArgument for
/// mismatched or too-short inputs and DegenerateDesign when var(x) == 0.
OlsFit ols_fit(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

struct LogitFit {
    Eigen::VectorXd coefficients;  ///< intercept first
    Eigen::VectorXd std_errors;
    Eigen::VectorXd z_stats;
    Eigen::VectorXd p_values;
    Eigen::MatrixXd covariance;  ///< inverse observed information
    double log_likelihood = 0.0;
    std::vector<double> log_likelihood_trace;  ///< one entry per accepted iterate, starting at beta = 0
    int iterations = 0;
    bool converged = false;
    bool separation = false;
    std::string diagnostic;
};

/// Binomial logistic regression by iteratively reweighted least squares.
/// `design` holds predictors only; an intercept column is prepended.
/// Converged when the largest coefficient update is below `tol`. Newton
/// steps are halved until the log-likelihood does not decrease.
///
/// Throws SingularMatrix when the information matrix is rank deficient.
LogitFit logit_fit(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& outcomes,
                   int max_iter = 100, double tol = 1e-10);

/// Bernoulli log-likelihood of `coefficients` (intercept first) on the design.
double logit_log_likelihood(const Eigen::Ref<const Eigen::MatrixXd>& design,
                            const Eigen::Ref<const Eigen::VectorXd>& outcomes,
                            const Eigen::Ref<const Eigen::VectorXd>& coefficients);

struct WaldResult {
    double chi2;
    int df;
    double p_value;
};

/// Joint Wald test that the coefficients at `indices` (into
/// fit.coefficients, intercept = 0) are all zero.
WaldResult wald_categorical(const LogitFit& fit, const std::vector<int>& indices);

struct Interval {
    double lo;
    double hi;
};

enum class BootstrapStatistic { Mean };

/// Percentile bootstrap. Resample b draws from its own substream
/// derive_seed(seed, b), so the result does not depend on evaluation order.
Interval bootstrap_ci(const Eigen::Ref<const Eigen::VectorXd>& values, int n_resamples = 2000, double level = 0.95,
                      Seed seed = 0, BootstrapStatistic statistic = BootstrapStatistic::Mean);

/// Linear-interpolated sample quantile (type 7) of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q);

double pearson(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);
/// Pearson correlation of average ranks.
double spearman(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

/// Trial-response table: header row plus string cells.
struct ResponseTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// Index of `name`; throws InvalidArgument for unknown columns.
    std::size_t column(std::string_view name) const;
    bool is_numeric(std::size_t col) const;
    /// The `correct` column as 0/1 (accepts 0/1/true/false).
    Eigen::VectorXd correct() const;

    static ResponseTable parse_csv(std::string_view text);
    static ResponseTable load_csv(const std::string& path);
};

struct AccuracyRow {
    std::vector<std::string> key;
    Eigen::Index n;
    double accuracy;
    double ci_lo;
    double ci_hi;
};

/// Per-group count, mean of `correct`, and percentile-bootstrap CI. Groups
/// are ordered lexicographically by key.
std::vector<AccuracyRow> accuracy_summary(const ResponseTable& table, const std::vector<std::string>& group_by,
                                          int n_resamples = 2000, double level = 0.95, Seed seed = 0);

/// Logistic design built from table columns. Numeric columns enter as-is;
/// categorical ones are dummy coded against their lexicographically first level.
struct LogitDesign {
    Eigen::MatrixXd design;
    Eigen::VectorXd outcomes;
    std::vector<std::string> coefficient_names;  ///< "(intercept)" first
    std::map<std::string, std::vector<int>> groups;  ///< predictor -> coefficient indices
    std::set<std::string> categorical;
};

LogitDesign build_logit_design(const ResponseTable& table, const std::vector<std::string>& predictors,
                               const std::set<std::string>& force_categorical = {});

}  // namespace entrochart
