#include "entrochart/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "entrochart/errors.hpp"
#include "entrochart/special.hpp"

namespace entrochart {

OlsFit ols_fit(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (x.size() != y.size()) throw InvalidArgument("ols_fit: x and y differ in length");
    if (x.size() < 3) throw InvalidArgument("ols_fit: need at least 3 points");
    const Eigen::Index n = x.size();
    const double mx = x.mean();
    const double my = y.mean();
    const Eigen::ArrayXd dx = x.array() - mx;
    const Eigen::ArrayXd dy = y.array() - my;
    const double sxx = dx.square().sum();
    const double syy = dy.square().sum();
    const double sxy = (dx * dy).sum();
    if (!(sxx > 0.0)) throw DegenerateDesign("ols_fit: x has zero variance");

    OlsFit fit;
    fit.n = n;
    if (!(syy > 0.0)) {
        fit.intercept = my;
        fit.degenerate = true;
        return fit;
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    const double ss_res = std::max(0.0, syy - fit.slope * sxy);
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    const double df = static_cast<double>(n - 2);
    fit.slope_se = std::sqrt(ss_res / df / sxx);
    if (fit.slope_se > 0.0) {
        fit.t_stat = fit.slope / fit.slope_se;
        fit.p_value = special::student_t_two_sided(fit.t_stat, df);
    } else {
        fit.t_stat = std::copysign(std::numeric_limits<double>::infinity(), fit.slope);
        fit.p_value = 0.0;
    }
    return fit;
}

namespace {

Eigen::MatrixXd with_intercept(const Eigen::Ref<const Eigen::MatrixXd>& design) {
    Eigen::MatrixXd x(design.rows(), design.cols() + 1);
    x.col(0).setOnes();
    x.rightCols(design.cols()) = design;
    return x;
}

double log1p_exp(double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

double bernoulli_ll(const Eigen::MatrixXd& x, const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = x * b;
    long double ll = 0.0L;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - log1p_exp(eta[i]);
    return static_cast<double>(ll);
}

Eigen::VectorXd logistic(const Eigen::VectorXd& eta) {
    return eta.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace

double logit_log_likelihood(const Eigen::Ref<const Eigen::MatrixXd>& design,
                            const Eigen::Ref<const Eigen::VectorXd>& outcomes,
                            const Eigen::Ref<const Eigen::VectorXd>& coefficients) {
    return bernoulli_ll(with_intercept(design), outcomes, coefficients);
}

LogitFit logit_fit(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& outcomes,
                   int max_iter, double tol) {
    if (design.rows() != outcomes.size()) throw InvalidArgument("logit_fit: design rows != outcome count");
    for (Eigen::Index i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i] != 0.0 && outcomes[i] != 1.0) throw InvalidArgument("logit_fit: outcomes must be 0 or 1");
    }
    const Eigen::MatrixXd x = with_intercept(design);
    const Eigen::Index p = x.cols();
    if (x.rows() < p) throw InvalidArgument("logit_fit: fewer observations than coefficients");

    LogitFit fit;
    fit.coefficients = Eigen::VectorXd::Zero(p);
    const double successes = outcomes.sum();
    if (successes == 0.0 || successes == static_cast<double>(outcomes.size())) {
        // Intercept MLE is +/- infinity; report that rather than iterate.
        fit.coefficients[0] = successes == 0.0 ? -std::numeric_limits<double>::infinity()
                                               : std::numeric_limits<double>::infinity();
        fit.std_errors = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
        fit.z_stats = fit.std_errors;
        fit.p_values = fit.std_errors;
        fit.covariance = Eigen::MatrixXd::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
        fit.separation = true;
        fit.diagnostic = "all outcomes equal; intercept diverges";
        return fit;
    }

    Eigen::FullPivLU<Eigen::MatrixXd> rank_check(x.transpose() * x);
    if (rank_check.rank() < p) throw SingularMatrix("logit_fit: design matrix is rank deficient");

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    double ll = bernoulli_ll(x, outcomes, beta);
    fit.log_likelihood_trace.push_back(ll);
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd mu = logistic(x * beta);
        const Eigen::VectorXd w = (mu.array() * (1.0 - mu.array())).matrix();
        const Eigen::VectorXd grad = x.transpose() * (outcomes - mu);
        const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
        Eigen::LDLT<Eigen::MatrixXd> solver(info);
        if (solver.info() != Eigen::Success || !solver.isPositive()) {
            fit.diagnostic = "information matrix lost positive definiteness";
            break;
        }
        const Eigen::VectorXd full_step = solver.solve(grad);
        double scale = 1.0;
        Eigen::VectorXd candidate = beta + full_step;
        double cand_ll = bernoulli_ll(x, outcomes, candidate);
        for (int halving = 0; halving < 40 && !(cand_ll >= ll); ++halving) {
            scale *= 0.5;
            candidate = beta + scale * full_step;
            cand_ll = bernoulli_ll(x, outcomes, candidate);
        }
        if (!(cand_ll >= ll) && full_step.cwiseAbs().maxCoeff() < 1e-6) {
            // At the optimum to within the likelihood's rounding.
            beta += full_step;
            ll = bernoulli_ll(x, outcomes, beta);
            fit.iterations = it + 1;
            fit.converged = true;
            break;
        }
        if (!(cand_ll >= ll)) {
            fit.diagnostic = "step halving failed to increase the log-likelihood";
            break;
        }
        const double change = (candidate - beta).cwiseAbs().maxCoeff();
        beta = candidate;
        ll = cand_ll;
        fit.log_likelihood_trace.push_back(ll);
        fit.iterations = it + 1;
        if (change < tol) {
            fit.converged = true;
            break;
        }
    }

    fit.coefficients = beta;
    fit.log_likelihood = ll;
    const Eigen::VectorXd mu = logistic(x * beta);
    const Eigen::VectorXd w = (mu.array() * (1.0 - mu.array())).matrix();
    const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
    fit.covariance = lu.isInvertible() ? Eigen::MatrixXd(lu.inverse())
                                       : Eigen::MatrixXd::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
    fit.std_errors = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.z_stats = beta.cwiseQuotient(fit.std_errors);
    fit.p_values = fit.z_stats.unaryExpr([](double z) { return special::normal_two_sided(z); });

    const double max_abs = beta.cwiseAbs().maxCoeff();
    const double max_eta = (x * beta).cwiseAbs().maxCoeff();
    if (!fit.converged || max_eta > 30.0) {
        if (max_abs > 10.0 || max_eta > 30.0) {
            fit.separation = true;
            fit.converged = false;
            fit.diagnostic = "complete or quasi-complete separation: coefficients diverging (max |beta| = " +
                             std::to_string(max_abs) + ")";
        } else if (fit.diagnostic.empty()) {
            fit.diagnostic = "did not converge within " + std::to_string(max_iter) + " iterations";
        }
    }
    return fit;
}

WaldResult wald_categorical(const LogitFit& fit, const std::vector<int>& indices) {
    const auto p = static_cast<int>(fit.coefficients.size());
    if (indices.empty()) throw InvalidArgument("wald_categorical: empty coefficient group");
    for (int idx : indices) {
        if (idx < 0 || idx >= p) throw InvalidArgument("wald_categorical: index " + std::to_string(idx) + " out of range");
    }
    const auto k = static_cast<Eigen::Index>(indices.size());
    Eigen::VectorXd b(k);
    Eigen::MatrixXd v(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        b[i] = fit.coefficients[indices[static_cast<std::size_t>(i)]];
        for (Eigen::Index j = 0; j < k; ++j) {
            v(i, j) = fit.covariance(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(j)]);
        }
    }
    if (!b.allFinite() || !v.allFinite()) throw SingularMatrix("wald_categorical: non-finite estimates");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(v);
    if (!lu.isInvertible()) throw SingularMatrix("wald_categorical: covariance submatrix is singular");
    const double chi2 = b.dot(lu.solve(b));
    return {chi2, static_cast<int>(k), special::chi2_sf(chi2, static_cast<double>(k))};
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw InvalidArgument("quantile of empty data");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Interval bootstrap_ci(const Eigen::Ref<const Eigen::VectorXd>& values, int n_resamples, double level, Seed seed,
                      BootstrapStatistic /*statistic*/) {
    if (values.size() < 2) throw InvalidArgument("bootstrap_ci: need at least 2 values");
    if (n_resamples < 1) throw InvalidArgument("bootstrap_ci: n_resamples must be >= 1");
    if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("bootstrap_ci: level must be in (0, 1)");
    if ((values.array() == values[0]).all()) return {values[0], values[0]};

    const auto n = static_cast<std::uint64_t>(values.size());
    std::vector<double> stats(static_cast<std::size_t>(n_resamples));
    for (int b = 0; b < n_resamples; ++b) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        double sum = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) sum += values[static_cast<Eigen::Index>(rng.index(n))];
        stats[static_cast<std::size_t>(b)] = sum / static_cast<double>(n);
    }
    std::sort(stats.begin(), stats.end());
    const double alpha = 1.0 - level;
    return {quantile_sorted(stats, alpha / 2.0), quantile_sorted(stats, 1.0 - alpha / 2.0)};
}

double pearson(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("pearson: need equal lengths >= 2");
    const Eigen::ArrayXd da = a.array() - a.mean();
    const Eigen::ArrayXd db = b.array() - b.mean();
    const double denom = std::sqrt(da.square().sum() * db.square().sum());
    if (!(denom > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return (da * db).sum() / denom;
}

namespace {

Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& v) {
    const auto n = static_cast<std::size_t>(v.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) {
        return v[static_cast<Eigen::Index>(i)] < v[static_cast<Eigen::Index>(j)];
    });
    Eigen::VectorXd ranks(v.size());
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && v[static_cast<Eigen::Index>(order[j + 1])] == v[static_cast<Eigen::Index>(order[i])]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[static_cast<Eigen::Index>(order[k])] = rank;
        i = j + 1;
    }
    return ranks;
}

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return std::string(s);
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

}  // namespace

double spearman(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    return pearson(average_ranks(a), average_ranks(b));
}

std::size_t ResponseTable::column(std::string_view name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw InvalidArgument("unknown column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

bool ResponseTable::is_numeric(std::size_t col) const {
    double tmp = 0.0;
    return !rows.empty() && std::all_of(rows.begin(), rows.end(), [&](const auto& r) { return parse_double(r[col], tmp); });
}

Eigen::VectorXd ResponseTable::correct() const {
    const std::size_t col = column("correct");
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& v = rows[i][col];
        if (v == "1" || v == "true" || v == "TRUE" || v == "True") {
            out[static_cast<Eigen::Index>(i)] = 1.0;
        } else if (v == "0" || v == "false" || v == "FALSE" || v == "False") {
            out[static_cast<Eigen::Index>(i)] = 0.0;
        } else {
            throw ParseError("column 'correct' must be 0 or 1, got '" + v + "'", i + 2);
        }
    }
    return out;
}

ResponseTable ResponseTable::parse_csv(std::string_view text) {
    ResponseTable table;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
        const auto end = text.find('\n', start);
        const auto line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        start = end == std::string_view::npos ? text.size() : end + 1;
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (table.columns.empty()) {
            table.columns = std::move(fields);
            continue;
        }
        if (fields.size() != table.columns.size()) {
            throw ParseError("expected " + std::to_string(table.columns.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        table.rows.push_back(std::move(fields));
    }
    if (table.columns.empty()) throw ParseError("response table is empty");
    table.column("correct");
    table.correct();
    return table;
}

ResponseTable ResponseTable::load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

std::vector<AccuracyRow> accuracy_summary(const ResponseTable& table, const std::vector<std::string>& group_by,
                                          int n_resamples, double level, Seed seed) {
    std::vector<std::size_t> cols;
    for (const auto& name : group_by) cols.push_back(table.column(name));
    const Eigen::VectorXd correct = table.correct();

    std::map<std::vector<std::string>, std::vector<double>> groups;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        std::vector<std::string> key;
        for (auto c : cols) key.push_back(table.rows[i][c]);
        groups[key].push_back(correct[static_cast<Eigen::Index>(i)]);
    }
    std::vector<AccuracyRow> out;
    std::uint64_t index = 0;
    for (const auto& [key, vals] : groups) {
        const Eigen::Map<const Eigen::VectorXd> v(vals.data(), static_cast<Eigen::Index>(vals.size()));
        AccuracyRow row{key, v.size(), v.mean(), v.mean(), v.mean()};
        if (v.size() >= 2) {
            const auto ci = bootstrap_ci(v, n_resamples, level, derive_seed(seed, index));
            row.ci_lo = ci.lo;
            row.ci_hi = ci.hi;
        }
        out.push_back(std::move(row));
        ++index;
    }
    return out;
}

LogitDesign build_logit_design(const ResponseTable& table, const std::vector<std::string>& predictors,
                               const std::set<std::string>& force_categorical) {
    LogitDesign out;
    out.outcomes = table.correct();
    out.coefficient_names.push_back("(intercept)");
    std::vector<Eigen::VectorXd> columns;
    const auto rows = static_cast<Eigen::Index>(table.rows.size());
    for (const auto& name : predictors) {
        const std::size_t col = table.column(name);
        if (name == "correct") throw InvalidArgument("'correct' is the outcome, not a predictor");
        const bool categorical = force_categorical.count(name) > 0 || !table.is_numeric(col);
        std::vector<int>& group = out.groups[name];
        if (!categorical) {
            Eigen::VectorXd v(rows);
            for (Eigen::Index i = 0; i < rows; ++i) v[i] = std::stod(table.rows[static_cast<std::size_t>(i)][col]);
            columns.push_back(std::move(v));
            group.push_back(static_cast<int>(out.coefficient_names.size()));
            out.coefficient_names.push_back(name);
            continue;
        }
        out.categorical.insert(name);
        std::set<std::string> levels;
        for (const auto& r : table.rows) levels.insert(r[col]);
        if (levels.size() < 2) throw InvalidArgument("categorical predictor '" + name + "' has a single level");
        for (auto it = std::next(levels.begin()); it != levels.end(); ++it) {
            Eigen::VectorXd v(rows);
            for (Eigen::Index i = 0; i < rows; ++i) v[i] = table.rows[static_cast<std::size_t>(i)][col] == *it ? 1.0 : 0.0;
            columns.push_back(std::move(v));
            group.push_back(static_cast<int>(out.coefficient_names.size()));
            out.coefficient_names.push_back(name + "=" + *it);
        }
    }
    out.design.resize(rows, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) out.design.col(static_cast<Eigen::Index>(c)) = columns[c];
    return out;
}

}  // namespace entrochart
