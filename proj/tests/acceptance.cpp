// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any hard FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "entrochart/entropy.hpp"
#include "entrochart/noise.hpp"
#include "entrochart/stats.hpp"
#include "entrochart/studio.hpp"
#include "oracles.hpp"

using namespace entrochart;

namespace {

int failures = 0;
int soft_failures = 0;

/// Soft criteria are reported but do not change the exit code.
void report(int id, const char* name, bool pass, const std::string& detail, bool soft = false) {
    std::printf("[%d] %-28s %s  %s\n", id, name, pass ? "PASS" : (soft ? "FAIL (soft)" : "FAIL"), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++(soft ? soft_failures : failures);
}

std::string format(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void experiment_one() {
    const auto start = std::chrono::steady_clock::now();
    Exp1Options opts;
    opts.replicates = 5;
    const auto result = run_experiment1(opts);
    const double elapsed = seconds_since(start);
    bool pass = opts.levels.size() >= 10 && elapsed < 60.0;
    std::string detail;
    for (const auto& e : result.entries) {
        pass = pass && e.fit.r_squared >= 0.8 && e.fit.p_value < 0.001 && e.fit.slope > 0.0;
        detail += format("%s R2=%.3f p=%.1e; ", std::string(to_string(e.base)).c_str(), e.fit.r_squared,
                         e.fit.p_value);
    }
    detail += format("levels=%zu reps=%d %.1fs", opts.levels.size(), opts.replicates, elapsed);
    report(1, "noise-PAE regression", pass, detail);
}

void calibration() {
    const auto start = std::chrono::steady_clock::now();
    const auto rows = calibrate_params({});
    const double elapsed = seconds_since(start);
    const auto cells = rows.size();
    int rank = 0;
    for (const auto& row : rows) {
        if (row.m == 2 && row.r == 20.0) rank = row.rank;
    }
    const auto decile = std::max(1, static_cast<int>(0.1 * static_cast<double>(cells)));
    const bool pass = rank >= 1 && rank <= decile && elapsed < 600.0;
    const auto& top = rows.front();
    report(2, "calibration sweep", pass,
           format("(2,20) rank %d of %zu (top decile <= %d); best (%d,%g) corr=%.3f; %.1fs", rank, cells, decile,
                  top.m, top.r, top.mean_correlation, elapsed),
           true);
}

void scaling() {
    const std::vector<int> levels{30, 45, 60, 75, 90, 105, 120, 135};
    int total = 0;
    int wider_lower = 0;
    int taller_higher = 0;
    for (std::size_t b = 0; b < kExperimentBases.size(); ++b) {
        for (int rep = 0; rep < 25; ++rep) {
            const int level = levels[static_cast<std::size_t>(rep) % levels.size()];
            const auto chart =
                noise_trajectory(kExperimentBases[b], {300, 200}, {level}, 1, derive_seed(0x5ca1e, b * 100 + rep));
            const auto series = chart.front().to_series();
            const auto base = pae(series, {300, 200});
            const auto wide = pae(series, {600, 200});
            const auto tall = pae(series, {300, 400});
            ++total;
            if (base.defined() && wide.defined() && *wide < *base) ++wider_lower;
            if (base.defined() && tall.defined() && *tall > *base) ++taller_higher;
        }
    }
    const bool pass = wider_lower * 10 >= total * 9 && taller_higher * 10 >= total * 9;
    report(3, "scaling directions", pass,
           format("width x2 lowers %d/%d, height x2 raises %d/%d", wider_lower, total, taller_higher, total));
}

void entropy_core() {
    double worst = 0.0;
    bool all_defined_match = true;
    for (unsigned s = 0; s < 100; ++s) {
        const std::size_t n = 60 + 5 * s;
        auto ys = oracle::uniform_series(n, 0.0, 200.0, s);
        if (s % 2) {
            for (std::size_t i = 1; i < n; ++i) ys[i] = std::clamp(ys[i - 1] + (ys[i] - 100.0) * 0.2, 0.0, 200.0);
        }
        const Eigen::Map<const Eigen::VectorXd> v(ys.data(), static_cast<Eigen::Index>(n));
        for (auto conv : {WindowConvention::Classical, WindowConvention::Paper}) {
            EntropyParams p;
            p.convention = conv;
            const auto fast = approx_entropy(v, p).value;
            const auto slow = conv == WindowConvention::Classical ? oracle::apen_classical(ys, 2, 20.0)
                                                                  : oracle::apen_paper(ys, 2, 20.0);
            if (fast.has_value() != slow.has_value()) {
                all_defined_match = false;
            } else if (fast) {
                worst = std::max(worst, std::abs(*fast - *slow));
            }
        }
    }

    const auto constant = pae(TimeSeries::from_values(Eigen::VectorXd::Constant(300, 7.0)));
    const bool constant_ok = constant.defined() && *constant < 0.01;

    bool invariant = true;
    for (unsigned s = 0; s < 20; ++s) {
        const auto ys = oracle::uniform_series(200, 0.0, 150.0, 1000 + s);
        const Eigen::Map<const Eigen::VectorXd> v(ys.data(), 200);
        const auto ref = approx_entropy(v).value;
        const Eigen::VectorXd shifted = v.array() + 37.0;
        const Eigen::VectorXd reversed = v.reverse();
        invariant = invariant && ref == approx_entropy(shifted).value && ref == approx_entropy(reversed).value;
    }

    const auto linear = generate_base(BaseFunctionKind::Linear, 300);
    Eigen::VectorXd shuffled = linear.ys();
    Rng rng(99);
    rng.shuffle(shuffled.data(), shuffled.data() + shuffled.size());
    const auto linear_pae = pae(linear);
    const auto shuffled_pae = pae(TimeSeries::from_values(shuffled));
    const bool shuffle_ok =
        linear_pae.defined() && shuffled_pae.defined() && *shuffled_pae > 5.0 * *linear_pae && *shuffled_pae > 0.0;

    const bool pass = all_defined_match && worst <= 1e-9 && constant_ok && invariant && shuffle_ok;
    report(4, "entropy core", pass,
           format("max |fast-naive|=%.1e over 200 runs; constant=%.4f; invariance %s; shuffled %.3f vs linear %.4f",
                  worst, constant.value.value_or(NAN), invariant ? "exact" : "broken",
                  shuffled_pae.value.value_or(NAN), linear_pae.value.value_or(NAN)));
}

void target_seeking() {
    const std::vector<double> targets{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    int total = 0;
    int converged = 0;
    int unreachable = 0;
    long steps = 0;
    const ChartDims dims{300, 200};
    for (std::size_t b = 0; b < kExperimentBases.size(); ++b) {
        const auto base = generate_base(kExperimentBases[b], dims.width);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            for (int s = 0; s < 25; ++s) {
                PerturbOptions opts;
                opts.target = targets[t];
                opts.tolerance = 0.015;
                opts.max_steps = 5000;
                ++total;
                try {
                    const auto spec = NoiseSpec::for_series(base, dims, 1, derive_seed(b * 1000 + t * 100, s));
                    const auto r = perturb_to_target_pae(base, dims, opts, spec);
                    if (r.converged && r.steps <= 5000) ++converged;
                    steps += r.steps;
                } catch (const UnreachableTarget&) {
                    ++unreachable;
                }
            }
        }
    }
    const bool pass = converged * 100 >= total * 95;
    report(5, "target-seeking noise", pass,
           format("%d/%d converged (%.1f%%), %d unreachable, mean steps %.0f", converged, total,
                  100.0 * converged / total, unreachable, static_cast<double>(steps) / std::max(1, converged)));
}

bool same_bytes(const StimulusSet& a, const StimulusSet& b) {
    if (manifest_json(a) != manifest_json(b) || design_json(a) != design_json(b)) return false;
    if (a.files.size() != b.files.size()) return false;
    for (std::size_t i = 0; i < a.files.size(); ++i) {
        if (a.files[i].path != b.files[i].path || a.files[i].bytes != b.files[i].bytes) return false;
    }
    return true;
}

void determinism() {
    const std::vector<BaseFunctionKind> shapes(kShapeBases.begin(), kShapeBases.end());
    const std::vector<double> shape_levels{0.2, 0.4, 0.8, 1.2};
    const std::vector<int> glances{50, 100, 200, 2000};
    const std::vector<double> initial{0.045, 0.09, 0.18};
    const std::vector<double> deltas{0.015, 0.06, 0.24};

    const auto shape_a = generate_shape_trials(shapes, shape_levels, 5, 2024);
    const auto shape_b = generate_shape_trials(shapes, shape_levels, 5, 2024);
    const auto glance_a = generate_glance_sweep(glances, initial, deltas, 1, 2024);
    const auto glance_b = generate_glance_sweep(glances, initial, deltas, 1, 2024);
    const auto lineup_a = generate_lineup_set(BaseFunctionKind::Cosine, default_lineup_levels(), 2024);
    const auto lineup_b = generate_lineup_set(BaseFunctionKind::Cosine, default_lineup_levels(), 2024);
    const std::vector<BaseFunctionKind> bases(kExperimentBases.begin(), kExperimentBases.end());
    const auto diff_a = generate_diff_study(bases, {0.09, 0.18}, {0.03, 0.09}, 1, 2024);
    const auto diff_b = generate_diff_study(bases, {0.09, 0.18}, {0.03, 0.09}, 1, 2024);

    const bool identical =
        same_bytes(shape_a, shape_b) && same_bytes(glance_a, glance_b) && same_bytes(lineup_a, lineup_b) &&
        same_bytes(diff_a, diff_b);
    const auto unreachable = std::count_if(glance_a.cells.begin(), glance_a.cells.end(),
                                           [](const DesignCell& c) { return c.status != "generated"; });
    const bool pass = identical && shape_a.trials.size() == 80 && glance_a.cells.size() == 72;
    report(6, "stimulus determinism", pass,
           format("regeneration %s; shape-ID trials=%zu; glance cells=%zu (%ld unreachable, recorded)",
                  identical ? "byte-identical" : "differs", shape_a.trials.size(), glance_a.cells.size(),
                  static_cast<long>(unreachable)));
}

void statistics() {
    const int n = 5000;
    const std::vector<double> truth{-0.5, 1.0, 0.5};
    Rng rng(77);
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.uniform01() < 0.5 ? 1.0 : 0.0;
        const double eta = truth[0] + truth[1] * x(i, 0) + truth[2] * x(i, 1);
        y[i] = rng.uniform01() < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
    }
    const auto fit = logit_fit(x, y);

    std::vector<std::vector<double>> rows(n);
    for (int i = 0; i < n; ++i) rows[i] = {x(i, 0), x(i, 1)};
    const auto grad = oracle::logit_score(rows, to_std(y), to_std(fit.coefficients));
    double grad_max = 0.0;
    for (double g : grad) grad_max = std::max(grad_max, std::abs(g));

    double recovery = 0.0;
    for (int k = 0; k < 3; ++k) recovery = std::max(recovery, std::abs(fit.coefficients[k] - truth[k]));

    double wald_gap = 0.0;
    for (int k = 1; k < 3; ++k) {
        const auto w = wald_categorical(fit, {k});
        const double z2 = fit.z_stats[k] * fit.z_stats[k];
        wald_gap = std::max(wald_gap, std::abs(w.chi2 - z2) / std::max(1.0, z2));
    }

    int covered = 0;
    for (int rep = 0; rep < 100; ++rep) {
        Rng draw(derive_seed(4242, rep));
        Eigen::VectorXd values(60);
        for (auto& v : values) v = 3.0 + draw.normal();
        const auto ci = bootstrap_ci(values, 2000, 0.95, derive_seed(99, rep));
        if (ci.lo <= 3.0 && 3.0 <= ci.hi) ++covered;
    }

    const bool pass = fit.converged && grad_max < 1e-6 && recovery <= 0.15 && wald_gap < 1e-9 && covered >= 90;
    report(7, "statistics validity", pass,
           format("|score|max=%.1e; max coef error=%.3f; Wald-z^2 gap=%.1e; CI coverage %d/100", grad_max, recovery,
                  wald_gap, covered));
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    entropy_core();
    statistics();
    determinism();
    target_seeking();
    scaling();
    experiment_one();
    calibration();
    std::printf("[8] %-28s N/A   human-perception results need participants; stimulus designs and response "
                "analysis are covered by [6] and [7]\n",
                "perception results");
    std::printf("%s: %d failing, %d soft failing, %.1fs total\n", failures ? "FAIL" : "PASS", failures, soft_failures,
                seconds_since(start));
    return failures ? 1 : 0;
}
