#include "entrochart/studio.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <thread>

namespace entrochart {

namespace {

/// Runs body(i) for i in [0, n) on a small thread pool. Results must be
/// written by index; the first failing index (lowest) is rethrown.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string trial_name(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "t%04zu", index);
    return buf;
}

}  // namespace

std::vector<int> default_noise_levels() {
    std::vector<int> levels;
    for (int l = 0; l <= 135; l += 15) levels.push_back(l);
    return levels;
}

std::vector<double> default_lineup_levels() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}; }

std::vector<PixelSeries> noise_trajectory(BaseFunctionKind base, const ChartDims& dims, const std::vector<int>& levels,
                                          int half_width, Seed seed) {
    if (!std::is_sorted(levels.begin(), levels.end())) {
        throw InvalidArgument("noise_trajectory: levels must be non-decreasing");
    }
    if (!levels.empty() && levels.front() < 0) throw InvalidArgument("noise_trajectory: levels must be >= 0");
    const TimeSeries series = generate_base(base, dims.width, seed);
    const NoiseSpec spec = NoiseSpec::for_series(series, dims, half_width, seed);
    Rng rng(seed);
    PixelSeries current = rasterize(series, dims);
    std::vector<PixelSeries> out;
    out.reserve(levels.size());
    int applied = 0;
    for (int level : levels) {
        for (; applied < level; ++applied) current = add_noise_step(current, spec, rng);
        out.push_back(current);
    }
    return out;
}

Exp1Report run_experiment1(const Exp1Options& options) {
    if (options.levels.size() < 5) throw InvalidArgument("run_experiment1: need at least 5 noise levels");
    if (options.replicates < 3) throw InvalidArgument("run_experiment1: need at least 3 replicates");
    options.dims.validate();
    options.params.validate();
    std::vector<int> levels = options.levels;
    std::sort(levels.begin(), levels.end());

    const std::size_t n_bases = kExperimentBases.size();
    const auto reps = static_cast<std::size_t>(options.replicates);
    std::vector<std::vector<EntropyScore>> scores(n_bases * reps);
    parallel_for(n_bases * reps, [&](std::size_t job) {
        const std::size_t b = job / reps;
        const std::size_t r = job % reps;
        const Seed seed = derive_seed(derive_seed(options.seed, b), r);
        const auto charts = noise_trajectory(kExperimentBases[b], options.dims, levels, options.half_width, seed);
        for (const auto& chart : charts) scores[job].push_back(pae(chart, options.params));
    });

    Exp1Report report;
    for (std::size_t b = 0; b < n_bases; ++b) {
        Exp1Entry entry{kExperimentBases[b], {}, 0.0, {}, {}, 0};
        const auto clean = pae(generate_base(entry.base, options.dims.width), options.dims, options.params);
        entry.clean_pae = clean.value.value_or(std::nan(""));
        for (std::size_t r = 0; r < reps; ++r) {
            const auto& row = scores[b * reps + r];
            for (std::size_t k = 0; k < levels.size(); ++k) {
                if (!row[k].defined()) {
                    ++entry.undefined;
                    continue;
                }
                entry.levels.push_back(levels[k]);
                entry.pae.push_back(*row[k]);
            }
        }
        const Eigen::Map<const Eigen::VectorXd> x(entry.levels.data(), static_cast<Eigen::Index>(entry.levels.size()));
        const Eigen::Map<const Eigen::VectorXd> y(entry.pae.data(), static_cast<Eigen::Index>(entry.pae.size()));
        entry.fit = ols_fit(x, y);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

std::vector<CalibrationRow> calibrate_params(const CalibrationOptions& options) {
    if (options.m_grid.empty() || options.r_grid.empty() || options.dims_list.empty()) {
        throw InvalidArgument("calibrate_params: grids must be nonempty");
    }
    if (options.levels.size() < 2 || options.replicates < 1) {
        throw InvalidArgument("calibrate_params: need >= 2 noise levels and >= 1 replicate");
    }
    for (const auto& d : options.dims_list) d.validate();
    options.source_dims.validate();
    std::vector<int> levels = options.levels;
    std::sort(levels.begin(), levels.end());

    // charts[base][dims] -> list of (level, pixel ys)
    struct Chart {
        double level;
        Eigen::VectorXd ys;
    };
    const std::size_t n_bases = kExperimentBases.size();
    const std::size_t n_dims = options.dims_list.size();
    const auto reps = static_cast<std::size_t>(options.replicates);
    std::vector<std::vector<std::vector<Chart>>> per_job(n_bases * reps);
    parallel_for(n_bases * reps, [&](std::size_t job) {
        const std::size_t b = job / reps;
        const std::size_t r = job % reps;
        const Seed seed = derive_seed(derive_seed(options.seed, b), r);
        const auto traj = noise_trajectory(kExperimentBases[b], options.source_dims, levels, options.half_width, seed);
        per_job[job].resize(n_dims);
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const TimeSeries data = traj[k].to_series();
            for (std::size_t d = 0; d < n_dims; ++d) {
                per_job[job][d].push_back({static_cast<double>(levels[k]), rasterize(data, options.dims_list[d]).ys()});
            }
        }
    });

    struct Cell {
        int m;
        double r;
    };
    std::vector<Cell> cells;
    for (int m : options.m_grid) {
        for (double r : options.r_grid) cells.push_back({m, r});
    }
    std::vector<CalibrationRow> rows(cells.size());
    parallel_for(cells.size(), [&](std::size_t c) {
        const EntropyParams params{cells[c].m, cells[c].r, options.convention};
        params.validate();
        std::size_t total = 0;
        std::size_t undefined = 0;
        double corr_sum = 0.0;
        std::size_t corr_count = 0;
        for (std::size_t b = 0; b < n_bases; ++b) {
            for (std::size_t d = 0; d < n_dims; ++d) {
                std::vector<double> xs;
                std::vector<double> ys;
                for (std::size_t r = 0; r < reps; ++r) {
                    for (const auto& chart : per_job[b * reps + r][d]) {
                        ++total;
                        const auto s = approx_entropy(chart.ys, params);
                        if (!s.defined()) {
                            ++undefined;
                            continue;
                        }
                        xs.push_back(chart.level);
                        ys.push_back(*s);
                    }
                }
                double corr = 0.0;
                if (xs.size() >= 3) {
                    corr = pearson(Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size())),
                                   Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size())));
                    if (std::isnan(corr)) corr = 0.0;
                }
                corr_sum += corr;
                ++corr_count;
            }
        }
        const double frac = total ? static_cast<double>(undefined) / static_cast<double>(total) : 0.0;
        rows[c] = {cells[c].m, cells[c].r, corr_sum / static_cast<double>(corr_count), frac, frac > 0.5, 0};
    });

    std::stable_sort(rows.begin(), rows.end(), [](const CalibrationRow& a, const CalibrationRow& b) {
        if (a.excluded != b.excluded) return !a.excluded;
        return a.mean_correlation > b.mean_correlation;
    });
    int rank = 0;
    for (auto& row : rows) {
        if (!row.excluded) row.rank = ++rank;
    }
    return rows;
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::LineUp: return "lineup";
        case ExperimentKind::FindDifference: return "diff";
        case ExperimentKind::ShapeId: return "shape-id";
        case ExperimentKind::GlanceSweep: return "glance";
    }
    return "unknown";
}

namespace {

StimulusSet make_set(ExperimentKind kind, Seed seed, const StimulusOptions& options) {
    options.dims.validate();
    options.params.validate();
    StimulusSet set;
    set.experiment = kind;
    set.set_id = options.set_id.empty() ? to_string(kind) : options.set_id;
    set.master_seed = seed;
    set.dims = options.dims;
    set.params = options.params;
    return set;
}

PerturbOptions perturb_options(const StimulusOptions& options, double target) {
    PerturbOptions p;
    p.target = target;
    p.tolerance = options.tolerance;
    p.max_steps = options.max_steps;
    p.params = options.params;
    return p;
}

ChartRecord make_chart(std::string role, PixelSeries series, std::optional<double> target, double achieved) {
    return ChartRecord{std::move(role), std::move(series), target, achieved, {}, {}};
}

/// Assigns file paths and renders every chart of every trial, in trial order.
void render_files(StimulusSet& set, const ChartStyle& style) {
    for (auto& trial : set.trials) {
        for (auto& chart : trial.charts) {
            const std::string stem = set.set_id + "/" + trial.trial_id + "_" + chart.role;
            chart.svg_path = stem + ".svg";
            chart.pgm_path = stem + ".pgm";
            auto rendered = render_chart(chart.series, style);
            set.files.push_back({chart.svg_path, std::move(rendered.svg)});
            set.files.push_back({chart.pgm_path, std::move(rendered.pgm)});
        }
    }
}

void shuffle_presentation(StimulusSet& set) {
    std::vector<int> order(set.trials.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(set.master_seed, 0x70726573ULL));
    rng.shuffle(order.begin(), order.end());
    for (std::size_t i = 0; i < set.trials.size(); ++i) set.trials[i].presentation_index = order[i];
}

PerturbResult reach(const PixelSeries& start, double target, const StimulusOptions& options, double pixel_sigma,
                    Rng& rng, int min_steps = 0) {
    auto p = perturb_options(options, target);
    p.min_steps = min_steps;
    auto result = perturb_pixels(start, p, pixel_sigma, options.half_width, rng);
    if (!result.converged) {
        throw UnreachableTarget("unreachable-target: PAE " + format_number(target) + " not reached within " +
                                    std::to_string(options.max_steps) + " steps (closest " +
                                    format_number(result.achieved_pae) + ")",
                                target, result.achieved_pae);
    }
    return result;
}

struct Pair {
    PerturbResult initial;
    PerturbResult alternative;
};

Pair build_pair(BaseFunctionKind base, double initial_pae, double delta, Seed seed, const StimulusOptions& options) {
    if (delta == 0.0) throw InvalidArgument("diff pair: delta must be nonzero (options would be identical)");
    const TimeSeries series = generate_base(base, options.dims.width, seed);
    const NoiseSpec spec = NoiseSpec::for_series(series, options.dims, options.half_width, seed);
    const PixelSeries clean = rasterize(series, options.dims);
    const double lower = std::min(initial_pae, initial_pae + delta);
    const double higher = std::max(initial_pae, initial_pae + delta);
    Rng rng(derive_seed(seed, 1));
    PerturbResult low = [&] {
        try {
            return reach(clean, lower, options, spec.pixel_sigma(), rng);
        } catch (const UnreachableTarget& e) {
            throw UnreachableTarget(std::string(e.what()) + " [base " + std::string(to_string(base)) + ", level " +
                                        format_number(lower) + "]",
                                    lower, e.floor());
        }
    }();
    PerturbResult high = reach(low.series, higher, options, spec.pixel_sigma(), rng, 1);
    high.steps += low.steps;
    if (delta > 0) return {std::move(low), std::move(high)};
    return {std::move(high), std::move(low)};
}

TrialManifest diff_trial(BaseFunctionKind base, double initial_pae, double delta, Seed seed,
                         const StimulusOptions& options, int glance_ms, int pause_ms) {
    Pair pair = build_pair(base, initial_pae, delta, seed, options);
    TrialManifest trial;
    trial.base = std::string(to_string(base));
    trial.initial_pae = initial_pae;
    trial.delta = delta;
    trial.sign = delta > 0 ? 1 : -1;
    trial.glance_ms = glance_ms;
    trial.pause_ms = pause_ms;
    trial.steps = std::max(pair.initial.steps, pair.alternative.steps);

    Rng order(derive_seed(seed, 2));
    const bool initial_first = order.uniform01() < 0.5;
    const double alt_target = initial_pae + delta;
    trial.charts.push_back(make_chart("initial", pair.initial.series, initial_pae, pair.initial.achieved_pae));
    trial.charts.push_back(make_chart("mask", mask_series(options.dims, derive_seed(seed, 3)), std::nullopt,
                                      pae(mask_series(options.dims, derive_seed(seed, 3)), options.params)
                                          .value.value_or(std::nan(""))));
    auto copy = make_chart(initial_first ? "optA" : "optB", pair.initial.series, initial_pae,
                           pair.initial.achieved_pae);
    auto alt = make_chart(initial_first ? "optB" : "optA", pair.alternative.series, alt_target,
                          pair.alternative.achieved_pae);
    if (initial_first) {
        trial.charts.push_back(std::move(copy));
        trial.charts.push_back(std::move(alt));
    } else {
        trial.charts.push_back(std::move(alt));
        trial.charts.push_back(std::move(copy));
    }
    trial.answer_key["initial"] = initial_first ? "optA" : "optB";
    trial.answer_key["alternative"] = initial_first ? "optB" : "optA";
    return trial;
}

struct DiffJob {
    std::size_t cell;
    double initial;
    double delta;
    int glance_ms;
    int pause_ms;
};

/// Generates one trial per job in parallel; unreachable jobs mark their cell.
void run_diff_jobs(StimulusSet& set, const std::vector<DiffJob>& jobs, const StimulusOptions& options,
                   const std::vector<BaseFunctionKind>& job_bases) {
    std::vector<std::optional<TrialManifest>> results(jobs.size());
    std::vector<std::string> failures(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t j) {
        const auto base = job_bases.empty() ? BaseFunctionKind::Linear : job_bases[j];
        try {
            results[j] = diff_trial(base, jobs[j].initial, jobs[j].delta, derive_seed(set.master_seed, j + 1), options,
                                    jobs[j].glance_ms, jobs[j].pause_ms);
        } catch (const UnreachableTarget& e) {
            failures[j] = e.what();
        }
    });
    // A cell is either fully generated or reported unreachable.
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        auto& cell = set.cells[jobs[j].cell];
        if (!results[j] && cell.status != "unreachable") {
            cell.status = "unreachable";
            cell.reason = failures[j];
        }
    }
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        auto& cell = set.cells[jobs[j].cell];
        if (cell.status == "unreachable") continue;
        results[j]->trial_id = trial_name(set.trials.size());
        cell.trial_ids.push_back(results[j]->trial_id);
        set.trials.push_back(std::move(*results[j]));
    }
}

}  // namespace

StimulusSet generate_lineup_set(BaseFunctionKind base, const std::vector<double>& pae_levels, Seed seed,
                                const StimulusOptions& options) {
    if (pae_levels.size() < 2) throw InvalidArgument("lineup: need at least 2 PAE levels");
    StimulusSet set = make_set(ExperimentKind::LineUp, seed, options);
    const TimeSeries series = generate_base(base, options.dims.width, seed);
    const NoiseSpec spec = NoiseSpec::for_series(series, options.dims, options.half_width, seed);
    const PixelSeries clean = rasterize(series, options.dims);

    std::vector<std::optional<PerturbResult>> charts(pae_levels.size());
    parallel_for(pae_levels.size(), [&](std::size_t k) {
        Rng rng(derive_seed(seed, k + 1));
        try {
            charts[k] = reach(clean, pae_levels[k], options, spec.pixel_sigma(), rng);
        } catch (const UnreachableTarget& e) {
            throw UnreachableTarget(std::string(e.what()) + " [lineup level " + format_number(pae_levels[k]) + "]",
                                    pae_levels[k], e.floor());
        }
    });

    std::vector<std::size_t> order(pae_levels.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, 0));
    rng.shuffle(order.begin(), order.end());

    TrialManifest trial;
    trial.trial_id = trial_name(0);
    trial.base = std::string(to_string(base));
    trial.pae_levels = pae_levels;
    std::size_t most = 0;
    std::size_t least = 0;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const auto k = order[pos];
        trial.charts.push_back(make_chart("chart" + std::to_string(pos), charts[k]->series, pae_levels[k],
                                          charts[k]->achieved_pae));
        trial.steps += charts[k]->steps;
        if (charts[k]->achieved_pae > trial.charts[most].pae) most = pos;
        if (charts[k]->achieved_pae < trial.charts[least].pae) least = pos;
    }
    trial.answer_key["most"] = trial.charts[most].role;
    trial.answer_key["least"] = trial.charts[least].role;
    set.trials.push_back(std::move(trial));

    DesignCell cell;
    cell.conditions["base"] = std::string(to_string(base));
    cell.conditions["levels"] = std::to_string(pae_levels.size());
    cell.trial_ids.push_back(set.trials[0].trial_id);
    set.cells.push_back(std::move(cell));
    shuffle_presentation(set);
    render_files(set, options.style);
    return set;
}

StimulusSet generate_lineup_from_series(const TimeSeries& series, const std::vector<double>& pae_levels, Seed seed,
                                        const StimulusOptions& options, Eigen::Index window_samples,
                                        Eigen::Index stride, double max_gap) {
    if (pae_levels.empty()) throw InvalidArgument("lineup: need at least one PAE level");
    StimulusSet set = make_set(ExperimentKind::LineUp, seed, options);
    if (window_samples <= 0) window_samples = options.dims.width;
    if (stride < 1) throw InvalidArgument("lineup: stride must be >= 1");
    if (window_samples < 2 || window_samples > series.size()) {
        throw InvalidArgument("lineup: window of " + std::to_string(window_samples) + " samples does not fit a " +
                              std::to_string(series.size()) + "-sample series");
    }
    std::vector<Eigen::Index> starts;
    for (Eigen::Index s = 0; s + window_samples <= series.size(); s += stride) starts.push_back(s);
    std::vector<std::optional<double>> scores(starts.size());
    parallel_for(starts.size(), [&](std::size_t w) {
        const TimeSeries window(series.xs().segment(starts[w], window_samples),
                                series.ys().segment(starts[w], window_samples));
        scores[w] = pae(window, options.dims, options.params).value;
    });

    std::vector<bool> used(starts.size(), false);
    std::vector<std::pair<std::size_t, double>> picks;
    for (double level : pae_levels) {
        std::optional<std::size_t> best;
        for (std::size_t w = 0; w < starts.size(); ++w) {
            if (used[w] || !scores[w]) continue;
            if (!best || std::abs(*scores[w] - level) < std::abs(*scores[*best] - level)) best = w;
        }
        if (!best || std::abs(*scores[*best] - level) > max_gap) {
            throw UnreachableTarget("unreachable-target: no window of the series has PAE within " +
                                        format_number(max_gap) + " of " + format_number(level),
                                    level, best ? *scores[*best] : std::nan(""));
        }
        used[*best] = true;
        picks.emplace_back(*best, level);
    }

    std::vector<std::size_t> order(picks.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, 0));
    rng.shuffle(order.begin(), order.end());

    TrialManifest trial;
    trial.trial_id = trial_name(0);
    trial.base = "series";
    trial.pae_levels = pae_levels;
    std::size_t most = 0;
    std::size_t least = 0;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const auto [w, level] = picks[order[pos]];
        const TimeSeries window(series.xs().segment(starts[w], window_samples),
                                series.ys().segment(starts[w], window_samples));
        trial.charts.push_back(make_chart("chart" + std::to_string(pos), rasterize(window, options.dims), level,
                                          *scores[w]));
        if (*scores[w] > trial.charts[most].pae) most = pos;
        if (*scores[w] < trial.charts[least].pae) least = pos;
    }
    trial.answer_key["most"] = trial.charts[most].role;
    trial.answer_key["least"] = trial.charts[least].role;
    set.trials.push_back(std::move(trial));
    DesignCell cell;
    cell.conditions["base"] = "series";
    cell.conditions["window_samples"] = std::to_string(window_samples);
    cell.trial_ids.push_back(set.trials[0].trial_id);
    set.cells.push_back(std::move(cell));
    shuffle_presentation(set);
    render_files(set, options.style);
    return set;
}

StimulusSet generate_diff_pair(BaseFunctionKind base, double initial_pae, double delta, Seed seed,
                               const StimulusOptions& options, int glance_ms, int pause_ms) {
    StimulusSet set = make_set(ExperimentKind::FindDifference, seed, options);
    TrialManifest trial = diff_trial(base, initial_pae, delta, derive_seed(seed, 1), options, glance_ms, pause_ms);
    trial.trial_id = trial_name(0);
    DesignCell cell;
    cell.conditions = {{"base", std::string(to_string(base))},
                       {"initial_pae", format_number(initial_pae)},
                       {"delta", format_number(std::abs(delta))},
                       {"sign", delta > 0 ? "+" : "-"}};
    cell.trial_ids.push_back(trial.trial_id);
    set.trials.push_back(std::move(trial));
    set.cells.push_back(std::move(cell));
    render_files(set, options.style);
    return set;
}

StimulusSet generate_diff_study(const std::vector<BaseFunctionKind>& bases, const std::vector<double>& initial_paes,
                                const std::vector<double>& delta_magnitudes, int per_cell, Seed seed,
                                const StimulusOptions& options) {
    if (per_cell < 1) throw InvalidArgument("diff study: per_cell must be >= 1");
    StimulusSet set = make_set(ExperimentKind::FindDifference, seed, options);
    std::vector<DiffJob> jobs;
    std::vector<BaseFunctionKind> job_bases;
    for (auto base : bases) {
        for (double initial : initial_paes) {
            for (double mag : delta_magnitudes) {
                for (int sign : {1, -1}) {
                    DesignCell cell;
                    cell.index = static_cast<int>(set.cells.size());
                    cell.conditions = {{"base", std::string(to_string(base))},
                                       {"initial_pae", format_number(initial)},
                                       {"delta", format_number(mag)},
                                       {"sign", sign > 0 ? "+" : "-"}};
                    for (int rep = 0; rep < per_cell; ++rep) {
                        jobs.push_back({set.cells.size(), initial, sign * mag, 200, 200});
                        job_bases.push_back(base);
                    }
                    set.cells.push_back(std::move(cell));
                }
            }
        }
    }
    run_diff_jobs(set, jobs, options, job_bases);
    shuffle_presentation(set);
    render_files(set, options.style);
    return set;
}

StimulusSet generate_shape_trials(const std::vector<BaseFunctionKind>& shapes, const std::vector<double>& pae_levels,
                                  int per_cell, Seed seed, const StimulusOptions& options) {
    for (auto s : shapes) {
        if (std::find(kShapeBases.begin(), kShapeBases.end(), s) == kShapeBases.end()) {
            throw InvalidArgument("shape trials: '" + std::string(to_string(s)) +
                                  "' is not one of increasing, decreasing, peak, trough");
        }
    }
    if (per_cell < 1) throw InvalidArgument("shape trials: per_cell must be >= 1");
    StimulusSet set = make_set(ExperimentKind::ShapeId, seed, options);

    struct Job {
        BaseFunctionKind shape;
        double level;
        std::size_t cell;
    };
    std::vector<Job> jobs;
    for (auto shape : shapes) {
        for (double level : pae_levels) {
            DesignCell cell;
            cell.index = static_cast<int>(set.cells.size());
            cell.conditions = {{"shape", std::string(to_string(shape))}, {"pae", format_number(level)}};
            for (int rep = 0; rep < per_cell; ++rep) jobs.push_back({shape, level, set.cells.size()});
            set.cells.push_back(std::move(cell));
        }
    }
    std::vector<std::optional<TrialManifest>> results(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t j) {
        const Seed trial_seed = derive_seed(seed, j + 1);
        const TimeSeries series = generate_base(jobs[j].shape, options.dims.width, trial_seed);
        const NoiseSpec spec = NoiseSpec::for_series(series, options.dims, options.half_width, trial_seed);
        Rng rng(derive_seed(trial_seed, 1));
        auto result = reach(rasterize(series, options.dims), jobs[j].level, options, spec.pixel_sigma(), rng);
        TrialManifest trial;
        trial.base = std::string(to_string(jobs[j].shape));
        trial.shape = trial.base;
        trial.pae_levels = {jobs[j].level};
        trial.glance_ms = 500;
        trial.pause_ms = 200;
        trial.steps = result.steps;
        trial.answer_key["shape"] = trial.shape;
        trial.charts.push_back(make_chart("chart", std::move(result.series), jobs[j].level, result.achieved_pae));
        results[j] = std::move(trial);
    });
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        results[j]->trial_id = trial_name(j);
        set.cells[jobs[j].cell].trial_ids.push_back(results[j]->trial_id);
        set.trials.push_back(std::move(*results[j]));
    }
    shuffle_presentation(set);
    render_files(set, options.style);
    return set;
}

StimulusSet generate_glance_sweep(const std::vector<int>& glance_ms_list, const std::vector<double>& initial_paes,
                                  const std::vector<double>& delta_magnitudes, int per_cell, Seed seed,
                                  const StimulusOptions& options) {
    if (per_cell < 1) throw InvalidArgument("glance sweep: per_cell must be >= 1");
    StimulusSet set = make_set(ExperimentKind::GlanceSweep, seed, options);
    std::vector<DiffJob> jobs;
    for (double initial : initial_paes) {
        for (double mag : delta_magnitudes) {
            for (int sign : {1, -1}) {
                for (int glance : glance_ms_list) {
                    DesignCell cell;
                    cell.index = static_cast<int>(set.cells.size());
                    cell.conditions = {{"base", "linear"},
                                       {"initial_pae", format_number(initial)},
                                       {"delta", format_number(mag)},
                                       {"sign", sign > 0 ? "+" : "-"},
                                       {"glance_ms", std::to_string(glance)},
                                       {"pause_ms", "0"}};
                    for (int rep = 0; rep < per_cell; ++rep) {
                        jobs.push_back({set.cells.size(), initial, sign * mag, glance, 0});
                    }
                    set.cells.push_back(std::move(cell));
                }
            }
        }
    }
    run_diff_jobs(set, jobs, options, {});
    shuffle_presentation(set);
    render_files(set, options.style);
    return set;
}

TimeSeries moving_average(const TimeSeries& series, int window) {
    if (window < 1 || window % 2 == 0) throw InvalidArgument("moving_average: window must be odd and >= 1");
    const Eigen::Index n = series.size();
    const Eigen::Index half = window / 2;
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, i - half);
        const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + half);
        out[i] = series.ys().segment(lo, hi - lo + 1).mean();
    }
    return TimeSeries(series.xs(), std::move(out));
}

SmoothResult smooth_to_pae(const TimeSeries& series, const ChartDims& dims, double target, int max_window,
                           const EntropyParams& params) {
    if (max_window < 3) throw InvalidArgument("smooth_to_pae: max_window must be >= 3");
    const auto current = pae(series, dims, params);
    if (current.defined() && *current <= target) return {series, *current, 1, true};

    std::optional<SmoothResult> best;
    for (int w = 3; w <= max_window; w += 2) {
        TimeSeries smoothed = moving_average(series, w);
        const auto score = pae(smoothed, dims, params);
        if (!score.defined()) continue;
        if (*score <= target) return {std::move(smoothed), *score, w, true};
        if (!best || *score < best->achieved_pae) best = SmoothResult{std::move(smoothed), *score, w, false};
    }
    if (best) return *best;
    return {series, current.value.value_or(std::nan("")), 1, false};
}

std::vector<AspectRow> aspect_sweep(const TimeSeries& series, const std::vector<ChartDims>& dims_list,
                                    const EntropyParams& params) {
    std::vector<AspectRow> rows;
    for (const auto& d : dims_list) rows.push_back({d, pae(series, d, params)});
    std::stable_sort(rows.begin(), rows.end(), [](const AspectRow& a, const AspectRow& b) {
        if (a.score.defined() != b.score.defined()) return a.score.defined();
        return a.score.defined() && *a.score < *b.score;
    });
    return rows;
}

}  // namespace entrochart
