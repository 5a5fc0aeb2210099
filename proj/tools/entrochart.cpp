#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "entrochart/entropy.hpp"
#include "entrochart/errors.hpp"
#include "entrochart/noise.hpp"
#include "entrochart/stats.hpp"
#include "entrochart/studio.hpp"

namespace ec = entrochart;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitUnreachable = 3;
constexpr int kExitNonConvergence = 4;

struct Common {
    std::string dims = "300x200";
    int m = 2;
    double r = 20.0;
    std::string convention = "classical";
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;

    ec::ChartDims chart_dims() const { return ec::ChartDims::parse(dims); }

    ec::EntropyParams params() const {
        ec::EntropyParams p;
        p.m = m;
        p.r = r;
        if (convention == "classical") {
            p.convention = ec::WindowConvention::Classical;
        } else if (convention == "paper") {
            p.convention = ec::WindowConvention::Paper;
        } else {
            throw ec::InvalidArgument("--convention must be classical or paper, got '" + convention + "'");
        }
        p.validate();
        return p;
    }

    /// --seed, then ENTROCHART_SEED, then 1.
    std::pair<ec::Seed, std::string> resolve_seed() const {
        if (seed) return {*seed, "flag"};
        if (const char* env = std::getenv("ENTROCHART_SEED")) {
            try {
                std::size_t used = 0;
                const auto value = std::stoull(env, &used);
                if (used == std::string(env).size()) return {value, "env"};
            } catch (const std::exception&) {
            }
            throw ec::InvalidArgument(std::string("ENTROCHART_SEED is not an unsigned integer: '") + env + "'");
        }
        return {1, "default"};
    }

    std::optional<ec::SeriesFormat> series_format() const {
        if (format.empty()) return std::nullopt;
        if (format == "csv") return ec::SeriesFormat::Csv;
        if (format == "json") return ec::SeriesFormat::Json;
        throw ec::InvalidArgument("--format must be csv or json, got '" + format + "'");
    }

    json echo() const {
        return {{"dims", dims}, {"m", m}, {"r", r}, {"convention", convention}};
    }
};

void add_entropy_flags(CLI::App* cmd, Common& c) {
    cmd->add_option("--dims", c.dims, "chart size WxH")->capture_default_str();
    cmd->add_option("--m", c.m, "window length")->capture_default_str();
    cmd->add_option("--r", c.r, "similarity tolerance in pixels")->capture_default_str();
    cmd->add_option("--convention", c.convention, "window convention: classical or paper")->capture_default_str();
}

void add_seed_flag(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "master seed (falls back to ENTROCHART_SEED, then 1)");
}

void write_atomically(const std::filesystem::path& path, const std::string& bytes) {
    namespace fs = std::filesystem;
    if (fs::exists(path) && !fs::is_regular_file(path)) {
        // Devices and pipes cannot be replaced by rename.
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::ios_base::failure("cannot write " + path.string());
        out << bytes;
        return;
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::ios_base::failure("cannot write " + path.string());
        out << bytes;
    }
    std::filesystem::rename(tmp, path);
}

void emit_report(const json& report, const std::string& out) {
    const std::string text = report.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text << std::flush;
    } else {
        write_atomically(out, text);
    }
}

json base_report(const std::string& command, const Common& c) {
    return {{"command", command}, {"version", ENTROCHART_VERSION}, {"config", c.echo()}};
}

json score_value(const std::optional<double>& v) { return v ? json(*v) : json("undefined"); }

std::string fmt(const std::optional<double>& v) {
    if (!v) return "undefined";
    std::ostringstream s;
    s << *v;
    return s.str();
}

ec::BaseFunctionKind parse_base(const std::string& name) {
    auto kind = ec::parse_base_function(name);
    if (!kind) throw ec::InvalidArgument("unknown base function '" + name + "'");
    return *kind;
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
    Common common;
    std::string input;
    bool all_measures = false;
};

int run_score(const ScoreArgs& a) {
    const auto dims = a.common.chart_dims();
    const auto params = a.common.params();
    const auto series = ec::load_series(a.input, a.common.series_format());
    const auto ps = ec::rasterize(series, dims);
    const auto score = ec::pae(ps, params);

    json report = base_report("score", a.common);
    report["input"] = a.input;
    report["samples"] = series.size();
    report["pae"] = score_value(score.value);
    std::cerr << "PAE " << fmt(score.value) << " (" << dims.to_string() << ", m=" << params.m << ", r=" << params.r
              << ")\n";
    if (a.all_measures) {
        json measures;
        measures["sample_entropy"] = score_value(ec::sample_entropy(ps.ys(), params).value);
        json multiscale = json::object();
        for (int scale : {1, 2, 5}) {
            try {
                multiscale[std::to_string(scale)] =
                    score_value(ec::multiscale_entropy(ps.ys(), params, {scale}).front().score.value);
            } catch (const ec::InvalidArgument&) {
                multiscale[std::to_string(scale)] = "undefined";
            }
        }
        measures["multiscale"] = multiscale;
        measures["flattened_length"] = ec::flattened_length(ps);
        measures["autocorr_lag1"] = score_value(ec::autocorr_lag1(ps));
        measures["fourier_highfreq_ratio"] = score_value(ec::fourier_highfreq_ratio(ps));
        report["measures"] = measures;
    }
    emit_report(report, a.common.out);
    return kExitOk;
}

struct NoiseArgs {
    Common common;
    std::string input;
    double target = 0.4;
    double tolerance = ec::kStimulusTolerance;
    int max_steps = 5000;
    int half_width = 1;
    std::string report;
};

int run_noise(const NoiseArgs& a) {
    const auto dims = a.common.chart_dims();
    const auto [seed, seed_source] = a.common.resolve_seed();
    const auto series = ec::load_series(a.input, a.common.series_format());

    ec::PerturbOptions options;
    options.target = a.target;
    options.tolerance = a.tolerance;
    options.max_steps = a.max_steps;
    options.params = a.common.params();
    const auto spec = ec::NoiseSpec::for_series(series, dims, a.half_width, seed);
    const auto result = ec::perturb_to_target_pae(series, dims, options, spec);

    const std::string csv = ec::to_csv(result.series.to_series());
    if (!a.common.out.empty()) {
        write_atomically(a.common.out, csv);
    }
    json report = base_report("noise", a.common);
    report["config"]["target"] = a.target;
    report["config"]["tolerance"] = a.tolerance;
    report["config"]["max_steps"] = a.max_steps;
    report["config"]["half_width"] = a.half_width;
    report["seed"] = seed;
    report["seed_source"] = seed_source;
    report["input"] = a.input;
    report["output"] = a.common.out.empty() ? json(nullptr) : json(a.common.out);
    report["achieved"] = result.achieved_pae;
    report["steps"] = result.steps;
    report["converged"] = result.converged;
    if (a.report.empty()) {
        if (a.common.out.empty()) {
            // Series goes to stdout, so the report moves to stderr.
            std::cout << csv;
            std::cerr << report.dump(2) << "\n";
        } else {
            emit_report(report, "");
        }
    } else {
        emit_report(report, a.report);
        if (a.common.out.empty()) std::cout << csv;
    }
    std::cerr << "achieved PAE " << result.achieved_pae << " after " << result.steps << " steps\n";
    if (!result.converged) {
        std::cerr << "unreachable-target: PAE " << a.target << " not reached within " << a.max_steps << " steps\n";
        return kExitUnreachable;
    }
    return kExitOk;
}

struct StimuliArgs {
    Common common;
    std::string outdir = "stimuli";
    double tolerance = ec::kStimulusTolerance;
    int max_steps = 5000;
    std::string set_id;
    // lineup
    std::string base = "linear";
    std::vector<double> levels;
    std::string input;
    // diff / glance
    std::vector<double> initial;
    std::vector<double> deltas;
    std::vector<std::string> bases;
    bool study = false;
    int glance_ms = 200;
    int pause_ms = 200;
    std::vector<int> glance_list{50, 100, 200, 2000};
    int per_cell = 0;
    std::vector<std::string> shapes{"increasing", "decreasing", "peak", "trough"};
};

ec::StimulusOptions stimulus_options(const StimuliArgs& a) {
    ec::StimulusOptions o;
    o.dims = a.common.chart_dims();
    o.params = a.common.params();
    o.tolerance = a.tolerance;
    o.max_steps = a.max_steps;
    o.set_id = a.set_id;
    return o;
}

int finish_stimuli(const std::string& kind, const StimuliArgs& a, ec::Seed seed, const std::string& seed_source,
                   const ec::StimulusSet& set) {
    ec::write_stimulus_set(set, a.outdir);
    json report = base_report("stimuli " + kind, a.common);
    report["config"]["tolerance"] = a.tolerance;
    report["seed"] = seed;
    report["seed_source"] = seed_source;
    report["outdir"] = (std::filesystem::path(a.outdir) / set.set_id).string();
    report["trials"] = set.trials.size();
    report["cells"] = set.cells.size();
    json unreachable = json::array();
    for (const auto& cell : set.cells) {
        if (cell.status == "unreachable") unreachable.push_back({{"conditions", cell.conditions}, {"reason", cell.reason}});
    }
    report["unreachable_cells"] = unreachable;
    report["files"] = set.files.size() + 2;
    emit_report(report, a.common.out);
    std::cerr << set.trials.size() << " trials, " << set.cells.size() << " cells (" << unreachable.size()
              << " unreachable) written to " << report["outdir"].get<std::string>() << "\n";
    return kExitOk;
}

int run_stimuli(const std::string& kind, StimuliArgs a) {
    const auto [seed, seed_source] = a.common.resolve_seed();
    const auto options = stimulus_options(a);
    if (kind == "lineup") {
        if (a.levels.empty()) a.levels = ec::default_lineup_levels();
        if (!a.input.empty()) {
            const auto series = ec::load_series(a.input, a.common.series_format());
            return finish_stimuli(kind, a, seed, seed_source,
                                  ec::generate_lineup_from_series(series, a.levels, seed, options));
        }
        return finish_stimuli(kind, a, seed, seed_source,
                              ec::generate_lineup_set(parse_base(a.base), a.levels, seed, options));
    }
    if (kind == "diff") {
        if (a.study) {
            std::vector<ec::BaseFunctionKind> bases;
            if (a.bases.empty()) {
                bases.assign(ec::kExperimentBases.begin(), ec::kExperimentBases.end());
            } else {
                for (const auto& b : a.bases) bases.push_back(parse_base(b));
            }
            if (a.initial.empty()) a.initial = {0.045, 0.09, 0.18};
            if (a.deltas.empty()) a.deltas = {0.015, 0.03, 0.06, 0.09, 0.12};
            return finish_stimuli(kind, a, seed, seed_source,
                                  ec::generate_diff_study(bases, a.initial, a.deltas, std::max(1, a.per_cell), seed,
                                                          options));
        }
        const double initial = a.initial.empty() ? 0.09 : a.initial.front();
        const double delta = a.deltas.empty() ? 0.06 : a.deltas.front();
        return finish_stimuli(kind, a, seed, seed_source,
                              ec::generate_diff_pair(parse_base(a.base), initial, delta, seed, options, a.glance_ms,
                                                     a.pause_ms));
    }
    if (kind == "shape-id") {
        std::vector<ec::BaseFunctionKind> shapes;
        for (const auto& s : a.shapes) shapes.push_back(parse_base(s));
        if (a.levels.empty()) a.levels = {0.2, 0.4, 0.8, 1.2};
        return finish_stimuli(kind, a, seed, seed_source,
                              ec::generate_shape_trials(shapes, a.levels, a.per_cell > 0 ? a.per_cell : 5, seed,
                                                        options));
    }
    if (a.initial.empty()) a.initial = {0.045, 0.09, 0.18};
    if (a.deltas.empty()) a.deltas = {0.015, 0.06, 0.24};
    return finish_stimuli(kind, a, seed, seed_source,
                          ec::generate_glance_sweep(a.glance_list, a.initial, a.deltas, std::max(1, a.per_cell), seed,
                                                    options));
}

struct Exp1Args {
    Common common;
    std::vector<int> levels = ec::default_noise_levels();
    int replicates = 5;
    int half_width = 1;
};

json ols_json(const ec::OlsFit& fit) {
    return {{"slope", fit.slope},         {"intercept", fit.intercept}, {"r_squared", fit.r_squared},
            {"slope_se", fit.slope_se},   {"t", fit.t_stat},            {"p_value", fit.p_value},
            {"n", fit.n},                 {"degenerate", fit.degenerate}};
}

int run_exp1(const Exp1Args& a) {
    const auto [seed, seed_source] = a.common.resolve_seed();
    ec::Exp1Options options;
    options.levels = a.levels;
    options.replicates = a.replicates;
    options.dims = a.common.chart_dims();
    options.params = a.common.params();
    options.half_width = a.half_width;
    options.seed = seed;
    const auto result = ec::run_experiment1(options);

    json report = base_report("exp1", a.common);
    report["config"]["levels"] = a.levels;
    report["config"]["replicates"] = a.replicates;
    report["config"]["half_width"] = a.half_width;
    report["seed"] = seed;
    report["seed_source"] = seed_source;
    json entries = json::array();
    for (const auto& e : result.entries) {
        entries.push_back({{"base", std::string(ec::to_string(e.base))},
                           {"clean_pae", e.clean_pae},
                           {"fit", ols_json(e.fit)},
                           {"undefined", e.undefined},
                           {"levels", e.levels},
                           {"pae", e.pae}});
        std::cerr << ec::to_string(e.base) << ": R2=" << e.fit.r_squared << " slope=" << e.fit.slope
                  << " t=" << e.fit.t_stat << " p=" << e.fit.p_value << "\n";
    }
    report["entries"] = entries;
    emit_report(report, a.common.out);
    return kExitOk;
}

struct CalibrateArgs {
    Common common;
    std::vector<int> m_grid{1, 2, 3};
    std::vector<double> r_grid{5, 10, 15, 20, 25, 30, 40};
    std::vector<std::string> dims_list{"150x100", "300x200", "600x400"};
    std::vector<int> levels = ec::default_noise_levels();
    int replicates = 3;
};

int run_calibrate(const CalibrateArgs& a) {
    const auto [seed, seed_source] = a.common.resolve_seed();
    ec::CalibrationOptions options;
    options.m_grid = a.m_grid;
    options.r_grid = a.r_grid;
    options.dims_list.clear();
    for (const auto& d : a.dims_list) options.dims_list.push_back(ec::ChartDims::parse(d));
    options.levels = a.levels;
    options.replicates = a.replicates;
    options.source_dims = a.common.chart_dims();
    options.convention = a.common.params().convention;
    options.seed = seed;
    const auto rows = ec::calibrate_params(options);

    json report = base_report("calibrate", a.common);
    report["config"]["m_grid"] = a.m_grid;
    report["config"]["r_grid"] = a.r_grid;
    report["config"]["dims_list"] = a.dims_list;
    report["config"]["levels"] = a.levels;
    report["config"]["replicates"] = a.replicates;
    report["seed"] = seed;
    report["seed_source"] = seed_source;
    json table = json::array();
    for (const auto& row : rows) {
        table.push_back({{"m", row.m},
                         {"r", row.r},
                         {"mean_correlation", row.mean_correlation},
                         {"undefined_fraction", row.undefined_fraction},
                         {"excluded", row.excluded},
                         {"rank", row.rank}});
        if (row.rank > 0 && row.rank <= 5) {
            std::cerr << "#" << row.rank << " m=" << row.m << " r=" << row.r << " corr=" << row.mean_correlation
                      << "\n";
        }
    }
    report["rows"] = table;
    emit_report(report, a.common.out);
    return kExitOk;
}

struct SmoothArgs {
    Common common;
    std::string input;
    double target = 0.2;
    int max_window = 0;
    std::string series_out;
};

int run_smooth(const SmoothArgs& a) {
    const auto dims = a.common.chart_dims();
    const auto series = ec::load_series(a.input, a.common.series_format());
    const auto before = ec::pae(series, dims, a.common.params());
    int max_window = a.max_window;
    if (max_window == 0) max_window = static_cast<int>(series.size() % 2 ? series.size() : series.size() - 1);
    const auto result = ec::smooth_to_pae(series, dims, a.target, max_window, a.common.params());
    if (!a.series_out.empty()) write_atomically(a.series_out, ec::to_csv(result.series));

    json report = base_report("smooth", a.common);
    report["config"]["target"] = a.target;
    report["config"]["max_window"] = max_window;
    report["input"] = a.input;
    report["input_pae"] = score_value(before.value);
    report["achieved"] = result.achieved_pae;
    report["window"] = result.window;
    report["reached"] = result.reached;
    emit_report(report, a.common.out);
    std::cerr << "window " << result.window << " -> PAE " << result.achieved_pae
              << (result.reached ? "" : " (target not reached)") << "\n";
    return kExitOk;
}

struct AspectArgs {
    Common common;
    std::string input;
    std::vector<std::string> dims_list{"150x200", "300x200", "600x200", "300x100", "300x400"};
};

int run_aspect(const AspectArgs& a) {
    std::vector<ec::ChartDims> dims;
    for (const auto& d : a.dims_list) dims.push_back(ec::ChartDims::parse(d));
    const auto series = ec::load_series(a.input, a.common.series_format());
    const auto rows = ec::aspect_sweep(series, dims, a.common.params());

    json report = base_report("aspect", a.common);
    report["config"]["dims_list"] = a.dims_list;
    report["input"] = a.input;
    json table = json::array();
    for (const auto& row : rows) {
        table.push_back({{"dims", row.dims.to_string()}, {"pae", score_value(row.score.value)}});
        std::cerr << row.dims.to_string() << " " << fmt(row.score.value) << "\n";
    }
    report["rows"] = table;
    emit_report(report, a.common.out);
    return kExitOk;
}

struct AnalyzeArgs {
    Common common;
    std::string input;
    std::vector<std::string> predictors;
    std::vector<std::string> categorical;
    std::vector<std::string> group_by;
    int resamples = 2000;
    double level = 0.95;
    int max_iter = 100;
};

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int run_analyze(const AnalyzeArgs& a) {
    const auto [seed, seed_source] = a.common.resolve_seed();
    const auto table = ec::ResponseTable::load_csv(a.input);
    json report = {{"command", "analyze"}, {"version", ENTROCHART_VERSION}};
    report["config"] = {{"predictors", a.predictors},
                        {"categorical", a.categorical},
                        {"group_by", a.group_by},
                        {"resamples", a.resamples},
                        {"level", a.level}};
    report["seed"] = seed;
    report["seed_source"] = seed_source;
    report["input"] = a.input;
    report["rows"] = table.rows.size();

    int status = kExitOk;
    if (!a.predictors.empty()) {
        const auto design = ec::build_logit_design(table, a.predictors,
                                                   std::set<std::string>(a.categorical.begin(), a.categorical.end()));
        const auto fit = ec::logit_fit(design.design, design.outcomes, a.max_iter);
        json coefficients = json::array();
        for (Eigen::Index k = 0; k < fit.coefficients.size(); ++k) {
            coefficients.push_back({{"name", design.coefficient_names[static_cast<std::size_t>(k)]},
                                    {"estimate", finite_or_null(fit.coefficients[k])},
                                    {"std_error", finite_or_null(fit.std_errors[k])},
                                    {"z", finite_or_null(fit.z_stats[k])},
                                    {"p_value", finite_or_null(fit.p_values[k])}});
        }
        json wald = json::array();
        if (fit.converged && !fit.separation) {
            for (const auto& [name, indices] : design.groups) {
                const auto w = ec::wald_categorical(fit, indices);
                wald.push_back({{"predictor", name}, {"chi2", w.chi2}, {"df", w.df}, {"p_value", w.p_value}});
            }
        }
        report["model"] = {{"coefficients", coefficients},
                           {"wald", wald},
                           {"log_likelihood", finite_or_null(fit.log_likelihood)},
                           {"iterations", fit.iterations},
                           {"converged", fit.converged},
                           {"separation", fit.separation},
                           {"diagnostic", fit.diagnostic}};
        if (!fit.converged || fit.separation) {
            std::cerr << "logistic fit did not converge: " << fit.diagnostic << "\n";
            status = kExitNonConvergence;
        }
    }
    if (!a.group_by.empty()) {
        json groups = json::array();
        for (const auto& row : ec::accuracy_summary(table, a.group_by, a.resamples, a.level, seed)) {
            groups.push_back({{"key", row.key},
                              {"n", row.n},
                              {"accuracy", row.accuracy},
                              {"ci_lo", row.ci_lo},
                              {"ci_hi", row.ci_hi}});
        }
        report["accuracy"] = groups;
    }
    emit_report(report, a.common.out);
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pixel approximate entropy for line charts: scoring, noise, stimuli and analysis"};
    app.set_version_flag("--version", ENTROCHART_VERSION);
    app.require_subcommand(1);

    ScoreArgs score;
    auto* score_cmd = app.add_subcommand("score", "PAE of a series (CSV or JSON)");
    score_cmd->add_option("input", score.input, "series file")->required();
    add_entropy_flags(score_cmd, score.common);
    score_cmd->add_flag("--all-measures", score.all_measures, "also report baseline complexity measures");
    score_cmd->add_option("--format", score.common.format, "input format: csv or json");
    score_cmd->add_option("--out", score.common.out, "write the JSON report here");

    NoiseArgs noise;
    auto* noise_cmd = app.add_subcommand("noise", "add triangle noise until the PAE reaches a target");
    noise_cmd->add_option("input", noise.input, "series file")->required();
    add_entropy_flags(noise_cmd, noise.common);
    add_seed_flag(noise_cmd, noise.common);
    noise_cmd->add_option("--target", noise.target, "target PAE")->capture_default_str();
    noise_cmd->add_option("--tol", noise.tolerance, "accepted |PAE - target|")->capture_default_str();
    noise_cmd->add_option("--max-steps", noise.max_steps)->capture_default_str();
    noise_cmd->add_option("--half-width", noise.half_width, "triangle half width in columns")->capture_default_str();
    noise_cmd->add_option("--format", noise.common.format, "input format: csv or json");
    noise_cmd->add_option("--out", noise.common.out, "write the perturbed pixel series (CSV) here");
    noise_cmd->add_option("--report", noise.report, "write the JSON report here");

    auto* stimuli_cmd = app.add_subcommand("stimuli", "generate stimulus sets");
    stimuli_cmd->require_subcommand(1);
    std::map<std::string, StimuliArgs> stimuli;
    for (const std::string kind : {"lineup", "diff", "shape-id", "glance"}) {
        auto& s = stimuli[kind];
        auto* cmd = stimuli_cmd->add_subcommand(kind);
        add_entropy_flags(cmd, s.common);
        add_seed_flag(cmd, s.common);
        cmd->add_option("--outdir", s.outdir, "output directory")->capture_default_str();
        cmd->add_option("--tol", s.tolerance)->capture_default_str();
        cmd->add_option("--max-steps", s.max_steps)->capture_default_str();
        cmd->add_option("--set-id", s.set_id, "subdirectory name (defaults to the experiment)");
        cmd->add_option("--out", s.common.out, "write the JSON report here");
        if (kind == "lineup") {
            cmd->add_option("--base", s.base)->capture_default_str();
            cmd->add_option("--levels", s.levels, "PAE levels")->delimiter(',');
            cmd->add_option("--input", s.input, "pick windows of this series instead of a base function");
            cmd->add_option("--format", s.common.format, "input format: csv or json");
        } else if (kind == "diff") {
            cmd->add_option("--base", s.base)->capture_default_str();
            cmd->add_option("--initial", s.initial, "initial PAE (list with --study)")->delimiter(',');
            cmd->add_option("--delta", s.deltas, "signed delta (magnitudes with --study)")->delimiter(',');
            cmd->add_flag("--study", s.study, "full crossed design");
            cmd->add_option("--bases", s.bases, "bases for --study")->delimiter(',');
            cmd->add_option("--per-cell", s.per_cell, "trials per cell for --study");
            cmd->add_option("--glance-ms", s.glance_ms)->capture_default_str();
            cmd->add_option("--pause-ms", s.pause_ms)->capture_default_str();
        } else if (kind == "shape-id") {
            cmd->add_option("--shapes", s.shapes)->delimiter(',')->capture_default_str();
            cmd->add_option("--levels", s.levels, "PAE levels (default 0.2,0.4,0.8,1.2)")->delimiter(',');
            cmd->add_option("--per-cell", s.per_cell, "charts per cell (default 5)");
        } else {
            cmd->add_option("--glance-ms", s.glance_list)->delimiter(',')->capture_default_str();
            cmd->add_option("--initial", s.initial, "initial PAEs (default 0.045,0.09,0.18)")->delimiter(',');
            cmd->add_option("--delta", s.deltas, "delta magnitudes (default 0.015,0.06,0.24)")->delimiter(',');
            cmd->add_option("--per-cell", s.per_cell, "trials per cell (default 1)");
        }
    }

    Exp1Args exp1;
    auto* exp1_cmd = app.add_subcommand("exp1", "regress PAE on noise level for each base function");
    add_entropy_flags(exp1_cmd, exp1.common);
    add_seed_flag(exp1_cmd, exp1.common);
    exp1_cmd->add_option("--levels", exp1.levels, "noise step counts")->delimiter(',');
    exp1_cmd->add_option("--replicates", exp1.replicates)->capture_default_str();
    exp1_cmd->add_option("--half-width", exp1.half_width)->capture_default_str();
    exp1_cmd->add_option("--out", exp1.common.out, "write the JSON report here");

    CalibrateArgs calibrate;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "rank (m, r) by noise/entropy correlation");
    calibrate_cmd->add_option("--dims", calibrate.common.dims, "resolution noise is injected at")
        ->capture_default_str();
    calibrate_cmd->add_option("--convention", calibrate.common.convention)->capture_default_str();
    add_seed_flag(calibrate_cmd, calibrate.common);
    calibrate_cmd->add_option("--m-grid", calibrate.m_grid)->delimiter(',');
    calibrate_cmd->add_option("--r-grid", calibrate.r_grid)->delimiter(',');
    calibrate_cmd->add_option("--dims-list", calibrate.dims_list)->delimiter(',');
    calibrate_cmd->add_option("--levels", calibrate.levels)->delimiter(',');
    calibrate_cmd->add_option("--replicates", calibrate.replicates)->capture_default_str();
    calibrate_cmd->add_option("--out", calibrate.common.out, "write the JSON report here");

    SmoothArgs smooth;
    auto* smooth_cmd = app.add_subcommand("smooth", "moving-average smoothing down to a target PAE");
    smooth_cmd->add_option("input", smooth.input)->required();
    add_entropy_flags(smooth_cmd, smooth.common);
    smooth_cmd->add_option("--target", smooth.target)->capture_default_str();
    smooth_cmd->add_option("--max-window", smooth.max_window, "largest odd window (0 = series length)")
        ->capture_default_str();
    smooth_cmd->add_option("--series-out", smooth.series_out, "write the smoothed series (CSV) here");
    smooth_cmd->add_option("--format", smooth.common.format, "input format: csv or json");
    smooth_cmd->add_option("--out", smooth.common.out, "write the JSON report here");

    AspectArgs aspect;
    auto* aspect_cmd = app.add_subcommand("aspect", "PAE of a series across chart sizes");
    aspect_cmd->add_option("input", aspect.input)->required();
    aspect_cmd->add_option("--m", aspect.common.m)->capture_default_str();
    aspect_cmd->add_option("--r", aspect.common.r)->capture_default_str();
    aspect_cmd->add_option("--convention", aspect.common.convention)->capture_default_str();
    aspect_cmd->add_option("--dims-list", aspect.dims_list)->delimiter(',')->capture_default_str();
    aspect_cmd->add_option("--format", aspect.common.format, "input format: csv or json");
    aspect_cmd->add_option("--out", aspect.common.out, "write the JSON report here");

    AnalyzeArgs analyze;
    auto* analyze_cmd = app.add_subcommand("analyze", "logistic model and accuracy tables for a response CSV");
    analyze_cmd->add_option("input", analyze.input, "CSV with a `correct` column")->required();
    add_seed_flag(analyze_cmd, analyze.common);
    analyze_cmd->add_option("--predictors", analyze.predictors)->delimiter(',');
    analyze_cmd->add_option("--categorical", analyze.categorical, "treat these predictors as factors")
        ->delimiter(',');
    analyze_cmd->add_option("--group-by", analyze.group_by)->delimiter(',');
    analyze_cmd->add_option("--resamples", analyze.resamples)->capture_default_str();
    analyze_cmd->add_option("--level", analyze.level)->capture_default_str();
    analyze_cmd->add_option("--max-iter", analyze.max_iter)->capture_default_str();
    analyze_cmd->add_option("--out", analyze.common.out, "write the JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (score_cmd->parsed()) return run_score(score);
        if (noise_cmd->parsed()) return run_noise(noise);
        if (stimuli_cmd->parsed()) {
            for (auto& [kind, args] : stimuli) {
                if (stimuli_cmd->get_subcommand(kind)->parsed()) return run_stimuli(kind, args);
            }
        }
        if (exp1_cmd->parsed()) return run_exp1(exp1);
        if (calibrate_cmd->parsed()) return run_calibrate(calibrate);
        if (smooth_cmd->parsed()) return run_smooth(smooth);
        if (aspect_cmd->parsed()) return run_aspect(aspect);
        if (analyze_cmd->parsed()) return run_analyze(analyze);
    } catch (const ec::UnreachableTarget& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnreachable;
    } catch (const ec::SingularMatrix& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
