#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "entrochart/entropy.hpp"
#include "entrochart/noise.hpp"
#include "entrochart/raster.hpp"
#include "entrochart/series.hpp"
#include "entrochart/stats.hpp"

namespace entrochart {

// ---------------------------------------------------------------------------
// Noise <-> PAE analysis

/// Default noise grid: 0, 15, ..., 135 noise insertions.
std::vector<int> default_noise_levels();

/// Charts of `base` after cumulative noise insertions: result[k] has
/// levels[k] insertions (levels must be non-decreasing). The base is
/// rendered at `dims` and noise amplitude follows the clean series' sigma.
std::vector<PixelSeries> noise_trajectory(BaseFunctionKind base, const ChartDims& dims, const std::vector<int>& levels,
                                          int half_width, Seed seed);

struct Exp1Options {
    std::vector<int> levels = default_noise_levels();
    int replicates = 5;
    ChartDims dims{};
    EntropyParams params{};
    int half_width = 1;
    Seed seed = 1;
};

struct Exp1Entry {
    BaseFunctionKind base;
    OlsFit fit;
    double clean_pae = 0.0;
    std::vector<double> levels;  ///< x of each sample
    std::vector<double> pae;     ///< y of each sample
    int undefined = 0;           ///< charts dropped for undefined PAE
};

struct Exp1Report {
    std::vector<Exp1Entry> entries;  ///< Linear, Cosine, Gaussian, Poly3
};

/// OLS of PAE on noise level per base function. Needs >= 5 levels and >= 3 replicates.
Exp1Report run_experiment1(const Exp1Options& options);

struct CalibrationOptions {
    std::vector<int> m_grid{1, 2, 3};
    std::vector<double> r_grid{5, 10, 15, 20, 25, 30, 40};
    std::vector<ChartDims> dims_list{{150, 100}, {300, 200}, {600, 400}};
    std::vector<int> levels = default_noise_levels();
    int replicates = 3;
    /// Noise is injected at this resolution, then each chart is re-rendered
    /// at every entry of dims_list.
    ChartDims source_dims{};
    int half_width = 1;
    WindowConvention convention = WindowConvention::Classical;
    Seed seed = 1;
};

struct CalibrationRow {
    int m;
    double r;
    double mean_correlation;
    double undefined_fraction;
    bool excluded;  ///< entropy undefined on > 50% of charts
    int rank;       ///< 1-based; 0 for excluded rows
};

/// Mean (over base functions x resolutions) Pearson correlation between
/// noise level and entropy for every (m, r). Ranked rows come first,
/// descending; excluded rows follow.
std::vector<CalibrationRow> calibrate_params(const CalibrationOptions& options);

// ---------------------------------------------------------------------------
// Stimuli

enum class ExperimentKind { LineUp, FindDifference, ShapeId, GlanceSweep };
std::string to_string(ExperimentKind kind);

inline constexpr double kStimulusTolerance = 0.015;

struct ChartRecord {
    std::string role;  ///< initial, mask, optA, optB, chart<k>
    PixelSeries series;
    std::optional<double> target_pae;
    double pae = 0.0;
    std::string svg_path;
    std::string pgm_path;
};

struct TrialManifest {
    std::string trial_id;
    int presentation_index = 0;  ///< position in the randomized trial order
    std::string base;
    std::optional<double> initial_pae;
    std::optional<double> delta;
    std::optional<int> sign;
    std::vector<double> pae_levels;
    std::string shape;
    int glance_ms = 0;
    int pause_ms = 0;
    std::map<std::string, std::string> answer_key;
    std::vector<ChartRecord> charts;  ///< presentation order within the trial
    int steps = 0;                    ///< total noise insertions used
};

struct DesignCell {
    int index = 0;
    std::map<std::string, std::string> conditions;
    std::string status = "generated";  ///< or "unreachable"
    std::string reason;
    std::vector<std::string> trial_ids;
};

struct StimulusFile {
    std::string path;  ///< relative to the output directory
    std::string bytes;
};

struct StimulusSet {
    ExperimentKind experiment;
    std::string set_id;
    Seed master_seed = 0;
    ChartDims dims{};
    EntropyParams params{};
    std::vector<TrialManifest> trials;
    std::vector<DesignCell> cells;
    std::vector<StimulusFile> files;
};

struct StimulusOptions {
    ChartDims dims{};
    EntropyParams params{};
    double tolerance = kStimulusTolerance;
    int max_steps = 5000;
    int half_width = 1;
    ChartStyle style{};
    std::string set_id;  ///< defaults to the experiment name
};

std::vector<double> default_lineup_levels();  ///< 0.1 .. 0.8

/// One set of charts of `base`, one per PAE level, in shuffled order.
/// answer_key["most"] / ["least"] name the charts with the extreme achieved PAE.
StimulusSet generate_lineup_set(BaseFunctionKind base, const std::vector<double>& pae_levels, Seed seed,
                                const StimulusOptions& options = {});

/// Real-data variant: slides windows of `window_samples` (stride `stride`)
/// over `series` and takes, per level, the unused window whose PAE is
/// closest. Throws UnreachableTarget if no window is within `max_gap`.
StimulusSet generate_lineup_from_series(const TimeSeries& series, const std::vector<double>& pae_levels, Seed seed,
                                        const StimulusOptions& options = {}, Eigen::Index window_samples = 0,
                                        Eigen::Index stride = 1, double max_gap = 0.03);

/// Find-the-difference trial: initial chart, mask, and the initial and an
/// alternative with PAE initial + delta in random option order. The lower
/// PAE chart is built first and the higher one continues from it.
/// Throws InvalidArgument for delta == 0 and UnreachableTarget for levels
/// below the clean curve.
StimulusSet generate_diff_pair(BaseFunctionKind base, double initial_pae, double delta, Seed seed,
                               const StimulusOptions& options = {}, int glance_ms = 200, int pause_ms = 200);

/// Full find-the-difference design: bases x initial levels x |delta| x sign.
/// Unreachable cells are recorded in `cells` and produce no trials.
StimulusSet generate_diff_study(const std::vector<BaseFunctionKind>& bases, const std::vector<double>& initial_paes,
                                const std::vector<double>& delta_magnitudes, int per_cell, Seed seed,
                                const StimulusOptions& options = {});

/// shapes x levels x per_cell noisy charts; answer_key["shape"] is the base shape.
StimulusSet generate_shape_trials(const std::vector<BaseFunctionKind>& shapes, const std::vector<double>& pae_levels,
                                  int per_cell, Seed seed, const StimulusOptions& options = {});

/// Linear base, crossed initial x delta x sign x glance design with pause 0.
StimulusSet generate_glance_sweep(const std::vector<int>& glance_ms_list, const std::vector<double>& initial_paes,
                                  const std::vector<double>& delta_magnitudes, int per_cell, Seed seed,
                                  const StimulusOptions& options = {});

/// Manifest: JSON array of trial objects (schema_version 1).
std::string manifest_json(const StimulusSet& set);
/// Design summary: experiment, seed, dims, params, cells.
std::string design_json(const StimulusSet& set);
/// Writes `{outdir}/{set_id}/...` images plus manifest.json and design.json.
void write_stimulus_set(const StimulusSet& set, const std::filesystem::path& outdir);

// ---------------------------------------------------------------------------
// Advisors

struct SmoothResult {
    TimeSeries series;
    double achieved_pae;
    int window;  ///< 1 = unchanged
    bool reached;
};

/// Centered moving average (edge windows truncated).
TimeSeries moving_average(const TimeSeries& series, int window);

/// Tries odd windows 3, 5, ... <= max_window and returns the first whose
/// rasterized PAE is <= target; otherwise the lowest-PAE attempt with reached = false.
SmoothResult smooth_to_pae(const TimeSeries& series, const ChartDims& dims, double target, int max_window,
                           const EntropyParams& params = {});

struct AspectRow {
    ChartDims dims;
    EntropyScore score;
};

/// PAE per resolution, ascending (undefined scores last).
std::vector<AspectRow> aspect_sweep(const TimeSeries& series, const std::vector<ChartDims>& dims_list,
                                    const EntropyParams& params = {});

}  // namespace entrochart
