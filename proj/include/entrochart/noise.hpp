#pragma once

#include "entrochart/entropy.hpp"
#include "entrochart/raster.hpp"
#include "entrochart/rng.hpp"
#include "entrochart/series.hpp"

namespace entrochart {

/// Triangle-noise parameters. Amplitudes are drawn from U(-sigma, sigma)
/// where sigma is the clean series' standard deviation in data units;
/// `data_to_pixel` converts it to pixel units for the target chart.
struct NoiseSpec {
    double sigma = 1.0;
    double data_to_pixel = 1.0;
    int half_width = 1;  ///< columns on each side of the spike
    Seed seed = 0;

    void validate() const;
    double pixel_sigma() const { return sigma * data_to_pixel; }

    /// sigma = stddev(series.ys), data_to_pixel = height / y-range (1 for a flat series).
    static NoiseSpec for_series(const TimeSeries& series, const ChartDims& dims, int half_width = 1, Seed seed = 0);
};

/// Raises column `column` by delta_y (result clamped to [0, height]) and
/// linearly interpolates to the current values at column +/- half_width
/// (clamped to the chart). Columns outside that span are untouched.
PixelSeries apply_triangle(const PixelSeries& ps, Eigen::Index column, double delta_y, int half_width);

/// One triangle insertion at a uniform random column with amplitude
/// U(-pixel_sigma, pixel_sigma).
PixelSeries add_noise_step(const PixelSeries& ps, const NoiseSpec& spec, Rng& rng);

struct PerturbOptions {
    double target = 0.4;
    double tolerance = 0.015;
    int max_steps = 5000;
    /// Fresh draws per step before accepting the closest overshooting candidate.
    int retry_budget = 20;
    /// Insertions applied even if the start is already within tolerance.
    int min_steps = 0;
    EntropyParams params{};
};

struct PerturbResult {
    PixelSeries series;
    double achieved_pae;
    int steps;
    bool converged;
};

/// Adds noise to `start` until its PAE is within tolerance of the target.
/// A candidate that overshoots target + tolerance is discarded and redrawn;
/// after `retry_budget` overshoots the closest candidate is kept.
///
/// Throws UnreachableTarget when the target lies more than `tolerance`
/// below the starting PAE, or the starting PAE is undefined.
PerturbResult perturb_pixels(const PixelSeries& start, const PerturbOptions& options, double pixel_sigma,
                             int half_width, Rng& rng);

/// Rasterizes `series`, then perturb_pixels with spec's amplitude and an RNG seeded from spec.seed.
PerturbResult perturb_to_target_pae(const TimeSeries& series, const ChartDims& dims, const PerturbOptions& options,
                                    const NoiseSpec& spec);

}  // namespace entrochart
