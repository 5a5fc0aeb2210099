#include "entrochart/noise.hpp"

#include <algorithm>
#include <cmath>

namespace entrochart {

void NoiseSpec::validate() const {
    if (!(sigma > 0.0)) throw InvalidArgument("noise sigma must be > 0");
    if (!(data_to_pixel > 0.0)) throw InvalidArgument("noise data_to_pixel scale must be > 0");
    if (half_width < 1) throw InvalidArgument("noise half_width must be >= 1");
}

NoiseSpec NoiseSpec::for_series(const TimeSeries& series, const ChartDims& dims, int half_width, Seed seed) {
    NoiseSpec spec;
    spec.sigma = series.y_stddev();
    const double range = series.y_range();
    spec.data_to_pixel = range > 0.0 ? dims.height / range : 1.0;
    spec.half_width = half_width;
    spec.seed = seed;
    return spec;
}

PixelSeries apply_triangle(const PixelSeries& ps, Eigen::Index column, double delta_y, int half_width) {
    const Eigen::Index n = ps.size();
    if (column < 0 || column >= n) throw InvalidArgument("apply_triangle: column out of range");
    if (half_width < 1) throw InvalidArgument("apply_triangle: half_width must be >= 1");
    if (delta_y == 0.0) return ps;

    Eigen::VectorXd ys = ps.ys();
    const double peak = std::clamp(ys[column] + delta_y, 0.0, static_cast<double>(ps.dims().height));
    const Eigen::Index lo = std::max<Eigen::Index>(0, column - half_width);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, column + half_width);
    const double left = ys[lo];
    const double right = ys[hi];
    for (Eigen::Index k = lo + 1; k < column; ++k) {
        ys[k] = left + (peak - left) * static_cast<double>(k - lo) / static_cast<double>(column - lo);
    }
    for (Eigen::Index k = column + 1; k < hi; ++k) {
        ys[k] = peak + (right - peak) * static_cast<double>(k - column) / static_cast<double>(hi - column);
    }
    ys[column] = peak;
    return PixelSeries(std::move(ys), ps.dims());
}

PixelSeries add_noise_step(const PixelSeries& ps, const NoiseSpec& spec, Rng& rng) {
    const auto column = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(ps.size())));
    const double amp = spec.pixel_sigma();
    const double delta = rng.uniform(-amp, amp);
    return apply_triangle(ps, column, delta, spec.half_width);
}

PerturbResult perturb_pixels(const PixelSeries& start, const PerturbOptions& options, double pixel_sigma,
                             int half_width, Rng& rng) {
    if (!(options.tolerance > 0.0)) throw InvalidArgument("perturb: tolerance must be > 0");
    if (options.max_steps < 0) throw InvalidArgument("perturb: max_steps must be >= 0");
    NoiseSpec spec;
    spec.sigma = pixel_sigma;
    spec.half_width = half_width;
    spec.validate();

    const auto initial = approx_entropy(start.ys(), options.params);
    if (!initial.defined()) {
        throw UnreachableTarget("unreachable-target: PAE of the starting chart is undefined", options.target,
                                std::nan(""));
    }
    if (options.target < *initial - options.tolerance) {
        throw UnreachableTarget("unreachable-target: target " + std::to_string(options.target) +
                                    " is below the starting PAE " + std::to_string(*initial) +
                                    " (noise cannot lower PAE)",
                                options.target, *initial);
    }

    PixelSeries current = start;
    double current_pae = *initial;
    const double upper = options.target + options.tolerance;
    int steps = 0;
    while ((steps < options.min_steps || std::abs(current_pae - options.target) > options.tolerance) &&
           steps < options.max_steps) {
        std::optional<PixelSeries> best;
        double best_pae = 0.0;
        for (int attempt = 0; attempt < std::max(1, options.retry_budget); ++attempt) {
            PixelSeries candidate = add_noise_step(current, spec, rng);
            const auto score = approx_entropy(candidate.ys(), options.params);
            if (!score.defined()) continue;
            if (*score <= upper) {
                best = std::move(candidate);
                best_pae = *score;
                break;
            }
            if (!best || std::abs(*score - options.target) < std::abs(best_pae - options.target)) {
                best = std::move(candidate);
                best_pae = *score;
            }
        }
        ++steps;
        if (best) {
            current = std::move(*best);
            current_pae = best_pae;
        }
    }
    const bool converged = std::abs(current_pae - options.target) <= options.tolerance;
    return {std::move(current), current_pae, steps, converged};
}

PerturbResult perturb_to_target_pae(const TimeSeries& series, const ChartDims& dims, const PerturbOptions& options,
                                    const NoiseSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    return perturb_pixels(rasterize(series, dims), options, spec.pixel_sigma(), spec.half_width, rng);
}

}  // namespace entrochart
