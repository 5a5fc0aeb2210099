#pragma once

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "entrochart/rng.hpp"

namespace entrochart {

/// Ordered (x, y) samples in data units.
///
/// Invariants (checked by the constructor): at least two samples, equal
/// lengths, xs strictly increasing.
class TimeSeries {
public:
    TimeSeries(Eigen::VectorXd xs, Eigen::VectorXd ys);

    /// xs synthesized as 0, 1, ..., n-1.
    static TimeSeries from_values(Eigen::VectorXd ys);

    const Eigen::VectorXd& xs() const noexcept { return xs_; }
    const Eigen::VectorXd& ys() const noexcept { return ys_; }
    Eigen::Index size() const noexcept { return ys_.size(); }

    /// Population standard deviation of ys.
    double y_stddev() const;
    double y_range() const { return ys_.maxCoeff() - ys_.minCoeff(); }

    /// Value of the piecewise-linear polyline through the samples at x.
    /// x outside [xs.front, xs.back] is clamped.
    double interpolate(double x) const;

private:
    Eigen::VectorXd xs_;
    Eigen::VectorXd ys_;
};

enum class BaseFunctionKind {
    Linear,
    Cosine,
    Gaussian,
    Poly3,
    IncreasingTrend,
    DecreasingTrend,
    Peak,
    Trough,
};

inline constexpr std::array<BaseFunctionKind, 4> kExperimentBases{
    BaseFunctionKind::Linear, BaseFunctionKind::Cosine, BaseFunctionKind::Gaussian, BaseFunctionKind::Poly3};

inline constexpr std::array<BaseFunctionKind, 4> kShapeBases{
    BaseFunctionKind::IncreasingTrend, BaseFunctionKind::DecreasingTrend, BaseFunctionKind::Peak,
    BaseFunctionKind::Trough};

std::string_view to_string(BaseFunctionKind kind);
std::optional<BaseFunctionKind> parse_base_function(std::string_view name);

/// Noiseless base curve sampled at n_samples evenly spaced points (xs = 0..n-1).
///
/// Shapes: Linear is a ramp; Cosine spans two full periods; Gaussian is one
/// bump centered on the middle sample (sd = 1/4 of the half-width); Poly3 is
/// t^3 - 0.6 t on [-1, 1] (extrema at +/- sqrt(0.2)). Trends reuse the ramp,
/// Peak/Trough reuse the bump. `seed` is accepted for a uniform signature;
/// every current kind is deterministic.
///
/// Throws InvalidArgument when n_samples < 2.
TimeSeries generate_base(BaseFunctionKind kind, Eigen::Index n_samples, Seed seed = 0);

enum class SeriesFormat { Csv, Json };

/// CSV: optional header, one (`y`) or two (`x,y`) columns.
/// JSON: {"xs": [...] (optional), "ys": [...]}.
TimeSeries parse_series(std::string_view text, SeriesFormat format);
TimeSeries load_series(const std::filesystem::path& path, std::optional<SeriesFormat> format = std::nullopt);

/// Two-column "x,y" CSV with a header, round-trippable through load_series.
std::string to_csv(const TimeSeries& series);

}  // namespace entrochart
