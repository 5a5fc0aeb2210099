#pragma once

#include <Eigen/Core>

#include <string>

#include "entrochart/rng.hpp"
#include "entrochart/series.hpp"

namespace entrochart {

/// Chart resolution in pixels. Both sides must be >= 4.
struct ChartDims {
    int width = 300;
    int height = 200;

    void validate() const;
    /// Parses "WxH", e.g. "300x200".
    static ChartDims parse(const std::string& text);
    std::string to_string() const { return std::to_string(width) + "x" + std::to_string(height); }
    friend bool operator==(const ChartDims&, const ChartDims&) = default;
};

/// One real-valued y per pixel column, in pixel units measured upward from the
/// chart bottom: ys.size() == dims.width and 0 <= ys[i] <= dims.height.
class PixelSeries {
public:
    PixelSeries(Eigen::VectorXd ys, ChartDims dims);

    const Eigen::VectorXd& ys() const noexcept { return ys_; }
    const ChartDims& dims() const noexcept { return dims_; }
    Eigen::Index size() const noexcept { return ys_.size(); }

    /// Pixel columns as data: xs = 0..N-1.
    TimeSeries to_series() const { return TimeSeries::from_values(ys_); }

private:
    Eigen::VectorXd ys_;
    ChartDims dims_;
};

/// Maps [min xs, max xs] onto columns 0..width-1 and [min ys, max ys] onto
/// [0, height]; each column takes the polyline value at its x position. A
/// constant series maps to height / 2.
PixelSeries rasterize(const TimeSeries& series, const ChartDims& dims);

struct ChartStyle {
    std::string line_color = "#000000";
    std::string background = "#ffffff";
    int stroke_width = 1;
};

struct RenderedChart {
    std::string svg;
    std::string pgm;  ///< binary P5, maxval 255
};

std::string render_svg(const PixelSeries& ps, const ChartStyle& style = {});
/// Bresenham polyline, no anti-aliasing; byte-deterministic.
std::string render_pgm(const PixelSeries& ps, const ChartStyle& style = {});
RenderedChart render_chart(const PixelSeries& ps, const ChartStyle& style = {});

/// Information-free, chart-like high-entropy polyline (i.i.d. uniform columns).
PixelSeries mask_series(const ChartDims& dims, Seed seed);
RenderedChart render_mask(const ChartDims& dims, Seed seed, const ChartStyle& style = {});

}  // namespace entrochart
