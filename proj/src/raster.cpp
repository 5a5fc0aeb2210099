#include "entrochart/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "entrochart/errors.hpp"

namespace entrochart {

void ChartDims::validate() const {
    if (width < 4 || height < 4) {
        throw InvalidArgument("chart dims must be at least 4x4, got " + to_string());
    }
}

ChartDims ChartDims::parse(const std::string& text) {
    const auto pos = text.find_first_of("xX");
    if (pos == std::string::npos) throw InvalidArgument("dims must look like WxH, got '" + text + "'");
    ChartDims dims;
    try {
        std::size_t used = 0;
        dims.width = std::stoi(text.substr(0, pos), &used);
        if (used != pos) throw std::invalid_argument("trailing");
        const auto rest = text.substr(pos + 1);
        dims.height = std::stoi(rest, &used);
        if (used != rest.size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
        throw InvalidArgument("dims must look like WxH, got '" + text + "'");
    }
    dims.validate();
    return dims;
}

PixelSeries::PixelSeries(Eigen::VectorXd ys, ChartDims dims) : ys_(std::move(ys)), dims_(dims) {
    dims_.validate();
    if (ys_.size() != dims_.width) {
        throw ValidationError("pixel series length " + std::to_string(ys_.size()) + " != chart width " +
                              std::to_string(dims_.width));
    }
    if (!ys_.allFinite() || ys_.minCoeff() < 0.0 || ys_.maxCoeff() > dims_.height) {
        throw ValidationError("pixel y values must lie in [0, height]");
    }
}

PixelSeries rasterize(const TimeSeries& series, const ChartDims& dims) {
    dims.validate();
    const double x0 = series.xs()[0];
    const double x1 = series.xs()[series.size() - 1];
    const double y0 = series.ys().minCoeff();
    const double y1 = series.ys().maxCoeff();
    const double height = dims.height;

    Eigen::VectorXd ys(dims.width);
    if (y1 == y0) {
        ys.setConstant(height / 2.0);
        return PixelSeries(std::move(ys), dims);
    }
    const double last = dims.width - 1;
    for (int c = 0; c < dims.width; ++c) {
        const double x = c == dims.width - 1 ? x1 : x0 + (x1 - x0) * (c / last);
        const double v = (series.interpolate(x) - y0) / (y1 - y0) * height;
        ys[c] = std::clamp(v, 0.0, height);
    }
    return PixelSeries(std::move(ys), dims);
}

namespace {

int gray_level(const std::string& color) {
    if (color.size() == 7 && color[0] == '#') {
        const auto channel = [&](int at) { return std::stoi(color.substr(at, 2), nullptr, 16); };
        try {
            const double lum = 0.299 * channel(1) + 0.587 * channel(3) + 0.114 * channel(5);
            return std::clamp(static_cast<int>(std::lround(lum)), 0, 255);
        } catch (const std::logic_error&) {
        }
    }
    if (color == "white") return 255;
    if (color == "black") return 0;
    throw InvalidArgument("color must be #rrggbb, 'black' or 'white', got '" + color + "'");
}

int to_row(double y, int height) {
    const double row = (height - y) * (height - 1) / static_cast<double>(height);
    return std::clamp(static_cast<int>(std::lround(row)), 0, height - 1);
}

}  // namespace

std::string render_svg(const PixelSeries& ps, const ChartStyle& style) {
    const auto& d = ps.dims();
    std::string out;
    out.reserve(64 + 20 * static_cast<std::size_t>(d.width));
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%d\" height=\"%d\" "
                  "viewBox=\"0 0 %d %d\">\n",
                  d.width, d.height, d.width, d.height);
    out += buf;
    out += "<rect width=\"100%\" height=\"100%\" fill=\"" + style.background + "\"/>\n";
    out += "<polyline fill=\"none\" stroke=\"" + style.line_color + "\" stroke-width=\"" +
           std::to_string(style.stroke_width) + "\" points=\"";
    for (Eigen::Index i = 0; i < ps.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", i + 0.5, d.height - ps.ys()[i]);
        out += buf;
    }
    out += "\"/>\n</svg>\n";
    return out;
}

std::string render_pgm(const PixelSeries& ps, const ChartStyle& style) {
    const auto& d = ps.dims();
    const auto bg = static_cast<unsigned char>(gray_level(style.background));
    const auto fg = static_cast<unsigned char>(gray_level(style.line_color));
    const int stroke = std::max(1, style.stroke_width);
    std::vector<unsigned char> pixels(static_cast<std::size_t>(d.width) * d.height, bg);

    const int lo = -(stroke - 1) / 2;
    const int hi = stroke / 2;
    const auto plot = [&](int x, int y) {
        for (int dy = lo; dy <= hi; ++dy) {
            for (int dx = lo; dx <= hi; ++dx) {
                const int px = x + dx;
                const int py = y + dy;
                if (px >= 0 && px < d.width && py >= 0 && py < d.height) {
                    pixels[static_cast<std::size_t>(py) * d.width + px] = fg;
                }
            }
        }
    };
    const auto line = [&](int x0, int y0, int x1, int y1) {
        const int dx = std::abs(x1 - x0);
        const int sx = x0 < x1 ? 1 : -1;
        const int dy = -std::abs(y1 - y0);
        const int sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        while (true) {
            plot(x0, y0);
            if (x0 == x1 && y0 == y1) break;
            const int e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y0 += sy;
            }
        }
    };

    int prev = to_row(ps.ys()[0], d.height);
    plot(0, prev);
    for (int c = 1; c < d.width; ++c) {
        const int row = to_row(ps.ys()[c], d.height);
        line(c - 1, prev, c, row);
        prev = row;
    }

    std::string out = "P5 " + std::to_string(d.width) + " " + std::to_string(d.height) + " 255\n";
    out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
    return out;
}

RenderedChart render_chart(const PixelSeries& ps, const ChartStyle& style) {
    return {render_svg(ps, style), render_pgm(ps, style)};
}

PixelSeries mask_series(const ChartDims& dims, Seed seed) {
    dims.validate();
    Rng rng(derive_seed(seed, 0x6d61736bULL));
    Eigen::VectorXd ys(dims.width);
    for (auto& y : ys) y = rng.uniform(0.0, dims.height);
    return PixelSeries(std::move(ys), dims);
}

RenderedChart render_mask(const ChartDims& dims, Seed seed, const ChartStyle& style) {
    return render_chart(mask_series(dims, seed), style);
}

}  // namespace entrochart
