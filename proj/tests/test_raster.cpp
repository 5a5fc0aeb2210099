#include "doctest.h"

#include <cmath>
#include <regex>
#include <set>

#include "entrochart/entropy.hpp"
#include "entrochart/errors.hpp"
#include "entrochart/raster.hpp"
#include "oracles.hpp"

using namespace entrochart;

TEST_CASE("chart dims") {
    const auto d = ChartDims::parse("640x480");
    CHECK(d.width == 640);
    CHECK(d.height == 480);
    CHECK(d.to_string() == "640x480");
    CHECK_THROWS_AS(ChartDims::parse("640"), InvalidArgument);
    CHECK_THROWS_AS(ChartDims::parse("axb"), InvalidArgument);
    CHECK_THROWS_AS(ChartDims::parse("3x200"), InvalidArgument);
    CHECK_THROWS_AS((ChartDims{300, 2}.validate()), InvalidArgument);
}

TEST_CASE("pixel series bounds") {
    CHECK_THROWS((PixelSeries(Eigen::VectorXd::Zero(5), ChartDims{4, 4})));
    CHECK_THROWS((PixelSeries(Eigen::VectorXd::Constant(4, 5.0), ChartDims{4, 4})));
    CHECK_NOTHROW((PixelSeries(Eigen::VectorXd::Constant(4, 4.0), ChartDims{4, 4})));
}

TEST_CASE("a straight line maps affinely onto the columns") {
    const TimeSeries line(Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 1));
    const auto ps = rasterize(line, {300, 200});
    REQUIRE(ps.size() == 300);
    for (int i = 0; i < 300; ++i) CHECK(ps.ys()[i] == doctest::Approx(200.0 * i / 299).epsilon(1e-12));
}

TEST_CASE("a constant series sits mid-chart") {
    const auto ps = rasterize(TimeSeries::from_values(Eigen::Vector3d(5, 5, 5)), {300, 200});
    CHECK((ps.ys().array() == 100.0).all());
}

TEST_CASE("columns agree with a brute-force polyline evaluation") {
    const int n = 1000;
    std::vector<double> xs(n);
    std::vector<double> ys(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = 0.37 * i + 0.001 * i * i;
        ys[i] = std::sin(xs[i] / 17.0) + 0.3 * std::cos(xs[i] / 3.0);
    }
    const TimeSeries s(Eigen::Map<Eigen::VectorXd>(xs.data(), n), Eigen::Map<Eigen::VectorXd>(ys.data(), n));
    const double lo = *std::min_element(ys.begin(), ys.end());
    const double hi = *std::max_element(ys.begin(), ys.end());
    for (ChartDims dims : {ChartDims{300, 200}, ChartDims{1500, 90}}) {
        const auto ps = rasterize(s, dims);
        double worst = 0.0;
        for (int c = 0; c < dims.width; ++c) {
            const double x = xs.front() + (xs.back() - xs.front()) * c / (dims.width - 1);
            const double expected = (oracle::polyline(xs, ys, x) - lo) / (hi - lo) * dims.height;
            worst = std::max(worst, std::abs(ps.ys()[c] - expected));
        }
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("column count never depends on the sample count") {
    for (int n : {2, 3, 50, 300, 4000}) {
        const auto ps = rasterize(generate_base(BaseFunctionKind::Cosine, n), {300, 200});
        CHECK(ps.size() == 300);
        CHECK(ps.ys().minCoeff() >= 0.0);
        CHECK(ps.ys().maxCoeff() <= 200.0);
    }
}

TEST_CASE("affine rescaling of the data leaves the raster unchanged") {
    const auto s = generate_base(BaseFunctionKind::Poly3, 420);
    const TimeSeries scaled(s.xs(), (s.ys().array() * 37.5 - 1e3).matrix());
    const auto a = rasterize(s, {300, 200});
    const auto b = rasterize(scaled, {300, 200});
    CHECK((a.ys() - b.ys()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("rounding pixel heights barely moves PAE on clean curves") {
    for (auto kind : kExperimentBases) {
        const auto ps = rasterize(generate_base(kind, 300), {300, 200});
        const PixelSeries rounded(ps.ys().array().round().matrix(), ps.dims());
        CHECK(std::abs(*pae(ps) - *pae(rounded)) < 0.02);
    }
}

TEST_CASE("svg output") {
    const PixelSeries flat(Eigen::VectorXd::Constant(10, 7.0), {10, 20});
    const auto svg = render_svg(flat);
    CHECK(svg.find("<polyline") != std::string::npos);
    const std::regex point(R"(([0-9.]+),([0-9.]+))");
    std::set<std::string> ys;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), point); it != std::sregex_iterator(); ++it) {
        ys.insert((*it)[2]);
    }
    CHECK(ys.size() == 1);
    CHECK(*ys.begin() == "13.000");
    CHECK(render_svg(flat) == svg);
}

TEST_CASE("pgm output") {
    const auto ps = rasterize(generate_base(BaseFunctionKind::Gaussian, 300), {300, 200});
    const auto pgm = render_pgm(ps);
    const std::string header = "P5 300 200 255\n";
    REQUIRE(pgm.size() == header.size() + 300 * 200);
    CHECK(pgm.compare(0, header.size(), header) == 0);
    CHECK(render_pgm(ps) == pgm);
    // Every column carries at least one stroke pixel.
    for (int c = 0; c < 300; ++c) {
        bool inked = false;
        for (int r = 0; r < 200; ++r) inked |= static_cast<unsigned char>(pgm[header.size() + r * 300 + c]) == 0;
        CHECK(inked);
    }
    ChartStyle gray;
    gray.line_color = "#808080";
    gray.stroke_width = 3;
    CHECK(render_pgm(ps, gray) != pgm);
}

TEST_CASE("masks") {
    const ChartDims dims{300, 200};
    const auto a = render_mask(dims, 5);
    CHECK(render_mask(dims, 5).pgm == a.pgm);
    CHECK(render_mask(dims, 5).svg == a.svg);
    CHECK(render_mask(dims, 6).pgm != a.pgm);
    for (Seed s = 0; s < 10; ++s) CHECK(*pae(mask_series(dims, s)) >= 1.0);
}
