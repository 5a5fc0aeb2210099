#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"

#include "entrochart/errors.hpp"
#include "entrochart/studio.hpp"
#include "oracles.hpp"

using namespace entrochart;
using nlohmann::json;

namespace {

void check_identical(const StimulusSet& a, const StimulusSet& b) {
    CHECK(manifest_json(a) == manifest_json(b));
    CHECK(design_json(a) == design_json(b));
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i) {
        CHECK(a.files[i].path == b.files[i].path);
        CHECK(a.files[i].bytes == b.files[i].bytes);
    }
}

/// Every chart with a target must re-score within tolerance of it.
void check_targets(const StimulusSet& set, double tolerance = kStimulusTolerance) {
    for (const auto& trial : set.trials) {
        for (const auto& chart : trial.charts) {
            const double rescored = *pae(chart.series, set.params);
            CHECK(rescored == chart.pae);
            if (chart.target_pae) CHECK(std::abs(rescored - *chart.target_pae) <= tolerance);
        }
    }
}

void check_presentation(const StimulusSet& set) {
    std::vector<int> seen;
    for (const auto& t : set.trials) seen.push_back(t.presentation_index);
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == static_cast<int>(i));
}

TimeSeries noisy_series(Seed seed, int levels = 60, ChartDims dims = {300, 200}) {
    return noise_trajectory(BaseFunctionKind::Cosine, dims, {levels}, 1, seed).front().to_series();
}

}  // namespace

TEST_CASE("experiment one on a small grid") {
    Exp1Options opts;
    opts.replicates = 3;
    const auto report = run_experiment1(opts);
    REQUIRE(report.entries.size() == 4);
    for (std::size_t b = 0; b < 4; ++b) {
        const auto& e = report.entries[b];
        CHECK(e.base == kExperimentBases[b]);
        CHECK(e.levels.size() + static_cast<std::size_t>(e.undefined) == opts.levels.size() * 3);
        CHECK(e.fit.slope > 0.0);
        // Level 0 charts are the clean curve.
        for (std::size_t k = 0; k < e.levels.size(); ++k) {
            if (e.levels[k] == 0.0) CHECK(e.pae[k] == e.clean_pae);
        }
    }
    opts.replicates = 2;
    CHECK_THROWS_AS(run_experiment1(opts), InvalidArgument);
    opts.replicates = 3;
    opts.levels = {0, 10, 20};
    CHECK_THROWS_AS(run_experiment1(opts), InvalidArgument);
}

TEST_CASE("experiment one is stable in the replicate count") {
    Exp1Options five;
    five.seed = 9;
    Exp1Options ten = five;
    ten.replicates = 10;
    const auto a = run_experiment1(five);
    const auto b = run_experiment1(ten);
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(a.entries[k].fit.r_squared - b.entries[k].fit.r_squared) < 0.05);
}

TEST_CASE("calibration bookkeeping") {
    CalibrationOptions opts;
    opts.m_grid = {2};
    opts.r_grid = {20};
    opts.replicates = 1;
    opts.dims_list = {{300, 200}};
    const auto one = calibrate_params(opts);
    REQUIRE(one.size() == 1);
    CHECK(one[0].rank == 1);
    CHECK(one[0].mean_correlation > 0.5);

    opts.m_grid = {1, 2};
    opts.r_grid = {2, 20};
    const auto rows = calibrate_params(opts);
    CHECK(rows.size() <= 4);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!rows[i].excluded && !rows[i - 1].excluded) {
            CHECK(rows[i].mean_correlation <= rows[i - 1].mean_correlation);
        }
        if (!rows[i - 1].excluded) continue;
        CHECK(rows[i].excluded);
    }
    opts.m_grid.clear();
    CHECK_THROWS_AS(calibrate_params(opts), InvalidArgument);
}

TEST_CASE("lineup sets") {
    const auto levels = default_lineup_levels();
    const auto set = generate_lineup_set(BaseFunctionKind::Gaussian, levels, 21);
    REQUIRE(set.trials.size() == 1);
    const auto& trial = set.trials[0];
    REQUIRE(trial.charts.size() == 8);
    CHECK(set.files.size() == 16);
    check_targets(set);

    std::size_t hi = 0;
    std::size_t lo = 0;
    std::set<double> targets;
    for (std::size_t k = 0; k < 8; ++k) {
        if (trial.charts[k].pae > trial.charts[hi].pae) hi = k;
        if (trial.charts[k].pae < trial.charts[lo].pae) lo = k;
        targets.insert(*trial.charts[k].target_pae);
    }
    CHECK(trial.answer_key.at("most") == trial.charts[hi].role);
    CHECK(trial.answer_key.at("least") == trial.charts[lo].role);
    CHECK(targets.size() == 8);
    check_identical(set, generate_lineup_set(BaseFunctionKind::Gaussian, levels, 21));
    CHECK(manifest_json(set) != manifest_json(generate_lineup_set(BaseFunctionKind::Gaussian, levels, 22)));
}

TEST_CASE("lineups from a long real series") {
    // A long series whose noise grows along x gives windows of every complexity.
    const int n = 6000;
    Eigen::VectorXd ys(n);
    Rng rng(4);
    for (int i = 0; i < n; ++i) ys[i] = std::sin(i / 40.0) + (i / double(n)) * 0.6 * rng.uniform(-1, 1);
    const auto series = TimeSeries::from_values(ys);
    const auto set = generate_lineup_from_series(series, {0.1, 0.2, 0.3}, 2, {}, 300, 25);
    REQUIRE(set.trials.size() == 1);
    for (const auto& chart : set.trials[0].charts) CHECK(std::abs(chart.pae - *chart.target_pae) <= 0.03);
    CHECK_THROWS_AS(generate_lineup_from_series(series, {3.0}, 2, {}, 300, 25), UnreachableTarget);
    CHECK_THROWS_AS(generate_lineup_from_series(series, {0.1}, 2, {}, 9000), InvalidArgument);
}

TEST_CASE("find-the-difference pairs") {
    const auto set = generate_diff_pair(BaseFunctionKind::Linear, 0.09, 0.06, 5);
    REQUIRE(set.trials.size() == 1);
    const auto& t = set.trials[0];
    REQUIRE(t.charts.size() == 4);
    CHECK(t.charts[0].role == "initial");
    CHECK(t.charts[1].role == "mask");
    CHECK(t.glance_ms == 200);
    CHECK(t.pause_ms == 200);
    check_targets(set);

    const auto& key = t.answer_key.at("initial");
    const auto& alt_role = t.answer_key.at("alternative");
    for (const auto& c : t.charts) {
        if (c.role == key) CHECK(c.series.ys() == t.charts[0].series.ys());
        if (c.role == alt_role) {
            CHECK(c.pae >= 0.135);
            CHECK(c.pae <= 0.165);
        }
    }
    check_identical(set, generate_diff_pair(BaseFunctionKind::Linear, 0.09, 0.06, 5));

    SUBCASE("negative deltas put the initial above the alternative") {
        const auto neg = generate_diff_pair(BaseFunctionKind::Cosine, 0.18, -0.09, 6);
        const auto& nt = neg.trials[0];
        double alt = 0.0;
        for (const auto& c : nt.charts) {
            if (c.role == nt.answer_key.at("alternative")) alt = c.pae;
        }
        CHECK(alt < nt.charts[0].pae);
        CHECK(nt.sign == -1);
        check_targets(neg);
    }
    CHECK_THROWS_AS(generate_diff_pair(BaseFunctionKind::Linear, 0.09, 0.0, 5), InvalidArgument);
    CHECK_THROWS_AS(generate_diff_pair(BaseFunctionKind::Linear, 0.045, -0.12, 5), UnreachableTarget);
}

TEST_CASE("find-the-difference study marks unreachable cells") {
    const auto set = generate_diff_study({BaseFunctionKind::Linear, BaseFunctionKind::Poly3}, {0.045, 0.18},
                                         {0.015, 0.12}, 1, 3);
    CHECK(set.cells.size() == 2 * 2 * 2 * 2);
    int unreachable = 0;
    for (const auto& cell : set.cells) {
        if (cell.status == "unreachable") {
            ++unreachable;
            CHECK(cell.trial_ids.empty());
            CHECK(cell.reason.find("unreachable-target") != std::string::npos);
        } else {
            CHECK(cell.trial_ids.size() == 1);
        }
    }
    // 0.045 - 0.12 is below every clean curve.
    CHECK(unreachable >= 2);
    CHECK(set.trials.size() == set.cells.size() - static_cast<std::size_t>(unreachable));
    check_presentation(set);
    check_targets(set);
}

TEST_CASE("shape identification trials") {
    const std::vector<BaseFunctionKind> shapes(kShapeBases.begin(), kShapeBases.end());
    const auto set = generate_shape_trials(shapes, {0.2, 0.4, 0.8, 1.2}, 5, 8);
    CHECK(set.trials.size() == 80);
    CHECK(set.cells.size() == 16);
    std::map<std::string, int> answers;
    for (const auto& t : set.trials) {
        ++answers[t.answer_key.at("shape")];
        CHECK(t.glance_ms == 500);
        CHECK(t.shape == t.base);
        REQUIRE(t.charts.size() == 1);
        if (t.pae_levels.front() == 0.2) CHECK(std::abs(t.charts[0].pae - 0.2) <= 0.015);
    }
    CHECK(answers.size() == 4);
    for (const auto& [shape, count] : answers) CHECK(count == 20);
    check_targets(set);
    check_presentation(set);
    CHECK_THROWS_AS(generate_shape_trials({BaseFunctionKind::Cosine}, {0.2}, 1, 8), InvalidArgument);
}

TEST_CASE("glance sweep") {
    const auto set = generate_glance_sweep({50, 100, 200, 2000}, {0.045, 0.09, 0.18}, {0.015, 0.06, 0.24}, 1, 12);
    CHECK(set.cells.size() == 72);
    for (const auto& t : set.trials) {
        CHECK(t.pause_ms == 0);
        CHECK(t.base == "linear");
    }
    check_targets(set);
    check_identical(set, generate_glance_sweep({50, 100, 200, 2000}, {0.045, 0.09, 0.18}, {0.015, 0.06, 0.24}, 1, 12));
}

TEST_CASE("manifest and files on disk") {
    StimulusOptions opts;
    opts.set_id = "demo";
    const auto set = generate_diff_study({BaseFunctionKind::Linear}, {0.09}, {0.03}, 2, 4, opts);
    const auto manifest = json::parse(manifest_json(set));
    REQUIRE(manifest.is_array());
    CHECK(manifest.size() == 4);
    const std::regex name(R"(demo/t\d{4}_(initial|mask|optA|optB|chart\d*)\.(svg|pgm))");
    for (const auto& trial : manifest) {
        CHECK(trial.at("schema_version") == 1);
        CHECK(trial.at("experiment") == "diff");
        for (const auto& chart : trial.at("charts")) {
            CHECK(std::regex_match(chart.at("svg").get<std::string>(), name));
            CHECK(std::regex_match(chart.at("pgm").get<std::string>(), name));
        }
    }
    const auto design = json::parse(design_json(set));
    CHECK(design.at("master_seed") == 4);
    CHECK(design.at("cells").size() == 2);

    const auto dir = std::filesystem::temp_directory_path() / "entrochart_test_manifest";
    std::filesystem::remove_all(dir);
    write_stimulus_set(set, dir);
    CHECK(std::filesystem::exists(dir / "demo" / "manifest.json"));
    for (const auto& f : set.files) {
        std::ifstream in(dir / f.path, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        CHECK(buf.str() == f.bytes);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("moving average") {
    const auto s = TimeSeries::from_values(Eigen::Vector4d(0, 3, 6, 3));
    const auto avg = moving_average(s, 3);
    CHECK(avg.ys()[0] == 1.5);
    CHECK(avg.ys()[1] == 3.0);
    CHECK(avg.ys()[2] == 4.0);
    CHECK(avg.ys()[3] == 4.5);
    CHECK(moving_average(s, 1).ys() == s.ys());
    CHECK_THROWS_AS(moving_average(s, 2), InvalidArgument);
}

TEST_CASE("smoothing toward a target") {
    const auto clean = generate_base(BaseFunctionKind::Linear, 300);
    const auto same = smooth_to_pae(clean, {300, 200}, 0.5, 9);
    CHECK(same.window == 1);
    CHECK(same.reached);
    CHECK(same.series.ys() == clean.ys());

    const auto u = oracle::uniform_series(300, 0, 200, 7);
    const auto noise = TimeSeries::from_values(Eigen::Map<const Eigen::VectorXd>(u.data(), 300));
    const auto smooth = smooth_to_pae(noise, {300, 200}, 0.2, 61);
    CHECK(smooth.reached);
    CHECK(smooth.window > 1);
    CHECK(smooth.achieved_pae <= 0.2);

    const auto stuck = smooth_to_pae(noise, {300, 200}, -1.0, 5);
    CHECK_FALSE(stuck.reached);
    CHECK_THROWS_AS(smooth_to_pae(noise, {300, 200}, 0.2, 1), InvalidArgument);

    int steps = 0;
    int non_increasing = 0;
    for (Seed s = 0; s < 20; ++s) {
        const auto series = noisy_series(s, 200);
        double prev = *pae(series);
        for (int w = 3; w <= 21; w += 2) {
            const double next = *pae(moving_average(series, w));
            ++steps;
            non_increasing += next <= prev;
            prev = next;
        }
    }
    CHECK(static_cast<double>(non_increasing) / steps >= 0.95);
}

TEST_CASE("aspect sweep") {
    // 150 samples: every width shows all of the data.
    const auto series = noisy_series(31, 40, {150, 200});
    const auto widths = aspect_sweep(series, {{150, 200}, {300, 200}, {600, 200}});
    REQUIRE(widths.size() == 3);
    CHECK(widths[0].dims.width == 600);
    CHECK(widths[1].dims.width == 300);
    CHECK(widths[2].dims.width == 150);
    CHECK(*widths[0].score < *widths[1].score);
    CHECK(*widths[1].score < *widths[2].score);

    const auto heights = aspect_sweep(series, {{300, 100}, {300, 200}, {300, 400}});
    CHECK(heights[0].dims.height == 100);
    CHECK(heights[1].dims.height == 200);
    CHECK(heights[2].dims.height == 400);
    CHECK(*heights[0].score < *heights[1].score);
    CHECK(*heights[1].score < *heights[2].score);
    CHECK(aspect_sweep(series, {{300, 200}}).size() == 1);
}
