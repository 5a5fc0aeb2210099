#include <fstream>

#include "json.hpp"

#include "entrochart/studio.hpp"

namespace entrochart {

namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json params_json(const EntropyParams& params) {
    return {{"m", params.m}, {"r", params.r}, {"convention", std::string(to_string(params.convention))}};
}

json trial_json(const StimulusSet& set, const TrialManifest& trial) {
    json charts = json::array();
    for (const auto& chart : trial.charts) {
        charts.push_back({{"role", chart.role},
                          {"target_pae", optional_number(chart.target_pae)},
                          {"pae", chart.pae},
                          {"svg", chart.svg_path},
                          {"pgm", chart.pgm_path}});
    }
    return {{"schema_version", 1},
            {"trial_id", trial.trial_id},
            {"experiment", to_string(set.experiment)},
            {"presentation_index", trial.presentation_index},
            {"base", trial.base},
            {"initial_pae", optional_number(trial.initial_pae)},
            {"delta", optional_number(trial.delta)},
            {"sign", trial.sign ? json(*trial.sign) : json(nullptr)},
            {"pae_levels", trial.pae_levels},
            {"shape", trial.shape.empty() ? json(nullptr) : json(trial.shape)},
            {"glance_ms", trial.glance_ms},
            {"pause_ms", trial.pause_ms},
            {"answer_key", trial.answer_key},
            {"charts", charts},
            {"steps", trial.steps}};
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

std::string manifest_json(const StimulusSet& set) {
    json trials = json::array();
    for (const auto& trial : set.trials) trials.push_back(trial_json(set, trial));
    return trials.dump(2) + "\n";
}

std::string design_json(const StimulusSet& set) {
    json cells = json::array();
    for (const auto& cell : set.cells) {
        json c{{"index", cell.index},
               {"conditions", cell.conditions},
               {"status", cell.status},
               {"trial_ids", cell.trial_ids}};
        if (!cell.reason.empty()) c["reason"] = cell.reason;
        cells.push_back(std::move(c));
    }
    const json design{{"schema_version", 1},
                      {"experiment", to_string(set.experiment)},
                      {"set_id", set.set_id},
                      {"master_seed", set.master_seed},
                      {"dims", set.dims.to_string()},
                      {"params", params_json(set.params)},
                      {"trial_count", set.trials.size()},
                      {"cells", cells}};
    return design.dump(2) + "\n";
}

void write_stimulus_set(const StimulusSet& set, const std::filesystem::path& outdir) {
    for (const auto& file : set.files) write_file(outdir / file.path, file.bytes);
    write_file(outdir / set.set_id / "manifest.json", manifest_json(set));
    write_file(outdir / set.set_id / "design.json", design_json(set));
}

}  // namespace entrochart
