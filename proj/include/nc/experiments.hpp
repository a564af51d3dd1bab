#pragma once

#include <string>
#include <vector>

#include "nc/config.hpp"
#include "nc/report.hpp"

namespace nc {

struct RunResult {
    std::string experiment;
    json summary;
    CsvTable csv;
    std::vector<Check> checks;
};

std::string version();

// seed, version and config hash.
json reproducibility(const Config& cfg);

// Runs one experiment (or, for "suite", every experiment with its suite settings).
RunResult run_experiment(const Config& cfg);

// Settings each experiment uses inside the suite, layered over the caller's seed and sizes.
Config suite_config(const Config& base, const std::string& experiment);

// Writes <out_dir>/<csv> and <out_dir>/<json>; returns the paths written.
std::vector<std::string> write_artifacts(const RunResult& result, const Config& cfg, const std::string& out_dir);

std::string json_text(const json& j);

}  // namespace nc
