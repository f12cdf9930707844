#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

#include "qsim/conjugator.hpp"
#include "qsim/filiform.hpp"

namespace qsim {

using json = nlohmann::ordered_json;

// Input problems carry exit code 2; uncertified results exit 1.
struct ScenarioError : std::runtime_error {
    explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

struct RunOverrides {
    std::optional<double> tol;
    std::optional<long> max_words;
    std::optional<unsigned long> seed;
    std::optional<int> threads;
};

struct RunResult {
    int exit_code = 0;        // 0 certified, 1 uncertified, 2 input error
    json report;              // written to report.json
    std::string summary;      // human-readable, also written to summary.txt
    std::string trace_csv;    // written to trace.csv
};

// Parsers (exposed for tests and the Python bindings).
SampledSpace load_space(const json& j);
// Normal-form maps: {"a1": "num/den", "a2": ..., "p": [...], "h": {"breaks": [...], "coeffs": [[...], ...]}}.
json normal_form_to_json(const NormalForm& F);
NormalForm normal_form_from_json(const json& j);
HField load_hfield(const json& j, int target_dim);
SampleMap load_sigma(const json& j, const SampledSpace& Y);
GroupSpec load_group(const json& j, const SampledSpace& Y, int active_dim);
std::vector<std::vector<Word>> load_folner(const json& j, const GroupSpec& spec);

// Executes the scenario's pipeline; never throws for input errors (exit 2 with
// diagnostics in the summary instead).
RunResult run_scenario_json(const json& config, const RunOverrides& overrides = {});
RunResult run_scenario_file(const std::filesystem::path& path, const RunOverrides& overrides = {});

// Writes report.json, trace.csv and summary.txt under out_dir.
void write_outputs(const RunResult& result, const std::filesystem::path& out_dir);

// Built-in verification suites: metrics, filiform, cocycle, hislip, conjugation.
// Prints one pass/fail line per battery to `out`; returns 0 (pass), 1 (fail),
// 2 (unknown suite).
int verify_suite(const std::string& name, unsigned long seed, std::ostream& out, int threads = 1);

}  // namespace qsim
