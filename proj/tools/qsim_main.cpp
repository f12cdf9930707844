#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "qsim/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"quasisimilarity conjugation toolkit"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "out";
    double tol = -1;
    long max_words = -1;
    long long seed = -1;
    int threads = -1;

    CLI::App* run = app.add_subcommand("run", "run a scenario file and write reports");
    run->add_option("file", scenario_path, "scenario JSON")->required();
    run->add_option("--tol", tol, "override the residual/cocycle tolerance");
    run->add_option("--max-words", max_words, "cap the Folner word budget");
    run->add_option("--seed", seed, "override the sampling seed");
    run->add_option("--threads", threads, "worker count (default from config)");
    run->add_option("--out", out_dir, "output directory (default: out)");

    std::string suite;
    long long vseed = 1;
    int vthreads = 1;
    CLI::App* verify = app.add_subcommand("verify", "run a built-in verification suite");
    verify->add_option("suite", suite, "metrics | filiform | cocycle | hislip | conjugation")
        ->required();
    verify->add_option("--seed", vseed, "sampling seed");
    verify->add_option("--threads", vthreads, "worker count");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        qsim::RunOverrides ov;
        if (tol >= 0) ov.tol = tol;
        if (max_words >= 0) ov.max_words = max_words;
        if (seed >= 0) ov.seed = static_cast<unsigned long>(seed);
        if (threads > 0) ov.threads = threads;
        qsim::RunResult result = qsim::run_scenario_file(scenario_path, ov);
        qsim::write_outputs(result, out_dir);
        std::cout << result.summary;
        std::cout << "report: " << (std::filesystem::path(out_dir) / "report.json").string() << "\n";
        return result.exit_code;
    }
    return qsim::verify_suite(suite, static_cast<unsigned long>(vseed), std::cout, vthreads);
}
