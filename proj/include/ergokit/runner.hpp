#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ergokit/config.hpp"

namespace ergo {

// One verdict line of the summary. Verdicts about a series always cite the
// CSV file they were derived from; re-running the trend rule on that file
// reproduces the verdict.
struct VerdictLine {
    std::string label;
    std::string file; // empty for verdicts not tied to a series
    std::string text; // PASS / FAIL / INCONCLUSIVE / ok / refused / ...
};

struct RunResult {
    int exit_code = 2;
    std::string id;
    std::string outcome; // pass | fail | inconclusive | refusal | violation | error
    std::vector<std::string> series_files;
    std::vector<VerdictLine> verdicts;
    std::string summary_path; // empty when nothing could be written
    std::string summary_text;
};

struct RunOptions {
    std::string out_dir;               // overrides the config's when nonempty
    std::optional<std::uint64_t> seed; // overrides the config's
    unsigned threads = 1;
};

// Executes the experiment the config names, writes one CSV per emitted series
// plus summary.txt (and witness.txt after an inequality violation) into the
// output directory. Exit code: 0 when the outcome matches the declared
// expectation, 1 on an inequality violation or an undeclared FAIL, 2 on a
// config error, 3 on an undeclared hypothesis refusal.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

// The randomized inequality trials (average-norm, triple-average, folding,
// quotient-bound), alternating between the line and the plane per trial.
// Violations dump a minimized witness and exit 1. Also reachable through
// run_experiment with kind "inequality-fuzz".
RunResult run_fuzz(const ExperimentConfig& cfg, const RunOptions& opt = {});

std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
std::string preset_text(const std::string& name); // throws config_error

} // namespace ergo
