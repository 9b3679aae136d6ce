#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "uper/config.hpp"

namespace uper {

struct CellOutcome {
    std::string scheme;  // scheme, or combo tag for the bias study
    std::int64_t seed = 0;
    bool ok = false;
    std::string error;
    std::string metric_name;
    double metric_value = 0.0;
};

// Executes every (scheme x seed) cell of the experiment, seed-parallel over
// `workers` threads, and writes CSVs, the resolved config echo, and
// summary.json into out_dir. Output bytes depend only on (config, seeds).
// Returns 0 when every cell succeeded, 1 otherwise (partial results are
// kept and failures listed in summary.json).
int run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                   int workers, std::ostream& log);

// Full command-line front end; returns the process exit code
// (0 ok, 1 run failure, 2 config error).
int cli_main(int argc, const char* const* argv);

}  // namespace uper
