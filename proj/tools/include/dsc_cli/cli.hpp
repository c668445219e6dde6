#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dsc/trainer.hpp"

namespace dsc::cli {

enum ExitCode : int { Ok = 0, Usage = 1, DataError = 2, RuntimeError = 3 };

/// Everything a train run needs; written to <out>/config.json before the
/// run starts.
struct RunConfig {
    TrainConfig train;
    std::string data;
};

std::string run_config_to_json(const RunConfig& config);
/// Fields absent from the JSON keep the values already in `base`.
RunConfig run_config_from_json(const std::string& text, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});

/// Exit code for a library error.
int exit_code_for(const std::exception& e);

/// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace dsc::cli
