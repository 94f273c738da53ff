#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctgca/errors.hpp"

namespace ctgca::cli {

// Command-line / configuration problems. dispatch() maps UsageError to exit
// code 2, any other ctgca::Error to exit 1, success to 0.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct PhantomArgs {
  std::string config_path;  // JSON CohortSpec (required)
  std::string out_dir;
  std::optional<std::uint64_t> seed;  // overrides master_seed
  std::optional<int> n;               // overrides n
  std::string command_line;           // recorded in the manifest
};

struct PipelineArgs {
  std::string scan_dir;
  std::string out_dir;
  std::string config_path;  // optional JSON RegistrationConfig
  std::string command_line;
};

struct TrainArgs {
  std::string features_path;
  std::string ratings_path;
  std::string out_dir;
  std::string config_path;             // optional JSON TrainConfig
  std::optional<std::uint64_t> seed;   // overrides config seed
  std::vector<double> lambda_grid;     // overrides config grid when nonempty
  std::string command_line;
};

struct ValidateArgs {
  std::string model_path;
  std::string features_path;
  std::string ratings_path;
  std::string ratings2_path;     // optional second-rater sheet
  std::string covariates_path;   // optional cohort.csv
  std::string split_path;        // optional split.json cross-check
  std::string out_dir;
  std::string command_line;
};

// Each returns the process exit code for non-usage outcomes (0, or 1 for
// "pipeline: every scan failed") and throws UsageError / ctgca::Error
// otherwise.
int run_phantom(const PhantomArgs& args);
int run_pipeline(const PipelineArgs& args);
int run_train(const TrainArgs& args);
int run_validate(const ValidateArgs& args);

// Full argv-level entry point: parses, dispatches, maps exceptions to exit
// codes and prints diagnostics to stderr.
int dispatch(int argc, const char* const* argv);
// Test-friendly wrapper: prepends a program name and calls dispatch.
int run_cli(const std::vector<std::string>& args);

}  // namespace ctgca::cli
