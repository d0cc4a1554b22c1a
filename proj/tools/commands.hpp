#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "output.hpp"

namespace knet::cli {

// Exit codes of the command-line driver.
enum ExitCode { kOk = 0, kConfigError = 2, kNumericalFailure = 3 };

// Each command reads a validated config and writes into the manifest's
// directory. Failed checks throw NumericalFailure.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void cmd_quadrature(const RunConfig& c, Manifest* m);  // m == nullptr: CSV to stdout
void cmd_check(const RunConfig& c, Manifest* m);
void cmd_simulate(const RunConfig& c, Manifest& m);
void cmd_asymptotic(const RunConfig& c, Manifest& m);
void cmd_converge(const RunConfig& c, Manifest& m);
void cmd_residual(const RunConfig& c, Manifest& m);

// Reruns the command recorded in a manifest into another directory.
void replay(const std::string& manifestPath, const std::string& outDir);

int run(const std::vector<std::string>& args);

}  // namespace knet::cli
