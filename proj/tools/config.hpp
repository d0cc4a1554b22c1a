#pragma once

#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

namespace knet::cli {

// Bad input of any kind; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every knob a subcommand can read. Defaults match the library defaults;
// an INI file and then command-line flags override them.
struct RunConfig {
  // [system]
  int N = 3;
  int edges = 3;
  std::string collision = "q1";
  std::string boundary = "network";  // b1 | b2 | network
  double eps = 0.1;
  int order = 3;
  std::string caseName;  // asymptotic cases; empty when unused

  // [grid]
  double T = 1.0;
  double cfl = 0.9;
  double dx = 0.0;  // 0: eps * dxPerEps
  double dxPerEps = 1.0 / 16.0;
  double L = 0.0;   // 0: support end + max speed * T + 1
  std::vector<double> snapshots;  // empty: 0, T/2, T

  // [initial]
  double center = 1.5;
  double width = 1.0;
  std::vector<double> amplitude;  // empty: unit first moment
  bool correction = true;
  std::vector<double> edgeAmplitudes;  // empty: 1, 1/2, 1/4, ...
  std::string profile = "bump";  // bump | zero-mode (asymptotic audits only)

  // [study]
  std::vector<double> epsList{0.1, 0.05, 0.025, 0.0125};
  int threads = 0;  // 0: KINETIC_NET_THREADS or hardware
  bool richardson = true;
  bool gnuplot = false;

  nlohmann::ordered_json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

// Reads `key = value` lines grouped in [system], [grid], [initial] and
// [study]. Lists are separated by commas or blanks. Unknown sections or keys
// throw ConfigError.
void load_ini(const std::string& path, RunConfig& cfg);
void load_ini_text(const std::string& text, RunConfig& cfg);

// Checks the ranges every subcommand relies on.
void validate(const RunConfig& cfg);

std::vector<double> parse_list(const std::string& s);

}  // namespace knet::cli
