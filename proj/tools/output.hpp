#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

namespace knet::cli {

// %.17g, so every double survives a text round trip.
std::string fmt17(double v);

// Comma-separated table with one header row. Cells are either numbers
// (17 significant digits) or verbatim strings.
class Csv {
 public:
  explicit Csv(std::ostream& out) : out_(&out) {}
  explicit Csv(const std::filesystem::path& path);

  void header(const std::vector<std::string>& cols);
  Csv& cell(double v);
  Csv& cell(const std::string& s);
  Csv& cell(const char* s) { return cell(std::string(s)); }
  Csv& cell(int v) { return cell(std::to_string(v)); }
  Csv& cell(bool v) { return cell(std::string(v ? "true" : "false")); }
  void end_row();
  void row(const std::vector<double>& values);

 private:
  std::ofstream file_;
  std::ostream* out_;
  bool fresh_ = true;
};

// Collects what a run produced; written as manifest.json next to the CSVs.
struct Manifest {
  nlohmann::ordered_json doc;
  std::filesystem::path dir;

  Manifest(const std::filesystem::path& outDir, const std::string& subcommand, const std::vector<std::string>& argv);
  std::filesystem::path file(const std::string& name);  // registers an output
  void write() const;
};

// gnuplot script drawing log-log curves of the given columns of a CSV
// against its eps column, with reference slopes.
struct PlotSeries {
  std::string csv;
  int xcol = 1;
  int ycol = 2;
  std::string title;
  std::string filter;  // optional awk-free selection: rows whose first cell equals this
};
void write_loglog_script(const std::filesystem::path& path, const std::string& title, const std::string& ylabel,
                         const std::vector<PlotSeries>& series, const std::vector<double>& refSlopes);

}  // namespace knet::cli
