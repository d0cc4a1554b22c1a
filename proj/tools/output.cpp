#include "output.hpp"

#include <cstdio>
#include <stdexcept>

#include "config.hpp"

#ifndef KNET_VERSION
#define KNET_VERSION "unknown"
#endif

namespace knet::cli {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Csv::Csv(const std::filesystem::path& path) : file_(path), out_(&file_) {
  if (!file_) throw std::runtime_error("cannot write " + path.string());
}

void Csv::header(const std::vector<std::string>& cols) {
  for (const auto& c : cols) cell(c);
  end_row();
}

Csv& Csv::cell(double v) { return cell(fmt17(v)); }

Csv& Csv::cell(const std::string& s) {
  if (!fresh_) *out_ << ',';
  *out_ << s;
  fresh_ = false;
  return *this;
}

void Csv::end_row() {
  *out_ << '\n';
  fresh_ = true;
}

void Csv::row(const std::vector<double>& values) {
  for (double v : values) cell(v);
  end_row();
}

Manifest::Manifest(const std::filesystem::path& outDir, const std::string& subcommand,
                   const std::vector<std::string>& argv)
    : dir(outDir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  doc["program"] = "kinetic_net";
  doc["version"] = KNET_VERSION;
  doc["subcommand"] = subcommand;
  doc["argv"] = argv;
  doc["outputs"] = nlohmann::ordered_json::array();
}

std::filesystem::path Manifest::file(const std::string& name) {
  doc["outputs"].push_back(name);
  return dir / name;
}

void Manifest::write() const {
  std::ofstream f(dir / "manifest.json");
  if (!f) throw std::runtime_error("cannot write manifest in " + dir.string());
  f << doc.dump(2) << '\n';
}

void write_loglog_script(const std::filesystem::path& path, const std::string& title, const std::string& ylabel,
                         const std::vector<PlotSeries>& series, const std::vector<double>& refSlopes) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "# gnuplot " << path.filename().string() << "\n";
  f << "set datafile separator ','\n";
  f << "set key autotitle columnhead\n";
  f << "set logscale xy\n";
  f << "set format x '%g'\nset format y '%.0e'\n";
  f << "set xlabel 'eps'\nset ylabel '" << ylabel << "'\n";
  f << "set title '" << title << "'\n";
  f << "set terminal pngcairo size 900,650\n";
  f << "set output '" << path.stem().string() << ".png'\n";
  f << "plot \\\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    std::string y = "$" + std::to_string(s.ycol);
    if (!s.filter.empty()) y = "(strcol(1) eq '" + s.filter + "' ? $" + std::to_string(s.ycol) + " : NaN)";
    f << "  '" << s.csv << "' using " << s.xcol << ":" << y << " with linespoints title '" << s.title << "'";
    f << (i + 1 < series.size() || !refSlopes.empty() ? ", \\\n" : "\n");
  }
  for (std::size_t i = 0; i < refSlopes.size(); ++i) {
    f << "  x**" << fmt17(refSlopes[i]) << " with lines dashtype 2 title 'eps^{" << fmt17(refSlopes[i]) << "}'";
    f << (i + 1 < refSlopes.size() ? ", \\\n" : "\n");
  }
}

}  // namespace knet::cli
