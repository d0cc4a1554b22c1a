#include "config.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace knet::cli {

namespace {

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::fabs(d) > 1e9) throw ConfigError("config: '" + key + "' expects an integer");
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, std::string v) {
  for (auto& c : v) c = static_cast<char>(std::tolower(c));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: '" + key + "' expects a boolean");
}

std::string join(const std::vector<std::string>& in) {
  std::string s;
  for (const auto& p : in) s += (s.empty() ? "" : " ") + p;
  return s;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> m = {
      {"system.N", [](RunConfig& c, auto& k, auto& v) { c.N = to_int(k, v); }},
      {"system.edges", [](RunConfig& c, auto& k, auto& v) { c.edges = to_int(k, v); }},
      {"system.collision", [](RunConfig& c, auto&, auto& v) { c.collision = v; }},
      {"system.boundary", [](RunConfig& c, auto&, auto& v) { c.boundary = v; }},
      {"system.eps", [](RunConfig& c, auto& k, auto& v) { c.eps = to_double(k, v); }},
      {"system.order", [](RunConfig& c, auto& k, auto& v) { c.order = to_int(k, v); }},
      {"system.case", [](RunConfig& c, auto&, auto& v) { c.caseName = v; }},
      {"grid.T", [](RunConfig& c, auto& k, auto& v) { c.T = to_double(k, v); }},
      {"grid.cfl", [](RunConfig& c, auto& k, auto& v) { c.cfl = to_double(k, v); }},
      {"grid.dx", [](RunConfig& c, auto& k, auto& v) { c.dx = to_double(k, v); }},
      {"grid.dx_per_eps", [](RunConfig& c, auto& k, auto& v) { c.dxPerEps = to_double(k, v); }},
      {"grid.L", [](RunConfig& c, auto& k, auto& v) { c.L = to_double(k, v); }},
      {"grid.snapshots", [](RunConfig& c, auto&, auto& v) { c.snapshots = parse_list(v); }},
      {"initial.center", [](RunConfig& c, auto& k, auto& v) { c.center = to_double(k, v); }},
      {"initial.width", [](RunConfig& c, auto& k, auto& v) { c.width = to_double(k, v); }},
      {"initial.amplitude", [](RunConfig& c, auto&, auto& v) { c.amplitude = parse_list(v); }},
      {"initial.correction", [](RunConfig& c, auto& k, auto& v) { c.correction = to_bool(k, v); }},
      {"initial.edge_amplitudes", [](RunConfig& c, auto&, auto& v) { c.edgeAmplitudes = parse_list(v); }},
      {"initial.profile", [](RunConfig& c, auto&, auto& v) { c.profile = v; }},
      {"study.eps_list", [](RunConfig& c, auto&, auto& v) { c.epsList = parse_list(v); }},
      {"study.threads", [](RunConfig& c, auto& k, auto& v) { c.threads = to_int(k, v); }},
      {"study.richardson", [](RunConfig& c, auto& k, auto& v) { c.richardson = to_bool(k, v); }},
      {"study.gnuplot", [](RunConfig& c, auto& k, auto& v) { c.gnuplot = to_bool(k, v); }},
  };
  return m;
}

}  // namespace

std::vector<double> parse_list(const std::string& s) {
  std::string t = s;
  for (auto& c : t)
    if (c == ',' || c == ';') c = ' ';
  std::istringstream in(t);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(to_double("list", tok));
  return out;
}

void load_ini_text(const std::string& text, RunConfig& cfg) {
  std::istringstream in(text);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& it : items) {
    if (it.name == "++" || it.name == "--") continue;
    if (it.parents.size() != 1) throw ConfigError("config: key '" + it.name + "' outside a known section");
    const std::string key = it.parents[0] + "." + it.name;
    auto s = setters().find(key);
    if (s == setters().end()) throw ConfigError("config: unknown key '" + key + "'");
    s->second(cfg, key, join(it.inputs));
  }
}

void load_ini(const std::string& path, RunConfig& cfg) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot read '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  load_ini_text(ss.str(), cfg);
}

void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(c.N >= 1 && c.N <= 16, "N must be in 1..16");
  need(c.edges >= 2 && c.edges <= 64, "edges must be in 2..64");
  need(c.collision == "q1" || c.collision == "q2", "collision must be q1 or q2");
  need(c.collision == "q1" || c.N >= 2, "q2 needs N >= 2");
  need(c.boundary == "b1" || c.boundary == "b2" || c.boundary == "network", "boundary must be b1, b2 or network");
  need(c.eps > 0.0, "eps must be positive");
  need(c.order >= 0 && c.order <= 3, "order must be in 0..3");
  need(c.T > 0.0, "T must be positive");
  need(c.cfl > 0.0 && c.cfl <= 1.0, "cfl must be in (0, 1]");
  need(c.dx >= 0.0 && c.dxPerEps > 0.0 && c.L >= 0.0, "grid sizes must be positive");
  for (double t : c.snapshots) need(t >= 0.0 && t <= c.T, "snapshot times must lie in [0, T]");
  need(c.width > 0.0, "width must be positive");
  need(c.profile == "bump" || c.profile == "zero-mode", "profile must be bump or zero-mode");
  need(c.profile != "bump" || c.center - c.width >= 0.0, "initial bump must stay off the junction (center >= width)");
  const int b = c.collision == "q1" ? 2 : 3;
  need(c.amplitude.empty() || static_cast<int>(c.amplitude.size()) == b,
       "amplitude needs " + std::to_string(b) + " entries for " + c.collision);
  need(c.edgeAmplitudes.empty() || static_cast<int>(c.edgeAmplitudes.size()) == c.edges,
       "edge_amplitudes needs one entry per edge");
  for (double e : c.epsList) need(e > 0.0, "eps_list entries must be positive");
  need(c.threads >= 0, "threads must be >= 0");
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["system"] = {{"N", N}, {"edges", edges}, {"collision", collision}, {"boundary", boundary},
                 {"eps", eps}, {"order", order}, {"case", caseName}};
  j["grid"] = {{"T", T}, {"cfl", cfl}, {"dx", dx}, {"dx_per_eps", dxPerEps}, {"L", L}, {"snapshots", snapshots}};
  j["initial"] = {{"center", center}, {"width", width}, {"amplitude", amplitude},
                  {"correction", correction}, {"edge_amplitudes", edgeAmplitudes}, {"profile", profile}};
  j["study"] = {{"eps_list", epsList}, {"threads", threads}, {"richardson", richardson}, {"gnuplot", gnuplot}};
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    const auto& s = j.at("system");
    s.at("N").get_to(c.N);
    s.at("edges").get_to(c.edges);
    s.at("collision").get_to(c.collision);
    s.at("boundary").get_to(c.boundary);
    s.at("eps").get_to(c.eps);
    s.at("order").get_to(c.order);
    s.at("case").get_to(c.caseName);
    const auto& g = j.at("grid");
    g.at("T").get_to(c.T);
    g.at("cfl").get_to(c.cfl);
    g.at("dx").get_to(c.dx);
    g.at("dx_per_eps").get_to(c.dxPerEps);
    g.at("L").get_to(c.L);
    g.at("snapshots").get_to(c.snapshots);
    const auto& i = j.at("initial");
    i.at("center").get_to(c.center);
    i.at("width").get_to(c.width);
    i.at("amplitude").get_to(c.amplitude);
    i.at("correction").get_to(c.correction);
    i.at("edge_amplitudes").get_to(c.edgeAmplitudes);
    i.at("profile").get_to(c.profile);
    const auto& st = j.at("study");
    st.at("eps_list").get_to(c.epsList);
    st.at("threads").get_to(c.threads);
    st.at("richardson").get_to(c.richardson);
    st.at("gnuplot").get_to(c.gnuplot);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  return c;
}

}  // namespace knet::cli
