// qwire command line: scenario runners plus a CSV-to-SVG plotter.
// Exit codes: 0 success, 2 configuration error, 3 numerical error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "qwire/scenarios.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  bool check_only = false;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("-c,--config", args.config_path, "scenario config file")
      ->required();
  sub->add_option("--set", args.overrides,
                  "override a key, e.g. --set pulse.lengths_nm=80");
  sub->add_option("-o,--out", args.out_dir, "output directory override");
  sub->add_flag("--check", args.check_only,
                "validate and print the resolved config without running");
}

int run_verb(qwire::ScenarioVerb verb, const CommonArgs& args) {
  qwire::ConfigMap cm = qwire::ConfigMap::parse_file(args.config_path);
  for (const auto& kv : args.overrides) cm.set_override(kv);
  if (!args.out_dir.empty()) cm.set_override("output.dir=" + args.out_dir);
  qwire::ScenarioConfig cfg = qwire::ScenarioConfig::load(cm, verb);
  if (args.check_only) {
    std::cout << cfg.manifest_text();
    return 0;
  }
  qwire::run_scenario(cfg, &std::cout);
  return 0;
}

std::vector<std::vector<double>> read_csv_columns(const std::string& path,
                                                  std::vector<std::string>& names) {
  std::ifstream in(path);
  if (!in) throw qwire::ConfigError("plot: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw qwire::ConfigError("plot: empty file " + path);
  names.clear();
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) names.push_back(tok);
  }
  std::vector<std::vector<double>> cols(names.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::size_t c = 0;
    while (std::getline(ss, tok, ',') && c < cols.size())
      cols[c++].push_back(std::stod(tok));
  }
  return cols;
}

int run_plot(const std::string& in_path, const std::string& out_path,
             bool log_y) {
  std::vector<std::string> names;
  auto cols = read_csv_columns(in_path, names);
  if (cols.size() < 2 || cols[0].empty())
    throw qwire::ConfigError("plot: need at least two populated columns");

  if (names.size() == 3 && names[0] == "t_fs" && names[1] == "x_nm") {
    // Density raster: rebuild the map from the flat triples.
    qwire::DensityMap map;
    std::vector<double>& ts = cols[0];
    std::vector<double>& xs = cols[1];
    std::vector<double>& vs = cols[2];
    for (double t : ts)
      if (map.times.empty() || t != map.times.back()) map.times.push_back(t);
    const std::size_t nx = ts.size() / map.times.size();
    map.positions.assign(xs.begin(), xs.begin() + long(nx));
    for (std::size_t it = 0; it < map.times.size(); ++it)
      map.rho.emplace_back(vs.begin() + long(it * nx),
                           vs.begin() + long((it + 1) * nx));
    qwire::svg_heatmap(out_path, map, "Electron density");
    return 0;
  }

  std::vector<qwire::SvgSeries> series;
  for (std::size_t c = 1; c < cols.size(); ++c)
    series.push_back({names[c], &cols[c]});
  qwire::SvgPlotOptions opt;
  opt.title = std::filesystem::path(in_path).filename().string();
  opt.xlabel = names[0];
  opt.ylabel = names.size() == 2 ? names[1] : "value";
  opt.log_y = log_y || names[1] == "power";
  qwire::svg_line_plot(out_path, cols[0], series, opt);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qwire: 1D conduction-band electron dynamics under localized "
      "time-dependent excitations"};
  app.require_subcommand(1);

  CommonArgs args;
  auto* s_static = app.add_subcommand(
      "static-scan", "steady-state transmission T(E) over an energy grid");
  add_common(s_static, args);
  auto* s_cal = app.add_subcommand(
      "calibrate", "find the barrier height for a target transmission");
  add_common(s_cal, args);
  auto* s_switch = app.add_subcommand(
      "switch", "switched-barrier transient (density map, D(t), T(x,t))");
  add_common(s_switch, args);
  auto* s_pulse = app.add_subcommand(
      "pulse", "laser-pulse run (density map, current trace, spectrum)");
  add_common(s_pulse, args);
  auto* s_super = app.add_subcommand(
      "superpose", "weighted sum of per-k current traces");
  add_common(s_super, args);

  std::string plot_in, plot_out;
  bool plot_logy = false;
  auto* s_plot = app.add_subcommand("plot", "render a CSV output as SVG");
  s_plot->add_option("-i,--in", plot_in, "input CSV")->required();
  s_plot->add_option("-o,--out", plot_out, "output SVG")->required();
  s_plot->add_flag("--logy", plot_logy, "logarithmic y axis");

  CLI11_PARSE(app, argc, argv);

  try {
    if (s_plot->parsed()) return run_plot(plot_in, plot_out, plot_logy);
    if (s_static->parsed()) return run_verb(qwire::ScenarioVerb::static_scan, args);
    if (s_cal->parsed()) return run_verb(qwire::ScenarioVerb::calibrate, args);
    if (s_switch->parsed()) return run_verb(qwire::ScenarioVerb::switch_on, args);
    if (s_pulse->parsed()) return run_verb(qwire::ScenarioVerb::pulse, args);
    if (s_super->parsed()) return run_verb(qwire::ScenarioVerb::superpose, args);
  } catch (const qwire::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qwire::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const qwire::CalibrationError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
