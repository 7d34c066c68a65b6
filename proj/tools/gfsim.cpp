// gfsim: runs one experiment and writes a CSV or JSON table.
//
//   gfsim --preset fig3a --out fig3a.csv
//   gfsim transfer --config array.json --pair 2:4 --format json
//
// Exit codes: 0 ok, 2 configuration error, 3 regime refusal, 4 numerical error.

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gfsim/experiments.hpp"

namespace {

using namespace gfsim;

constexpr int exit_config = 2;
constexpr int exit_regime = 3;
constexpr int exit_numerical = 4;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, sep);) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + " '" + s + "'");
  }
}

std::size_t to_count(const std::string& s, const std::string& what) {
  const double v = to_double(s, what);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e12) throw ConfigError(what + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

TimeGrid parse_grid(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 3) throw ConfigError("--grid expects start:end:n");
  TimeGrid g{to_double(parts[0], "grid start"), to_double(parts[1], "grid end"), to_count(parts[2], "grid size")};
  g.validate();
  return g;
}

SitePair parse_pair(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 2) throw ConfigError("--pair expects m:n");
  return {to_count(parts[0], "site index"), to_count(parts[1], "site index")};
}

complex parse_complex(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() == 1) return {to_double(parts[0], "amplitude"), 0.0};
  if (parts.size() == 2) return {to_double(parts[0], "amplitude"), to_double(parts[1], "amplitude")};
  throw ConfigError("amplitude expects re or re,im");
}

std::vector<double> parse_times(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(to_double(item, "time"));
  return out;
}

struct Options {
  std::string command;
  std::string config;
  std::string preset;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<double> eta;
  std::optional<std::size_t> samples;
  std::string grid;
  std::vector<std::string> pairs;
  std::string alpha;
  std::string beta;
  std::string ensemble;
  std::string times;
};

ExperimentSpec build_spec(const Options& o) {
  if (o.preset.empty() && o.config.empty()) throw ConfigError("give --preset or --config");
  ExperimentSpec s = o.preset.empty() ? ExperimentSpec{} : preset(o.preset);
  if (!o.config.empty()) s.config = load_config(o.config);
  if (!o.command.empty())
    s.command = parse_command(o.command);
  else if (o.preset.empty())
    throw ConfigError("give a command or --preset");

  if (o.seed) s.seed = *o.seed;
  if (o.eta) {
    if (!std::isfinite(*o.eta)) throw ConfigError("--eta must be finite");
    s.eta = *o.eta;
  }
  if (o.samples) {
    if (*o.samples == 0) throw ConfigError("--samples must be positive");
    s.samples = *o.samples;
  }
  if (!o.grid.empty()) {
    s.grid = parse_grid(o.grid);
    s.times.clear();
  }
  if (!o.times.empty()) s.times = parse_times(o.times);
  if (!o.pairs.empty()) {
    s.pairs.clear();
    for (const auto& p : o.pairs) s.pairs.push_back(parse_pair(p));
  }
  if (!o.alpha.empty() || !o.beta.empty()) {
    if (o.alpha.empty() || o.beta.empty()) throw ConfigError("--alpha and --beta go together");
    s.qubits = {{parse_complex(o.alpha), parse_complex(o.beta)}};
  }
  if (!o.ensemble.empty()) {
    if (o.ensemble == "haar")
      s.ensemble = Ensemble::haar;
    else if (o.ensemble == "fixed-four")
      s.ensemble = Ensemble::fixed_four;
    else
      throw ConfigError("unknown ensemble '" + o.ensemble + "' (expected haar or fixed-four)");
  }
  return s;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photonic cavity array state-transfer simulator"};
  app.set_version_flag("--version", std::string(gfsim::version));
  Options o;
  std::string commands;
  for (const auto& [_, name] : gfsim::command_names()) commands += (commands.empty() ? "" : "|") + name;
  app.add_option("command", o.command, commands + " (defaults to the preset's command)");
  app.add_option("--config", o.config, "JSON array configuration");
  app.add_option("--preset", o.preset, "figure preset: fig1 fig2 fig3a fig3b fig4 fig5");
  app.add_option("--out", o.out, "output file (default stdout)");
  app.add_option("--format", o.format, "csv or json")->capture_default_str();
  app.add_option("--seed", o.seed, "random seed for sampled averages");
  app.add_option("--eta", o.eta, "coupling phase (default: the plan's optimum)");
  app.add_option("--samples", o.samples, "Haar samples per gamma point");
  app.add_option("--grid", o.grid, "start:end:n; log-spaced gamma/J grid for dissipation");
  app.add_option("--times", o.times, "comma-separated sample times");
  app.add_option("--pair", o.pairs, "source:target site pair (repeatable)");
  app.add_option("--alpha", o.alpha, "vacuum amplitude re[,im]");
  app.add_option("--beta", o.beta, "excitation amplitude re[,im]");
  app.add_option("--ensemble", o.ensemble, "haar or fixed-four");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    const auto format = gfsim::parse_format(o.format);
    const auto spec = build_spec(o);
    const auto table = gfsim::run(spec);
    gfsim::emit(o.out, table, format);
    return EXIT_SUCCESS;
  } catch (const gfsim::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return exit_config;
  } catch (const gfsim::RegimeError& e) {
    std::cerr << "regime refused: " << e.what() << '\n';
    return exit_regime;
  } catch (const gfsim::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
}
