#ifndef GFSIM_EXPERIMENTS_HPP
#define GFSIM_EXPERIMENTS_HPP

// Experiments behind the command-line tool. Each command turns an
// ExperimentSpec into a Table whose metadata is enough to rerun it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gfsim/analytics.hpp"
#include "gfsim/config.hpp"
#include "gfsim/dynamics.hpp"
#include "gfsim/io.hpp"
#include "gfsim/model.hpp"
#include "gfsim/open_system.hpp"
#include "gfsim/protocol.hpp"

#ifndef GFSIM_VERSION
#define GFSIM_VERSION "0.1.0"
#endif

namespace gfsim {

inline constexpr const char* version = GFSIM_VERSION;

enum class Command { spectrum, resonant_walk, plan, transfer, qubit, dissipation };

inline const std::vector<std::pair<Command, std::string>>& command_names() {
  static const std::vector<std::pair<Command, std::string>> names{
      {Command::spectrum, "spectrum"}, {Command::resonant_walk, "resonant-walk"},
      {Command::plan, "plan"},         {Command::transfer, "transfer"},
      {Command::qubit, "qubit"},       {Command::dissipation, "dissipation"}};
  return names;
}

inline std::string to_string(Command c) {
  for (const auto& [cmd, name] : command_names())
    if (cmd == c) return name;
  return "?";
}

inline Command parse_command(const std::string& s) {
  for (const auto& [cmd, name] : command_names())
    if (name == s) return cmd;
  throw ConfigError("unknown command '" + s + "'");
}

struct ExperimentSpec {
  Command command = Command::spectrum;
  std::string preset;
  ConfigFile config;
  std::optional<TimeGrid> grid; // time grid; for dissipation a log-spaced gamma/J grid
  std::vector<double> times;    // explicit sample times, used instead of grid
  std::vector<SitePair> pairs;
  std::vector<QubitSample> qubits;
  std::optional<double> eta;
  std::optional<std::uint64_t> seed;
  std::size_t samples = 200;
  Ensemble ensemble = Ensemble::haar;
};

inline ConfigFile switching_config(std::size_t n_sites, double j, SitePair pair, double base = 1.0) {
  ConfigFile f;
  f.config = {n_sites, switching_frequencies(base, pair.source, pair.target, n_sites), j, 0.0, 0.0};
  f.frequency_preset = "switching";
  f.base_frequency = base;
  f.switching_pair = pair;
  return f;
}

inline ConfigFile resonant_config(std::size_t n_sites, double j, double base = 1.0) {
  ConfigFile f;
  f.config = ArrayConfig::resonant(n_sites, j, base);
  f.frequency_preset = "resonant";
  f.base_frequency = base;
  return f;
}

inline std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3a", "fig3b", "fig4", "fig5"}; }

/// Figure presets. Frequencies are in units of omega_1 with C = omega_1 = 1;
/// figures 3 to 5 share J = 0.0013 on six sites.
inline ExperimentSpec preset(const std::string& name) {
  constexpr double j_switch = 0.0013;
  ExperimentSpec s;
  s.preset = name;
  if (name == "fig1") {
    s.command = Command::resonant_walk;
    s.config = resonant_config(10, 0.05);
    s.times = {0.0, 30.0, 40.0, 84.0};
  } else if (name == "fig2") {
    s.command = Command::spectrum;
    s.config = switching_config(10, j_switch, {3, 7});
  } else if (name == "fig3a" || name == "fig3b") {
    s.command = Command::transfer;
    s.config = switching_config(6, j_switch, name == "fig3a" ? SitePair{1, 5} : SitePair{2, 4});
  } else if (name == "fig4") {
    s.command = Command::qubit;
    s.config = switching_config(6, j_switch, {1, 4});
    s.qubits = fixed_four_states();
  } else if (name == "fig5") {
    s.command = Command::dissipation;
    s.config = switching_config(6, j_switch, {1, 3});
    s.pairs = {{1, 3}, {2, 5}};
    s.grid = TimeGrid{1e-3, 1.0, 25};
    s.samples = 200;
    s.seed = 20240917;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return s;
}

namespace detail {

inline nlohmann::json complex_json(complex z) { return {z.real(), z.imag()}; }

inline nlohmann::json base_metadata(const ExperimentSpec& s) {
  nlohmann::json m = {{"tool", "gfsim"},
                      {"version", version},
                      {"command", to_string(s.command)},
                      {"config", to_json(s.config.config)},
                      {"frequency_preset", s.config.frequency_preset},
                      {"base_frequency", s.config.base_frequency},
                      {"units", "frequencies in units of omega_1, times in units of 1/omega_1"}};
  if (!s.preset.empty()) m["preset"] = s.preset;
  if (s.config.switching_pair)
    m["switching_pair"] = {s.config.switching_pair->source, s.config.switching_pair->target};
  if (s.seed) m["seed"] = *s.seed;
  return m;
}

inline std::vector<SitePair> resolve_pairs(const ExperimentSpec& s) {
  if (!s.pairs.empty()) return s.pairs;
  if (s.config.switching_pair) return {*s.config.switching_pair};
  throw ConfigError(to_string(s.command) + " needs a site pair (--pair m:n or a switching preset)");
}

inline SitePair single_pair(const ExperimentSpec& s) {
  const auto pairs = resolve_pairs(s);
  if (pairs.size() != 1) throw ConfigError(to_string(s.command) + " takes exactly one site pair");
  const auto p = pairs.front();
  const auto& sw = s.config.switching_pair;
  if (sw && !((sw->source == p.source && sw->target == p.target) || (sw->source == p.target && sw->target == p.source)))
    throw ConfigError("pair " + std::to_string(p.source) + ":" + std::to_string(p.target) +
                      " does not match the switching profile of the configuration");
  return p;
}

inline TransferPlan plan_for(const ExperimentSpec& s, SitePair p) {
  return make_plan(s.config.config.n_sites, s.config.config.coupling_scale, p, s.config.base_frequency);
}

inline std::vector<double> sample_times(const ExperimentSpec& s, TimeGrid fallback) {
  if (!s.times.empty()) {
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      if (!std::isfinite(s.times[i]) || s.times[i] < 0.0) throw ConfigError("times must be finite and >= 0");
      if (i > 0 && !(s.times[i] > s.times[i - 1])) throw ConfigError("times must be increasing");
    }
    return s.times;
  }
  return s.grid.value_or(fallback).points();
}

inline Table spectrum(const ExperimentSpec& s) {
  const auto& c = s.config.config;
  const auto spec = decompose(build_hamiltonian(c));
  Table t;
  t.columns = {"index", "frequency", "frequency_over_C", "eigenvalue"};
  for (std::size_t k = 1; k <= c.n_sites; ++k) t.columns.push_back("weight_" + std::to_string(k));
  for (std::size_t j = 0; j < c.n_sites; ++j) {
    std::vector<double> row{double(j + 1), c.frequencies[j], c.frequencies[j] / s.config.base_frequency,
                            spec.eigenvalues(Eigen::Index(j))};
    for (std::size_t k = 0; k < c.n_sites; ++k) row.push_back(std::norm(spec.eigenvectors(Eigen::Index(k), Eigen::Index(j))));
    t.add_row(std::move(row));
  }
  t.metadata = base_metadata(s);
  t.metadata["layout"] = "row k: site k frequency and the k-th eigenpair (ascending), weight_i = |<i|v_k>|^2";
  if (s.config.switching_pair) {
    const auto [m, n] = *s.config.switching_pair;
    const auto d = identify_doublet(spec, m, n);
    t.metadata["doublet"] = {{"lambda_plus", d.lambda_plus},
                             {"lambda_minus", d.lambda_minus},
                             {"purity", d.purity},
                             {"index_plus", d.index_plus + 1},
                             {"index_minus", d.index_minus + 1}};
  }
  return t;
}

inline Table resonant_walk(const ExperimentSpec& s) {
  const auto& c = s.config.config;
  const double w = c.frequencies.front();
  for (double f : c.frequencies)
    if (f != w) throw RegimeError("the truncated coherent closed form applies to resonant arrays only");
  const std::size_t n = c.n_sites;
  const double j = c.coupling_scale;
  const auto times = sample_times(s, TimeGrid{0.0, 2.0 * std::sqrt(double(n)) / j, 2000});
  const auto spec = decompose(build_hamiltonian(c));
  const auto start = ExcitationState::site(n, 1);

  Table t;
  t.columns = {"t"};
  for (std::size_t k = 1; k <= n; ++k) t.columns.push_back("P" + std::to_string(k));
  for (std::size_t k = 1; k <= n; ++k) t.columns.push_back("closed_P" + std::to_string(k));
  t.columns.push_back("max_abs_deviation");
  t.columns.push_back("boundary_reached");

  const double threshold = 1e-8;
  bool reached = false;
  double worst_inside = 0.0;
  for (double time : times) {
    const auto psi = evolve(start, spec, time);
    const auto closed = truncated_coherent_amplitudes(j, time, n);
    // Remove the common e^{-i w t} and the bond phase e^{-i (k-1) eta}.
    Eigen::VectorXcd numeric = psi.site_block() * std::polar(1.0, w * time);
    for (Eigen::Index k = 0; k < numeric.size(); ++k) numeric(k) *= std::polar(1.0, double(k) * c.coupling_phase);
    const double dev = (numeric - closed.amplitudes).cwiseAbs().maxCoeff();
    const double boundary = std::norm(psi.site_amplitude(n));
    reached = reached || boundary >= threshold;
    if (!reached) worst_inside = std::max(worst_inside, dev);

    std::vector<double> row{time};
    for (std::size_t k = 1; k <= n; ++k) row.push_back(std::norm(psi.site_amplitude(k)));
    for (double p : closed.probabilities()) row.push_back(p);
    row.push_back(dev);
    row.push_back(reached ? 1.0 : 0.0);
    t.add_row(std::move(row));
  }
  t.metadata = base_metadata(s);
  t.metadata["agreement_threshold_boundary_population"] = threshold;
  t.metadata["max_deviation_before_boundary"] = worst_inside;
  t.metadata["deviation"] = "max_k |numeric - closed form| of site amplitudes in the rotating frame";
  return t;
}

inline Table plan_table(const ExperimentSpec& s) {
  const auto plan = plan_for(s, single_pair(s));
  Table t;
  t.columns = {"source",      "target",      "n_sites",    "coupling_scale", "base_frequency",
               "lambda_plus", "lambda_minus", "theta",     "lambda_mean",    "transfer_time",
               "eta_star",    "doublet_purity", "exchange_sign"};
  t.add_row({double(plan.source), double(plan.target), double(plan.n_sites), plan.coupling_scale, plan.base_frequency,
             plan.lambda_plus, plan.lambda_minus, plan.theta, plan.lambda_mean, plan.transfer_time, plan.eta_star,
             plan.doublet_purity, double(plan.exchange_sign)});
  t.metadata = base_metadata(s);
  t.metadata["plan"] = to_json(plan);
  t.document = to_json(plan);
  t.document["metadata"] = t.metadata;
  t.document["metadata"].erase("plan");
  return t;
}

inline Table transfer(const ExperimentSpec& s) {
  const auto p = single_pair(s);
  const auto& c = s.config.config;
  if (p.source < 1 || p.target < 1 || p.source > c.n_sites || p.target > c.n_sites || p.source == p.target)
    throw ConfigError("pair out of range");
  std::optional<TransferPlan> plan;
  if (s.config.frequency_preset == "switching") plan = plan_for(s, p);

  ArrayConfig run = c;
  if (s.eta) run.coupling_phase = *s.eta;
  const auto spec = decompose(build_hamiltonian(run));
  const auto fallback = plan ? TimeGrid{0.0, 2.0 * plan->transfer_time, 2001} : TimeGrid{0.0, 1e5, 2000};
  const auto times = sample_times(s, fallback);
  const auto start = ExcitationState::site(c.n_sites, p.source);

  Table t;
  t.columns = {"t", "P_transfer", "P_source", "leakage"};
  double peak = -1.0, peak_time = 0.0, max_leak = 0.0;
  for (double time : times) {
    const auto probs = site_probabilities(evolve(start, spec, time));
    const double pt = probs[p.target - 1];
    const double ps = probs[p.source - 1];
    double leak = 0.0;
    for (double v : probs) leak += v;
    leak -= pt + ps;
    leak = std::max(leak, 0.0);
    if (pt > peak) {
      peak = pt;
      peak_time = time;
    }
    max_leak = std::max(max_leak, leak);
    t.add_row({time, pt, ps, leak});
  }
  t.metadata = base_metadata(s);
  t.metadata["pair"] = {p.source, p.target};
  t.metadata["peak_probability"] = peak;
  t.metadata["peak_time"] = peak_time;
  t.metadata["max_leakage"] = max_leak;
  if (plan) {
    t.metadata["plan"] = to_json(*plan);
    t.metadata["probability_at_transfer_time"] = transfer_probability(p.source, p.target, spec, plan->transfer_time);
    t.metadata["peak_time_relative_to_plan"] = peak_time / plan->transfer_time;
  } else {
    t.metadata["plan"] = nullptr;
    t.metadata["note"] = "no switching profile: no transfer plan, probabilities reported as computed";
  }
  return t;
}

inline Table qubit(const ExperimentSpec& s) {
  if (s.config.frequency_preset != "switching")
    throw ConfigError("qubit transfer needs a switching frequency profile");
  const auto p = single_pair(s);
  const auto plan = plan_for(s, p);
  const auto states = s.qubits.empty() ? fixed_four_states() : s.qubits;
  const double eta = s.eta.value_or(plan.eta_star);
  const auto times = sample_times(s, TimeGrid{0.0, 2.0 * plan.transfer_time, 2001});

  Table t;
  t.columns = {"t"};
  for (std::size_t i = 1; i <= states.size(); ++i) {
    t.columns.push_back("F_numerical_" + std::to_string(i));
    t.columns.push_back("F_closed_form_" + std::to_string(i));
  }
  t.rows.assign(times.size(), std::vector<double>(t.columns.size(), 0.0));
  for (std::size_t r = 0; r < times.size(); ++r) t.rows[r][0] = times[r];

  nlohmann::json summary = nlohmann::json::array();
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto [alpha, beta] = states[i];
    const auto curve = qubit_fidelity_curve(plan, alpha, beta, times, eta);
    const auto at_star = qubit_fidelity_curve(plan, alpha, beta, {plan.transfer_time}, eta);
    double sup = 0.0;
    for (std::size_t r = 0; r < times.size(); ++r) {
      t.rows[r][1 + 2 * i] = curve.numerical[r];
      t.rows[r][2 + 2 * i] = curve.closed_form[r];
      sup = std::max(sup, std::abs(curve.numerical[r] - curve.closed_form[r]));
    }
    summary.push_back({{"alpha", complex_json(alpha)},
                       {"beta", complex_json(beta)},
                       {"fidelity_at_transfer_time", at_star.numerical[0]},
                       {"closed_form_at_transfer_time", at_star.closed_form[0]},
                       {"grid_peak", *std::max_element(curve.numerical.begin(), curve.numerical.end())},
                       {"closed_form_sup_deviation", sup}});
  }
  t.metadata = base_metadata(s);
  t.metadata["pair"] = {p.source, p.target};
  t.metadata["plan"] = to_json(plan);
  t.metadata["eta"] = eta;
  t.metadata["eta_is_optimal"] = !s.eta.has_value();
  t.metadata["states"] = summary;
  return t;
}

inline Table dissipation(const ExperimentSpec& s) {
  if (!s.seed) throw ConfigError("dissipation needs a seed (--seed)");
  const auto pairs = resolve_pairs(s);
  const auto& c = s.config.config;
  const auto g = s.grid.value_or(TimeGrid{1e-3, 1.0, 25});
  const auto grid = log_spaced_grid(g.t_start, g.t_end, g.samples);
  std::vector<double> with_zero{0.0};
  with_zero.insert(with_zero.end(), grid.begin(), grid.end());

  AverageOptions opt;
  opt.ensemble = s.ensemble;
  Table t;
  t.columns = {"source", "target", "gamma_over_J", "mean_fidelity", "stderr", "samples", "t_star"};
  double worst_halving = 0.0;
  nlohmann::json plans = nlohmann::json::array();
  for (const auto& p : pairs) {
    const auto plan = make_plan(c.n_sites, c.coupling_scale, p, s.config.base_frequency);
    plans.push_back(to_json(plan));
    for (const auto& pt : average_transfer_fidelity(plan, with_zero, s.samples, *s.seed, opt)) {
      if (!pt.converged)
        throw NumericalError("step halving disagreement at gamma/J = " + std::to_string(pt.gamma_over_J),
                             pt.halving_delta);
      worst_halving = std::max(worst_halving, pt.halving_delta);
      t.add_row({double(p.source), double(p.target), pt.gamma_over_J, pt.mean_fidelity, pt.standard_error,
                 double(pt.samples), pt.t_star});
    }
  }
  t.metadata = base_metadata(s);
  t.metadata["n_sites"] = c.n_sites;
  t.metadata["J"] = c.coupling_scale;
  t.metadata["C"] = s.config.base_frequency;
  t.metadata["samples"] = s.ensemble == Ensemble::haar ? s.samples : 4;
  t.metadata["ensemble"] = s.ensemble == Ensemble::haar ? "haar" : "fixed-four";
  t.metadata["gamma_grid"] = {{"start", g.t_start}, {"end", g.t_end}, {"points", g.samples}, {"spacing", "log"}};
  t.metadata["plans"] = plans;
  t.metadata["max_halving_delta"] = worst_halving;
  t.metadata["note"] = "each pair uses its own switching profile; fidelity evaluated at that plan's transfer time";
  return t;
}

} // namespace detail

inline Table run(const ExperimentSpec& s) {
  s.config.config.validate();
  switch (s.command) {
    case Command::spectrum: return detail::spectrum(s);
    case Command::resonant_walk: return detail::resonant_walk(s);
    case Command::plan: return detail::plan_table(s);
    case Command::transfer: return detail::transfer(s);
    case Command::qubit: return detail::qubit(s);
    case Command::dissipation: return detail::dissipation(s);
  }
  throw ConfigError("unhandled command");
}

} // namespace gfsim

#endif
