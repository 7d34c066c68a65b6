#ifndef GFSIM_PROTOCOL_HPP
#define GFSIM_PROTOCOL_HPP

// Perfect-transfer protocol design. With the switching frequency profile the
// sites m and n are degenerate and hybridize into a doublet
// (|m>> +/- |n>>)/sqrt(2); the photon swaps between them at half the doublet
// splitting. A uniform coupling phase eta then fixes the relative phase of
// the transferred qubit at the transfer time.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gfsim/dynamics.hpp"
#include "gfsim/model.hpp"

namespace gfsim {

struct Doublet {
  double lambda_plus = 0.0;  // eigenvalue of the eigenvector closest to (|m>> + |n>>)/sqrt(2)
  double lambda_minus = 0.0; // eigenvalue of the eigenvector closest to (|m>> - |n>>)/sqrt(2)
  double purity = 0.0;       // smaller of the two squared overlaps
  std::size_t index_plus = 0;
  std::size_t index_minus = 0;
};

inline Doublet identify_doublet(const SpectralDecomposition& spec, std::size_t m, std::size_t n) {
  const std::size_t dim = spec.dim();
  if (m < 1 || n < 1 || m > dim || n > dim || m == n)
    throw ConfigError("doublet needs two distinct sites in 1.." + std::to_string(dim));
  const auto& v = spec.eigenvectors;
  const auto rm = static_cast<Eigen::Index>(m - 1);
  const auto rn = static_cast<Eigen::Index>(n - 1);

  Doublet d;
  double best_plus = -1.0;
  double best_minus = -1.0;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    const double plus = 0.5 * std::norm(v(rm, j) + v(rn, j));
    const double minus = 0.5 * std::norm(v(rm, j) - v(rn, j));
    if (plus > best_plus) {
      best_plus = plus;
      d.index_plus = static_cast<std::size_t>(j);
    }
    if (minus > best_minus) {
      best_minus = minus;
      d.index_minus = static_cast<std::size_t>(j);
    }
  }
  d.purity = std::min(best_plus, best_minus);
  if (d.index_plus == d.index_minus || d.purity < 0.5)
    throw RegimeError("doublet not resolved: purity " + std::to_string(d.purity) +
                      " (coupling too strong relative to the detunings)");
  d.lambda_plus = spec.eigenvalues(static_cast<Eigen::Index>(d.index_plus));
  d.lambda_minus = spec.eigenvalues(static_cast<Eigen::Index>(d.index_minus));
  return d;
}

struct TransferPlan {
  std::size_t source = 1;
  std::size_t target = 2;
  std::size_t n_sites = 2;
  double coupling_scale = 0.0;
  double base_frequency = 1.0;
  std::vector<double> frequencies;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double theta = 0.0;       // |lambda_plus - lambda_minus| / 2
  double lambda_mean = 0.0; // (lambda_plus + lambda_minus) / 2
  double transfer_time = 0.0;
  double eta_star = 0.0;
  double doublet_purity = 0.0;
  // +1 when the symmetric combination is the upper level. The site-to-site
  // amplitude is -i * exchange_sign * e^{-i lambda t} sin(theta t).
  int exchange_sign = 1;
  std::string warning;

  /// Array configuration realizing the plan with coupling phase eta.
  ArrayConfig config(double eta) const {
    ArrayConfig c{n_sites, frequencies, coupling_scale, eta, 0.0};
    c.validate();
    return c;
  }
  ArrayConfig config() const { return config(eta_star); }
};

inline constexpr double plan_purity_refuse = 0.9;
inline constexpr double plan_purity_warn = 0.99;

/// Designs the transfer m -> n on an N-site chain with switching profile base C.
inline TransferPlan make_plan(std::size_t n_sites, double coupling_scale, SitePair pair, double base = 1.0) {
  const auto [m, n] = pair;
  TransferPlan plan;
  plan.source = m;
  plan.target = n;
  plan.n_sites = n_sites;
  plan.coupling_scale = coupling_scale;
  plan.base_frequency = base;
  plan.frequencies = switching_frequencies(base, std::min(m, n), std::max(m, n), n_sites);

  // Spectra are gauge invariant, so the doublet is found with real couplings.
  const auto spec = decompose(build_hamiltonian(plan.config(0.0)));
  const Doublet d = identify_doublet(spec, m, n);
  plan.doublet_purity = d.purity;
  if (d.purity < plan_purity_refuse)
    throw RegimeError("doublet purity " + std::to_string(d.purity) + " below " +
                      std::to_string(plan_purity_refuse) + "; perturbative transfer picture does not hold");
  if (d.purity < plan_purity_warn)
    plan.warning = "doublet purity " + std::to_string(d.purity) + " below " + std::to_string(plan_purity_warn) +
                   "; transfer will be incomplete";

  plan.lambda_plus = d.lambda_plus;
  plan.lambda_minus = d.lambda_minus;
  plan.exchange_sign = d.lambda_plus >= d.lambda_minus ? 1 : -1;
  plan.theta = 0.5 * std::abs(d.lambda_plus - d.lambda_minus);
  plan.lambda_mean = 0.5 * (d.lambda_plus + d.lambda_minus);
  if (!(plan.theta > 0.0)) throw RegimeError("doublet is exactly degenerate; no exchange takes place");
  plan.transfer_time = std::numbers::pi / (2.0 * plan.theta);

  // At t*, sin(theta t*) = 1 and the target amplitude carries
  // -i s e^{-i lambda t*} e^{-i (n-m) eta}; eta* makes that factor 1.
  const double phase = wrap_phase(plan.exchange_sign * std::numbers::pi / 2.0 + plan.lambda_mean * plan.transfer_time);
  const double sep = static_cast<double>(m) - static_cast<double>(n);
  plan.eta_star = wrap_phase(phase / sep);
  return plan;
}

inline TransferPlan make_plan(const ArrayConfig& tmpl, std::size_t m, std::size_t n) {
  tmpl.validate();
  return make_plan(tmpl.n_sites, tmpl.coupling_scale, {m, n}, tmpl.frequencies.front());
}

inline nlohmann::json to_json(const TransferPlan& p) {
  nlohmann::json j = {{"source", p.source},
                      {"target", p.target},
                      {"n_sites", p.n_sites},
                      {"coupling_scale", p.coupling_scale},
                      {"base_frequency", p.base_frequency},
                      {"frequencies", p.frequencies},
                      {"lambda_plus", p.lambda_plus},
                      {"lambda_minus", p.lambda_minus},
                      {"theta", p.theta},
                      {"lambda_mean", p.lambda_mean},
                      {"transfer_time", p.transfer_time},
                      {"eta_star", p.eta_star},
                      {"doublet_purity", p.doublet_purity},
                      {"exchange_sign", p.exchange_sign}};
  if (!p.warning.empty()) j["warning"] = p.warning;
  return j;
}

inline void check_qubit(complex alpha, complex beta) {
  const double err = std::abs(std::norm(alpha) + std::norm(beta) - 1.0);
  if (!(err <= 1e-10)) throw ConfigError("qubit amplitudes must satisfy |alpha|^2 + |beta|^2 = 1");
}

struct FidelityCurve {
  std::vector<double> times;
  std::vector<double> numerical;
  std::vector<double> closed_form;
  double eta = 0.0;
};

/// Two-level approximation | |a|^2 - i s |b|^2 e^{-i lambda t} e^{-i (n-m) eta} sin(theta t) |^2.
inline double closed_form_fidelity(const TransferPlan& plan, complex alpha, complex beta, double t, double eta) {
  const double sep = static_cast<double>(plan.target) - static_cast<double>(plan.source);
  const complex amp = complex(0.0, -1.0) * static_cast<double>(plan.exchange_sign) *
                      std::polar(1.0, -plan.lambda_mean * t) * std::polar(1.0, -sep * eta) *
                      std::sin(plan.theta * t);
  return std::norm(std::norm(alpha) + std::norm(beta) * amp);
}

/// Fidelity of alpha|vac>> + beta|m>> evolved under the full Hamiltonian
/// against the target alpha|vac>> + beta|n>>, plus its two-level approximation.
inline FidelityCurve qubit_fidelity_curve(const TransferPlan& plan, complex alpha, complex beta,
                                          const std::vector<double>& times,
                                          std::optional<double> eta = std::nullopt) {
  check_qubit(alpha, beta);
  FidelityCurve out;
  out.eta = eta.value_or(plan.eta_star);
  out.times = times;
  const auto spec = decompose(build_hamiltonian(plan.config(out.eta)));
  out.numerical.reserve(times.size());
  out.closed_form.reserve(times.size());
  for (double t : times) {
    const complex a = spec.amplitude(plan.target, plan.source, t);
    out.numerical.push_back(std::min(1.0, std::norm(std::norm(alpha) + std::norm(beta) * a)));
    out.closed_form.push_back(closed_form_fidelity(plan, alpha, beta, t, out.eta));
  }
  return out;
}

} // namespace gfsim

#endif
