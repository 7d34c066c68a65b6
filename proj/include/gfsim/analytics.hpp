#ifndef GFSIM_ANALYTICS_HPP
#define GFSIM_ANALYTICS_HPP

// Closed-form single-photon results for a resonant Glauber-Fock array. A photon
// launched in cavity 1 spreads as an upper-truncated coherent state, whose
// normalization is a regularized incomplete gamma function. These formulas
// serve as independent checks on the spectral propagator.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "gfsim/errors.hpp"
#include "gfsim/model.hpp"

namespace gfsim {

namespace detail {

// Neumaier variant of Kahan summation.
class CompensatedSum {
public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// log of sum_{j=0}^{n-1} x^j / j!, summed relative to the largest term so
// that nothing overflows for large x.
inline double log_partial_exp_sum(std::size_t n, double x) {
  if (x == 0.0) return 0.0;
  const double log_x = std::log(x);
  const auto peak = static_cast<std::size_t>(std::min<double>(static_cast<double>(n - 1), std::floor(x)));
  const auto log_term = [&](std::size_t j) {
    return static_cast<double>(j) * log_x - std::lgamma(static_cast<double>(j) + 1.0);
  };
  const double log_peak = log_term(peak);
  CompensatedSum sum;
  for (std::size_t j = 0; j < n; ++j) sum.add(std::exp(log_term(j) - log_peak));
  return log_peak + std::log(sum.value());
}

// e^{-x} sum_{j>=n} x^j / j! for 0 < x < n, where the terms fall off
// geometrically from the first one.
inline double lower_tail_below_order(std::size_t n, double x) {
  const double nd = static_cast<double>(n);
  const double log_first = -x + nd * std::log(x) - std::lgamma(nd + 1.0);
  CompensatedSum sum;
  double term = 1.0;
  for (std::size_t j = n; term > 1e-18 * sum.value() || j == n; ++j) {
    sum.add(term);
    term *= x / static_cast<double>(j + 1);
  }
  return std::exp(log_first + std::log(sum.value()));
}

} // namespace detail

/// log of e^{-x} sum_{j<N} x^j/j!. Below x = N the value is close to 0 and is
/// taken as log1p of the (small) complementary sum.
inline double log_regularized_upper_tail(std::size_t n, double x) {
  if (n < 1) throw ConfigError("incomplete gamma order must be >= 1");
  if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("incomplete gamma argument must be finite and >= 0");
  if (x == 0.0) return 0.0;
  if (x < static_cast<double>(n)) return std::log1p(-detail::lower_tail_below_order(n, x));
  return -x + detail::log_partial_exp_sum(n, x);
}

/// Q(N, x) = e^{-x} sum_{j=0}^{N-1} x^j/j! = 1 - gamma(N, x)/(N-1)!, in [0, 1].
inline double regularized_upper_tail(std::size_t n, double x) {
  return std::clamp(std::exp(log_regularized_upper_tail(n, x)), 0.0, 1.0);
}

struct TruncatedCoherentProfile {
  double excitation_scale = 0.0; // x = (J t)^2
  Eigen::VectorXcd amplitudes;   // sites 1..N
  double normalization = 1.0;    // N_c
  double log_normalization = 0.0;

  std::vector<double> probabilities() const {
    std::vector<double> p(static_cast<std::size_t>(amplitudes.size()));
    for (Eigen::Index k = 0; k < amplitudes.size(); ++k) p[static_cast<std::size_t>(k)] = std::norm(amplitudes(k));
    return p;
  }
};

/// Amplitudes N_c (-iJt)^{k-1} / sqrt((k-1)!) for k = 1..N with
/// N_c = e^{-x/2} / sqrt(Q(N, x)), x = (Jt)^2. Magnitudes are assembled in
/// log form, which keeps large x finite.
inline TruncatedCoherentProfile truncated_coherent_amplitudes(double coupling, double t, std::size_t n_sites) {
  if (!(coupling > 0.0) || !std::isfinite(coupling)) throw ConfigError("J must be positive");
  if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("t must be finite and >= 0");
  if (n_sites < 1) throw ConfigError("need at least one site");

  const double jt = coupling * t;
  TruncatedCoherentProfile out;
  out.excitation_scale = jt * jt;
  out.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_sites));
  if (jt == 0.0) {
    out.amplitudes(0) = 1.0;
    return out;
  }

  // N_c = e^{-x/2} / sqrt(Q) = 1 / sqrt(sum_{j<N} x^j / j!).
  const double x = out.excitation_scale;
  out.log_normalization = -0.5 * detail::log_partial_exp_sum(n_sites, x);
  out.normalization = std::exp(out.log_normalization);
  const double log_jt = std::log(jt);
  static constexpr complex minus_i_powers[4] = {{1.0, 0.0}, {0.0, -1.0}, {-1.0, 0.0}, {0.0, 1.0}};
  for (std::size_t k = 1; k <= n_sites; ++k) {
    const double j = static_cast<double>(k - 1);
    const double log_mag = out.log_normalization + j * log_jt - 0.5 * std::lgamma(j + 1.0);
    out.amplitudes(static_cast<Eigen::Index>(k - 1)) = std::exp(log_mag) * minus_i_powers[(k - 1) % 4];
  }
  return out;
}

} // namespace gfsim

#endif
