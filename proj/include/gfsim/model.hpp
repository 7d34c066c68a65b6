#ifndef GFSIM_MODEL_HPP
#define GFSIM_MODEL_HPP

// Array configuration and the single-excitation matrices of a Glauber-Fock
// coupled-cavity chain.
//
// Basis convention used throughout the library: index 0 is the vacuum, index
// k (1..N) is one photon in cavity k. Matrices that act only on the site block
// (the Hamiltonian and the ladder matrix) are N x N with row k-1 holding site k.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gfsim/errors.hpp"

namespace gfsim {

using complex = std::complex<double>;

/// A (source, target) pair of 1-based site indices.
struct SitePair {
  std::size_t source = 1;
  std::size_t target = 2;

  friend bool operator==(const SitePair&, const SitePair&) = default;
};

/// Physical description of the chain. Frequencies are in units of the first
/// cavity's reference frequency, as are the coupling scale and decay rate.
struct ArrayConfig {
  std::size_t n_sites = 2;
  std::vector<double> frequencies;
  double coupling_scale = 0.0;
  double coupling_phase = 0.0;
  double decay_rate = 0.0;

  void validate() const {
    if (n_sites < 2)
      throw ConfigError("n_sites must be at least 2, got " + std::to_string(n_sites));
    if (frequencies.size() != n_sites)
      throw ConfigError("expected " + std::to_string(n_sites) + " frequencies, got " +
                        std::to_string(frequencies.size()));
    for (double w : frequencies)
      if (!std::isfinite(w)) throw ConfigError("frequencies must be finite");
    if (!(coupling_scale > 0.0) || !std::isfinite(coupling_scale))
      throw ConfigError("coupling scale J must be positive and finite");
    if (!std::isfinite(coupling_phase))
      throw ConfigError("coupling phase must be finite");
    if (!(decay_rate >= 0.0) || !std::isfinite(decay_rate))
      throw ConfigError("decay rate must be non-negative and finite");
  }

  /// All cavities at the same frequency.
  static ArrayConfig resonant(std::size_t n, double coupling, double omega = 1.0) {
    ArrayConfig c{n, std::vector<double>(n, omega), coupling, 0.0, 0.0};
    c.validate();
    return c;
  }

  friend bool operator==(const ArrayConfig&, const ArrayConfig&) = default;
};

/// Wraps a phase into [-pi, pi).
inline double wrap_phase(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(phi + std::numbers::pi, two_pi);
  if (w < 0.0) w += two_pi;
  w -= std::numbers::pi;
  return w >= std::numbers::pi ? -std::numbers::pi : w;
}

/// Hermitian tridiagonal N x N matrix over the site block.
class HamiltonianMatrix {
public:
  explicit HamiltonianMatrix(Eigen::MatrixXcd entries) : m_(std::move(entries)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols())
      throw ConfigError("Hamiltonian must be a non-empty square matrix");
    const double scale = std::max(m_.cwiseAbs().maxCoeff(), 1e-300);
    const double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-14 * scale)
      throw NumericalError("Hamiltonian is not Hermitian", herm / scale);
    for (Eigen::Index i = 0; i < m_.rows(); ++i)
      for (Eigen::Index j = 0; j < m_.cols(); ++j)
        if (std::abs(i - j) > 1 && m_(i, j) != complex{})
          throw ConfigError("Hamiltonian must be tridiagonal");
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const Eigen::MatrixXcd& matrix() const noexcept { return m_; }

  /// Diagonal (site energies) as real numbers.
  Eigen::VectorXd energies() const { return m_.diagonal().real(); }

  /// Hopping amplitude on bond k, i.e. entry (k, k+1) with k 1-based.
  complex bond(std::size_t k) const {
    return m_(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k));
  }

private:
  Eigen::MatrixXcd m_;
};

/// Truncated annihilation-like operator: A|k>> = sqrt(k-1)|k-1>> in 1-based
/// site labels, i.e. entry (k, k+1) = sqrt(k).
class LadderMatrix {
public:
  explicit LadderMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {}

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }

  Eigen::MatrixXd adjoint() const { return m_.transpose(); }
  Eigen::MatrixXd commutator() const { return m_ * m_.transpose() - m_.transpose() * m_; }

private:
  Eigen::MatrixXd m_;
};

/// Square-root-law hopping strengths J*sqrt(k), k = 1..N-1.
inline std::vector<double> build_couplings(double scale, std::size_t n_sites) {
  if (n_sites < 2) throw ConfigError("a chain needs at least two sites");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw ConfigError("coupling scale must be positive and finite");
  std::vector<double> out(n_sites - 1);
  for (std::size_t k = 1; k < n_sites; ++k)
    out[k - 1] = scale * std::sqrt(static_cast<double>(k));
  return out;
}

/// Single-excitation block of the array Hamiltonian: diagonal frequencies,
/// super-diagonal J sqrt(k) e^{i eta}, sub-diagonal its conjugate.
inline HamiltonianMatrix build_hamiltonian(const ArrayConfig& config) {
  config.validate();
  const auto n = static_cast<Eigen::Index>(config.n_sites);
  const auto couplings = build_couplings(config.coupling_scale, config.n_sites);
  const complex phase = std::polar(1.0, config.coupling_phase);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) h(k, k) = config.frequencies[static_cast<std::size_t>(k)];
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const complex hop = couplings[static_cast<std::size_t>(k)] * phase;
    h(k, k + 1) = hop;
    h(k + 1, k) = std::conj(hop);
  }
  return HamiltonianMatrix(std::move(h));
}

inline LadderMatrix build_ladder(std::size_t n_sites) {
  if (n_sites < 2) throw ConfigError("a chain needs at least two sites");
  const auto n = static_cast<Eigen::Index>(n_sites);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) a(k, k + 1) = std::sqrt(static_cast<double>(k + 1));
  return LadderMatrix(std::move(a));
}

/// Inverted-parabola frequency profile that makes sites m and n degenerate:
/// w_k = C + (k-1) - (k-1)^2 / (m+n-2). The profile is symmetric in (m, n).
inline std::vector<double> switching_frequencies(double base, std::size_t m, std::size_t n,
                                                 std::size_t n_sites) {
  if (!(base > 0.0) || !std::isfinite(base))
    throw ConfigError("switching base frequency C must be positive");
  if (n_sites < 2) throw ConfigError("a chain needs at least two sites");
  if (m == n) throw ConfigError("switching profile needs distinct sites, got m = n = " + std::to_string(m));
  if (m < 1 || n < 1 || m > n_sites || n > n_sites)
    throw ConfigError("site index out of range 1.." + std::to_string(n_sites));
  // m != n and both >= 1, so m + n - 2 >= 1. Written as d (D - d) / D so the
  // integer products at k = m and k = n coincide and w_m == w_n bit for bit.
  const double denom = static_cast<double>(m + n - 2);
  std::vector<double> w(n_sites);
  for (std::size_t k = 1; k <= n_sites; ++k) {
    const double d = static_cast<double>(k - 1);
    w[k - 1] = base + d * (denom - d) / denom;
  }
  return w;
}

} // namespace gfsim

#endif
