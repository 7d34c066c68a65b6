#ifndef GFSIM_DYNAMICS_HPP
#define GFSIM_DYNAMICS_HPP

// Exact closed-system evolution in the vacuum + single-excitation space by
// spectral decomposition of the site-block Hamiltonian.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gfsim/errors.hpp"
#include "gfsim/model.hpp"

namespace gfsim {

/// Amplitudes over {vacuum, site 1..N}; index 0 is the vacuum.
class ExcitationState {
public:
  static constexpr double norm_tolerance = 1e-10;

  explicit ExcitationState(Eigen::VectorXcd amplitudes) : a_(std::move(amplitudes)) {
    if (a_.size() < 2) throw ConfigError("state needs a vacuum entry and at least one site");
    const double err = std::abs(a_.squaredNorm() - 1.0);
    if (!(err <= norm_tolerance)) throw NumericalError("state is not normalized", err);
  }

  /// One photon in cavity k (1-based).
  static ExcitationState site(std::size_t n_sites, std::size_t k) {
    check_site(n_sites, k);
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_sites + 1));
    a(static_cast<Eigen::Index>(k)) = 1.0;
    return ExcitationState(std::move(a));
  }

  static ExcitationState vacuum(std::size_t n_sites) {
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_sites + 1));
    a(0) = 1.0;
    return ExcitationState(std::move(a));
  }

  /// alpha|vac>> + beta|k>>: cavity k holds the qubit alpha|0> + beta|1>.
  static ExcitationState qubit(std::size_t n_sites, std::size_t k, complex alpha, complex beta) {
    check_site(n_sites, k);
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_sites + 1));
    a(0) = alpha;
    a(static_cast<Eigen::Index>(k)) = beta;
    return ExcitationState(std::move(a));
  }

  std::size_t n_sites() const noexcept { return static_cast<std::size_t>(a_.size() - 1); }
  const Eigen::VectorXcd& amplitudes() const noexcept { return a_; }
  complex vacuum_amplitude() const { return a_(0); }
  complex site_amplitude(std::size_t k) const { return a_(static_cast<Eigen::Index>(k)); }
  auto site_block() const { return a_.tail(a_.size() - 1); }

private:
  static void check_site(std::size_t n_sites, std::size_t k) {
    if (k < 1 || k > n_sites)
      throw ConfigError("site " + std::to_string(k) + " outside 1.." + std::to_string(n_sites));
  }

  Eigen::VectorXcd a_;
};

/// H = V diag(eigenvalues) V^dagger with ascending eigenvalues.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors; // columns

  std::size_t dim() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }

  /// e^{-iHt} on the site block.
  Eigen::MatrixXcd propagator(double t) const {
    return eigenvectors * phases(t).asDiagonal() * eigenvectors.adjoint();
  }

  Eigen::VectorXcd phases(double t) const {
    Eigen::VectorXcd p(eigenvalues.size());
    for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) p(j) = std::polar(1.0, -eigenvalues(j) * t);
    return p;
  }

  /// <<n| e^{-iHt} |m>>, 1-based sites.
  complex amplitude(std::size_t n, std::size_t m, double t) const {
    const auto rn = static_cast<Eigen::Index>(n - 1);
    const auto rm = static_cast<Eigen::Index>(m - 1);
    if (t == 0.0) return rn == rm ? 1.0 : 0.0;
    complex acc{};
    for (Eigen::Index j = 0; j < eigenvalues.size(); ++j)
      acc += eigenvectors(rn, j) * std::polar(1.0, -eigenvalues(j) * t) * std::conj(eigenvectors(rm, j));
    return acc;
  }
};

/// Diagonalizes a Hermitian tridiagonal matrix. The bond phases are gauged
/// away first, so the work is done on a real symmetric tridiagonal matrix; the
/// phases are restored on the eigenvectors afterwards.
inline SpectralDecomposition decompose(const HamiltonianMatrix& h) {
  constexpr double tolerance = 1e-10;
  const auto n = static_cast<Eigen::Index>(h.dim());
  const auto& m = h.matrix();

  Eigen::VectorXd diag = m.diagonal().real();
  Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 0));
  Eigen::VectorXcd gauge(n);
  gauge(0) = 1.0;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const complex hop = m(k, k + 1);
    const double mag = std::abs(hop);
    sub(k) = mag;
    gauge(k + 1) = mag > 0.0 ? gauge(k) * std::conj(hop / mag) : gauge(k);
  }

  SpectralDecomposition out;
  if (n == 1) {
    out.eigenvalues = diag;
    out.eigenvectors = Eigen::MatrixXcd::Identity(1, 1);
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw NumericalError("tridiagonal eigensolver did not converge", std::nan(""));

  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = gauge.asDiagonal() * solver.eigenvectors().cast<complex>();

  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  const Eigen::MatrixXcd rebuilt =
      out.eigenvectors * out.eigenvalues.cast<complex>().asDiagonal() * out.eigenvectors.adjoint();
  const double residual = (rebuilt - m).cwiseAbs().maxCoeff() / scale;
  const double ortho =
      (out.eigenvectors.adjoint() * out.eigenvectors - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (residual > tolerance) throw NumericalError("eigendecomposition does not reconstruct H", residual);
  if (ortho > tolerance) throw NumericalError("eigenvectors are not orthonormal", ortho);
  return out;
}

/// Evolves the state for time t under the decomposed Hamiltonian. The vacuum
/// has zero energy and is left untouched. U(0) is the identity exactly.
inline ExcitationState evolve(const ExcitationState& state, const SpectralDecomposition& spec, double t) {
  if (!std::isfinite(t)) throw ConfigError("evolution time must be finite");
  if (state.n_sites() != spec.dim())
    throw ConfigError("state and Hamiltonian dimensions differ");
  if (t == 0.0) return state;
  Eigen::VectorXcd out = state.amplitudes();
  const Eigen::VectorXcd coeffs = spec.eigenvectors.adjoint() * state.site_block();
  out.tail(out.size() - 1) = spec.eigenvectors * spec.phases(t).cwiseProduct(coeffs);
  return ExcitationState(std::move(out));
}

/// P_k = |c_k|^2 for k = 1..N.
inline std::vector<double> site_probabilities(const ExcitationState& state) {
  std::vector<double> p(state.n_sites());
  for (std::size_t k = 1; k <= state.n_sites(); ++k) p[k - 1] = std::norm(state.site_amplitude(k));
  return p;
}

/// |<<n| e^{-iHt} |m>>|^2.
inline double transfer_probability(std::size_t m, std::size_t n, const SpectralDecomposition& spec, double t) {
  const std::size_t dim = spec.dim();
  if (m < 1 || n < 1 || m > dim || n > dim) throw ConfigError("site index out of range");
  return std::min(1.0, std::norm(spec.amplitude(n, m, t)));
}

/// Uniform time grid, both ends included.
struct TimeGrid {
  double t_start = 0.0;
  double t_end = 1.0;
  std::size_t samples = 2000;

  void validate() const {
    if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_end > t_start))
      throw ConfigError("time grid must be finite with t_end > t_start");
    if (samples < 2) throw ConfigError("time grid needs at least two samples");
  }

  std::vector<double> points() const {
    validate();
    std::vector<double> t(samples);
    const double step = (t_end - t_start) / static_cast<double>(samples - 1);
    for (std::size_t i = 0; i < samples; ++i) t[i] = t_start + step * static_cast<double>(i);
    t.back() = t_end;
    return t;
  }
};

inline std::vector<double> transfer_probability_curve(std::size_t m, std::size_t n,
                                                      const SpectralDecomposition& spec,
                                                      const std::vector<double>& times) {
  std::vector<double> p(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) p[i] = transfer_probability(m, n, spec, times[i]);
  return p;
}

} // namespace gfsim

#endif
