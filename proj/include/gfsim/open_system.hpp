#ifndef GFSIM_OPEN_SYSTEM_HPP
#define GFSIM_OPEN_SYSTEM_HPP

// Photon loss. Every cavity decays at the same rate gamma through the
// Lindblad dissipator (gamma/2) sum_i (2 a_i rho a_i^+ - a_i^+ a_i rho - rho a_i^+ a_i).
// Restricted to {vacuum, one photon}, that reduces to
//
//   site-site block         d rho_jk/dt = -i[H, rho]_jk - gamma rho_jk
//   vacuum-site coherences  decay at gamma/2 (plus the coherent part)
//   vacuum population       d rho_00/dt = gamma * sum_j rho_jj
//
// The reduced dissipator only involves the projector onto the site block and
// the trace over it, so it keeps the same form in any basis that rotates the
// sites among themselves.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gfsim/dynamics.hpp"
#include "gfsim/errors.hpp"
#include "gfsim/model.hpp"
#include "gfsim/parallel.hpp"
#include "gfsim/protocol.hpp"

namespace gfsim {

inline constexpr double trace_tolerance = 1e-8;
inline constexpr double hermiticity_tolerance = 1e-10;
inline constexpr double positivity_tolerance = 1e-8;
inline constexpr double halving_tolerance = 1e-8;

/// (N+1) x (N+1) density matrix over {vacuum, sites 1..N}.
class DensityMatrix {
public:
  explicit DensityMatrix(Eigen::MatrixXcd rho) : rho_(std::move(rho)) {
    if (rho_.rows() < 2 || rho_.rows() != rho_.cols())
      throw ConfigError("density matrix must be square with at least two levels");
    if (const double h = hermiticity_error(); h > hermiticity_tolerance)
      throw NumericalError("density matrix is not Hermitian", h);
    if (const double t = std::abs(trace() - 1.0); t > trace_tolerance)
      throw NumericalError("density matrix trace is not 1", t);
    if (const double e = min_eigenvalue(); e < -positivity_tolerance)
      throw NumericalError("density matrix has a negative eigenvalue", e);
  }

  static DensityMatrix pure(const ExcitationState& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
  }

  static DensityMatrix maximally_mixed(std::size_t n_sites) {
    const auto d = static_cast<Eigen::Index>(n_sites + 1);
    return DensityMatrix(Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(d));
  }

  const Eigen::MatrixXcd& matrix() const noexcept { return rho_; }
  std::size_t n_sites() const noexcept { return static_cast<std::size_t>(rho_.rows() - 1); }
  double trace() const { return rho_.trace().real(); }
  double population(std::size_t i) const { return rho_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real(); }
  double purity() const { return (rho_ * rho_).trace().real(); }
  double hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

  double min_eigenvalue() const {
    const Eigen::MatrixXcd herm = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

private:
  Eigen::MatrixXcd rho_;
};

namespace detail {

// Adds the reduced dissipator applied to x onto out.
inline void add_dissipator(const Eigen::MatrixXcd& x, double gamma, Eigen::MatrixXcd& out) {
  if (gamma == 0.0) return;
  const Eigen::Index n = x.rows() - 1;
  out.bottomRightCorner(n, n) -= gamma * x.bottomRightCorner(n, n);
  out.topRightCorner(1, n) -= 0.5 * gamma * x.topRightCorner(1, n);
  out.bottomLeftCorner(n, 1) -= 0.5 * gamma * x.bottomLeftCorner(n, 1);
  out(0, 0) += gamma * x.bottomRightCorner(n, n).trace();
}

inline void check_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("decay rate gamma must be finite and >= 0");
}

} // namespace detail

/// Time derivative of rho under the reduced master equation.
inline Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho, const HamiltonianMatrix& h, double gamma) {
  detail::check_gamma(gamma);
  const auto n = static_cast<Eigen::Index>(h.dim());
  if (rho.rows() != n + 1 || rho.cols() != n + 1)
    throw ConfigError("density matrix and Hamiltonian dimensions differ");
  const auto& hs = h.matrix();
  // Full Hamiltonian is diag(0, H): the vacuum row/column carry no energy.
  Eigen::MatrixXcd comm = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  comm.bottomRows(n).noalias() += hs * rho.bottomRows(n);
  comm.rightCols(n).noalias() -= rho.rightCols(n) * hs;
  Eigen::MatrixXcd out = complex(0.0, -1.0) * comm;
  detail::add_dissipator(rho, gamma, out);
  return out;
}

inline Eigen::MatrixXcd lindblad_rhs(const DensityMatrix& rho, const HamiltonianMatrix& h, double gamma) {
  return lindblad_rhs(rho.matrix(), h, gamma);
}

/// Lab frame: RK4 on the master equation as written. Interaction frame: the
/// coherent part is carried exactly by the spectral propagator (the state is
/// held in the energy eigenbasis) and RK4 integrates only what the
/// dissipator does, which allows steps set by gamma instead of by the
/// frequencies.
enum class Frame { lab, interaction };

struct IntegrationOptions {
  Frame frame = Frame::lab;
  std::size_t record_every = 0; // 0: keep only the final state
  bool check_halving = true;
};

struct MasterSolution {
  DensityMatrix final_state;
  std::vector<double> times;
  std::vector<DensityMatrix> samples;
  double dt = 0.0;
  std::size_t steps = 0;
  double halving_delta = 0.0;
  bool converged = false;
};

namespace detail {

inline void check_invariants(const Eigen::MatrixXcd& rho, double t) {
  const auto where = " at t = " + std::to_string(t) + "; step too large?";
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > hermiticity_tolerance) throw NumericalError("Hermiticity lost" + where, herm);
  const double tr = std::abs(rho.trace().real() - 1.0);
  if (tr > trace_tolerance) throw NumericalError("trace drifted" + where, tr);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  const double low = es.eigenvalues().minCoeff();
  if (low < -positivity_tolerance) throw NumericalError("positivity lost" + where, low);
}

// Fixed-step RK4 for a batch of initial states sharing one Hamiltonian.
class MasterIntegrator {
public:
  MasterIntegrator(const HamiltonianMatrix& h, double gamma, Frame frame)
      : h_(h), gamma_(gamma), frame_(frame) {
    if (frame_ == Frame::interaction) {
      const auto spec = decompose(h);
      const Eigen::Index n = static_cast<Eigen::Index>(h.dim());
      energies_ = Eigen::VectorXd::Zero(n + 1);
      energies_.tail(n) = spec.eigenvalues;
      basis_ = Eigen::MatrixXcd::Identity(n + 1, n + 1);
      basis_.bottomRightCorner(n, n) = spec.eigenvectors;
    }
  }

  struct Run {
    std::vector<Eigen::MatrixXcd> finals;
    std::vector<double> times;
    std::vector<Eigen::MatrixXcd> samples; // of the first batch member
  };

  Run run(const std::vector<Eigen::MatrixXcd>& initial, double t_end, std::size_t steps,
          std::size_t record_every) const {
    const double dt = t_end / static_cast<double>(steps);
    std::vector<Eigen::MatrixXcd> state;
    state.reserve(initial.size());
    for (const auto& rho : initial) state.push_back(to_frame(rho));

    Run out;
    const auto record = [&](double t) {
      const auto lab = from_frame(state.front(), t);
      check_invariants(lab, t);
      out.times.push_back(t);
      out.samples.push_back(lab);
    };
    if (record_every > 0) record(0.0);

    const Eigen::Index d = initial.front().rows();
    Eigen::MatrixXcd k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d);
    for (std::size_t s = 0; s < steps; ++s) {
      for (auto& x : state) {
        rhs(x, k1);
        tmp = x + (0.5 * dt) * k1;
        rhs(tmp, k2);
        tmp = x + (0.5 * dt) * k2;
        rhs(tmp, k3);
        tmp = x + dt * k3;
        rhs(tmp, k4);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        flush_tiny(x);
      }
      if (record_every > 0 && (s + 1) % record_every == 0 && s + 1 != steps) record(dt * static_cast<double>(s + 1));
    }
    for (const auto& x : state) {
      out.finals.push_back(from_frame(x, t_end));
      check_invariants(out.finals.back(), t_end);
    }
    if (record_every > 0) {
      out.times.push_back(t_end);
      out.samples.push_back(out.finals.front());
    }
    return out;
  }

private:
  // Long decays leave entries stuck at the smallest subnormal, where every
  // arithmetic operation is slow; anything this small is zero for a
  // trace-one state.
  static void flush_tiny(Eigen::MatrixXcd& x) {
    constexpr double tiny = 1e-290;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      auto& v = x.data()[i];
      if (std::abs(v.real()) < tiny) v.real(0.0);
      if (std::abs(v.imag()) < tiny) v.imag(0.0);
    }
  }

  // Interaction frame phase pattern w_ab = e^{-i (E_a - E_b) t}.
  Eigen::MatrixXcd weights(double t) const {
    if (frame_ == Frame::lab) return {};
    Eigen::VectorXcd p(energies_.size());
    for (Eigen::Index a = 0; a < energies_.size(); ++a) p(a) = std::polar(1.0, -energies_(a) * t);
    return p * p.adjoint();
  }

  Eigen::MatrixXcd to_frame(const Eigen::MatrixXcd& rho) const {
    if (frame_ == Frame::lab) return rho;
    return basis_.adjoint() * rho * basis_;
  }

  Eigen::MatrixXcd from_frame(const Eigen::MatrixXcd& x, double t) const {
    if (frame_ == Frame::lab) return x;
    const Eigen::MatrixXcd eig = weights(t).cwiseProduct(x);
    return basis_ * eig * basis_.adjoint();
  }

  void rhs(const Eigen::MatrixXcd& x, Eigen::MatrixXcd& out) const {
    if (frame_ == Frame::lab) {
      out = lindblad_rhs(x, h_, gamma_);
      return;
    }
    // In the interaction frame the rhs is conj(w) .* D(w .* x). D scales the
    // blocks and reads the site-block trace, where w = 1, so it commutes
    // with the phase pattern and the rhs is D(x).
    out.setZero();
    add_dissipator(x, gamma_, out);
  }

  const HamiltonianMatrix& h_;
  double gamma_;
  Frame frame_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXcd basis_;
};

inline std::size_t step_count(double t_end, double dt) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9)));
}

} // namespace detail

/// Classical RK4 with fixed step (rounded so that t_end is hit exactly). When
/// check_halving is set the run is repeated at dt/2; the finer run is returned
/// and tagged converged if the two final states agree to 1e-8.
inline MasterSolution integrate_master(const DensityMatrix& rho0, const HamiltonianMatrix& h, double gamma,
                                       double t_end, double dt, const IntegrationOptions& options = {}) {
  detail::check_gamma(gamma);
  if (rho0.n_sites() != h.dim()) throw ConfigError("density matrix and Hamiltonian dimensions differ");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be finite and >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (t_end == 0.0) return {rho0, {0.0}, {rho0}, dt, 0, 0.0, true};

  const detail::MasterIntegrator integrator(h, gamma, options.frame);
  const std::size_t steps = detail::step_count(t_end, dt);
  const std::vector<Eigen::MatrixXcd> init{rho0.matrix()};

  auto coarse = integrator.run(init, t_end, steps, options.check_halving ? 0 : options.record_every);
  MasterSolution out{DensityMatrix(coarse.finals.front()), {}, {}, t_end / static_cast<double>(steps), steps, 0.0, false};
  auto* chosen = &coarse;
  decltype(coarse) fine;
  if (options.check_halving) {
    fine = integrator.run(init, t_end, 2 * steps, options.record_every * 2);
    out.halving_delta = (fine.finals.front() - coarse.finals.front()).cwiseAbs().maxCoeff();
    out.converged = out.halving_delta <= halving_tolerance;
    out.final_state = DensityMatrix(fine.finals.front());
    out.dt /= 2.0;
    out.steps *= 2;
    chosen = &fine;
  }
  out.times = std::move(chosen->times);
  for (auto& s : chosen->samples) out.samples.emplace_back(std::move(s));
  return out;
}

/// Uhlmann fidelity against a pure target, which reduces to <Psi|rho|Psi>.
inline double state_fidelity(const DensityMatrix& rho, const ExcitationState& target) {
  if (rho.n_sites() != target.n_sites()) throw ConfigError("state dimensions differ");
  const auto& psi = target.amplitudes();
  return (psi.adjoint() * rho.matrix() * psi)(0, 0).real();
}

struct QubitSample {
  complex alpha;
  complex beta;
};

/// Haar-random qubit alpha|0> + beta|1> with alpha real and non-negative:
/// alpha = cos(t/2), beta = e^{i phi} sin(t/2), cos t ~ U[-1, 1], phi ~ U[0, 2pi).
/// Sample `index` is drawn from its own generator seeded with seed ^ index.
inline QubitSample haar_qubit(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer spreads nearby seeds apart before seeding.
  std::uint64_t z = (seed ^ index) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  std::mt19937_64 gen(z);
  const auto unit = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  const double cos_t = 2.0 * unit() - 1.0;
  const double phi = 2.0 * std::numbers::pi * unit();
  return {complex(std::sqrt(0.5 * (1.0 + cos_t)), 0.0), std::polar(std::sqrt(0.5 * (1.0 - cos_t)), phi)};
}

/// The four qubit states used for the fidelity-versus-time figure.
inline std::vector<QubitSample> fixed_four_states() {
  const double s2 = std::numbers::sqrt2;
  const double s3 = std::numbers::sqrt3;
  return {{0.5, s3 / 2.0},
          {1.0 / s3, complex(0.0, std::sqrt(2.0 / 3.0))},
          {1.0 / s2, 1.0 / s2},
          {s3 / 2.0, 0.5}};
}

enum class Ensemble { haar, fixed_four };

struct AverageOptions {
  Ensemble ensemble = Ensemble::haar;
  double decay_per_step = 0.04; // gamma * dt bound for the RK4 step
  std::size_t min_steps = 64;
  unsigned threads = 0; // 0: thread_count()
};

struct FidelityPoint {
  double gamma_over_J = 0.0;
  double mean_fidelity = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
  double t_star = 0.0;
  double halving_delta = 0.0;
  bool converged = false;
};

/// Evolves the four operators |0><0|, |m><m|, |+><+|, |+i><+i| of the source
/// qubit to time t; together they fix the image of any source qubit state.
struct QubitChannel {
  Eigen::MatrixXcd vac_vac, site_site, vac_site; // images of |0><0|, |m><m|, |0><m|
  double halving_delta = 0.0;
  bool converged = false;

  Eigen::MatrixXcd apply(complex alpha, complex beta) const {
    const complex c = alpha * std::conj(beta);
    return std::norm(alpha) * vac_vac + std::norm(beta) * site_site + c * vac_site + std::conj(c) * vac_site.adjoint();
  }
};

inline QubitChannel qubit_channel(const HamiltonianMatrix& h, double gamma, std::size_t source, double t,
                                  const AverageOptions& options = {}) {
  detail::check_gamma(gamma);
  const auto n = static_cast<Eigen::Index>(h.dim());
  const auto m = static_cast<Eigen::Index>(source);
  if (source < 1 || source > h.dim()) throw ConfigError("source site out of range");
  const auto ket = [&](complex a, complex b) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n + 1);
    v(0) = a;
    v(m) = b;
    return Eigen::MatrixXcd(v * v.adjoint());
  };
  const double r = 1.0 / std::numbers::sqrt2;
  const std::vector<Eigen::MatrixXcd> basis{ket(1.0, 0.0), ket(0.0, 1.0), ket(r, r), ket(r, complex(0.0, r))};

  std::vector<Eigen::MatrixXcd> img = basis;
  QubitChannel ch;
  ch.converged = true;
  if (t > 0.0) {
    const std::size_t steps =
        std::max(options.min_steps, detail::step_count(gamma * t, options.decay_per_step));
    const detail::MasterIntegrator integrator(h, gamma, Frame::interaction);
    const auto coarse = integrator.run(basis, t, steps, 0);
    const auto fine = integrator.run(basis, t, 2 * steps, 0);
    for (std::size_t i = 0; i < basis.size(); ++i)
      ch.halving_delta = std::max(ch.halving_delta, (fine.finals[i] - coarse.finals[i]).cwiseAbs().maxCoeff());
    ch.converged = ch.halving_delta <= halving_tolerance;
    img = fine.finals;
  }
  ch.vac_vac = img[0];
  ch.site_site = img[1];
  const Eigen::MatrixXcd diag = img[0] + img[1];
  ch.vac_site = 0.5 * ((2.0 * img[2] - diag) + complex(0.0, 1.0) * (2.0 * img[3] - diag));
  return ch;
}

inline std::vector<QubitSample> qubit_ensemble(Ensemble ensemble, std::size_t samples, std::uint64_t seed) {
  if (ensemble == Ensemble::fixed_four) return fixed_four_states();
  if (samples < 1) throw ConfigError("need at least one sample");
  std::vector<QubitSample> out;
  out.reserve(samples);
  for (std::size_t j = 0; j < samples; ++j) out.push_back(haar_qubit(seed, j));
  return out;
}

/// Mean transfer fidelity at the planned transfer time over an ensemble of
/// source qubit states, for each gamma/J on the grid. All grid points share
/// one ensemble.
inline std::vector<FidelityPoint> average_transfer_fidelity(const TransferPlan& plan,
                                                            const std::vector<double>& gamma_over_J,
                                                            std::size_t samples, std::uint64_t seed,
                                                            const AverageOptions& options = {}) {
  const auto states = qubit_ensemble(options.ensemble, samples, seed);
  const auto h = build_hamiltonian(plan.config());
  const double t_star = plan.transfer_time;

  std::vector<FidelityPoint> out(gamma_over_J.size());
  parallel_for(
      gamma_over_J.size(),
      [&](std::size_t i) {
        const double g = gamma_over_J[i];
        if (!(g >= 0.0) || !std::isfinite(g)) throw ConfigError("gamma/J values must be finite and >= 0");
        const auto channel = qubit_channel(h, g * plan.coupling_scale, plan.source, t_star, options);
        std::vector<double> f;
        f.reserve(states.size());
        for (const auto& [alpha, beta] : states) {
          const auto psi = ExcitationState::qubit(plan.n_sites, plan.target, alpha, beta);
          const Eigen::MatrixXcd rho = channel.apply(alpha, beta);
          f.push_back((psi.amplitudes().adjoint() * rho * psi.amplitudes())(0, 0).real());
        }
        const double count = static_cast<double>(f.size());
        double mean = 0.0;
        for (double v : f) mean += v;
        mean /= count;
        double var = 0.0;
        for (double v : f) var += (v - mean) * (v - mean);
        var = f.size() > 1 ? var / (count - 1.0) : 0.0;
        out[i] = {g, mean, std::sqrt(var / count), states.size(), t_star, channel.halving_delta, channel.converged};
      },
      options.threads);
  return out;
}

/// n points spaced evenly in log10 between lo and hi inclusive.
inline std::vector<double> log_spaced_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw ConfigError("log grid needs 0 < lo <= hi and n >= 1");
  std::vector<double> g(n);
  if (n == 1) return {lo};
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

} // namespace gfsim

#endif
