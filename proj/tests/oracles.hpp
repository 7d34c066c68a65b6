#ifndef GFSIM_TESTS_ORACLES_HPP
#define GFSIM_TESTS_ORACLES_HPP

// Reference computations for the tests. None of these reuse the library's
// numerical paths: the matrix exponential is a scaled Taylor series, the
// eigenvalues come from Sturm-sequence bisection, the incomplete gamma is
// summed from the complementary series in long double.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace gfsim::oracle {

/// e^{A} by scaling and squaring of the Taylor series.
inline Eigen::MatrixXcd expm_taylor(const Eigen::MatrixXcd& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXcd scaled = a / std::ldexp(1.0, squarings);
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
  Eigen::MatrixXcd sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

/// e^{-iHt} via expm_taylor.
inline Eigen::MatrixXcd propagator(const Eigen::MatrixXcd& h, double t) {
  return expm_taylor(std::complex<double>(0.0, -t) * h);
}

/// Number of eigenvalues below x of the symmetric tridiagonal (d, e).
inline int sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
  int count = 0;
  double q = d[0] - x;
  if (q < 0) ++count;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (q == 0.0) q = 1e-300;
    q = d[i] - x - e[i - 1] * e[i - 1] / q;
    if (q < 0) ++count;
  }
  return count;
}

/// Ascending eigenvalues by bisection on the Sturm count.
inline std::vector<double> sturm_eigenvalues(const std::vector<double>& d, const std::vector<double>& e) {
  double radius = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double r = std::abs(d[i]);
    if (i > 0) r += std::abs(e[i - 1]);
    if (i + 1 < d.size()) r += std::abs(e[i]);
    radius = std::max(radius, r);
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < d.size(); ++k) {
    double lo = -radius - 1.0;
    double hi = radius + 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (sturm_count(d, e, mid) > static_cast<int>(k))
        hi = mid;
      else
        lo = mid;
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

/// Unit eigenvector of the symmetric tridiagonal (d, e) for eigenvalue
/// estimate lambda, by inverse iteration with a Thomas solve in long double.
inline std::vector<double> inverse_iteration(const std::vector<double>& d, const std::vector<double>& e, double lambda) {
  const std::size_t n = d.size();
  std::vector<long double> x(n, 1.0L), c(n), y(n);
  const long double shift = static_cast<long double>(lambda) * (1.0L + 1e-18L) + 1e-19L;
  for (int it = 0; it < 6; ++it) {
    // Forward sweep of (T - shift) y = x.
    long double diag = d[0] - shift;
    c[0] = n > 1 ? e[0] / diag : 0.0L;
    y[0] = x[0] / diag;
    for (std::size_t i = 1; i < n; ++i) {
      diag = d[i] - shift - e[i - 1] * c[i - 1];
      if (i + 1 < n) c[i] = e[i] / diag;
      y[i] = (x[i] - e[i - 1] * y[i - 1]) / diag;
    }
    for (std::size_t i = n - 1; i-- > 0;) y[i] -= c[i] * y[i + 1];
    long double norm = 0.0L;
    for (auto v : y) norm += v * v;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
  }
  return {x.begin(), x.end()};
}

/// e^{-x} sum_{j<N} x^j/j! computed as 1 - e^{-x} sum_{j>=N} x^j/j! in long double.
inline long double upper_tail_reference(int n, long double x) {
  long double term = std::exp(-x);
  for (int j = 1; j <= n; ++j) term *= x / j; // e^{-x} x^N / N!
  long double tail = 0.0L;
  for (int j = n; j < n + 2000; ++j) {
    tail += term;
    term *= x / (j + 1);
    if (term < 1e-30L * tail) break;
  }
  return 1.0L - tail;
}

/// Closed-form solution of the reduced master equation for uniform decay:
/// the site block is propagated unitarily and damped by e^{-gamma t}, the
/// vacuum-site coherences by e^{-gamma t / 2}, and the vacuum takes the rest.
inline Eigen::MatrixXcd uniform_decay_solution(const Eigen::MatrixXcd& rho0, const Eigen::MatrixXcd& h,
                                               double gamma, double t) {
  const Eigen::Index n = h.rows();
  const Eigen::MatrixXcd u = propagator(h, t);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  out.bottomRightCorner(n, n) = std::exp(-gamma * t) * u * rho0.bottomRightCorner(n, n) * u.adjoint();
  out.bottomLeftCorner(n, 1) = std::exp(-0.5 * gamma * t) * u * rho0.bottomLeftCorner(n, 1);
  out.topRightCorner(1, n) = out.bottomLeftCorner(n, 1).adjoint();
  out(0, 0) = rho0(0, 0) + (1.0 - std::exp(-gamma * t)) * rho0.bottomRightCorner(n, n).trace();
  return out;
}

} // namespace gfsim::oracle

#endif
