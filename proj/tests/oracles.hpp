#pragma once

// Independent reference computations for the tests. None of these call into the
// library's numerical kernels; they follow the defining formulas literally, in
// long double where cancellation would otherwise matter.

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using ld = long double;
using cld = std::complex<long double>;

// log of Poisson(mean) mass at k, via lgammal.
inline ld log_poisson_ld(ld mean, unsigned k) {
  if (mean == 0.0L) return k == 0 ? 0.0L : -INFINITY;
  return -mean + static_cast<ld>(k) * std::log(mean) - std::lgamma(static_cast<ld>(k) + 1.0L);
}

// P(K > n_max) for K ~ Poisson(mean), summing terms above n_max until negligible.
inline ld poisson_tail_direct(ld mean, unsigned n_max) {
  if (mean == 0.0L) return 0.0L;
  ld sum = 0.0L;
  for (unsigned k = n_max + 1;; ++k) {
    const ld term = std::exp(log_poisson_ld(mean, k));
    sum += term;
    if (static_cast<ld>(k) > mean && term < 1e-30L * sum) break;
    if (static_cast<ld>(k) > mean && sum == 0.0L && term == 0.0L) break;
  }
  return sum;
}

// Shannon entropy of Poisson(mean) in nats, direct summation over every
// non-negligible term.
inline ld poisson_entropy_nats(ld mean) {
  if (mean == 0.0L) return 0.0L;
  ld h = 0.0L;
  const unsigned upper = static_cast<unsigned>(mean + 40.0L * std::sqrt(mean) + 60.0L);
  for (unsigned k = 0; k <= upper; ++k) {
    const ld lp = log_poisson_ld(mean, k);
    h -= std::exp(lp) * lp;
  }
  return h;
}

// f_tau(x) = 1 - tau - (1 - tau^{1-2ix}) / (1 - 2ix), literal form in long double.
inline cld f_tau_literal(ld tau, ld x) {
  if (x == 0.0L) return 0.0L;
  const cld s(1.0L, -2.0L * x);
  const cld power = std::exp(s * std::log(tau));
  return (1.0L - tau) - (1.0L - power) / s;
}

// Gauss-Hermite nodes and weights for weight e^{-x^2} by Golub-Welsch.
inline std::pair<std::vector<double>, std::vector<double>> gauss_hermite(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(0.5 * i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  std::vector<double> nodes(n), weights(n);
  const double sqrt_pi = std::sqrt(M_PI);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = sqrt_pi * v0 * v0;
  }
  return {nodes, weights};
}

// Coherent state components e^{-|z|^2/2} z^k / sqrt(k!), in long double.
inline std::vector<cld> coherent_ld(cld zeta, unsigned n_max) {
  std::vector<cld> out(n_max + 1);
  const ld norm2 = std::norm(zeta);
  out[0] = std::exp(-0.5L * norm2);
  for (unsigned k = 1; k <= n_max; ++k) out[k] = out[k - 1] * zeta / std::sqrt(static_cast<ld>(k));
  return out;
}

// Integral over phi of N(phi0, sigma2) |e^{i phi} zeta><e^{i phi} zeta| by
// Gauss-Hermite quadrature with `nodes` points.
inline Eigen::MatrixXcd gaussian_mixture_quadrature(std::complex<double> zeta, double phi0,
                                                    double sigma2, unsigned n_max, int nodes) {
  const auto [x, w] = gauss_hermite(nodes);
  const auto n = static_cast<Eigen::Index>(n_max + 1);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < nodes; ++i) {
    const double phi = phi0 + std::sqrt(2.0 * sigma2) * x[i];
    const auto psi = coherent_ld(cld(zeta) * std::polar(1.0L, static_cast<ld>(phi)), n_max);
    Eigen::VectorXcd v(n);
    for (Eigen::Index k = 0; k < n; ++k) v(k) = std::complex<double>(psi[k]);
    rho += (w[i] / std::sqrt(M_PI)) * v * v.adjoint();
  }
  return rho;
}

// Minimum of a unimodal f on [a, b] by golden-section search.
inline std::pair<double, double> golden_section_min(const std::function<double(double)>& f,
                                                    double a, double b, double tol = 1e-13) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

// Monte Carlo estimates of (<cos phi>, <cos 2 phi>) for phi ~ N(0, sigma2).
inline std::pair<double, double> phase_moments_mc(double sigma2, std::size_t samples,
                                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(sigma2));
  ld c1 = 0.0L, c2 = 0.0L;
  for (std::size_t i = 0; i < samples; ++i) {
    const double phi = normal(rng);
    c1 += std::cos(phi);
    c2 += std::cos(2.0 * phi);
  }
  return {static_cast<double>(c1 / samples), static_cast<double>(c2 / samples)};
}

// Central finite difference.
inline double derivative(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Smallest eigenvalue of the symmetric 2x2 matrix [[a, c], [c, b]] in long double.
inline ld smaller_eigenvalue(ld a, ld b, ld c) {
  Eigen::Matrix<ld, 2, 2> m;
  m << a, c, c, b;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<ld, 2, 2>> es(m);
  return es.eigenvalues()(0);
}

// Quadrature covariance entries from the moment formulas, in long double.
struct Covariance2 {
  ld var_q, var_p, cov;
};

inline Covariance2 covariance_ld(ld zeta2, ld sinh_r, ld sigma2) {
  const ld e1 = std::exp(-sigma2);
  const ld e2 = std::exp(-2.0L * sigma2);
  return {1.0L + 2.0L * (1.0L - e1) * (1.0L - e1) * zeta2 + 2.0L * (1.0L - e2) * sinh_r * sinh_r,
          1.0L + 2.0L * (1.0L - e2) * zeta2 + 2.0L * (1.0L + e2) * sinh_r * sinh_r,
          2.0L * e2 * sinh_r};
}

// Random density matrix G G^dagger / Tr, with G of size n x rank.
inline Eigen::MatrixXcd random_density(Eigen::Index n, Eigen::Index rank, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd g(n, rank);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < rank; ++j) g(i, j) = {normal(rng), normal(rng)};
  Eigen::MatrixXcd rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

}  // namespace oracle
