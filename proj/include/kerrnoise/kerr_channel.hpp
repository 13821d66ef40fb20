#pragma once

// Lossy Kerr channel in the interaction picture of the Kerr Hamiltonian mu n^2.
//
// A coherent input |zeta0> propagated over a medium with loss alpha and
// nonlinearity mu emerges (up to the reversible unitary exp(i mu z n^2)) as
//
//   rho'_mn = <m|sqrt(tau) zeta0><sqrt(tau) zeta0|n> exp[-nbar f_tau((m-n) kappa)],
//
// with tau = exp(-alpha z) and kappa = mu / alpha. Expanding f_tau to second order
// turns the damping factor into a Gaussian phase mixture with mean phi0 and
// variance sigma2.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "kerrnoise/error.hpp"
#include "kerrnoise/fock.hpp"

namespace kerrnoise {

/// Loss alpha (1/length), nonlinearity mu (1/length) and their ratio kappa.
struct MediumParams {
  double alpha = 1.0;
  double mu = 0.0;
  double kappa = 0.0;

  static MediumParams from_alpha_mu(double alpha, double mu) {
    detail::require(std::isfinite(alpha) && alpha > 0.0, "MediumParams: alpha must be > 0");
    detail::require(std::isfinite(mu) && mu >= 0.0, "MediumParams: mu must be >= 0");
    return MediumParams{alpha, mu, mu / alpha};
  }

  static MediumParams from_kappa(double kappa, double alpha = 1.0) {
    detail::require(std::isfinite(kappa) && kappa >= 0.0, "MediumParams: kappa must be >= 0");
    detail::require(std::isfinite(alpha) && alpha > 0.0, "MediumParams: alpha must be > 0");
    return MediumParams{alpha, kappa * alpha, kappa};
  }
};

/// Propagation distance z and power transmission tau = exp(-alpha z).
struct ChannelGeometry {
  double z = 0.0;
  double tau = 1.0;

  static ChannelGeometry from_length(double alpha, double z) {
    detail::require(std::isfinite(alpha) && alpha > 0.0, "ChannelGeometry: alpha must be > 0");
    detail::require(std::isfinite(z) && z >= 0.0, "ChannelGeometry: z must be >= 0");
    const double tau = std::exp(-alpha * z);
    detail::require(tau > 0.0, "ChannelGeometry: transmission underflows to zero");
    return ChannelGeometry{z, tau};
  }

  static ChannelGeometry from_tau(double tau, double alpha = 1.0) {
    detail::require(std::isfinite(tau) && tau > 0.0 && tau <= 1.0,
                    "ChannelGeometry: tau must lie in (0, 1]");
    detail::require(std::isfinite(alpha) && alpha > 0.0, "ChannelGeometry: alpha must be > 0");
    return ChannelGeometry{-std::log(tau) / alpha, tau};
  }

  /// -log(tau) = alpha z.
  double attenuation() const { return -std::log(tau); }
};

/// Gaussian phase noise: deterministic shift phi0 (rad) and variance sigma2 (rad^2).
struct PhaseDiffusionParams {
  double phi0 = 0.0;
  double sigma2 = 0.0;
};

/// Fibre nonlinearity (1/(length W)), photon energy (J), loss (1/length) and pulse duration (s).
struct FiberSpec {
  double gamma_nl = 0.0;
  double photon_energy = 0.0;
  double alpha = 0.0;
  double pulse_duration = 0.0;
};

namespace detail {

inline void require_transmission(double tau, const char* who) {
  if (!(std::isfinite(tau) && tau > 0.0 && tau <= 1.0))
    throw InvalidArgument(std::string(who) + ": tau must lie in (0, 1]");
}

// e^{-u} * sum_{k >= first} u^k / k!, i.e. the Poisson(u) tail P(K >= first).
// Small-u series; exact zero at u = 0.
inline double exp_series_tail(double u, int first) {
  if (u == 0.0) return 0.0;
  double term = 1.0;
  for (int k = 1; k <= first; ++k) term *= u / k;
  double sum = 0.0;
  for (int k = first; k < first + 200; ++k) {
    sum += term;
    term *= u / (k + 1);
    if (term < 1e-18 * sum) break;
  }
  return std::exp(-u) * sum;
}

}  // namespace detail

/// 1 - tau + tau log(tau), the coefficient of the loss-induced phase shift.
inline double loss_phase_coefficient(double tau) {
  detail::require_transmission(tau, "loss_phase_coefficient");
  const double u = -std::log(tau);
  if (u < 1.0) return detail::exp_series_tail(u, 2);
  return 1.0 - tau * (1.0 + u);
}

/// 2 - tau - tau (1 - log tau)^2, the coefficient of the phase variance.
inline double loss_noise_coefficient(double tau) {
  detail::require_transmission(tau, "loss_noise_coefficient");
  const double u = -std::log(tau);
  if (u < 1.0) return 2.0 * detail::exp_series_tail(u, 3);
  return 2.0 - tau * (2.0 + 2.0 * u + u * u);
}

/// f_tau(x) = 1 - tau - (1 - tau^{1-2ix}) / (1 - 2ix) with x = (m-n) kappa.
///
/// Evaluated as [-2ix(1-tau) + tau expm1(-2ix log tau)] / (1 - 2ix), which is the
/// same function without the cancellation of the direct form for small |x|.
inline Complex f_tau(double tau, double x) {
  detail::require_transmission(tau, "f_tau");
  detail::require(std::isfinite(x), "f_tau: argument must be finite");
  const double y = -2.0 * x * std::log(tau);
  const double half_sin = std::sin(0.5 * y);
  const Complex expm1_iy(-2.0 * half_sin * half_sin, std::sin(y));
  const Complex numerator = Complex(0.0, -2.0 * x * (1.0 - tau)) + tau * expm1_iy;
  return numerator / Complex(1.0, -2.0 * x);
}

/// Second-order expansion -2i(1-tau+tau log tau) x + [4-2tau-2tau(1-log tau)^2] x^2.
inline Complex f_tau_quadratic(double tau, double x) {
  detail::require_transmission(tau, "f_tau_quadratic");
  detail::require(std::isfinite(x), "f_tau_quadratic: argument must be finite");
  return {2.0 * loss_noise_coefficient(tau) * x * x, -2.0 * loss_phase_coefficient(tau) * x};
}

inline PhaseDiffusionParams gaussian_params(const MediumParams& medium, const ChannelGeometry& geom,
                                            const CoherentAmplitude& input) {
  const double nbar = input.mean_photon_number;
  const double kappa = medium.kappa;
  return {2.0 * kappa * nbar * loss_phase_coefficient(geom.tau),
          4.0 * kappa * kappa * nbar * loss_noise_coefficient(geom.tau)};
}

namespace detail {

// rho_mn = psi_m conj(psi_n) d_{m-n}, with d_{-j} = conj(d_j) and d given for j >= 0.
inline ComplexMatrix toeplitz_modulated(const ComplexVector& psi, const std::vector<Complex>& d) {
  const Eigen::Index n = psi.size();
  ComplexMatrix rho(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    for (Eigen::Index row = col; row < n; ++row) {
      const Complex v = psi(row) * std::conj(psi(col)) * d[static_cast<std::size_t>(row - col)];
      rho(row, col) = v;
      rho(col, row) = std::conj(v);
    }
    rho(col, col) = std::norm(psi(col)) * d[0].real();
  }
  return rho;
}

}  // namespace detail

/// Interaction-picture output state for a coherent input (Kerr unitary excluded).
inline DensityOperator exact_output_state(const MediumParams& medium, const ChannelGeometry& geom,
                                          const CoherentAmplitude& input, FockDim dim,
                                          double tail_tol = kDefaultTailTol) {
  detail::require_transmission(geom.tau, "exact_output_state");
  const double nbar = input.mean_photon_number;
  const double out_mean = geom.tau * nbar;
  require_tail(out_mean, dim, tail_tol, "exact_output_state");

  const ComplexVector psi = coherent_amplitudes(std::sqrt(geom.tau) * input.value, dim.n_max());
  // The damping factor depends only on m - n.
  std::vector<Complex> damping(static_cast<std::size_t>(dim.size()));
  damping[0] = 1.0;
  for (std::size_t j = 1; j < damping.size(); ++j)
    damping[j] = std::exp(-nbar * f_tau(geom.tau, static_cast<double>(j) * medium.kappa));
  return DensityOperator(detail::toeplitz_modulated(psi, damping));
}

/// Gaussian phase mixture of |e^{i phi} zeta>, built from its closed-form elements
/// <m|zeta><zeta|n> exp[i(m-n) phi0 - (m-n)^2 sigma2 / 2].
inline DensityOperator phase_diffused_state(const CoherentAmplitude& zeta,
                                            const PhaseDiffusionParams& noise, FockDim dim,
                                            double tail_tol = kDefaultTailTol) {
  detail::require(std::isfinite(noise.phi0) && std::isfinite(noise.sigma2) && noise.sigma2 >= 0.0,
                  "phase_diffused_state: phi0 must be finite and sigma2 >= 0");
  require_tail(zeta.mean_photon_number, dim, tail_tol, "phase_diffused_state");

  const ComplexVector psi = coherent_amplitudes(zeta.value, dim.n_max());
  std::vector<Complex> damping(static_cast<std::size_t>(dim.size()));
  for (std::size_t j = 0; j < damping.size(); ++j) {
    const double jd = static_cast<double>(j);
    damping[j] = std::polar(std::exp(-0.5 * jd * jd * noise.sigma2), jd * noise.phi0);
  }
  return DensityOperator(detail::toeplitz_modulated(psi, damping));
}

/// Applies the Kerr unitary exp(i mu z n^2) rho' exp(-i mu z n^2), mapping an
/// interaction-picture state back to the physical frame.
inline DensityOperator to_physical_frame(const DensityOperator& rho, double mu_z) {
  detail::require(std::isfinite(mu_z), "to_physical_frame: mu z must be finite");
  ComplexMatrix out = rho.matrix();
  const Eigen::Index n = out.rows();
  for (Eigen::Index col = 0; col < n; ++col) {
    for (Eigen::Index row = 0; row < n; ++row) {
      const double diff = static_cast<double>((row - col) * (row + col));
      out(row, col) *= std::polar(1.0, mu_z * diff);
    }
  }
  return DensityOperator(std::move(out));
}

/// c_j(z) of the factorised solution, evaluated from alpha, mu and z with the
/// integration constant fixed by c_j(0) = e^{-nbar}.
inline Complex c_factor(const MediumParams& medium, const ChannelGeometry& geom, double n_bar,
                        int j) {
  detail::require(std::isfinite(n_bar) && n_bar >= 0.0, "c_factor: n_bar must be >= 0");
  const double alpha = medium.alpha;
  const double jd = static_cast<double>(j);
  const Complex rate(alpha, -2.0 * medium.mu * jd);
  const Complex ratio = n_bar * alpha / rate;
  const Complex propagated =
      std::exp(Complex(-alpha * geom.z, 2.0 * medium.mu * geom.z * jd));
  const Complex integration_constant = ratio - n_bar;
  return std::exp(-ratio * propagated + integration_constant);
}

/// j-independent factor e^{-tau nbar} such that c_j / norm = exp(-nbar f_tau(j kappa)).
inline double c_factor_normalization(const ChannelGeometry& geom, double n_bar) {
  return std::exp(-geom.tau * n_bar);
}

/// kappa = gamma_NL hbar omega0 / (alpha T).
inline double dimensionless_nonlinearity(const FiberSpec& fiber) {
  detail::require(std::isfinite(fiber.gamma_nl) && fiber.gamma_nl > 0.0 &&
                      std::isfinite(fiber.photon_energy) && fiber.photon_energy > 0.0 &&
                      std::isfinite(fiber.alpha) && fiber.alpha > 0.0 &&
                      std::isfinite(fiber.pulse_duration) && fiber.pulse_duration > 0.0,
                  "dimensionless_nonlinearity: all fibre parameters must be > 0");
  return fiber.gamma_nl * fiber.photon_energy / (fiber.alpha * fiber.pulse_duration);
}

}  // namespace kerrnoise
