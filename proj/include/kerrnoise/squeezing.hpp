#pragma once

// Linearised Kerr squeezing of a phase-diffused coherent state. Quadratures are
// q = a e^{-i..} + h.c. and p = -i a e^{-i..} + h.c., so the vacuum variance is 1.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "kerrnoise/error.hpp"
#include "kerrnoise/fock.hpp"
#include "kerrnoise/kerr_channel.hpp"

namespace kerrnoise {

/// Output intensity zeta^2 = tau nbar, squeezing parameter r and phase variance sigma2.
class SqueezingInput {
 public:
  SqueezingInput(double zeta2, double r, double sigma2)
      : SqueezingInput(zeta2, r, std::sinh(r), sigma2) {}

  static SqueezingInput from_sinh_r(double zeta2, double sinh_r, double sigma2) {
    return SqueezingInput(zeta2, std::asinh(sinh_r), sinh_r, sigma2);
  }

  /// sinh r = 2 mu z zeta^2 = 2 kappa (-log tau) tau nbar, sigma2 from the Gaussian model.
  static SqueezingInput from_channel(const MediumParams& medium, const ChannelGeometry& geom,
                                     double n_bar) {
    detail::require(std::isfinite(n_bar) && n_bar >= 0.0, "SqueezingInput: n_bar must be >= 0");
    const double zeta2 = geom.tau * n_bar;
    const double sinh_r = 2.0 * medium.kappa * geom.attenuation() * zeta2;
    const auto noise =
        gaussian_params(medium, geom, CoherentAmplitude::from_mean_photon_number(n_bar));
    return from_sinh_r(zeta2, sinh_r, noise.sigma2);
  }

  double zeta2() const noexcept { return zeta2_; }
  double r() const noexcept { return r_; }
  double sinh_r() const noexcept { return sinh_r_; }
  double sigma2() const noexcept { return sigma2_; }

 private:
  SqueezingInput(double zeta2, double r, double sinh_r, double sigma2)
      : zeta2_(zeta2), r_(r), sinh_r_(sinh_r), sigma2_(sigma2) {
    detail::require(std::isfinite(zeta2) && zeta2 >= 0.0, "SqueezingInput: zeta2 must be >= 0");
    detail::require(std::isfinite(r) && r >= 0.0 && std::isfinite(sinh_r),
                    "SqueezingInput: r must be finite and >= 0");
    detail::require(std::isfinite(sigma2) && sigma2 >= 0.0,
                    "SqueezingInput: sigma2 must be >= 0");
  }

  double zeta2_;
  double r_;
  double sinh_r_;
  double sigma2_;
};

struct QuadratureStats {
  double mean_q = 0.0;
  double mean_p = 0.0;
  double var_q = 1.0;
  double var_p = 1.0;
  double cov_qp = 0.0;   // symmetrised covariance
  double theta_opt = 0.0;
  double var_min = 1.0;
};

/// (<cos phi>, <cos 2 phi>) for a zero-mean Gaussian phase of variance sigma2.
inline std::pair<double, double> phase_moments(double sigma2) {
  detail::require(std::isfinite(sigma2) && sigma2 >= 0.0, "phase_moments: sigma2 must be >= 0");
  return {std::exp(-0.5 * sigma2), std::exp(-2.0 * sigma2)};
}

namespace detail {

// Exponentials shared by the second moments, each formed without cancellation.
struct PhaseDamping {
  double one_minus_e1;   // 1 - e^{-sigma2}
  double one_minus_e2;   // 1 - e^{-2 sigma2}
  double e1;             // e^{-sigma2}
  double e2;             // e^{-2 sigma2}
  double one_minus_e4;   // 1 - e^{-4 sigma2}

  explicit PhaseDamping(double sigma2)
      : one_minus_e1(-std::expm1(-sigma2)),
        one_minus_e2(-std::expm1(-2.0 * sigma2)),
        e1(std::exp(-sigma2)),
        e2(std::exp(-2.0 * sigma2)),
        one_minus_e4(-std::expm1(-4.0 * sigma2)) {}
};

}  // namespace detail

/// tan 2 theta = -sinh r / (sinh^2 r + zeta^2 (e^{sigma2} - 1)), theta in (-pi/4, 0].
inline double optimal_angle(const SqueezingInput& in) {
  const double s = in.sinh_r();
  const double denominator = s * s + in.zeta2() * std::expm1(in.sigma2());
  if (s == 0.0) return 0.0;  // isotropic or already diagonal: theta = 0 by convention
  return 0.5 * std::atan2(-s, denominator);
}

/// Smallest quadrature variance over all angles.
///
/// This is the closed form
///   1 + 2 zeta^2 (1 - e^{-s2}) + 2 sinh^2 r
///     - 2 e^{-2 s2} sqrt(sinh^2 r + [sinh^2 r + zeta^2 (e^{s2} - 1)]^2),
/// i.e. the smaller eigenvalue of the quadrature covariance matrix, computed as
/// det / (larger eigenvalue) with the determinant expanded into nonnegative
/// terms. The literal form loses all digits once the subtracted terms dominate.
inline double min_variance(const SqueezingInput& in) {
  const detail::PhaseDamping d(in.sigma2());
  const double z2 = in.zeta2();
  const double s = in.sinh_r();
  const double s2 = s * s;
  const double a2 = d.one_minus_e1 * d.one_minus_e1;

  const double det = 1.0 + 2.0 * (a2 + d.one_minus_e2) * z2 + 4.0 * d.one_minus_e4 * s2 +
                     4.0 * a2 * d.one_minus_e2 * z2 * z2 +
                     4.0 * (a2 * (1.0 + d.e2) + d.one_minus_e2 * d.one_minus_e2) * z2 * s2 +
                     4.0 * d.one_minus_e4 * s2 * s2;
  const double half_trace = 1.0 + 2.0 * z2 * d.one_minus_e1 + 2.0 * s2;
  // (var_p - var_q) / 2 = 2 e^{-2 s2} [sinh^2 r + zeta^2 (e^{s2} - 1)]
  const double half_gap = 2.0 * (d.e2 * s2 + z2 * d.e1 * d.one_minus_e1);
  const double covariance = 2.0 * d.e2 * s;
  return det / (half_trace + std::hypot(half_gap, covariance));
}

inline QuadratureStats quadrature_stats(const SqueezingInput& in) {
  const detail::PhaseDamping d(in.sigma2());
  const double z2 = in.zeta2();
  const double s = in.sinh_r();
  QuadratureStats out;
  out.mean_q = 2.0 * std::sqrt(z2) * std::exp(-0.5 * in.sigma2());
  out.mean_p = 0.0;  // the phase distribution is even
  out.var_q = 1.0 + 2.0 * d.one_minus_e1 * d.one_minus_e1 * z2 + 2.0 * d.one_minus_e2 * s * s;
  out.var_p = 1.0 + 2.0 * d.one_minus_e2 * z2 + 2.0 * (1.0 + d.e2) * s * s;
  out.cov_qp = 2.0 * d.e2 * s;
  out.theta_opt = optimal_angle(in);
  out.var_min = min_variance(in);
  return out;
}

/// Variance of x_theta = q cos theta + p sin theta.
inline double quadrature_variance(const QuadratureStats& stats, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return stats.var_q * c * c + stats.var_p * s * s + 2.0 * stats.cov_qp * s * c;
}

/// g(tau) = (2 - tau - tau (1 - log tau)^2) / (tau log^2 tau) ~ (1 - tau) / 3.
inline double excess_noise_factor(double tau) {
  detail::require(std::isfinite(tau) && tau > 0.0 && tau < 1.0,
                  "excess_noise_factor: tau must lie in (0, 1)");
  const double u = -std::log(tau);
  return loss_noise_coefficient(tau) / (tau * u * u);
}

/// e^{-2r} + g(tau) (1 - e^{-2r}) tanh r.
inline double approx_min_variance(double tau, double r) {
  detail::require(std::isfinite(r) && r >= 0.0, "approx_min_variance: r must be >= 0");
  const double g = excess_noise_factor(tau);
  return std::exp(-2.0 * r) - g * std::expm1(-2.0 * r) * std::tanh(r);
}

/// Large-r estimate of the squeezing floor.
inline double plateau_estimate(double tau) { return (1.0 - tau) / 3.0; }

}  // namespace kerrnoise
