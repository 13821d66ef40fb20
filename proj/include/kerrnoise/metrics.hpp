#pragma once

// State functionals: von Neumann entropy, Uhlmann fidelity, Husimi Q function and
// the Holevo quantity of the continuous phase-shift-keying ring.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "kerrnoise/error.hpp"
#include "kerrnoise/fock.hpp"
#include "kerrnoise/kerr_channel.hpp"

namespace kerrnoise {

enum class LogBase { bits, nats };

inline double log_base_factor(LogBase base) {
  return base == LogBase::bits ? std::numbers::ln2 : 1.0;
}

inline const char* to_string(LogBase base) { return base == LogBase::bits ? "2" : "e"; }

/// Desk-scale cap on the output mean photon number for Holevo evaluations.
inline constexpr double kHolevoMaxTauNbar = 2000.0;

namespace detail {

inline RealVector hermitian_eigenvalues(const ComplexMatrix& m, const char* who) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure(std::string(who) + ": eigensolver failed");
  return es.eigenvalues();
}

// Threshold below which an eigenvalue is indistinguishable from round-off.
inline double roundoff_floor(Eigen::Index n, double largest) {
  return 4.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
         std::max(largest, 0.0);
}

inline double entropy_of_spectrum(const RealVector& eigenvalues, LogBase base) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double p = std::clamp(eigenvalues(i), 0.0, 1.0);
    if (p > 0.0) s -= p * std::log(p);
  }
  return std::max(0.0, s / log_base_factor(base));
}

}  // namespace detail

/// S(rho) = -Tr rho log rho with eigenvalues clipped to [0, 1].
inline double von_neumann_entropy(const DensityOperator& rho, LogBase base = LogBase::bits) {
  return detail::entropy_of_spectrum(
      detail::hermitian_eigenvalues(rho.matrix(), "von_neumann_entropy"), base);
}

/// Shannon entropy of Poisson(mean), summed over the truncation window of tail_tol.
inline double poisson_entropy(double mean, LogBase base = LogBase::bits,
                              double tail_tol = kDefaultTailTol) {
  const auto weights = poisson_weights(mean, truncation_dimension(mean, tail_tol)).weights;
  return detail::entropy_of_spectrum(weights, base);
}

/// F = Tr sqrt(sqrt(rho) sigma sqrt(rho)).
///
/// The square root of rho is taken on its numerical support, and the spectrum of
/// the inner matrix is cut at the same round-off floor; square roots of
/// round-off eigenvalues would otherwise add O(1e-8) spurious weight.
namespace detail {

// Columns v_i sqrt(lambda_i) over the support, so that B B^dagger = rho.
inline ComplexMatrix support_root(const DensityOperator& rho, const char* who) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho.matrix());
  if (es.info() != Eigen::Success) throw NumericalFailure(std::string(who) + ": eigensolver failed");
  const RealVector& w = es.eigenvalues();
  const double floor = roundoff_floor(w.size(), w.maxCoeff());
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i) kept += w(i) > floor ? 1 : 0;
  // ascending order, so the support is the trailing block
  const Eigen::Index first = w.size() - kept;
  ComplexMatrix root = es.eigenvectors().rightCols(kept);
  for (Eigen::Index i = 0; i < kept; ++i) root.col(i) *= std::sqrt(w(first + i));
  return root;
}

}  // namespace detail

/// F = || sqrt(rho) sqrt(sigma) ||_1, from the singular values of B_rho^dagger B_sigma.
inline double uhlmann_fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.size() != sigma.size())
    throw InvalidArgument("uhlmann_fidelity: dimension mismatch (" + std::to_string(rho.size()) +
                          " vs " + std::to_string(sigma.size()) + ")");
  const ComplexMatrix a = detail::support_root(rho, "uhlmann_fidelity");
  const ComplexMatrix b = detail::support_root(sigma, "uhlmann_fidelity");
  if (a.cols() == 0 || b.cols() == 0) return 0.0;
  const ComplexMatrix overlap = a.adjoint() * b;
  Eigen::BDCSVD<ComplexMatrix> svd(overlap);
  if (svd.info() != Eigen::Success) throw NumericalFailure("uhlmann_fidelity: SVD failed");
  return svd.singularValues().sum();
}

struct QGridSpec {
  double re_min = -5.0;
  double re_max = 5.0;
  std::size_t re_points = 101;
  double im_min = -5.0;
  double im_max = 5.0;
  std::size_t im_points = 101;

  static QGridSpec square(double radius, std::size_t points) {
    return {-radius, radius, points, -radius, radius, points};
  }
};

inline constexpr double kQBoundaryMassWarning = 1e-6;

struct QGrid {
  RealVector re_axis;
  RealVector im_axis;
  Eigen::MatrixXd values;      // values(i, j) = Q(re_axis(i) + i im_axis(j))
  double integral = 0.0;       // trapezoidal integral over the grid
  double boundary_mass = 0.0;  // Tr rho - integral, mass the grid misses
  bool radius_warning = false;
};

namespace detail {

inline RealVector linspace(double lo, double hi, std::size_t n) {
  RealVector out(static_cast<Eigen::Index>(n));
  if (n == 1) {
    out(0) = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    out(static_cast<Eigen::Index>(i)) =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

inline double trapezoid_weight(std::size_t i, std::size_t n) {
  return (i == 0 || i + 1 == n) ? 0.5 : 1.0;
}

}  // namespace detail

/// Q(beta) = <beta|rho|beta> / pi on a uniform rectangular grid.
inline QGrid husimi_q(const DensityOperator& rho, const QGridSpec& spec) {
  detail::require(spec.re_points >= 2 && spec.im_points >= 2,
                  "husimi_q: grid needs at least 2 points per axis");
  detail::require(std::isfinite(spec.re_min) && std::isfinite(spec.re_max) &&
                      std::isfinite(spec.im_min) && std::isfinite(spec.im_max) &&
                      spec.re_max > spec.re_min && spec.im_max > spec.im_min,
                  "husimi_q: grid bounds must be finite and increasing");
  QGrid grid;
  grid.re_axis = detail::linspace(spec.re_min, spec.re_max, spec.re_points);
  grid.im_axis = detail::linspace(spec.im_min, spec.im_max, spec.im_points);
  grid.values.resize(static_cast<Eigen::Index>(spec.re_points),
                     static_cast<Eigen::Index>(spec.im_points));

  const std::size_t n_max = rho.dim().n_max();
  const auto cols = static_cast<Eigen::Index>(spec.im_points);
  ComplexMatrix probes(rho.size(), cols);
  for (Eigen::Index i = 0; i < grid.re_axis.size(); ++i) {
    for (Eigen::Index j = 0; j < cols; ++j)
      probes.col(j) = coherent_amplitudes(Complex(grid.re_axis(i), grid.im_axis(j)), n_max);
    const ComplexMatrix applied = rho.matrix() * probes;
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double q = probes.col(j).dot(applied.col(j)).real() / std::numbers::pi;
      grid.values(i, j) = std::max(q, 0.0);
    }
  }

  const double d_re = (spec.re_max - spec.re_min) / static_cast<double>(spec.re_points - 1);
  const double d_im = (spec.im_max - spec.im_min) / static_cast<double>(spec.im_points - 1);
  double integral = 0.0;
  for (std::size_t i = 0; i < spec.re_points; ++i)
    for (std::size_t j = 0; j < spec.im_points; ++j)
      integral += detail::trapezoid_weight(i, spec.re_points) *
                  detail::trapezoid_weight(j, spec.im_points) *
                  grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  grid.integral = integral * d_re * d_im;
  grid.boundary_mass = std::max(0.0, rho.trace().real() - grid.integral);
  grid.radius_warning = grid.boundary_mass > kQBoundaryMassWarning;
  return grid;
}

/// Square grid of radius sqrt(mean) + 5 around the origin.
inline QGridSpec default_qgrid(double mean_photon, std::size_t points = 201) {
  detail::require(std::isfinite(mean_photon) && mean_photon >= 0.0,
                  "default_qgrid: mean photon number must be >= 0");
  return QGridSpec::square(std::sqrt(mean_photon) + 5.0, points);
}

enum class HolevoVariant { gaussian, exact };

inline const char* to_string(HolevoVariant v) {
  return v == HolevoVariant::gaussian ? "gaussian" : "exact";
}

struct HolevoPoint {
  double tau_nbar = 0.0;
  double chi = 0.0;
  double entropy_avg_state = 0.0;
  double entropy_member_state = 0.0;
  LogBase base = LogBase::bits;
};

/// Holevo quantity of coherent states |e^{i phi} zeta0> with uniform phase, sent
/// through the lossy Kerr channel. The phase average erases every off-diagonal
/// element, so the average state is Poisson(tau nbar); each member state has the
/// same entropy for every phi.
inline HolevoPoint holevo_ring(const MediumParams& medium, const ChannelGeometry& geom,
                               double tau_nbar, HolevoVariant variant,
                               LogBase base = LogBase::bits, double tail_tol = kDefaultTailTol) {
  detail::require(std::isfinite(tau_nbar) && tau_nbar >= 0.0,
                  "holevo_ring: tau_nbar must be finite and >= 0");
  detail::require(tau_nbar <= kHolevoMaxTauNbar,
                  "holevo_ring: tau_nbar above the desk-scale cap of 2000");
  detail::require_transmission(geom.tau, "holevo_ring");

  const FockDim dim = truncation_dimension(tau_nbar, tail_tol);
  const auto input = CoherentAmplitude::from_mean_photon_number(tau_nbar / geom.tau);

  HolevoPoint point;
  point.tau_nbar = tau_nbar;
  point.base = base;
  point.entropy_avg_state = poisson_entropy(tau_nbar, base, tail_tol);
  if (variant == HolevoVariant::exact) {
    point.entropy_member_state =
        von_neumann_entropy(exact_output_state(medium, geom, input, dim, tail_tol), base);
  } else {
    const auto output = CoherentAmplitude::from_mean_photon_number(tau_nbar);
    point.entropy_member_state = von_neumann_entropy(
        phase_diffused_state(output, gaussian_params(medium, geom, input), dim, tail_tol), base);
  }
  point.chi = std::max(0.0, point.entropy_avg_state - point.entropy_member_state);
  return point;
}

}  // namespace kerrnoise
