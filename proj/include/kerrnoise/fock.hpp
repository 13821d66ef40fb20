#pragma once

// Truncated single-mode Fock space: coherent-state amplitudes, Poisson photon
// statistics and dense density operators.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "kerrnoise/error.hpp"

namespace kerrnoise {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kDefaultTailTol = 1e-12;
inline constexpr double kMaxTailTol = 1e-3;
inline constexpr std::size_t kMinNMax = 29;

/// Highest retained Fock index. The matrix dimension is n_max + 1.
class FockDim {
 public:
  explicit FockDim(std::size_t n_max) : n_max_(n_max) {
    detail::require(n_max >= 1, "FockDim: n_max must be >= 1");
  }

  std::size_t n_max() const noexcept { return n_max_; }
  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(n_max_ + 1); }

  friend bool operator==(FockDim a, FockDim b) noexcept { return a.n_max_ == b.n_max_; }

 private:
  std::size_t n_max_;
};

/// Dimensionless complex field amplitude together with its mean photon number.
struct CoherentAmplitude {
  Complex value{};
  double mean_photon_number = 0.0;

  CoherentAmplitude() = default;
  explicit CoherentAmplitude(Complex zeta) : value(zeta), mean_photon_number(std::norm(zeta)) {
    detail::require(std::isfinite(zeta.real()) && std::isfinite(zeta.imag()),
                    "CoherentAmplitude: non-finite amplitude");
  }

  /// Real positive amplitude sqrt(mean).
  static CoherentAmplitude from_mean_photon_number(double mean) {
    detail::require(std::isfinite(mean) && mean >= 0.0,
                    "CoherentAmplitude: mean photon number must be finite and >= 0");
    CoherentAmplitude a(Complex(std::sqrt(mean), 0.0));
    a.mean_photon_number = mean;
    return a;
  }
};

/// log of e^{-mean} mean^k / k!; mean = 0 gives 0 for k = 0 and -inf otherwise.
inline double log_poisson(double mean, std::size_t k) {
  if (mean == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
}

/// P(K > n_max) for K ~ Poisson(mean).
inline double poisson_tail(double mean, std::size_t n_max) {
  detail::require(std::isfinite(mean) && mean >= 0.0, "poisson_tail: mean must be finite and >= 0");
  if (mean == 0.0) return 0.0;
  return boost::math::gamma_p(static_cast<double>(n_max) + 1.0, mean);
}

/// Smallest n_max >= max(29, ceil(mean + 10 sqrt(mean))) whose Poisson tail is below tail_tol.
inline FockDim truncation_dimension(double mean_photon, double tail_tol = kDefaultTailTol) {
  detail::require(std::isfinite(mean_photon) && mean_photon >= 0.0,
                  "truncation_dimension: mean photon number must be finite and >= 0");
  detail::require(std::isfinite(tail_tol) && tail_tol > 0.0 && tail_tol <= kMaxTailTol,
                  "truncation_dimension: tail_tol must lie in (0, 1e-3]");
  auto n_max = std::max<std::size_t>(
      kMinNMax, static_cast<std::size_t>(std::ceil(mean_photon + 10.0 * std::sqrt(mean_photon))));
  while (poisson_tail(mean_photon, n_max) >= tail_tol) ++n_max;
  return FockDim(n_max);
}

inline void require_tail(double mean, FockDim dim, double tail_tol, const char* who) {
  const double tail = poisson_tail(mean, dim.n_max());
  if (!(tail < tail_tol)) {
    throw DimensionTooSmall(std::string(who) + ": Poisson tail " + std::to_string(tail) +
                            " beyond n_max=" + std::to_string(dim.n_max()) +
                            " exceeds tail tolerance for mean photon number " +
                            std::to_string(mean));
  }
}

/// Components e^{-|zeta|^2/2} zeta^k / sqrt(k!) for k = 0..n_max, without any tail check.
/// Needed where a truncated vector is exact by construction (e.g. overlaps with a
/// state living in the first n_max+1 levels).
inline ComplexVector coherent_amplitudes(Complex zeta, std::size_t n_max) {
  ComplexVector out = ComplexVector::Zero(static_cast<Eigen::Index>(n_max + 1));
  const double mean = std::norm(zeta);
  if (mean == 0.0) {
    out(0) = 1.0;
    return out;
  }
  const double phase = std::arg(zeta);
  for (std::size_t k = 0; k <= n_max; ++k) {
    const double modulus = std::exp(0.5 * log_poisson(mean, k));
    out(static_cast<Eigen::Index>(k)) = std::polar(modulus, static_cast<double>(k) * phase);
  }
  return out;
}

inline ComplexVector coherent_state_vector(const CoherentAmplitude& zeta, FockDim dim,
                                           double tail_tol = kDefaultTailTol) {
  require_tail(zeta.mean_photon_number, dim, tail_tol, "coherent_state_vector");
  return coherent_amplitudes(zeta.value, dim.n_max());
}

struct PoissonWeights {
  double mean = 0.0;
  RealVector weights;
};

inline PoissonWeights poisson_weights(double mean, FockDim dim) {
  detail::require(std::isfinite(mean) && mean >= 0.0,
                  "poisson_weights: mean must be finite and >= 0");
  PoissonWeights out{mean, RealVector(dim.size())};
  for (Eigen::Index k = 0; k < dim.size(); ++k) {
    // Same square-root route as coherent_amplitudes so |psi_k|^2 == p_k to round-off.
    const double a = std::exp(0.5 * log_poisson(mean, static_cast<std::size_t>(k)));
    out.weights(k) = a * a;
  }
  return out;
}

/// Truncated Fock-basis density matrix, entry (m, n) = <m|rho|n>.
class DensityOperator {
 public:
  explicit DensityOperator(ComplexMatrix elements)
      : dim_(checked_dim(elements)), elements_(std::move(elements)) {}

  FockDim dim() const noexcept { return dim_; }
  Eigen::Index size() const noexcept { return elements_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return elements_; }
  Complex operator()(Eigen::Index m, Eigen::Index n) const { return elements_(m, n); }
  Complex trace() const { return elements_.trace(); }

  /// Projector |psi><psi| onto an (unnormalised) vector.
  static DensityOperator projector(const ComplexVector& psi) {
    return DensityOperator(psi * psi.adjoint());
  }

 private:
  static FockDim checked_dim(const ComplexMatrix& m) {
    detail::require(m.rows() == m.cols(), "DensityOperator: matrix must be square");
    detail::require(m.rows() >= 2, "DensityOperator: dimension must be >= 2");
    return FockDim(static_cast<std::size_t>(m.rows() - 1));
  }

  FockDim dim_;
  ComplexMatrix elements_;
};

struct ValidationTolerances {
  double hermiticity = 1e-12;
  double trace = kDefaultTailTol;
  double min_eigenvalue = -1e-10;
};

struct DensityReport {
  double hermiticity_deviation = 0.0;
  double trace_deviation = 0.0;
  double min_eigenvalue = 0.0;
  bool hermitian = true;
  bool unit_trace = true;
  bool positive_semidefinite = true;

  bool valid() const noexcept { return hermitian && unit_trace && positive_semidefinite; }
};

inline DensityReport validate_density_operator(const ComplexMatrix& rho,
                                               const ValidationTolerances& tol = {}) {
  detail::require(rho.rows() == rho.cols() && rho.rows() > 0,
                  "validate_density_operator: matrix must be square and non-empty");
  DensityReport report;
  const Eigen::Index n = rho.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      report.hermiticity_deviation =
          std::max(report.hermiticity_deviation, std::abs(rho(i, j) - std::conj(rho(j, i))));
  report.trace_deviation = std::abs(rho.trace() - Complex(1.0, 0.0));

  const ComplexMatrix hermitian_part = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("validate_density_operator: eigensolver failed");
  report.min_eigenvalue = es.eigenvalues().minCoeff();

  // Summation round-off allowance on top of the truncation tolerance.
  const double trace_slack = 16.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
  report.hermitian = report.hermiticity_deviation <= tol.hermiticity;
  report.unit_trace = report.trace_deviation <= tol.trace + trace_slack;
  report.positive_semidefinite = report.min_eigenvalue >= tol.min_eigenvalue;
  return report;
}

inline DensityReport validate_density_operator(const DensityOperator& rho,
                                               const ValidationTolerances& tol = {}) {
  return validate_density_operator(rho.matrix(), tol);
}

}  // namespace kerrnoise
