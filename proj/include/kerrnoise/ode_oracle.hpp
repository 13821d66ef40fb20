#pragma once

// Independent route to the lossy Kerr output state: classical RK4 integration of
// the interaction-picture master equation written element by element,
//
//   d rho'_mn / dz = alpha/2 [ 2 rho'_{m+1,n+1} sqrt((m+1)(n+1)) e^{2i mu z (m-n)}
//                              - (m+n) rho'_mn ].
//
// Each diagonal j = m - n is an independent chain fed from above, so only the
// j >= 0 half is integrated and the rest follows from Hermiticity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "kerrnoise/error.hpp"
#include "kerrnoise/fock.hpp"
#include "kerrnoise/kerr_channel.hpp"

namespace kerrnoise {

inline constexpr double kDefaultOdeTol = 1e-9;
inline constexpr std::size_t kOdeHeadroom = 20;
inline constexpr std::size_t kOdeStartSteps = 64;
inline constexpr std::size_t kOdeMaxSteps = std::size_t{1} << 20;

struct OdeOracleResult {
  DensityOperator state;
  std::size_t steps = 0;           // RK4 steps behind the returned state
  double max_step_change = 0.0;    // max |rho(steps) - rho(steps/2)| over the output block
  std::size_t integration_n_max = 0;
};

namespace detail {

class LowerTriangleChains {
 public:
  explicit LowerTriangleChains(std::size_t n) : n_(n), offsets_(n + 1, 0) {
    for (std::size_t j = 0; j < n; ++j) offsets_[j + 1] = offsets_[j] + (n - j);
  }

  std::size_t size() const { return offsets_.back(); }
  std::size_t dim() const { return n_; }
  // Element (k + j, k) of the matrix.
  std::size_t index(std::size_t j, std::size_t k) const { return offsets_[j] + k; }
  std::size_t length(std::size_t j) const { return n_ - j; }

 private:
  std::size_t n_;
  std::vector<std::size_t> offsets_;
};

class ElementwiseMasterEquation {
 public:
  ElementwiseMasterEquation(const MediumParams& medium, std::size_t n)
      : alpha_(medium.alpha), mu_(medium.mu), chains_(n) {}

  const LowerTriangleChains& chains() const { return chains_; }

  void derivative(double z, const std::vector<Complex>& x, std::vector<Complex>& dx) const {
    const std::size_t n = chains_.dim();
    for (std::size_t j = 0; j < n; ++j) {
      const Complex feed_phase = std::polar(1.0, 2.0 * mu_ * z * static_cast<double>(j));
      const std::size_t len = chains_.length(j);
      const std::size_t base = chains_.index(j, 0);
      for (std::size_t k = 0; k < len; ++k) {
        const std::size_t m = k + j;
        const double decay = static_cast<double>(m + k);
        Complex value = -decay * x[base + k];
        if (k + 1 < len) {
          const double weight = std::sqrt(static_cast<double>((m + 1) * (k + 1)));
          value += 2.0 * weight * feed_phase * x[base + k + 1];
        }
        dx[base + k] = 0.5 * alpha_ * value;
      }
    }
  }

 private:
  double alpha_;
  double mu_;
  LowerTriangleChains chains_;
};

inline std::vector<Complex> rk4_integrate(const ElementwiseMasterEquation& eq,
                                          std::vector<Complex> x, double z_final,
                                          std::size_t steps) {
  const std::size_t len = x.size();
  std::vector<Complex> k1(len), k2(len), k3(len), k4(len), tmp(len);
  const double h = z_final / static_cast<double>(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    const double z = h * static_cast<double>(s);
    eq.derivative(z, x, k1);
    for (std::size_t i = 0; i < len; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    eq.derivative(z + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < len; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    eq.derivative(z + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < len; ++i) tmp[i] = x[i] + h * k3[i];
    eq.derivative(z + h, tmp, k4);
    for (std::size_t i = 0; i < len; ++i)
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return x;
}

class OdeOracle {
 public:
  OdeOracle(const MediumParams& medium, double z_final, const CoherentAmplitude& input,
            FockDim dim, double tail_tol)
      : z_final_(checked_length(z_final)),
        out_size_(static_cast<std::size_t>(dim.size())),
        n_max_(std::max(dim.n_max(),
                        truncation_dimension(input.mean_photon_number, tail_tol).n_max()) +
               kOdeHeadroom),
        equation_(medium, n_max_ + 1) {
    const ComplexVector psi = coherent_amplitudes(input.value, n_max_);
    const auto& chains = equation_.chains();
    initial_.resize(chains.size());
    for (std::size_t j = 0; j <= n_max_; ++j)
      for (std::size_t k = 0; k < chains.length(j); ++k)
        initial_[chains.index(j, k)] = psi(static_cast<Eigen::Index>(k + j)) *
                                       std::conj(psi(static_cast<Eigen::Index>(k)));
  }

  std::size_t n_max() const { return n_max_; }

  static double checked_length(double z) {
    require(std::isfinite(z) && z >= 0.0, "ode_oracle: z_final must be >= 0");
    return z;
  }

  std::vector<Complex> run(std::size_t steps) const {
    return rk4_integrate(equation_, initial_, z_final_, steps);
  }

  // Largest change over the returned block; non-finite values count as infinite.
  double max_change(const std::vector<Complex>& a, const std::vector<Complex>& b) const {
    const auto& chains = equation_.chains();
    double worst = 0.0;
    for (std::size_t j = 0; j < out_size_; ++j)
      for (std::size_t k = 0; k + j < out_size_; ++k) {
        const std::size_t i = chains.index(j, k);
        const double d = std::abs(a[i] - b[i]);
        if (!std::isfinite(d)) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, d);
      }
    return worst;
  }

  DensityOperator to_state(const std::vector<Complex>& x) const {
    const auto& chains = equation_.chains();
    const auto n = static_cast<Eigen::Index>(out_size_);
    ComplexMatrix rho(n, n);
    for (std::size_t j = 0; j < out_size_; ++j)
      for (std::size_t k = 0; k + j < out_size_; ++k) {
        const Complex v = x[chains.index(j, k)];
        const auto row = static_cast<Eigen::Index>(k + j);
        const auto col = static_cast<Eigen::Index>(k);
        rho(row, col) = v;
        rho(col, row) = std::conj(v);
      }
    for (Eigen::Index i = 0; i < n; ++i) rho(i, i) = rho(i, i).real();
    return DensityOperator(std::move(rho));
  }

 private:
  double z_final_;
  std::size_t out_size_;
  std::size_t n_max_;
  ElementwiseMasterEquation equation_;
  std::vector<Complex> initial_;
};

}  // namespace detail

/// Integrates with `steps` and `2 steps` RK4 steps from the coherent projector at
/// z = 0 and returns the finer solution; throws NonConvergence when the two
/// differ by more than ode_tol in any element of the returned block.
inline OdeOracleResult ode_oracle_integrate(const MediumParams& medium, double z_final,
                                            const CoherentAmplitude& input, FockDim dim,
                                            std::size_t steps, double ode_tol = kDefaultOdeTol,
                                            double tail_tol = kDefaultTailTol) {
  detail::require(steps >= 1, "ode_oracle_integrate: steps must be >= 1");
  const detail::OdeOracle oracle(medium, z_final, input, dim, tail_tol);
  const auto coarse = oracle.run(steps);
  const auto fine = oracle.run(2 * steps);
  const double change = oracle.max_change(coarse, fine);
  if (!(change <= ode_tol)) {
    throw NonConvergence("ode_oracle_integrate: doubling " + std::to_string(steps) +
                         " RK4 steps changed an element by " + std::to_string(change));
  }
  return {oracle.to_state(fine), 2 * steps, change, oracle.n_max()};
}

/// Doubles the RK4 step count from start_steps until the solution moves by at
/// most ode_tol.
inline OdeOracleResult ode_oracle_auto(const MediumParams& medium, double z_final,
                                       const CoherentAmplitude& input, FockDim dim,
                                       double ode_tol = kDefaultOdeTol,
                                       double tail_tol = kDefaultTailTol,
                                       std::size_t start_steps = kOdeStartSteps,
                                       std::size_t max_steps = kOdeMaxSteps) {
  detail::require(start_steps >= 1, "ode_oracle_auto: start_steps must be >= 1");
  const detail::OdeOracle oracle(medium, z_final, input, dim, tail_tol);
  std::size_t steps = start_steps;
  auto previous = oracle.run(steps);
  double change = std::numeric_limits<double>::infinity();
  while (2 * steps <= max_steps) {
    auto current = oracle.run(2 * steps);
    change = oracle.max_change(previous, current);
    steps *= 2;
    if (change <= ode_tol) return {oracle.to_state(current), steps, change, oracle.n_max()};
    previous = std::move(current);
  }
  throw NonConvergence("ode_oracle_auto: no convergence up to " + std::to_string(max_steps) +
                       " RK4 steps (last change " + std::to_string(change) + ")");
}

}  // namespace kerrnoise
