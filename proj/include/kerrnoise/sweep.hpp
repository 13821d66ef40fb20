#pragma once

// Parameter sweeps over the channel model. Every sweep returns a SweepResult whose
// rows carry the full input tuple, in row-major order of the declared axes with
// each axis sorted ascending.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "kerrnoise/error.hpp"
#include "kerrnoise/fock.hpp"
#include "kerrnoise/kerr_channel.hpp"
#include "kerrnoise/metrics.hpp"
#include "kerrnoise/squeezing.hpp"

namespace kerrnoise {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kSchemaVersion = "kerrnoise.sweep/1";

using Cell = std::variant<double, std::string>;
using Row = std::vector<Cell>;

struct SweepResult {
  std::string schema_version = kSchemaVersion;
  std::string command;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  std::vector<std::string> columns;
  std::vector<Row> rows;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  std::size_t column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw InvalidArgument("SweepResult: no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }

  double number(std::size_t row, const std::string& column) const {
    const auto& cell = rows.at(row).at(column_index(column));
    if (const auto* v = std::get_if<double>(&cell)) return *v;
    throw InvalidArgument("SweepResult: column '" + column + "' is not numeric");
  }

  std::string text(std::size_t row, const std::string& column) const {
    const auto& cell = rows.at(row).at(column_index(column));
    if (const auto* v = std::get_if<std::string>(&cell)) return *v;
    throw InvalidArgument("SweepResult: column '" + column + "' is not text");
  }
};

/// Truncation policy for sweep points.
struct DimPolicy {
  double tail_tol = kDefaultTailTol;
  std::size_t dim_cap = 4096;

  FockDim dimension_for(double mean_photon) const {
    const FockDim dim = truncation_dimension(mean_photon, tail_tol);
    if (static_cast<std::size_t>(dim.size()) > dim_cap)
      throw InvalidArgument("Fock dimension " + std::to_string(dim.size()) +
                            " exceeds the dimension cap " + std::to_string(dim_cap));
    return dim;
  }
};

/// Runs fn(i) for i in [0, count) on a fixed pool of `jobs` workers. Each index is
/// handled exactly once; results must be written to per-index slots.
inline void parallel_for(std::size_t count, std::size_t jobs,
                         const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

inline std::vector<double> sorted_axis(std::vector<double> values, const char* name) {
  detail::require(!values.empty(), std::string(name) + ": axis must not be empty");
  for (double v : values)
    detail::require(std::isfinite(v), std::string(name) + ": axis values must be finite");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

namespace detail {

inline std::string describe(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e))
    return std::string(to_string(err->kind())) + ": " + err->what();
  return std::string("error: ") + e.what();
}

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Evaluates one grid point; numeric outputs become NaN and the message lands in
// the trailing error column when the point fails. `width` counts the input and
// output cells, excluding the error column.
template <typename Compute>
Row guarded_row(Row inputs, std::size_t width, Compute&& compute) {
  Row row = std::move(inputs);
  try {
    const std::vector<double> outputs = compute();
    row.insert(row.end(), outputs.begin(), outputs.end());
    row.emplace_back(std::string());
  } catch (const std::exception& e) {
    row.resize(std::min(row.size(), width));
    while (row.size() < width) row.emplace_back(kNaN);
    row.emplace_back(describe(e));
  }
  return row;
}

}  // namespace detail

/// Rows `kappa,re_f,im_f,re_f_quad,im_f_quad` for one transmission.
inline SweepResult ffunc_table(double tau, std::vector<double> kappas) {
  detail::require_transmission(tau, "ffunc_table");
  kappas = sorted_axis(std::move(kappas), "kappa");
  SweepResult out;
  out.command = "ffunc";
  out.inputs["tau"] = tau;
  out.inputs["kappa"] = kappas;
  out.columns = {"kappa", "re_f", "im_f", "re_f_quad", "im_f_quad"};
  for (double k : kappas) {
    const Complex f = f_tau(tau, k);
    const Complex q = f_tau_quadratic(tau, k);
    out.rows.push_back({k, f.real(), f.imag(), q.real(), q.imag()});
  }
  return out;
}

/// Rows `re,im,q` of a Husimi grid, real axis outermost.
inline SweepResult qfunc_table(const QGrid& grid) {
  SweepResult out;
  out.command = "qfunc";
  out.columns = {"re", "im", "q"};
  out.rows.reserve(static_cast<std::size_t>(grid.values.size()));
  for (Eigen::Index i = 0; i < grid.re_axis.size(); ++i)
    for (Eigen::Index j = 0; j < grid.im_axis.size(); ++j)
      out.rows.push_back({grid.re_axis(i), grid.im_axis(j), grid.values(i, j)});
  return out;
}

/// 1 - F between the exact output state and its Gaussian phase-diffusion model.
inline double gaussian_infidelity(double kappa, const ChannelGeometry& geom, double tau_nbar,
                                  const DimPolicy& policy) {
  detail::require(std::isfinite(tau_nbar) && tau_nbar >= 0.0, "tau_nbar must be >= 0");
  const FockDim dim = policy.dimension_for(tau_nbar);
  const auto medium = MediumParams::from_kappa(kappa);
  const auto input = CoherentAmplitude::from_mean_photon_number(tau_nbar / geom.tau);
  const auto exact = exact_output_state(medium, geom, input, dim, policy.tail_tol);
  const auto model = phase_diffused_state(CoherentAmplitude::from_mean_photon_number(tau_nbar),
                                          gaussian_params(medium, geom, input), dim,
                                          policy.tail_tol);
  return std::clamp(1.0 - uhlmann_fidelity(exact, model), 0.0, 1.0);
}

/// Rows `kappa,tau_nbar,one_minus_f,error`.
inline SweepResult infidelity_map(std::vector<double> kappas, const ChannelGeometry& geom,
                                  std::vector<double> tau_nbars, const DimPolicy& policy = {},
                                  std::size_t jobs = 1) {
  detail::require_transmission(geom.tau, "infidelity_map");
  kappas = sorted_axis(std::move(kappas), "kappa");
  tau_nbars = sorted_axis(std::move(tau_nbars), "tau_nbar");
  SweepResult out;
  out.command = "infidelity";
  out.inputs["tau"] = geom.tau;
  out.inputs["kappa"] = kappas;
  out.inputs["tau_nbar"] = tau_nbars;
  out.columns = {"kappa", "tau_nbar", "one_minus_f", "error"};
  out.rows.resize(kappas.size() * tau_nbars.size());
  parallel_for(out.rows.size(), jobs, [&](std::size_t i) {
    const double kappa = kappas[i / tau_nbars.size()];
    const double tn = tau_nbars[i % tau_nbars.size()];
    out.rows[i] = detail::guarded_row({kappa, tn}, 3, [&] {
      return std::vector<double>{gaussian_infidelity(kappa, geom, tn, policy)};
    });
  });
  return out;
}

/// Rows `kappa,tau_nbar,chi_bits,S_avg,S_member,error` (chi_nats for base e).
inline SweepResult holevo_sweep(const ChannelGeometry& geom, std::vector<double> kappas,
                                std::vector<double> tau_nbars, HolevoVariant variant,
                                LogBase base = LogBase::bits, const DimPolicy& policy = {},
                                std::size_t jobs = 1) {
  detail::require_transmission(geom.tau, "holevo_sweep");
  kappas = sorted_axis(std::move(kappas), "kappa");
  tau_nbars = sorted_axis(std::move(tau_nbars), "tau_nbar");
  SweepResult out;
  out.command = "holevo";
  out.inputs["tau"] = geom.tau;
  out.inputs["kappa"] = kappas;
  out.inputs["tau_nbar"] = tau_nbars;
  out.inputs["variant"] = to_string(variant);
  out.inputs["log_base"] = to_string(base);
  out.columns = {"kappa", "tau_nbar", base == LogBase::bits ? "chi_bits" : "chi_nats", "S_avg",
                 "S_member", "error"};
  out.rows.resize(kappas.size() * tau_nbars.size());
  parallel_for(out.rows.size(), jobs, [&](std::size_t i) {
    const double kappa = kappas[i / tau_nbars.size()];
    const double tn = tau_nbars[i % tau_nbars.size()];
    out.rows[i] = detail::guarded_row({kappa, tn}, 5, [&] {
      policy.dimension_for(tn);
      const auto p = holevo_ring(MediumParams::from_kappa(kappa), geom, tn, variant, base,
                                 policy.tail_tol);
      return std::vector<double>{p.chi, p.entropy_avg_state, p.entropy_member_state};
    });
  });
  return out;
}

/// Rows `tau,kappa,sinh_r,var_min,plateau_estimate,error` for input intensity n_bar.
inline SweepResult squeezing_curve(double n_bar, std::vector<double> taus,
                                   std::vector<double> kappas, std::size_t jobs = 1) {
  detail::require(std::isfinite(n_bar) && n_bar > 0.0, "squeezing_curve: n_bar must be > 0");
  taus = sorted_axis(std::move(taus), "tau");
  kappas = sorted_axis(std::move(kappas), "kappa");
  SweepResult out;
  out.command = "squeezing";
  out.inputs["nbar"] = n_bar;
  out.inputs["tau"] = taus;
  out.inputs["kappa"] = kappas;
  out.columns = {"tau", "kappa", "sinh_r", "var_min", "plateau_estimate", "error"};
  out.rows.resize(taus.size() * kappas.size());
  parallel_for(out.rows.size(), jobs, [&](std::size_t i) {
    const double tau = taus[i / kappas.size()];
    const double kappa = kappas[i % kappas.size()];
    out.rows[i] = detail::guarded_row({tau, kappa}, 5, [&] {
      detail::require(tau > 0.0 && tau < 1.0, "squeezing_curve: tau must lie in (0, 1)");
      detail::require(kappa > 0.0, "squeezing_curve: kappa must be > 0");
      const auto in = SqueezingInput::from_channel(MediumParams::from_kappa(kappa),
                                                   ChannelGeometry::from_tau(tau), n_bar);
      return std::vector<double>{in.sinh_r(), min_variance(in), plateau_estimate(tau)};
    });
  });
  return out;
}

}  // namespace kerrnoise
