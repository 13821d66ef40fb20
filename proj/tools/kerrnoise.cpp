// kerrnoise: command-line front end for the lossy Kerr channel library.
//
// Data goes to files under --out; stdout carries progress only. Failures print a
// JSON object on stderr and exit with 2 (invalid arguments), 3 (numerical
// failure or non-convergence) or 4 (oracle mismatch).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kerrnoise/io.hpp"
#include "kerrnoise/kerr_channel.hpp"
#include "kerrnoise/metrics.hpp"
#include "kerrnoise/ode_oracle.hpp"
#include "kerrnoise/squeezing.hpp"
#include "kerrnoise/sweep.hpp"

namespace kn = kerrnoise;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitMismatch = 4;

constexpr double kOracleMatchTol = 1e-8;
constexpr double kOracleMaxTauNbar = 50.0;

struct RunConfig {
  double tail_tol = kn::kDefaultTailTol;
  double ode_tol = kn::kDefaultOdeTol;
  std::size_t dim_cap = 4096;
  std::string log_base = "2";
  std::string format = "csv";
  std::string out = ".";
  std::size_t jobs = 1;

  void validate() const {
    kn::detail::require(tail_tol > 0.0 && tail_tol <= kn::kMaxTailTol,
                        "--tail-tol must lie in (0, 1e-3]");
    kn::detail::require(ode_tol > 0.0, "--ode-tol must be > 0");
    kn::detail::require(dim_cap >= 30, "--dim-cap must be >= 30");
    kn::detail::require(jobs >= 1, "--jobs must be >= 1");
  }

  kn::LogBase base() const { return log_base == "e" ? kn::LogBase::nats : kn::LogBase::bits; }
  kn::OutputFormat output_format() const {
    return format == "json" ? kn::OutputFormat::json : kn::OutputFormat::csv;
  }
  kn::DimPolicy policy() const { return {tail_tol, dim_cap}; }

  nlohmann::ordered_json metadata() const {
    nlohmann::ordered_json m;
    m["tail_tol"] = tail_tol;
    m["dim_cap"] = dim_cap;
    m["log_base"] = log_base;
    m["jobs"] = jobs;
    return m;
  }
};

[[noreturn]] void invalid(const std::string& message) { throw kn::InvalidArgument(message); }

double parse_real(const std::string& text, const std::string& flag) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    invalid(flag + ": cannot parse '" + text + "' as a number");
  }
  if (used != text.size() || !std::isfinite(v)) invalid(flag + ": cannot parse '" + text + "' as a number");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

// "a,b,c", "lo:hi:count" (linear) or "log:lo:hi:count" (geometric).
std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  if (text.empty()) invalid(flag + ": empty value");
  const auto fields = split(text, ':');
  if (fields.size() == 1) {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_real(item, flag));
    return out;
  }
  const bool geometric = fields[0] == "log";
  if (fields.size() != (geometric ? 4u : 3u))
    invalid(flag + ": expected a,b,c or lo:hi:count or log:lo:hi:count");
  const std::size_t off = geometric ? 1 : 0;
  const double lo = parse_real(fields[off], flag);
  const double hi = parse_real(fields[off + 1], flag);
  const double count_d = parse_real(fields[off + 2], flag);
  if (count_d < 1 || count_d != std::floor(count_d) || count_d > 1e6)
    invalid(flag + ": count must be a positive integer");
  const auto count = static_cast<std::size_t>(count_d);
  if (geometric && (lo <= 0.0 || hi <= 0.0)) invalid(flag + ": log ranges need positive bounds");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = geometric ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
  }
  if (count > 1) out.back() = hi;
  return out;
}

double parse_single(const std::string& text, const std::string& flag) {
  const auto v = parse_list(text, flag);
  if (v.size() != 1) invalid(flag + ": expected a single value");
  return v.front();
}

std::string label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

fs::path output_path(const RunConfig& cfg, const std::string& stem) {
  return fs::path(cfg.out) / (stem + "." + cfg.format);
}

void emit(const kn::SweepResult& result, const RunConfig& cfg, const std::string& stem) {
  const auto path = output_path(cfg, stem);
  kn::write_sweep(result, path, cfg.output_format());
  std::size_t failed = 0;
  if (!result.columns.empty() && result.columns.back() == "error")
    for (const auto& row : result.rows)
      if (!std::get<std::string>(row.back()).empty()) ++failed;
  std::cout << "wrote " << path.string() << " (" << result.rows.size() << " rows";
  if (failed) std::cout << ", " << failed << " failed points";
  std::cout << ")\n";
}

void require_transmission(double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) invalid("--tau must lie in (0, 1]");
}

void require_nonnegative(const std::vector<double>& v, const std::string& flag) {
  for (double x : v)
    if (x < 0.0) invalid(flag + " values must be >= 0");
}

void require_dims(const std::vector<double>& tau_nbars, const RunConfig& cfg) {
  const auto policy = cfg.policy();
  for (double tn : tau_nbars) policy.dimension_for(tn);
}

int run_qfunc(const RunConfig& cfg, const std::string& tau_s, const std::string& kappa_s,
              const std::string& tn_s, const std::string& grid_s, bool physical) {
  const double tau = parse_single(tau_s, "--tau");
  const double kappa = parse_single(kappa_s, "--kappa");
  require_transmission(tau);
  if (kappa < 0.0) invalid("--kappa must be >= 0");
  auto tau_nbars = kn::sorted_axis(parse_list(tn_s, "--tau-nbar"), "tau_nbar");
  require_nonnegative(tau_nbars, "--tau-nbar");
  require_dims(tau_nbars, cfg);

  std::optional<std::pair<double, std::size_t>> grid;
  if (!grid_s.empty()) {
    const auto parts = split(grid_s, ':');
    if (parts.size() != 2) invalid("--grid: expected radius:points");
    const double radius = parse_real(parts[0], "--grid");
    const double points = parse_real(parts[1], "--grid");
    if (radius <= 0.0 || points < 2 || points != std::floor(points) || points > 5000)
      invalid("--grid: radius must be > 0 and points an integer in [2, 5000]");
    grid = {radius, static_cast<std::size_t>(points)};
  }

  const auto medium = kn::MediumParams::from_kappa(kappa);
  const auto geom = kn::ChannelGeometry::from_tau(tau);
  for (double tn : tau_nbars) {
    const auto input = kn::CoherentAmplitude::from_mean_photon_number(tn / tau);
    const auto dim = cfg.policy().dimension_for(tn);
    auto rho = kn::exact_output_state(medium, geom, input, dim, cfg.tail_tol);
    if (physical) rho = kn::to_physical_frame(rho, medium.mu * geom.z);
    const auto spec = grid ? kn::QGridSpec::square(grid->first, grid->second) : kn::default_qgrid(tn);
    const auto q = kn::husimi_q(rho, spec);

    auto table = kn::qfunc_table(q);
    table.inputs["tau"] = tau;
    table.inputs["kappa"] = kappa;
    table.inputs["tau_nbar"] = tn;
    table.inputs["grid_radius"] = spec.re_max;
    table.inputs["grid_points"] = spec.re_points;
    table.inputs["frame"] = physical ? "physical" : "interaction";
    table.metadata = cfg.metadata();
    table.metadata["fock_n_max"] = dim.n_max();
    table.metadata["q_integral"] = q.integral;
    table.metadata["boundary_mass"] = q.boundary_mass;
    if (q.radius_warning)
      std::cout << "warning: grid misses Q mass " << q.boundary_mass << " at tau_nbar=" << label(tn)
                << "; enlarge --grid radius\n";
    emit(table, cfg, "qfunc_tau_nbar_" + label(tn));
  }
  return kExitOk;
}

int run_ffunc(const RunConfig& cfg, const std::string& tau_s, const std::string& kappa_s) {
  const auto taus = kn::sorted_axis(parse_list(tau_s, "--tau"), "tau");
  for (double tau : taus) require_transmission(tau);
  const auto kappas = parse_list(kappa_s, "--kappa");
  for (double tau : taus) {
    auto table = kn::ffunc_table(tau, kappas);
    table.metadata = cfg.metadata();
    emit(table, cfg, "ffunc_tau_" + label(tau));
  }
  return kExitOk;
}

int run_infidelity(const RunConfig& cfg, const std::string& tau_s, const std::string& kappa_s,
                   const std::string& tn_s) {
  const double tau = parse_single(tau_s, "--tau");
  require_transmission(tau);
  const auto kappas = parse_list(kappa_s, "--kappa");
  const auto tau_nbars = parse_list(tn_s, "--tau-nbar");
  require_nonnegative(kappas, "--kappa");
  require_nonnegative(tau_nbars, "--tau-nbar");
  require_dims(tau_nbars, cfg);
  auto table = kn::infidelity_map(kappas, kn::ChannelGeometry::from_tau(tau), tau_nbars, cfg.policy(), cfg.jobs);
  table.metadata = cfg.metadata();
  emit(table, cfg, "infidelity");
  return kExitOk;
}

int run_holevo(const RunConfig& cfg, const std::string& tau_s, const std::string& kappa_s,
               const std::string& tn_s, const std::string& variant_s) {
  const double tau = parse_single(tau_s, "--tau");
  require_transmission(tau);
  const auto kappas = parse_list(kappa_s, "--kappa");
  const auto tau_nbars = parse_list(tn_s, "--tau-nbar");
  require_nonnegative(kappas, "--kappa");
  require_nonnegative(tau_nbars, "--tau-nbar");
  for (double tn : tau_nbars)
    if (tn > kn::kHolevoMaxTauNbar) invalid("--tau-nbar: values above 2000 exceed the desk-scale cap");
  require_dims(tau_nbars, cfg);
  const auto variant = variant_s == "gaussian" ? kn::HolevoVariant::gaussian : kn::HolevoVariant::exact;
  auto table = kn::holevo_sweep(kn::ChannelGeometry::from_tau(tau), kappas, tau_nbars, variant,
                                cfg.base(), cfg.policy(), cfg.jobs);
  table.metadata = cfg.metadata();
  emit(table, cfg, "holevo");
  return kExitOk;
}

int run_squeezing(const RunConfig& cfg, double nbar, const std::string& tau_s,
                  const std::string& kappa_s) {
  if (!(nbar > 0.0) || !std::isfinite(nbar)) invalid("--nbar must be > 0");
  const auto taus = parse_list(tau_s, "--tau");
  for (double tau : taus)
    if (!(tau > 0.0 && tau < 1.0)) invalid("--tau values must lie in (0, 1)");
  const auto kappas = parse_list(kappa_s, "--kappa");
  for (double k : kappas)
    if (!(k > 0.0)) invalid("--kappa values must be > 0");
  auto table = kn::squeezing_curve(nbar, taus, kappas, cfg.jobs);
  table.metadata = cfg.metadata();
  emit(table, cfg, "squeezing");
  return kExitOk;
}

int run_oracle_check(const RunConfig& cfg, const std::string& tau_s, const std::string& kappa_s,
                     double nbar, std::size_t steps) {
  const double tau = parse_single(tau_s, "--tau");
  const double kappa = parse_single(kappa_s, "--kappa");
  require_transmission(tau);
  if (kappa < 0.0) invalid("--kappa must be >= 0");
  if (!(nbar >= 0.0) || !std::isfinite(nbar)) invalid("--nbar must be >= 0");
  if (tau * nbar > kOracleMaxTauNbar) invalid("oracle-check: tau * nbar must be <= 50");

  const auto medium = kn::MediumParams::from_kappa(kappa);
  const auto geom = kn::ChannelGeometry::from_tau(tau);
  const auto input = kn::CoherentAmplitude::from_mean_photon_number(nbar);
  const auto dim = cfg.policy().dimension_for(tau * nbar);

  const auto start = std::chrono::steady_clock::now();
  const auto ode = steps > 0
                       ? kn::ode_oracle_integrate(medium, geom.z, input, dim, steps, cfg.ode_tol, cfg.tail_tol)
                       : kn::ode_oracle_auto(medium, geom.z, input, dim, cfg.ode_tol, cfg.tail_tol);
  const auto exact = kn::exact_output_state(medium, geom, input, dim, cfg.tail_tol);
  const double deviation = (ode.state.matrix() - exact.matrix()).cwiseAbs().maxCoeff();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const bool pass = deviation < kOracleMatchTol;
  std::cout << "tau=" << label(tau) << " kappa=" << label(kappa) << " nbar=" << label(nbar)
            << " n_max=" << dim.n_max() << " integration_n_max=" << ode.integration_n_max << '\n'
            << "max_deviation=" << kn::format_double(deviation) << '\n'
            << "rk4_steps=" << ode.steps << '\n'
            << "step_change=" << kn::format_double(ode.max_step_change) << '\n'
            << "seconds=" << label(seconds) << '\n'
            << (pass ? "PASS" : "FAIL") << '\n';
  if (!pass)
    throw kn::OracleMismatch("oracle-check: max deviation " + kn::format_double(deviation) +
                         " exceeds " + kn::format_double(kOracleMatchTol));
  return kExitOk;
}

int exit_code_for(kn::ErrorKind kind) {
  switch (kind) {
    case kn::ErrorKind::invalid_argument:
    case kn::ErrorKind::dimension_too_small:
      return kExitInvalid;
    case kn::ErrorKind::numerical_failure:
    case kn::ErrorKind::non_convergence:
      return kExitNumerical;
    case kn::ErrorKind::oracle_mismatch:
      return kExitMismatch;
  }
  return kExitNumerical;
}

int report(int code, const std::string& kind, const std::string& message) {
  nlohmann::ordered_json err;
  err["error"] = kind;
  err["message"] = message;
  err["exit_code"] = code;
  std::cerr << err.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lossy Kerr channel: exact states, phase-diffusion model, Holevo quantity and squeezing"};
  app.set_version_flag("--version", kn::kVersion);
  app.require_subcommand(1);

  RunConfig cfg;
  std::string tau_s, kappa_s, tn_s, grid_s, variant_s = "exact";
  double nbar = 0.0;
  std::size_t steps = 0;
  bool physical = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Output directory")->capture_default_str();
    sub->add_option("--format", cfg.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->add_option("--jobs", cfg.jobs, "Worker threads")->capture_default_str();
    sub->add_option("--tail-tol", cfg.tail_tol, "Poisson tail tolerance")->capture_default_str();
    sub->add_option("--dim-cap", cfg.dim_cap, "Largest Fock dimension allowed")->capture_default_str();
  };
  const char* list_help = "a,b,c | lo:hi:count | log:lo:hi:count";

  auto* qfunc = app.add_subcommand("qfunc", "Husimi Q grids of the output state, one file per tau*nbar");
  qfunc->add_option("--tau", tau_s, "Transmission")->required();
  qfunc->add_option("--kappa", kappa_s, "Dimensionless nonlinearity")->required();
  qfunc->add_option("--tau-nbar", tn_s, list_help)->required();
  qfunc->add_option("--grid", grid_s, "radius:points (default sqrt(tau nbar)+5 : 201)");
  qfunc->add_flag("--physical", physical, "Apply the Kerr unitary before evaluating Q");
  add_common(qfunc);

  auto* ffunc = app.add_subcommand("ffunc", "f_tau and its quadratic expansion, one file per tau");
  ffunc->add_option("--tau", tau_s, list_help)->required();
  ffunc->add_option("--kappa", kappa_s, list_help)->required();
  add_common(ffunc);

  auto* infid = app.add_subcommand("infidelity", "1 - F between exact and Gaussian-model states");
  infid->add_option("--tau", tau_s, "Transmission")->required();
  infid->add_option("--kappa", kappa_s, list_help)->required();
  infid->add_option("--tau-nbar", tn_s, list_help)->required();
  add_common(infid);

  auto* holevo = app.add_subcommand("holevo", "Holevo quantity of the phase-keyed ring");
  holevo->add_option("--tau", tau_s, "Transmission")->required();
  holevo->add_option("--kappa", kappa_s, list_help)->required();
  holevo->add_option("--tau-nbar", tn_s, list_help)->required();
  holevo->add_option("--variant", variant_s, "Member state model")
      ->check(CLI::IsMember({"gaussian", "exact"}))
      ->capture_default_str();
  holevo->add_option("--log-base", cfg.log_base, "2 (bits) or e (nats)")
      ->check(CLI::IsMember({"2", "e"}))
      ->capture_default_str();
  add_common(holevo);

  auto* squeeze = app.add_subcommand("squeezing", "Attainable squeezing under phase diffusion");
  squeeze->add_option("--nbar", nbar, "Input mean photon number")->required();
  squeeze->add_option("--tau", tau_s, list_help)->required();
  squeeze->add_option("--kappa", kappa_s, list_help)->required();
  add_common(squeeze);

  auto* oracle = app.add_subcommand("oracle-check", "Compare the closed form with RK4 integration");
  oracle->add_option("--tau", tau_s, "Transmission")->required();
  oracle->add_option("--kappa", kappa_s, "Dimensionless nonlinearity")->required();
  oracle->add_option("--nbar", nbar, "Input mean photon number")->required();
  oracle->add_option("--steps", steps, "Fixed RK4 step count (default: double until converged)");
  oracle->add_option("--ode-tol", cfg.ode_tol, "Step-doubling tolerance")->capture_default_str();
  oracle->add_option("--tail-tol", cfg.tail_tol, "Poisson tail tolerance")->capture_default_str();
  oracle->add_option("--dim-cap", cfg.dim_cap, "Largest Fock dimension allowed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(kExitInvalid, "invalid_argument", e.what());
  }

  try {
    cfg.validate();
    if (*qfunc) return run_qfunc(cfg, tau_s, kappa_s, tn_s, grid_s, physical);
    if (*ffunc) return run_ffunc(cfg, tau_s, kappa_s);
    if (*infid) return run_infidelity(cfg, tau_s, kappa_s, tn_s);
    if (*holevo) return run_holevo(cfg, tau_s, kappa_s, tn_s, variant_s);
    if (*squeeze) return run_squeezing(cfg, nbar, tau_s, kappa_s);
    if (*oracle) return run_oracle_check(cfg, tau_s, kappa_s, nbar, steps);
  } catch (const kn::Error& e) {
    return report(exit_code_for(e.kind()), kn::to_string(e.kind()), e.what());
  } catch (const fs::filesystem_error& e) {
    return report(kExitInvalid, "invalid_argument", e.what());
  } catch (const std::exception& e) {
    return report(kExitNumerical, "numerical_failure", e.what());
  }
  return report(kExitInvalid, "invalid_argument", "no subcommand");
}
