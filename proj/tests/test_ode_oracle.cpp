#include <catch_amalgamated.hpp>

#include <cmath>

#include "kerrnoise/kerr_channel.hpp"
#include "kerrnoise/ode_oracle.hpp"

using namespace kerrnoise;

namespace {

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("ODE oracle matches the closed form", "[ode]") {
  for (double tau : {0.8, 0.5})
    for (double kappa : {0.0, 0.05, 0.1})
      for (double nbar : {1.0, 5.0}) {
        CAPTURE(tau, kappa, nbar);
        const auto medium = MediumParams::from_kappa(kappa);
        const auto geom = ChannelGeometry::from_tau(tau);
        const auto input = CoherentAmplitude::from_mean_photon_number(nbar);
        const FockDim dim = truncation_dimension(tau * nbar);
        const auto ode = ode_oracle_auto(medium, geom.z, input, dim);
        const auto exact = exact_output_state(medium, geom, input, dim);
        CHECK(max_abs_diff(ode.state.matrix(), exact.matrix()) < 1e-8);
        CHECK(ode.max_step_change <= kDefaultOdeTol);
        ValidationTolerances relaxed;
        relaxed.trace = 1e-9;
        CHECK(validate_density_operator(ode.state, relaxed).valid());
      }
}

TEST_CASE("ODE oracle with a complex amplitude", "[ode]") {
  const auto medium = MediumParams::from_alpha_mu(0.7, 0.07);
  const auto geom = ChannelGeometry::from_length(0.7, 0.4);
  const auto input = CoherentAmplitude(Complex(1.1, -1.7));
  const FockDim dim = truncation_dimension(geom.tau * input.mean_photon_number);
  const auto ode = ode_oracle_auto(medium, geom.z, input, dim);
  CHECK(max_abs_diff(ode.state.matrix(), exact_output_state(medium, geom, input, dim).matrix()) < 1e-8);
}

TEST_CASE("ODE oracle with mu = 0 gives the attenuated projector", "[ode]") {
  const auto geom = ChannelGeometry::from_tau(0.6);
  const auto input = CoherentAmplitude(Complex(0.5, 2.0));
  const FockDim dim = truncation_dimension(geom.tau * input.mean_photon_number);
  const auto ode = ode_oracle_integrate(MediumParams::from_kappa(0.0), geom.z, input, dim, 256);
  const auto psi = coherent_state_vector(CoherentAmplitude(std::sqrt(0.6) * input.value), dim);
  CHECK(max_abs_diff(ode.state.matrix(), psi * psi.adjoint()) < 1e-8);
  CHECK(ode.steps == 512);
  CHECK(ode.integration_n_max == dim.n_max() + kOdeHeadroom);
}

TEST_CASE("ODE oracle with tiny alpha z leaves the input unchanged", "[ode]") {
  const auto medium = MediumParams::from_alpha_mu(1e-9, 1e-9);
  const auto input = CoherentAmplitude::from_mean_photon_number(3.0);
  const FockDim dim = truncation_dimension(3.0);
  const auto ode = ode_oracle_integrate(medium, 1.0, input, dim, 16);
  const auto psi = coherent_state_vector(input, dim);
  CHECK(max_abs_diff(ode.state.matrix(), psi * psi.adjoint()) < 1e-8);
}

TEST_CASE("ODE oracle reports non-convergence", "[ode]") {
  const auto medium = MediumParams::from_kappa(0.1);
  const auto geom = ChannelGeometry::from_tau(0.5);
  const auto input = CoherentAmplitude::from_mean_photon_number(5.0);
  const FockDim dim = truncation_dimension(2.5);
  CHECK_THROWS_AS(ode_oracle_integrate(medium, geom.z, input, dim, 1), NonConvergence);
  CHECK_THROWS_AS(ode_oracle_auto(medium, geom.z, input, dim, kDefaultOdeTol, kDefaultTailTol, 1, 4),
                  NonConvergence);
  try {
    ode_oracle_integrate(medium, geom.z, input, dim, 2);
    FAIL("expected NonConvergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::non_convergence);
  }
}

TEST_CASE("ODE oracle argument checks", "[ode]") {
  const auto medium = MediumParams::from_kappa(0.1);
  const auto input = CoherentAmplitude::from_mean_photon_number(1.0);
  CHECK_THROWS_AS(ode_oracle_integrate(medium, -1.0, input, FockDim(29), 10), InvalidArgument);
  CHECK_THROWS_AS(ode_oracle_integrate(medium, 1.0, input, FockDim(29), 0), InvalidArgument);
}
