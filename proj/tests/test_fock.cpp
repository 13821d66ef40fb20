#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "kerrnoise/fock.hpp"
#include "oracles.hpp"

using namespace kerrnoise;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("truncation_dimension floor for vacuum", "[fock]") {
  CHECK(truncation_dimension(0.0, 1e-12).n_max() == 29);
}

TEST_CASE("truncation_dimension meets the tail bound", "[fock]") {
  for (double mean : {1.0, 60.0}) {
    const FockDim dim = truncation_dimension(mean, 1e-12);
    CHECK(dim.n_max() >= 29);
    CHECK(static_cast<double>(oracle::poisson_tail_direct(mean, dim.n_max())) < 1e-12);
    // smallest such n_max above the floor
    const auto floor_n = static_cast<std::size_t>(std::ceil(mean + 10.0 * std::sqrt(mean)));
    if (dim.n_max() > std::max<std::size_t>(29, floor_n))
      CHECK(static_cast<double>(oracle::poisson_tail_direct(mean, dim.n_max() - 1)) >= 1e-12);
  }
  CHECK(truncation_dimension(60.0, 1e-12).n_max() >= 137);
}

TEST_CASE("poisson_tail agrees with direct summation", "[fock]") {
  for (double mean : {0.3, 5.0, 60.0, 500.0})
    for (std::size_t n : {10u, 80u, 200u, 700u}) {
      const double direct = static_cast<double>(oracle::poisson_tail_direct(mean, n));
      if (direct > 1e-280) CHECK_THAT(poisson_tail(mean, n), WithinRel(direct, 1e-9));
    }
}

TEST_CASE("truncation_dimension rejects bad input", "[fock]") {
  CHECK_THROWS_AS(truncation_dimension(NAN), InvalidArgument);
  CHECK_THROWS_AS(truncation_dimension(INFINITY), InvalidArgument);
  CHECK_THROWS_AS(truncation_dimension(-1.0), InvalidArgument);
  CHECK_THROWS_AS(truncation_dimension(1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(truncation_dimension(1.0, 1e-2), InvalidArgument);
}

TEST_CASE("coherent_state_vector", "[fock]") {
  SECTION("vacuum") {
    const auto v = coherent_state_vector(CoherentAmplitude(Complex(0, 0)), FockDim(29));
    CHECK(v(0) == Complex(1, 0));
    CHECK(v.tail(29).norm() == 0.0);
  }
  SECTION("zeta = 1 against long double formula") {
    const auto v = coherent_state_vector(CoherentAmplitude(Complex(1, 0)), FockDim(29));
    const auto ref = oracle::coherent_ld(1.0L, 29);
    CHECK_THAT(v(0).real(), WithinAbs(0.60653065971263342, 1e-15));
    CHECK_THAT(v(1).real(), WithinAbs(0.60653065971263342, 1e-15));
    for (int k = 0; k <= 29; ++k)
      CHECK(std::abs(v(k) - std::complex<double>(ref[k])) <= 1e-13 * std::abs(std::complex<double>(ref[k])));
  }
  SECTION("complex amplitude and large mean without overflow") {
    const Complex zeta = std::polar(std::sqrt(1500.0), 0.7);
    const FockDim dim = truncation_dimension(1500.0);
    const auto v = coherent_state_vector(CoherentAmplitude(zeta), dim);
    CHECK(v.allFinite());
    CHECK_THAT(v.squaredNorm(), WithinAbs(1.0, 1e-12));
    const auto ref = oracle::coherent_ld(zeta, static_cast<unsigned>(dim.n_max()));
    for (std::size_t k = 1400; k < 1600; ++k) {
      const auto r = std::complex<double>(ref[k]);
      CHECK(std::abs(v(static_cast<Eigen::Index>(k)) - r) <= 1e-11 * std::abs(r));
    }
  }
  SECTION("norm within tail tolerance") {
    for (double mean : {0.5, 3.0, 40.0, 300.0}) {
      const auto v = coherent_state_vector(CoherentAmplitude::from_mean_photon_number(mean),
                                           truncation_dimension(mean));
      CHECK_THAT(v.squaredNorm(), WithinAbs(1.0, 1e-12 + 1e-13));
    }
  }
  SECTION("dimension violating the tail criterion") {
    CHECK_THROWS_AS(
        coherent_state_vector(CoherentAmplitude::from_mean_photon_number(50.0), FockDim(40)),
        DimensionTooSmall);
  }
}

TEST_CASE("CoherentAmplitude mean photon number", "[fock]") {
  const CoherentAmplitude a(Complex(1.5, -2.0));
  CHECK_THAT(a.mean_photon_number, WithinRel(6.25, 1e-15));
  CHECK(CoherentAmplitude::from_mean_photon_number(7.0).mean_photon_number == 7.0);
  CHECK_THROWS_AS(CoherentAmplitude::from_mean_photon_number(-1.0), InvalidArgument);
  CHECK_THROWS_AS(CoherentAmplitude(Complex(NAN, 0)), InvalidArgument);
}

TEST_CASE("poisson_weights", "[fock]") {
  SECTION("mean 0") {
    const auto w = poisson_weights(0.0, FockDim(29)).weights;
    CHECK(w(0) == 1.0);
    CHECK(w.tail(29).sum() == 0.0);
  }
  SECTION("mean 1") {
    const auto w = poisson_weights(1.0, FockDim(29)).weights;
    CHECK_THAT(w(0), WithinRel(std::exp(-1.0), 1e-15));
    CHECK_THAT(w(1), WithinRel(std::exp(-1.0), 1e-15));
    CHECK_THAT(w(2), WithinRel(std::exp(-1.0) / 2, 1e-15));
  }
  SECTION("matches squared coherent amplitudes") {
    for (double mean : {0.5, 1.0, 10.0, 60.0}) {
      const FockDim dim = truncation_dimension(mean);
      const auto w = poisson_weights(mean, dim).weights;
      const auto v = coherent_state_vector(CoherentAmplitude::from_mean_photon_number(mean), dim);
      for (Eigen::Index k = 0; k < dim.size(); ++k)
        CHECK(std::abs(w(k) - std::norm(v(k))) <= 1e-13 * w(k));
      CHECK_THAT(w.sum(), WithinAbs(1.0, 1e-12));
    }
  }
  SECTION("non-finite mean") { CHECK_THROWS_AS(poisson_weights(NAN, FockDim(29)), InvalidArgument); }
}

TEST_CASE("validate_density_operator", "[fock]") {
  SECTION("coherent projector passes") {
    const FockDim dim = truncation_dimension(4.0);
    const auto rho = DensityOperator::projector(
        coherent_state_vector(CoherentAmplitude(Complex(1.2, -1.6)), dim));
    const auto report = validate_density_operator(rho);
    CHECK(report.valid());
    CHECK(report.hermiticity_deviation == 0.0);
    CHECK(report.trace_deviation < 1e-12);
    CHECK(report.min_eigenvalue > -1e-14);
  }
  SECTION("non-Hermitian entry is flagged") {
    ComplexMatrix m = ComplexMatrix::Zero(3, 3);
    m(0, 0) = 1.0;
    m(0, 1) = Complex(0.1, 0.0);
    m(1, 0) = Complex(0.2, 0.0);
    const auto report = validate_density_operator(m);
    CHECK_FALSE(report.hermitian);
    CHECK_FALSE(report.valid());
    CHECK_THAT(report.hermiticity_deviation, WithinAbs(0.1, 1e-15));
  }
  SECTION("zero matrix flags trace deviation 1") {
    const auto report = validate_density_operator(ComplexMatrix::Zero(4, 4));
    CHECK_FALSE(report.unit_trace);
    CHECK(report.trace_deviation == 1.0);
    CHECK(report.hermitian);
    CHECK(report.positive_semidefinite);
  }
  SECTION("negative eigenvalue is flagged") {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = 1.5;
    m(1, 1) = -0.5;
    const auto report = validate_density_operator(m);
    CHECK_FALSE(report.positive_semidefinite);
    CHECK_THAT(report.min_eigenvalue, WithinAbs(-0.5, 1e-15));
  }
}

TEST_CASE("DensityOperator shape checks", "[fock]") {
  CHECK_THROWS_AS(DensityOperator(ComplexMatrix::Zero(2, 3)), InvalidArgument);
  CHECK_THROWS_AS(DensityOperator(ComplexMatrix::Zero(1, 1)), InvalidArgument);
  CHECK_THROWS_AS(FockDim(0), InvalidArgument);
  CHECK(DensityOperator(ComplexMatrix::Identity(5, 5)).dim() == FockDim(4));
}
