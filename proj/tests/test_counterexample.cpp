#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>

#include "finfty/counterexample.hpp"

using namespace finfty;

TEST_CASE("truncated peak series matches its closed form at the origin") {
  // at alpha = 1, M = 2 the value at x = 0 is sum 1/(1+k)^2 = pi^2/6 - 1
  const BoundedSumProbe probe = bounded_sum_probe(1.0, 2.0);
  REQUIRE(probe.k_trunc == kScaleCap);
  REQUIRE(probe.tail_bound < 1.2e-3);
  const double closed = kPi * kPi / 6.0 - 1.0;
  REQUIRE(std::abs(probe.values[0] - closed) <= probe.tail_bound + 1e-12);
  REQUIRE(probe.sup_value >= probe.values[0]);
}

TEST_CASE("peak series contrast grows at the predicted rate") {
  const BoundedSumProbe spread = bounded_sum_probe(0.5, 3.0);
  REQUIRE(spread.contrast.meta.at("expected_log2_slope").get<double>() == 1.0);
  REQUIRE(std::abs(spread.contrast.fit.slope - 1.0) < 0.1);
  REQUIRE(spread.contrast.fit.r2 > 0.99);

  const BoundedSumProbe flat = bounded_sum_probe(1.0, 2.0);
  REQUIRE(flat.contrast.meta.at("expected_log2_slope").get<double>() == 0.0);
  REQUIRE(std::abs(flat.contrast.fit.slope) < 0.1);
}

TEST_CASE("peak series refuses divergent parameters outside probe mode") {
  REQUIRE_THROWS_AS(bounded_sum_probe(0.5, 2.0), std::invalid_argument);
  REQUIRE_THROWS_AS(bounded_sum_probe(0.0, 3.0), std::invalid_argument);
  REQUIRE_THROWS_AS(bounded_sum_probe(0.5, -1.0), std::invalid_argument);
  const BoundedSumProbe probe = bounded_sum_probe(0.5, 2.0, true);
  REQUIRE(probe.k_trunc == kScaleCap);
  REQUIRE_FALSE(probe.tail_bound < 0.1);  // nothing certified in probe mode
}

TEST_CASE("critical spec pins the decay to the exponent ratio") {
  const ModulatedFamilySpec spec = make_modulated_spec(1.0, 2.0, 512);
  REQUIRE(spec.alpha == 0.5);
  REQUIRE(spec.critical_alpha);
  REQUIRE(spec.K == 512);

  ModulatedFamilySpec off = spec;
  off.alpha = 0.3;
  REQUIRE_THROWS_AS(build_modulated_family(off), std::invalid_argument);
  off = spec;
  off.K = 0;
  REQUIRE_THROWS_AS(build_modulated_family(off), std::invalid_argument);
  off = spec;
  off.K = kScaleCap + 1;
  REQUIRE_THROWS_AS(build_modulated_family(off), std::invalid_argument);
}

TEST_CASE("modulated envelopes peak at one, stay real and in band") {
  const ModulatedFamily fam = build_modulated_family(make_modulated_spec(1.0, 2.0, 8));
  REQUIRE(fam.scales.size() == 8);
  REQUIRE(std::abs(fam.envelope_peak - 1.0) < 1e-12);
  for (const ModulatedScale& sc : fam.scales) {
    REQUIRE(sc.profile.band.has_value());
    REQUIRE(sc.profile.band->k == 0);
    REQUIRE(sc.profile.band->A == fam.envelope_band_radius);
    double min_re = 1e300, max_im = 0.0;
    for (const auto& z : sc.profile.values) {
      min_re = std::min(min_re, z.real());
      max_im = std::max(max_im, std::abs(z.imag()));
    }
    REQUIRE(min_re >= 0.0);
    REQUIRE(max_im == 0.0);
    const double u = std::fmod(sc.center_u, fam.grid.side());
    const auto at_center = evaluate_offgrid(sc.profile, {u, 0.0});
    REQUIRE(std::abs(at_center - std::complex<double>{fam.envelope_peak, 0.0}) < 1e-9);
  }
}

TEST_CASE("rescaled and global routes agree at matched resolution") {
  const ModulatedFamilySpec spec = make_modulated_spec(1.0, 2.0, 512);
  for (int k : {1, 2, 3}) {
    const ModulatedCrossCheck xc = modulated_cross_check(spec, k);
    REQUIRE(xc.rel_dev < 1e-8);
    REQUIRE(xc.global > 0.0);
  }
  REQUIRE_THROWS_AS(modulated_cross_check(spec, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(modulated_cross_check(spec, 7), std::invalid_argument);
}

TEST_CASE("divergence measurement refuses short ladders and free decay") {
  ModulatedFamilySpec spec = make_modulated_spec(1.0, 2.0, 256);
  REQUIRE_THROWS_AS(measure_modulated_divergence(spec), std::invalid_argument);
  spec = make_modulated_spec(1.0, 2.0, 512);
  spec.critical_alpha = false;
  REQUIRE_THROWS_AS(measure_modulated_divergence(spec), std::invalid_argument);
}

TEST_CASE("bump lattice cell: certificates and the reduction identity") {
  SharpnessFamilySpec spec;
  const SharpnessFamily fam = build_sharpness_family(spec);
  const json& certs = fam.cell.certificates;
  REQUIRE(certs.at("self_similarity_max_rel_dev").get<double>() < 1e-10);
  REQUIRE(certs.at("periodicity_max_abs_dev").get<double>() < 1e-12);
  REQUIRE(certs.at("floor").get<double>() == 0.0625);
  const double quad = certs.at("center_value_quadrature").get<double>();
  const double grid = certs.at("center_value_grid").get<double>();
  REQUIRE(std::abs(quad - grid) / quad < 1e-8);
  REQUIRE(quad > 0.0625);  // center clears the floor
  REQUIRE(certs.at("domination_max_ratio").get<double>() < 1.0);
  REQUIRE(std::abs(fam.cell_q_integral - 3.852852652593e-3) / 3.852852652593e-3 < 1e-9);

  // one global-grid scale reduces exactly to the periodized cell integral
  const double global = sharpness_global_q_integral(spec, 6);
  const double reduced = std::ldexp(fam.cell_q_integral, -spec.N - spec.mu);
  REQUIRE(std::abs(global - reduced) / reduced < 1e-8);
}

TEST_CASE("bump lattice rates: growth matches predictions, sigma = d/r stays flat") {
  SharpnessFamilySpec spec;
  const SharpnessRates rates = measure_sharpness_rates(spec, {0.25, 0.5, 1.0}, 3, 8);
  REQUIRE(rates.meta.at("upper_spread_4_to_hi").get<double>() <= 1.10);
  REQUIRE(rates.lower.size() == 3);
  const json& growing = rates.lower[0];
  REQUIRE(growing.at("regime") == "exponential");
  REQUIRE(std::abs(growing.at("fitted_exponent").get<double>() - 0.25) < 0.0375);
  const json& boundary = rates.lower[1];
  REQUIRE(boundary.at("regime") == "polynomial");
  REQUIRE(std::abs(boundary.at("fitted_exponent").get<double>() - 0.5) < 0.075);
  const json& flat = rates.lower[2];
  REQUIRE(flat.at("regime") == "bounded_ratio");
  REQUIRE(flat.at("ratio_max").get<double>() < 2.0);
}

TEST_CASE("bump lattice guards reject out-of-range requests") {
  SharpnessFamilySpec spec;
  spec.mu = 1;
  REQUIRE_THROWS_AS(sharpness_global_q_integral(spec, 9), std::invalid_argument);
  spec.mu = 0;
  REQUIRE_THROWS_AS(sharpness_global_q_integral(spec, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(sharpness_global_q_integral(spec, 14), std::invalid_argument);
  spec.oversample = 0;
  REQUIRE_THROWS_AS(build_sharpness_cell(spec, make_beta(spec.M)), std::invalid_argument);
  spec.oversample = 2;
  REQUIRE_THROWS_AS(measure_sharpness_rates(spec, {0.5}, 1, 8), std::invalid_argument);
  REQUIRE_THROWS_AS(measure_sharpness_rates(spec, {0.5}, 5, 5), std::invalid_argument);
}
