#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>

#include "finfty/inequality.hpp"

using namespace finfty;
using Catch::Matchers::ContainsSubstring;

namespace {

FamilySpec family(std::uint64_t seed, int count, int k_max) {
  FamilySpec fam;
  fam.seed = seed;
  fam.count = count;
  fam.k_max = k_max;
  return fam;
}

double trend_slope(const RatioReport& rep) {
  return std::abs(rep.meta.at("log2_trend").at("slope").get<double>());
}

}  // namespace

TEST_CASE("vector-valued maximal bound holds with a uniform constant") {
  const GridSpec g{1, 3, 12};
  const RatioReport rep = check_fefferman_stein(g, family(7, 20, 6), 2.0, 2.0, 1.0);
  REQUIRE(rep.trials.size() == 20);
  REQUIRE(rep.degenerate_count() == 0);
  REQUIRE(rep.max_ratio() < 2.0);
  REQUIRE(rep.min_ratio() > 0.5);
  REQUIRE(rep.meta.at("p").get<double>() == 2.0);
}

TEST_CASE("vector-valued maximal check refuses r outside the hypothesis") {
  const GridSpec g{1, 3, 10};
  REQUIRE_THROWS_AS(check_fefferman_stein(g, family(1, 2, 4), 2.0, 2.0, 2.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(check_fefferman_stein(g, family(1, 2, 4), 1.0, 2.0, 1.5),
                    std::invalid_argument);
}

TEST_CASE("one-hot fields exhibit growth once r reaches p") {
  REQUIRE_THROWS_AS(fefferman_stein_violation_probe(2.0, 1.0, 3, 6), std::invalid_argument);
  const GrowthReport rep = fefferman_stein_violation_probe(1.0, 2.0, 3, 8);
  REQUIRE(rep.ys.back() > rep.ys.front() + 1.0);
  REQUIRE(rep.fit.slope > 0.4);
  REQUIRE(rep.fit.slope < 0.7);
  REQUIRE(rep.fit.r2 > 0.98);
}

TEST_CASE("smooth maximal majorization is uniform across scales") {
  const GridSpec g{1, 3, 12};
  const RatioReport rep = check_peetre_majorization(g, family(11, 10, 7), 1.0);
  REQUIRE(rep.degenerate_count() == 0);
  REQUIRE(rep.max_ratio() < 2.0);
  REQUIRE(trend_slope(rep) <= 0.05);
}

TEST_CASE("pointwise domination stays uniform as the band scale grows") {
  const GridSpec g{1, 3, 13};
  const RatioReport rep = check_lemma_pointwise(g, family(13, 20, 8), 1.0, 2.0);
  REQUIRE(rep.degenerate_count() == 0);
  REQUIRE(rep.max_ratio() < 2.0);
  REQUIRE(trend_slope(rep) <= 0.05);
  REQUIRE_THROWS_WITH(check_lemma_pointwise(g, family(1, 2, 4), 2.0, 1.0),
                      ContainsSubstring("r < t"));
}

TEST_CASE("scale-limited level bound is stable across the cube level") {
  const GridSpec g{1, 3, 12};
  const RatioReport rep =
      check_thm_maximal1(g, family(17, 50, 6), {-2, -1, 0, 1, 2}, 1.0, 2.0, 0.5);
  REQUIRE(rep.max_ratio() < 2.0);
  REQUIRE(rep.meta.at("mu_stability_factor").get<double>() < 1.5);
  REQUIRE(rep.meta.at("per_mu").size() == 5);
}

TEST_CASE("scale-limited level bound refuses r >= q by citing the hypothesis") {
  const GridSpec g{1, 3, 10};
  REQUIRE_THROWS_WITH(check_thm_maximal1(g, family(1, 2, 4), {0}, 3.0, 2.0, 0.5),
                      ContainsSubstring("requires r < q"));
  REQUIRE_THROWS_WITH(check_thm_maximal1(g, family(1, 2, 4), {0}, 2.0, 2.0, 0.5),
                      ContainsSubstring("requires r < q"));
}

TEST_CASE("smooth maximal level bound is stable across the cube level") {
  const GridSpec g{1, 3, 12};
  const RatioReport rep = check_cor_maximal2(g, family(19, 50, 6), {-2, -1, 0, 1, 2}, 1.0, 2.0);
  REQUIRE(rep.max_ratio() < 2.0);
  REQUIRE(rep.meta.at("mu_stability_factor").get<double>() < 1.5);
}

TEST_CASE("sequence norms are monotone in the inner exponent") {
  const GridSpec g{1, 3, 12};
  const RatioReport rep = check_embedding_monotone(g, family(23, 30, 6), 0, 1.0, 4.0);
  REQUIRE(rep.degenerate_count() == 0);
  REQUIRE(rep.max_ratio() < 2.0);
  for (const auto& e : rep.meta.at("qwqw")) {
    REQUIRE(e.at("max_over_min").get<double>() <= e.at("bound").get<double>());
  }
  REQUIRE_THROWS_AS(check_embedding_monotone(g, family(1, 2, 4), 0, 2.0, 2.0),
                    std::invalid_argument);
}

TEST_CASE("smoothness trade-off embedding is bounded on both branches") {
  const GridSpec g{1, 3, 12};
  const RatioReport fine = check_franke(g, 30, 29, 2.0, 1.0, 1.0);
  REQUIRE(fine.max_ratio() < 1.0);
  REQUIRE(fine.meta.at("branch") == "q<p0");
  const RatioReport coarse = check_franke(g, 30, 29, 2.0, 1.0, 4.0);
  REQUIRE(coarse.max_ratio() < 1.0);
  REQUIRE(coarse.meta.at("branch") == "q>=p0");
}

TEST_CASE("shifted-cube sup dominates the sampled sup uniformly") {
  const GridSpec g{1, 3, 12};
  const RatioReport rep = check_sub_inequality(g, family(31, 10, 6), 2.0);
  REQUIRE(rep.degenerate_count() == 0);
  REQUIRE(rep.max_ratio() < 2.0);
  REQUIRE(trend_slope(rep) <= 0.05);
}

TEST_CASE("smoothness norm routes agree for the identity symbol") {
  const GridSpec sg{1, 3, 10};
  const Symbol one = symbol_identity();
  int k_worst = 0;
  const double fft_route = hormander_norm(sg, one, 1.5, -10, 10, &k_worst);
  const double quad_route = detail::sobolev_norm_quadrature(sg, one, k_worst, 1.5);
  REQUIRE(std::abs(fft_route - quad_route) / quad_route < 1e-8);
}

TEST_CASE("smoothness norm refuses symbols that blow up on the grid") {
  const GridSpec sg{1, 3, 10};
  const Symbol huge{"huge", [](double xi) { return std::complex<double>{1e12 * xi, 0.0}; }};
  REQUIRE_THROWS_WITH(hormander_norm(sg, huge, 1.5), ContainsSubstring("bounded"));
  REQUIRE_THROWS_AS(hormander_norm(sg, symbol_identity(), 0.0), std::invalid_argument);
}

TEST_CASE("multiplier bound holds for imaginary powers at both exponents") {
  const GridSpec g{1, 3, 12};
  const GridSpec sg{1, 3, 10};
  const Symbol m = symbol_imaginary_power(1.0);
  for (double q : {1.0, 2.0}) {
    const RatioReport rep = check_multiplier(g, sg, m, 1.5, q, 20, 37);
    REQUIRE(rep.degenerate_count() == 0);
    REQUIRE(rep.max_ratio() < 2.0);
    REQUIRE(rep.meta.at("hormander_norm").get<double>() > 0.0);
  }
}

TEST_CASE("multiplier check refuses insufficient smoothness") {
  const GridSpec g{1, 3, 10};
  const GridSpec sg{1, 3, 8};
  // at q = 1 the hypothesis needs alpha > d - d/2
  REQUIRE_THROWS_AS(check_multiplier(g, sg, symbol_identity(), 0.4, 1.0, 2, 1),
                    std::invalid_argument);
}
