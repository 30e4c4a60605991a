#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>

#include "finfty/maximal.hpp"
#include "finfty/norms.hpp"
#include "finfty/random.hpp"

using namespace finfty;
using cplx = std::complex<double>;

namespace {

double direct_window_average(const SampledField& f, double r, int j, std::size_t t1,
                             std::size_t t2) {
  const GridSpec& g = f.grid;
  const std::size_t n = g.samples_per_axis();
  const std::size_t m = std::size_t{1} << j;
  double acc = 0.0;
  if (g.dim == 1) {
    for (std::size_t o = 0; o < m; ++o) acc += std::pow(std::abs(f.values[(t1 + o) % n]), r);
    return acc / static_cast<double>(m);
  }
  for (std::size_t o1 = 0; o1 < m; ++o1)
    for (std::size_t o2 = 0; o2 < m; ++o2)
      acc += std::pow(std::abs(f.values[((t1 + o1) % n) * n + (t2 + o2) % n]), r);
  return acc / static_cast<double>(m * m);
}

SampledField indicator_field(const GridSpec& g, std::size_t where) {
  SampledField f(g);
  f.values[where] = 1.0;
  return f;
}

bool identical(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

// reference local average: direct sums straight off the definition
double brute_local_avg(const ScaleSequence& seq, int level, std::int64_t cube, double q,
                       double s) {
  const GridSpec& g = seq.grid();
  const double hd = g.dim == 1 ? g.spacing() : g.spacing() * g.spacing();
  const std::size_t n = g.samples_per_axis();
  const std::size_t per = cube_samples_per_axis(g, level);
  const DyadicCube c = cube_at(g, level, cube);
  double total = 0.0;
  for (std::size_t i = 0; i < seq.entries.size(); ++i) {
    const int k = seq.k_of(i);
    if (k < level) continue;
    double cell = 0.0;
    if (g.dim == 1) {
      for (std::size_t o = 0; o < per; ++o)
        cell += std::pow(std::abs(seq.entries[i].values[c.index[0] * per + o]), q);
    } else {
      for (std::size_t o1 = 0; o1 < per; ++o1)
        for (std::size_t o2 = 0; o2 < per; ++o2)
          cell += std::pow(
              std::abs(seq.entries[i].values[(c.index[0] * per + o1) * n + c.index[1] * per + o2]),
              q);
    }
    total += std::pow(2.0, s * k * q) * hd * cell;
  }
  return std::pow(std::pow(2.0, level * g.dim) * total, 1.0 / q);
}

SampledField tone(const GridSpec& g, double xi) {
  SampledField f(g);
  for (std::size_t i = 0; i < g.total(); ++i) {
    const double ph = 2.0 * kPi * xi * g.point(i)[0];
    f.values[i] = cplx{std::cos(ph), std::sin(ph)};
  }
  return f;
}

}  // namespace

TEST_CASE("window ladder reproduces direct averages") {
  for (int dim : {1, 2}) {
    const GridSpec g = make_grid(dim, 2.0, dim == 1 ? 32 : 8);
    for (double r : {0.5, 1.0, 2.0}) {
      const SampledField f = random_field(g, 500 + dim + static_cast<int>(10 * r));
      const WindowLadder lad(f, r);
      const std::size_t n = g.samples_per_axis();
      for (int j = 0; j < lad.num_sizes(); ++j)
        for (std::size_t t1 = 0; t1 < n; ++t1)
          for (std::size_t t2 = 0; t2 < (dim == 1 ? 1 : n); ++t2) {
            const double fast = lad.window_average(j, t1, t2);
            const double ref = direct_window_average(f, r, j, t1, t2);
            REQUIRE(std::abs(fast - ref) < 1e-12 * (1.0 + ref));
          }
    }
  }
}

TEST_CASE("hardy-littlewood values on the one-hot field") {
  const GridSpec g = make_grid(1, 8.0, 8);  // h = 1
  REQUIRE(g.spacing() == 1.0);
  const SampledField f = indicator_field(g, 0);
  const MaximalField m = hl_maximal(f, 1.0);
  REQUIRE(m.values[0] == 1.0);
  REQUIRE(m.values[3] == 0.25);
  REQUIRE(m.values[7] == 0.5);   // size-2 window {7,0}
  REQUIRE(m.values[4] == 0.125);  // only the full-torus window reaches back
}

TEST_CASE("constant fields are fixed points of every operator") {
  const GridSpec g = make_grid(1, 1.0, 16);
  SampledField f(g);
  for (auto& v : f.values) v = cplx{-2.5, 0.0};
  const MaximalField hl = hl_maximal(f, 2.0);
  for (double v : hl.values) REQUIRE(std::abs(v - 2.5) < 1e-12);
  f.band = BandSpec{0, 1.0};
  const MaximalField pe = peetre_maximal(f, 1.5, 0);
  for (double v : pe.values) REQUIRE(std::abs(v - 2.5) < 1e-12);
}

TEST_CASE("hl is monotone in the exponent r") {
  const GridSpec g = make_grid(1, 1.0, 32);
  for (int t = 0; t < 20; ++t) {
    const SampledField f = random_field(g, 600 + t);
    const MaximalField lo = hl_maximal(f, 0.7);
    const MaximalField hi = hl_maximal(f, 1.9);
    for (std::size_t i = 0; i < lo.values.size(); ++i)
      REQUIRE(lo.values[i] <= hi.values[i] * (1.0 + 1e-12));
  }
}

TEST_CASE("fast engines equal brute force exactly") {
  int fields = 0;
  for (int t = 0; t < 88; ++t) {
    const int n = t % 3 == 0 ? 8 : (t % 3 == 1 ? 16 : 32);
    const GridSpec g = make_grid(1, 2.0, n);
    const SampledField f = random_field(g, 700 + t);
    const double r = t % 2 ? 1.0 : 0.5 + (t % 5) * 0.4;
    REQUIRE(identical(hl_maximal(f, r).values, hl_maximal_brute(f, r).values));
    const int k = t % 4 - 1;
    const double eps = (t % 3) * 0.45;
    REQUIRE(identical(scale_limited_maximal(f, r, k, eps).values,
                      scale_limited_maximal_brute(f, r, k, eps).values));
    ++fields;
  }
  for (int t = 0; t < 12; ++t) {
    const GridSpec g = make_grid(2, 2.0, 8);
    const SampledField f = random_field(g, 800 + t);
    REQUIRE(identical(hl_maximal(f, 1.0).values, hl_maximal_brute(f, 1.0).values));
    REQUIRE(identical(scale_limited_maximal(f, 1.0, 1, 0.5).values,
                      scale_limited_maximal_brute(f, 1.0, 1, 0.5).values));
    ++fields;
  }
  REQUIRE(fields == 100);
}

TEST_CASE("scale-limited values on the one-hot field") {
  const GridSpec g = make_grid(1, 1.0, 8);  // h = 1/8
  const SampledField f = indicator_field(g, 5);
  const MaximalField m = scale_limited_maximal(f, 1.0, 1, 1.0);
  REQUIRE(m.values[5] == 1.0);  // the h-window wins over every penalized window
  // at eps = 0 the penalty disappears identically
  const MaximalField m0 = scale_limited_maximal(f, 1.0, 1, 0.0);
  const MaximalField hl = hl_maximal(f, 1.0);
  REQUIRE(identical(m0.values, hl.values));
  // stronger penalty can only shrink values
  const MaximalField m2 = scale_limited_maximal(f, 1.0, 1, 2.0);
  for (std::size_t i = 0; i < m.values.size(); ++i) REQUIRE(m2.values[i] <= m.values[i]);
}

TEST_CASE("scale-limited penalty monotone in eps on random fields") {
  const GridSpec g = make_grid(1, 1.0, 32);
  for (int t = 0; t < 20; ++t) {
    const SampledField f = random_field(g, 900 + t);
    const MaximalField a = scale_limited_maximal(f, 1.3, 2, 0.3);
    const MaximalField b = scale_limited_maximal(f, 1.3, 2, 1.1);
    for (std::size_t i = 0; i < a.values.size(); ++i)
      REQUIRE(b.values[i] <= a.values[i] * (1.0 + 1e-12));
  }
  REQUIRE_THROWS_AS(scale_limited_maximal(random_field(g, 1), 1.0, 9, 0.5),
                    std::invalid_argument);
}

TEST_CASE("peetre pruned engine equals the direct engine exactly") {
  {
    const GridSpec g = make_grid(1, 1.0, 16);
    const SampledField f = random_shell_field(g, 0, 1001);
    REQUIRE(identical(peetre_maximal(f, 2.0, 0).values, peetre_maximal_pruned(f, 2.0, 0).values));
  }
  for (int t = 0; t < 30; ++t) {
    const GridSpec g = make_grid(1, 2.0, 32);
    const SampledField f = random_shell_field(g, t % 3, 1100 + t);
    const double sigma = 0.5 + 0.3 * (t % 7);
    const int k = t % 5 - 2;
    REQUIRE(identical(peetre_maximal(f, sigma, k).values,
                      peetre_maximal_pruned(f, sigma, k).values));
  }
  for (int t = 0; t < 5; ++t) {
    const GridSpec g = make_grid(2, 1.0, 8);
    const SampledField f = random_shell_field(g, 1, 1200 + t);
    REQUIRE(identical(peetre_maximal(f, 1.5, 1).values,
                      peetre_maximal_pruned(f, 1.5, 1).values));
  }
}

TEST_CASE("peetre dominates the field pointwise") {
  const GridSpec g = make_grid(1, 1.0, 32);
  const SampledField f = random_shell_field(g, 2, 1301);
  const MaximalField m = peetre_maximal(f, 3.0, 2);
  for (std::size_t i = 0; i < m.values.size(); ++i)
    REQUIRE(m.values[i] >= std::abs(f.values[i]) - 1e-15);
}

TEST_CASE("operators are sublinear") {
  const GridSpec g = make_grid(1, 1.0, 32);
  for (int t = 0; t < 10; ++t) {
    const SampledField a = random_field(g, 1400 + t);
    const SampledField b = random_field(g, 1500 + t);
    SampledField sum(g);
    for (std::size_t i = 0; i < sum.values.size(); ++i)
      sum.values[i] = a.values[i] + b.values[i];
    const MaximalField ms = hl_maximal(sum, 1.5);
    const MaximalField ma = hl_maximal(a, 1.5);
    const MaximalField mb = hl_maximal(b, 1.5);
    for (std::size_t i = 0; i < ms.values.size(); ++i)
      REQUIRE(ms.values[i] <= ma.values[i] + mb.values[i] + 1e-12);
    const MaximalField ps = peetre_maximal(sum, 2.0, 1);
    const MaximalField pa = peetre_maximal(a, 2.0, 1);
    const MaximalField pb = peetre_maximal(b, 2.0, 1);
    for (std::size_t i = 0; i < ps.values.size(); ++i)
      REQUIRE(ps.values[i] <= pa.values[i] + pb.values[i] + 1e-12);
  }
}

TEST_CASE("dilation commutes with every operator bit for bit") {
  // f_lambda(x) = f(lambda x) with lambda = 4 maps grid (L=4, N=32) samples
  // onto grid (L=1, N=32) samples unchanged; the window ladder, penalties and
  // Peetre weights rescale bijectively when k shifts by log2(lambda)
  const GridSpec g_big = make_grid(1, 4.0, 32);
  const GridSpec g_small = make_grid(1, 1.0, 32);
  const SampledField f_big = random_field(g_big, 1600);
  SampledField f_small(g_small);
  f_small.values = f_big.values;

  REQUIRE(identical(hl_maximal(f_big, 1.5).values, hl_maximal(f_small, 1.5).values));
  REQUIRE(identical(scale_limited_maximal(f_big, 1.0, 0, 0.7).values,
                    scale_limited_maximal(f_small, 1.0, 2, 0.7).values));
  REQUIRE(identical(peetre_maximal(f_big, 1.5, 1).values,
                    peetre_maximal(f_small, 1.5, 3).values));
}

TEST_CASE("maximal fields serialize with provenance") {
  const GridSpec g = make_grid(1, 1.0, 8);
  const MaximalField m = scale_limited_maximal(indicator_field(g, 0), 2.0, 1, 0.5);
  const json j = to_json(m);
  REQUIRE(j["provenance"]["operator"] == "scale_limited");
  REQUIRE(j["provenance"]["r"] == 2.0);
  REQUIRE(j["provenance"]["k"] == 1);
  REQUIRE(j["provenance"]["eps"] == 0.5);
  REQUIRE(j["values"].size() == 8);
}

TEST_CASE("local averages match hand values") {
  const GridSpec g = make_grid(1, 1.0, 16);
  ScaleSequence seq;
  seq.mu = 2;
  SampledField one(g);
  for (auto& v : one.values) v = 1.0;
  seq.entries.push_back(one);
  REQUIRE(std::abs(local_avg(seq, cube_at(g, 2, 1), 2.7) - 1.0) < 1e-12);
  REQUIRE(std::abs(local_avg(seq, cube_at(g, 2, 3), 0.4) - 1.0) < 1e-12);
  // finer cube than the only shell: empty scale sum
  REQUIRE(local_avg(seq, cube_at(g, 3, 0), 2.0) == 0.0);
  // coarser than the base scale: refused
  REQUIRE_THROWS_AS(local_avg(seq, cube_at(g, 1, 0), 2.0), std::invalid_argument);

  ScaleSequence half;
  half.mu = 1;
  SampledField ind(g);
  for (std::size_t i = 0; i < 4; ++i) ind.values[i] = 1.0;  // half of the level-1 cube
  half.entries.push_back(ind);
  REQUIRE(std::abs(local_avg(half, cube_at(g, 1, 0), 2.0) - std::sqrt(0.5)) < 1e-12);

  // s-weighting acts by exact powers of two per shell
  const double v0 = local_avg(half, cube_at(g, 1, 0), 2.0, 0.3);
  const double v1 = local_avg(half, cube_at(g, 1, 0), 2.0, 0.6);
  REQUIRE(std::abs(v1 / v0 - std::pow(2.0, 0.3 * 1)) < 1e-12);
}

TEST_CASE("v_norm equals the brute-force cube loop") {
  const GridSpec g = make_grid(1, 1.0, 64);
  const ScaleSequence seq = random_sequence(g, 1, 3, 1700);
  const NormReport rep = v_norm(seq, 1, 2.0);
  double brute = 0.0;
  for (int lev = 1; lev <= g.finest_level(); ++lev)
    for (std::int64_t c = 0; c < cube_count(g, lev); ++c)
      brute = std::max(brute, brute_local_avg(seq, lev, c, 2.0, 0.0));
  REQUIRE(std::abs(rep.value - brute) < 1e-12 * (1.0 + brute));
  REQUIRE(rep.maximizer.has_value());
  const double at_max = local_avg(seq, *rep.maximizer, 2.0);
  REQUIRE(std::abs(at_max - rep.value) < 1e-12 * (1.0 + rep.value));

  REQUIRE_THROWS_AS(v_norm(seq, 0, 2.0), std::invalid_argument);
}

TEST_CASE("v_norm trivia") {
  const GridSpec g = make_grid(1, 1.0, 32);
  ScaleSequence zero;
  zero.mu = 0;
  zero.entries.emplace_back(g);
  REQUIRE(v_norm(zero, 0, 2.0).value == 0.0);

  ScaleSequence one;
  one.mu = 1;
  SampledField c(g);
  for (auto& v : c.values) v = 1.0;
  one.entries.push_back(c);
  for (double q : {0.5, 1.0, 2.0, 7.0}) REQUIRE(std::abs(v_norm(one, 1, q).value - 1.0) < 1e-12);

  // entry-wise domination is monotone
  const ScaleSequence seq = random_sequence(g, 1, 2, 1800);
  ScaleSequence bigger = seq;
  for (auto& e : bigger.entries)
    for (auto& v : e.values) v *= 1.25;
  REQUIRE(v_norm(bigger, 1, 2.0).value >= v_norm(seq, 1, 2.0).value);
}

TEST_CASE("pure tone norms have closed forms") {
  const GridSpec g = make_grid(1, 1.0, 64);
  const SampledField f = tone(g, 4.0);  // lands exactly on the k=2 plateau
  const double expect = std::pow(2.0, 0.3 * 2);
  REQUIRE(std::abs(f_norm(f, 0.3, 2.5, 1.7).value - expect) < 1e-10);
  const double inf_q = f_norm(f, 0.3, std::numeric_limits<double>::infinity(), 2.0).value;
  REQUIRE(std::abs(inf_q - expect) < 1e-10);
  const double inf_inf = f_norm(f, 0.3, std::numeric_limits<double>::infinity(),
                                std::numeric_limits<double>::infinity())
                              .value;
  REQUIRE(std::abs(inf_inf - expect) < 1e-10);
  const double besov = besov_norm(f, 0.3, 2.0, 1.0).value;
  REQUIRE(std::abs(besov - expect) < 1e-10);
}

TEST_CASE("f_norm at p=inf equals the brute cube loop") {
  const GridSpec g = make_grid(1, 1.0, 64);
  const SampledField f = random_real_band_field(g, 12.0, 1900);
  const NormReport rep = f_norm(f, 0.0, std::numeric_limits<double>::infinity(), 2.0);
  const ScaleSequence seq = decompose(f, default_k_lo(g), default_k_hi(g));
  double brute = 0.0;
  for (int lev = g.coarsest_level(); lev <= g.finest_level(); ++lev)
    for (std::int64_t c = 0; c < cube_count(g, lev); ++c)
      brute = std::max(brute, brute_local_avg(seq, lev, c, 2.0, 0.0));
  REQUIRE(std::abs(rep.value - brute) < 1e-12 * (1.0 + brute));
}

TEST_CASE("fubini: f and besov norms agree at p = q") {
  const GridSpec g = make_grid(1, 1.0, 64);
  const SampledField f = random_real_band_field(g, 12.0, 2000);
  const double a = f_norm(f, 0.2, 1.5, 1.5).value;
  const double b = besov_norm(f, 0.2, 1.5, 1.5).value;
  REQUIRE(std::abs(a - b) < 1e-12 * (1.0 + a));
}

TEST_CASE("besov norm adds shell masses at q = 1") {
  const GridSpec g = make_grid(1, 1.0, 64);
  SampledField f(g);
  const SampledField t1 = tone(g, 2.0), t2 = tone(g, 8.0);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    f.values[i] = 0.7 * t1.values[i] + 0.3 * t2.values[i];
  REQUIRE(std::abs(besov_norm(f, 0.0, 2.0, 1.0).value - 1.0) < 1e-10);
}

TEST_CASE("inhomogeneous norms keep the base shell separate") {
  const GridSpec g = make_grid(1, 1.0, 64);
  SampledField c(g);
  for (auto& v : c.values) v = 1.0;
  REQUIRE(std::abs(f_norm(c, 0.3, std::numeric_limits<double>::infinity(), 2.0, false).value -
                   1.0) < 1e-10);
  REQUIRE(f_norm(c, 0.3, std::numeric_limits<double>::infinity(), 2.0, true).value < 1e-10);

  const SampledField f = tone(g, 4.0);
  const double expect = std::pow(2.0, 0.3 * 2);
  REQUIRE(std::abs(f_norm(f, 0.3, std::numeric_limits<double>::infinity(), 2.0, false).value -
                   expect) < 1e-10);
}

TEST_CASE("zero fields have zero norms") {
  const GridSpec g = make_grid(1, 1.0, 32);
  const SampledField z(g);
  REQUIRE(f_norm(z, 0.5, 2.0, 2.0).value == 0.0);
  REQUIRE(f_norm(z, 0.5, std::numeric_limits<double>::infinity(), 2.0).value == 0.0);
  REQUIRE(besov_norm(z, -0.5, 3.0, 1.0).value == 0.0);
}

TEST_CASE("norm reports serialize") {
  const GridSpec g = make_grid(1, 1.0, 64);
  const SampledField f = random_real_band_field(g, 12.0, 2100);
  const NormReport rep = f_norm(f, 0.0, std::numeric_limits<double>::infinity(), 2.0);
  const json j = to_json(rep);
  REQUIRE(j.contains("value"));
  REQUIRE(j.contains("maximizer"));
  const std::string line = norm_report_csv(rep);
  REQUIRE(line.find(',') != std::string::npos);
}
