#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "finfty/bumps.hpp"
#include "finfty/maximal.hpp"
#include "finfty/norms.hpp"
#include "finfty/random.hpp"
#include "finfty/report.hpp"

namespace finfty {

// Reproducible random test family: certified shell sequences with flat or
// geometrically decaying spectral envelope.
struct FamilySpec {
  std::uint64_t seed = 1;
  int count = 20;
  int mu = 0;
  int k_max = 4;
  double band_A = 2.0;   // certificate constant of each shell
  double decay = 0.0;    // shell k scaled by 2^(-decay*(k-mu))

  json to_json() const {
    return json{{"seed", seed}, {"count", count}, {"mu", mu},
                {"k_max", k_max}, {"band_A", band_A}, {"decay", decay}};
  }
};

inline ScaleSequence make_family_sequence(const GridSpec& g, const FamilySpec& fam, int mu,
                                          std::uint64_t trial) {
  if (fam.k_max > default_k_hi(g))
    throw std::invalid_argument("family scale range exceeds the grid Nyquist headroom");
  ScaleSequence seq;
  seq.mu = mu;
  const std::uint64_t base = derive_seed(fam.seed, trial);
  for (int k = mu; k <= fam.k_max; ++k) {
    SampledField f = random_shell_field(g, k, derive_seed(base, static_cast<std::uint64_t>(k - mu)));
    if (fam.decay != 0.0) {
      const double w = std::pow(2.0, -fam.decay * (k - mu));
      for (auto& v : f.values) v *= w;
    }
    seq.entries.push_back(std::move(f));
  }
  return seq;
}

inline ScaleSequence make_family_sequence(const GridSpec& g, const FamilySpec& fam,
                                          std::uint64_t trial) {
  return make_family_sequence(g, fam, fam.mu, trial);
}

namespace detail {

inline SampledField to_sampled(const MaximalField& m) {
  SampledField f(m.grid);
  for (std::size_t i = 0; i < m.values.size(); ++i) f.values[i] = m.values[i];
  return f;
}

// max over x of lhs/rhs, skipping points where rhs is numerically zero;
// returns 0 and sets *degenerate when no point survives
inline double pointwise_max_ratio(const std::vector<double>& lhs, const std::vector<double>& rhs,
                                  bool* degenerate = nullptr) {
  double best = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (rhs[i] < 1e-14 * (lhs[i] + 1.0)) continue;
    any = true;
    best = std::max(best, lhs[i] / rhs[i]);
  }
  if (degenerate) *degenerate = !any;
  return best;
}

// L^p norm over the grid of the pointwise l^q aggregate of nonnegative fields
inline double lp_lq_norm(const GridSpec& g, const std::vector<std::vector<double>>& fields,
                         double p, double q) {
  const bool q_inf = std::isinf(q);
  std::vector<double> agg(g.total(), 0.0);
  for (const auto& f : fields)
    for (std::size_t x = 0; x < agg.size(); ++x)
      agg[x] = q_inf ? std::max(agg[x], f[x]) : agg[x] + std::pow(f[x], q);
  const double hd = g.dim == 1 ? g.spacing() : g.spacing() * g.spacing();
  double acc = 0.0;
  for (double a : agg) acc += hd * std::pow(q_inf ? a : std::pow(a, 1.0 / q), p);
  return std::pow(acc, 1.0 / p);
}

inline std::vector<double> abs_values(const SampledField& f) {
  std::vector<double> v(f.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(f.values[i]);
  return v;
}

}  // namespace detail

// Vector-valued maximal inequality: L^p norm of the l^q aggregate of the
// r-maximal functions against the same aggregate of the inputs.  Requires
// r < min(p, q); q = inf runs the sup-aggregate variant.
inline RatioReport check_fefferman_stein(const GridSpec& g, const FamilySpec& fam, double p,
                                         double q, double r) {
  if (!(r > 0.0) || !(p > 0.0) || std::isinf(p))
    throw std::invalid_argument("fefferman-stein: need 0 < r < p < inf");
  if (!(r < p) || (!std::isinf(q) && !(r < q)))
    throw std::invalid_argument("fefferman-stein requires r < min(p, q)");
  RatioReport rep;
  rep.name = "fefferman_stein";
  for (int t = 0; t < fam.count; ++t) {
    const ScaleSequence seq = make_family_sequence(g, fam, t);
    std::vector<std::vector<double>> maxed, plain;
    for (const auto& f : seq.entries) {
      maxed.push_back(hl_maximal(f, r).values);
      plain.push_back(detail::abs_values(f));
    }
    const double lhs = detail::lp_lq_norm(g, maxed, p, q);
    const double rhs = detail::lp_lq_norm(g, plain, p, q);
    rep.trials.push_back(make_ratio_trial(lhs, rhs, json{{"trial", t}}));
  }
  rep.meta = json{{"p", p}, {"q", std::isinf(q) ? json("inf") : json(q)}, {"r", r},
                  {"grid", to_json(g)}, {"family", fam.to_json()}};
  return rep;
}

// With r >= p the vector-valued bound fails; a one-hot field exhibits the
// growth as the grid refines.  Returns log2(ratio) against log2(N).
inline GrowthReport fefferman_stein_violation_probe(double p, double r, int log2n_lo,
                                                    int log2n_hi) {
  if (!(r >= p)) throw std::invalid_argument("violation probe wants r >= p");
  GrowthReport rep;
  rep.name = "fefferman_stein_violation";
  for (int m = log2n_lo; m <= log2n_hi; ++m) {
    const GridSpec g = make_grid(1, 1.0, std::size_t{1} << m);
    SampledField f(g);
    f.values[0] = 1.0;
    const double lhs = detail::lp_lq_norm(g, {hl_maximal(f, r).values}, p, 1.0);
    const double rhs = detail::lp_lq_norm(g, {detail::abs_values(f)}, p, 1.0);
    rep.xs.push_back(static_cast<double>(m));
    rep.ys.push_back(std::log2(lhs / rhs));
  }
  rep.fit = linear_fit(rep.xs, rep.ys);
  rep.meta = json{{"p", p}, {"r", r}, {"claim", "positive slope: unbounded for r >= p"}};
  return rep;
}

// Majorization of the Peetre operator at matched exponents: for certified
// scale-k fields, M_{d/r,2^k} f is controlled by the r-maximal function with
// a constant that does not trend in k.
inline RatioReport check_peetre_majorization(const GridSpec& g, const FamilySpec& fam, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("peetre majorization: r > 0");
  if (fam.k_max - fam.mu < 7)
    throw std::invalid_argument("peetre majorization wants at least 8 consecutive scales");
  RatioReport rep;
  rep.name = "peetre_majorization";
  const double sigma = g.dim / r;
  std::vector<double> ks, logmax;
  for (int k = fam.mu; k <= fam.k_max; ++k) {
    double kmax = 0.0;
    for (int t = 0; t < fam.count; ++t) {
      const SampledField f =
          random_shell_field(g, k, derive_seed(derive_seed(fam.seed, t), k - fam.mu));
      const MaximalField pe = peetre_maximal_pruned(f, sigma, k);
      const MaximalField hl = hl_maximal(f, r);
      bool degen = false;
      const double ratio = detail::pointwise_max_ratio(pe.values, hl.values, &degen);
      RatioTrial trial;
      trial.lhs = ratio;
      trial.rhs = 1.0;
      trial.ratio = ratio;
      trial.degenerate = degen;
      trial.params = json{{"k", k}, {"trial", t}};
      rep.trials.push_back(trial);
      if (!degen) kmax = std::max(kmax, ratio);
    }
    if (kmax > 0.0) {
      ks.push_back(static_cast<double>(k));
      logmax.push_back(std::log2(kmax));
    }
  }
  const LinearFit fit = linear_fit(ks, logmax);
  rep.meta = json{{"r", r}, {"sigma", sigma}, {"grid", to_json(g)},
                  {"family", fam.to_json()}, {"log2_trend", to_json(fit)}};
  return rep;
}

// Pointwise lemma: M_{d/r,2^k} f <= C * scale-limited M_t^{k,eps} f with the
// lemma's own eps = d(1/r - 1/t), uniformly in k.  Refuses r >= t.
inline RatioReport check_lemma_pointwise(const GridSpec& g, const FamilySpec& fam, double r,
                                         double t) {
  if (!(r > 0.0) || !(t > 0.0)) throw std::invalid_argument("lemma: need r, t > 0");
  if (!(r < t)) throw std::invalid_argument("lemma hypothesis requires r < t");
  const double eps = g.dim * (1.0 / r - 1.0 / t);
  const double sigma = g.dim / r;
  RatioReport rep;
  rep.name = "lemma_pointwise";
  std::vector<double> ks, logmax;
  for (int k = fam.mu; k <= fam.k_max; ++k) {
    double kmax = 0.0;
    for (int tr = 0; tr < fam.count; ++tr) {
      const SampledField f =
          random_shell_field(g, k, derive_seed(derive_seed(fam.seed, tr), k - fam.mu));
      const MaximalField pe = peetre_maximal_pruned(f, sigma, k);
      const MaximalField sl = scale_limited_maximal(f, t, k, eps);
      bool degen = false;
      const double ratio = detail::pointwise_max_ratio(pe.values, sl.values, &degen);
      RatioTrial trial;
      trial.lhs = ratio;
      trial.rhs = 1.0;
      trial.ratio = ratio;
      trial.degenerate = degen;
      trial.params = json{{"k", k}, {"trial", tr}};
      rep.trials.push_back(trial);
      if (!degen) kmax = std::max(kmax, ratio);
    }
    if (kmax > 0.0) {
      ks.push_back(static_cast<double>(k));
      logmax.push_back(std::log2(kmax));
    }
  }
  const LinearFit fit = linear_fit(ks, logmax);
  rep.meta = json{{"r", r}, {"t", t}, {"eps", eps}, {"grid", to_json(g)},
                  {"family", fam.to_json()}, {"log2_trend", to_json(fit)}};
  return rep;
}

// Far-translated modulated bump evaluated at the origin: with the lemma's own
// eps the ratio stays flat in the translation distance; doubling the penalty
// exponent (more damping than the lemma grants) makes it grow like T^eps.
inline GrowthReport lemma_failure_probe(double r, double t) {
  if (!(r < t)) throw std::invalid_argument("lemma probe requires r < t");
  const GridSpec g = make_grid(1, 256.0, 4096);
  const int k = 2;
  const double eps = 1.0 / r - 1.0 / t;
  const double sigma = 1.0 / r;
  const FourierProfile bump = dilate_spatial(profiles().eta, 7);
  const double freq = std::ldexp(1.0, k);
  GrowthReport rep;
  rep.name = "lemma_failure_probe";
  std::vector<double> flat_ys;
  // the bump is sampled once around the origin and rotated into place, since
  // every translation distance is a whole number of grid steps
  std::vector<double> base(g.total());
  for (std::size_t i = 0; i < g.total(); ++i) {
    double x = g.point(i)[0];
    if (x > g.side() / 2) x -= g.side();
    base[i] = bump.spatial(x);
  }
  for (int j = 2; j <= 6; ++j) {
    const double T = std::ldexp(1.0, j);
    const std::size_t shift = static_cast<std::size_t>(T / g.spacing());
    SampledField f(g);
    for (std::size_t i = 0; i < g.total(); ++i) {
      const double ph = 2.0 * kPi * freq * g.point(i)[0];
      f.values[i] =
          base[(i + g.total() - shift) % g.total()] * std::complex<double>{std::cos(ph), std::sin(ph)};
    }
    if (!band_check(f, BandSpec{k, 2.0}, 1e-10))
      throw std::runtime_error("lemma probe: bump field failed its band certificate");
    const MaximalField pe = peetre_maximal_pruned(f, sigma, k);
    const MaximalField lawful = scale_limited_maximal(f, t, k, eps);
    const MaximalField harsh = scale_limited_maximal(f, t, k, 2.0 * eps);
    rep.xs.push_back(static_cast<double>(j));
    rep.ys.push_back(std::log2(pe.values[0] / harsh.values[0]));
    flat_ys.push_back(std::log2(pe.values[0] / lawful.values[0]));
  }
  rep.fit = linear_fit(rep.xs, rep.ys);
  const LinearFit flat_fit = linear_fit(rep.xs, flat_ys);
  rep.meta = json{{"r", r}, {"t", t}, {"eps", eps},
                  {"expected_harsh_slope", eps},
                  {"lawful_eps_trend", to_json(flat_fit)},
                  {"claim", "doubled penalty grows ~T^eps; lemma's own eps stays flat"}};
  return rep;
}

// Level-mu maximal inequality with the scale-limited operator on the left:
// local q-aggregates of M_r^{k,eps} f_k over every level-mu cube against the
// sup over level-mu cubes of the plain aggregate.  Sweeps mu and records
// per-mu constants.  all_cube_rhs = true relaxes the right side to the sup
// over all cube levels >= mu (the weaker classical form, for comparison).
inline RatioReport check_thm_maximal1(const GridSpec& g, const FamilySpec& fam,
                                      const std::vector<int>& mu_list, double r, double q,
                                      double eps, bool all_cube_rhs = false) {
  if (!(r > 0.0) || !(q > 0.0) || std::isinf(q))
    throw std::invalid_argument("thm-maximal1: need 0 < r < q < inf");
  if (!(r < q))
    throw std::invalid_argument(
        "thm-maximal1 requires r < q: at r >= q the level-mu bound fails (see the sharpness "
        "family)");
  if (eps < 0.0) throw std::invalid_argument("thm-maximal1: eps >= 0");
  RatioReport rep;
  rep.name = "thm_maximal1";
  json per_mu = json::array();
  for (int mu : mu_list) {
    if (mu < g.coarsest_level())
      throw std::invalid_argument("thm-maximal1: mu below the coarsest resolvable level");
    double mu_max = 0.0, mu_min = std::numeric_limits<double>::infinity();
    for (int t = 0; t < fam.count; ++t) {
      const ScaleSequence seq = make_family_sequence(g, fam, mu, t);
      ScaleSequence ops;
      ops.mu = mu;
      for (std::size_t i = 0; i < seq.entries.size(); ++i)
        ops.entries.push_back(
            detail::to_sampled(scale_limited_maximal(seq.entries[i], r, seq.k_of(i), eps)));
      const double lhs = v_norm_at_level(ops, q, 0.0, mu).value;
      const double rhs =
          all_cube_rhs ? v_norm(seq, mu, q).value : v_norm_at_level(seq, q, 0.0, mu).value;
      const RatioTrial trial = make_ratio_trial(lhs, rhs, json{{"mu", mu}, {"trial", t}});
      rep.trials.push_back(trial);
      if (!trial.degenerate) {
        mu_max = std::max(mu_max, trial.ratio);
        mu_min = std::min(mu_min, trial.ratio);
      }
    }
    per_mu.push_back(json{{"mu", mu}, {"max_ratio", mu_max}});
  }
  double hi = 0.0, lo = std::numeric_limits<double>::infinity();
  for (const auto& e : per_mu) {
    hi = std::max(hi, e["max_ratio"].get<double>());
    lo = std::min(lo, e["max_ratio"].get<double>());
  }
  rep.meta = json{{"r", r}, {"q", q}, {"eps", eps}, {"all_cube_rhs", all_cube_rhs},
                  {"grid", to_json(g)}, {"family", fam.to_json()}, {"per_mu", per_mu},
                  {"mu_stability_factor", lo > 0.0 ? hi / lo : 0.0}};
  return rep;
}

// Same level-mu display with the Peetre operator at sigma = d/r on the left.
inline RatioReport check_cor_maximal2(const GridSpec& g, const FamilySpec& fam,
                                      const std::vector<int>& mu_list, double r, double q,
                                      bool all_cube_rhs = false) {
  if (!(r > 0.0) || !(q > 0.0) || std::isinf(q))
    throw std::invalid_argument("cor-maximal2: need 0 < r < q < inf");
  if (!(r < q))
    throw std::invalid_argument(
        "cor-maximal2 requires r < q: at r >= q the bound fails (see the sharpness family)");
  const double sigma = g.dim / r;
  RatioReport rep;
  rep.name = "cor_maximal2";
  json per_mu = json::array();
  for (int mu : mu_list) {
    if (mu < g.coarsest_level())
      throw std::invalid_argument("cor-maximal2: mu below the coarsest resolvable level");
    double mu_max = 0.0;
    for (int t = 0; t < fam.count; ++t) {
      const ScaleSequence seq = make_family_sequence(g, fam, mu, t);
      ScaleSequence ops;
      ops.mu = mu;
      for (std::size_t i = 0; i < seq.entries.size(); ++i)
        ops.entries.push_back(
            detail::to_sampled(peetre_maximal_pruned(seq.entries[i], sigma, seq.k_of(i))));
      const double lhs = v_norm_at_level(ops, q, 0.0, mu).value;
      const double rhs =
          all_cube_rhs ? v_norm(seq, mu, q).value : v_norm_at_level(seq, q, 0.0, mu).value;
      const RatioTrial trial = make_ratio_trial(lhs, rhs, json{{"mu", mu}, {"trial", t}});
      rep.trials.push_back(trial);
      if (!trial.degenerate) mu_max = std::max(mu_max, trial.ratio);
    }
    per_mu.push_back(json{{"mu", mu}, {"max_ratio", mu_max}});
  }
  double hi = 0.0, lo = std::numeric_limits<double>::infinity();
  for (const auto& e : per_mu) {
    hi = std::max(hi, e["max_ratio"].get<double>());
    lo = std::min(lo, e["max_ratio"].get<double>());
  }
  rep.meta = json{{"r", r}, {"q", q}, {"sigma", sigma}, {"all_cube_rhs", all_cube_rhs},
                  {"grid", to_json(g)}, {"family", fam.to_json()}, {"per_mu", per_mu},
                  {"mu_stability_factor", lo > 0.0 ? hi / lo : 0.0}};
  return rep;
}

// Embedding-side checks on the sequence functional: q-monotonicity of the
// cube sup, domination of sup_k ||f_k||_inf, and the per-cube oscillation
// bound for the Peetre field at the cube's own scale.
inline RatioReport check_embedding_monotone(const GridSpec& g, const FamilySpec& fam, int mu,
                                            double q1, double q2) {
  if (!(q1 > 0.0) || !(q2 > 0.0) || std::isinf(q2))
    throw std::invalid_argument("embedding: need 0 < q1 < q2 < inf");
  if (!(q1 < q2)) throw std::invalid_argument("embedding requires q1 < q2");
  RatioReport rep;
  rep.name = "embedding_monotone";
  for (int t = 0; t < fam.count; ++t) {
    const ScaleSequence seq = make_family_sequence(g, fam, mu, t);
    const double v1 = v_norm(seq, mu, q1).value;
    const double v2 = v_norm(seq, mu, q2).value;
    rep.trials.push_back(
        make_ratio_trial(v2, v1, json{{"kind", "v_monotone"}, {"trial", t}}));
    double supk = 0.0;
    for (const auto& f : seq.entries)
      for (const auto& v : f.values) supk = std::max(supk, std::abs(v));
    rep.trials.push_back(
        make_ratio_trial(supk, v2, json{{"kind", "sup_vs_v"}, {"trial", t}}));
  }

  // oscillation of the Peetre field over a cube at the operator's own scale
  json qwqw = json::array();
  const double bound_base = 1.0 + std::sqrt(static_cast<double>(g.dim));
  for (double sigma : {1.0, 2.0, 4.0}) {
    double worst = 0.0;
    for (int k = std::max(mu, 0); k <= std::min(fam.k_max, g.finest_level()); ++k) {
      const SampledField f = random_shell_field(g, k, derive_seed(fam.seed, 7000 + k));
      const MaximalField pe = peetre_maximal_pruned(f, sigma, k);
      const std::size_t per = cube_samples_per_axis(g, k);
      const std::size_t n = g.samples_per_axis();
      for (std::int64_t c = 0; c < cube_count(g, k); ++c) {
        const DyadicCube cube = cube_at(g, k, c);
        double mx = 0.0, mn = std::numeric_limits<double>::infinity();
        if (g.dim == 1) {
          for (std::size_t o = 0; o < per; ++o) {
            const double v = pe.values[cube.index[0] * per + o];
            mx = std::max(mx, v);
            mn = std::min(mn, v);
          }
        } else {
          for (std::size_t o1 = 0; o1 < per; ++o1)
            for (std::size_t o2 = 0; o2 < per; ++o2) {
              const double v = pe.values[(cube.index[0] * per + o1) * n + cube.index[1] * per + o2];
              mx = std::max(mx, v);
              mn = std::min(mn, v);
            }
        }
        if (mn > 0.0) worst = std::max(worst, mx / mn);
      }
    }
    qwqw.push_back(json{{"sigma", sigma}, {"max_over_min", worst},
                        {"bound", std::pow(bound_base, sigma)}});
  }
  rep.meta = json{{"mu", mu}, {"q1", q1}, {"q2", q2}, {"grid", to_json(g)},
                  {"family", fam.to_json()}, {"qwqw", qwqw}};
  return rep;
}

// Besov-to-F embedding at the scale-adjusted smoothness s = s0 - d/p0;
// exercised in both Hoelder branches by the caller's choice of q.
inline RatioReport check_franke(const GridSpec& g, int count, std::uint64_t seed, double p0,
                                double s0, double q) {
  if (std::isinf(p0) || !(p0 > 0.0))
    throw std::invalid_argument("franke: need finite p0 > 0");
  const double s = s0 - g.dim / p0;
  RatioReport rep;
  rep.name = "franke_embedding";
  for (int t = 0; t < count; ++t) {
    const SampledField f =
        random_real_band_field(g, std::ldexp(1.0, default_k_hi(g)), derive_seed(seed, t));
    const double lhs = f_norm(f, s, std::numeric_limits<double>::infinity(), q, false).value;
    const double rhs = besov_norm(f, s0, p0, std::numeric_limits<double>::infinity(), false).value;
    rep.trials.push_back(make_ratio_trial(lhs, rhs, json{{"trial", t}}));
  }
  rep.meta = json{{"p0", p0}, {"s0", s0}, {"q", q}, {"s", s},
                  {"branch", q < p0 ? "q<p0" : "q>=p0"}, {"grid", to_json(g)}};
  return rep;
}

// Corner-sum bound: the l^q sum of a ball-certified field over the level-k
// corners inside P against (2^k l(P))^{d/q} times the worst local L^q average
// at P's level.
inline RatioReport check_sub_inequality(const GridSpec& g, const FamilySpec& fam, double q) {
  if (!(q > 0.0) || std::isinf(q)) throw std::invalid_argument("sub-inequality: need finite q > 0");
  if (g.dim != 1) throw std::invalid_argument("sub-inequality sweep runs at d=1");
  RatioReport rep;
  rep.name = "sub_inequality";
  const double hd = g.spacing();
  const std::size_t n = g.samples_per_axis();
  std::vector<double> ks, logmax;
  const int k_hi = std::min(fam.k_max, g.finest_level());
  for (int k = std::max(fam.mu, 2 + g.coarsest_level()); k <= k_hi; ++k) {
    double kmax = 0.0;
    for (int t = 0; t < fam.count; ++t) {
      const SampledField f = random_ball_field(g, k, derive_seed(derive_seed(fam.seed, t), k));
      std::vector<double> absf = detail::abs_values(f);
      for (int lev = std::max(g.coarsest_level(), k - 3); lev <= k; ++lev) {
        // worst local average at this level
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = hd * std::pow(absf[i], q);
        const CubePyramid pyr(g, w, lev);
        double rhs_sup = 0.0;
        const double inv_measure = std::pow(2.0, lev);
        for (std::int64_t c = 0; c < cube_count(g, lev); ++c)
          rhs_sup = std::max(rhs_sup, std::pow(inv_measure * pyr.sums(lev)[c], 1.0 / q));
        const double count_factor = std::pow(std::ldexp(1.0, k - lev), 1.0 / q);
        const std::size_t corner_stride = std::size_t{1} << (g.log2_samples - g.log2_side - k);
        const std::size_t corners_per_cube = std::size_t{1} << (k - lev);
        double lhs_max = 0.0;
        for (std::int64_t c = 0; c < cube_count(g, lev); ++c) {
          double acc = 0.0;
          const std::size_t first =
              static_cast<std::size_t>(c) * corners_per_cube * corner_stride;
          for (std::size_t j = 0; j < corners_per_cube; ++j)
            acc += std::pow(absf[first + j * corner_stride], q);
          lhs_max = std::max(lhs_max, std::pow(acc, 1.0 / q));
        }
        rep.trials.push_back(make_ratio_trial(
            lhs_max, count_factor * rhs_sup,
            json{{"k", k}, {"level", lev}, {"trial", t}}));
        if (!rep.trials.back().degenerate) kmax = std::max(kmax, rep.trials.back().ratio);
      }
    }
    if (kmax > 0.0) {
      ks.push_back(static_cast<double>(k));
      logmax.push_back(std::log2(kmax));
    }
  }
  const LinearFit fit = linear_fit(ks, logmax);
  rep.meta = json{{"q", q}, {"grid", to_json(g)}, {"family", fam.to_json()},
                  {"log2_trend", to_json(fit)}};
  return rep;
}

// Multiplier machinery -------------------------------------------------------

struct Symbol {
  std::string name;
  std::function<std::complex<double>(double)> eval;
};

inline Symbol symbol_identity() {
  return {"one", [](double) { return std::complex<double>{1.0, 0.0}; }};
}

// odd, smooth, |m| <= 1, vanishing near 0: sign(xi) ramped up over [1/4, 1/2]
inline Symbol symbol_smoothed_sign() {
  return {"smoothed_sign", [](double xi) {
            const double mag = step_up(std::abs(xi), 0.25, 0.5);
            return std::complex<double>{xi >= 0.0 ? mag : -mag, 0.0};
          }};
}

// |xi|^{i tau}: the classic oscillating unimodular symbol; value 1 at xi = 0
inline Symbol symbol_imaginary_power(double tau) {
  return {"imaginary_power", [tau](double xi) {
            if (xi == 0.0) return std::complex<double>{1.0, 0.0};
            const double ph = tau * std::log(std::abs(xi));
            return std::complex<double>{std::cos(ph), std::sin(ph)};
          }};
}

namespace detail {

// m(2^k xi) * cutoff(|xi|) sampled on the symbol grid with signed coordinates
inline SampledField localized_symbol(const GridSpec& sg, const Symbol& m, int k) {
  if (sg.dim != 1) throw std::invalid_argument("symbol grid must be one dimensional");
  const FourierProfile& cut = profiles().cutoff;
  SampledField g(sg);
  const double half = sg.side() / 2;
  for (std::size_t i = 0; i < sg.total(); ++i) {
    double xi = sg.point(i)[0];
    if (xi >= half) xi -= sg.side();
    const double c = cut(std::abs(xi));
    g.values[i] = c == 0.0 ? 0.0 : m.eval(std::ldexp(xi, k)) * c;
  }
  return g;
}

// Fractional Sobolev norm of the localized symbol, truncated to the symbol
// grid's frequency set.  The transform is taken on an internally oversampled
// grid so the coefficients are alias-free at the truncation set; the symbol
// grid fixes only which frequencies enter the sum.
inline double sobolev_norm_fft(const GridSpec& sg, const Symbol& m, int k, double alpha) {
  const GridSpec os{1, sg.log2_side, std::min(sg.log2_samples + 6, 24)};
  const Spectrum sp = forward_spectrum(localized_symbol(os, m, k));
  const Spectrum probe(sg);
  const std::int64_t n_os = static_cast<std::int64_t>(os.samples_per_axis());
  double acc = 0.0;
  for (std::size_t i = 0; i < sg.total(); ++i) {
    const std::int64_t n = probe.freq_index(i);
    const std::size_t io = static_cast<std::size_t>(n >= 0 ? n : n_os + n);
    const double z = probe.xi(i)[0];
    acc += std::pow(1.0 + z * z, alpha) * std::norm(sp.coeff[io]);
  }
  return std::sqrt(acc / sg.side());
}

// same truncated sum with the transform done by direct oscillation-resolved
// quadrature instead of the FFT; fully independent route
inline double sobolev_norm_quadrature(const GridSpec& sg, const Symbol& m, int k, double alpha) {
  const FourierProfile& cut = profiles().cutoff;
  const auto g = [&](double xi) -> std::complex<double> {
    const double c = cut(std::abs(xi));
    return c == 0.0 ? std::complex<double>{0.0, 0.0} : m.eval(std::ldexp(xi, k)) * c;
  };
  const Spectrum probe(sg);
  double acc = 0.0;
  for (std::size_t i = 0; i < sg.total(); ++i) {
    const double z = probe.xi(i)[0];
    const int panels = std::max(2048, 32 * static_cast<int>(8.0 * std::abs(z) + 1.0));
    const double w = -2.0 * kPi * z;
    const double re = simpson([&](double xi) { return (g(xi) * std::polar(1.0, w * xi)).real(); },
                              -4.0, 4.0, panels);
    const double im = simpson([&](double xi) { return (g(xi) * std::polar(1.0, w * xi)).imag(); },
                              -4.0, 4.0, panels);
    acc += std::pow(1.0 + z * z, alpha) * (re * re + im * im);
  }
  return std::sqrt(acc / sg.side());
}

}  // namespace detail

// sup over the dyadic rescalings k in [k_lo, k_hi] of the localized symbol's
// fractional Sobolev norm
inline double hormander_norm(const GridSpec& sg, const Symbol& m, double alpha, int k_lo = -10,
                             int k_hi = 10, int* arg_k = nullptr) {
  if (!(alpha > 0.0)) throw std::invalid_argument("hormander_norm: alpha > 0");
  double worst = 0.0;
  for (int k = k_lo; k <= k_hi; ++k) {
    const SampledField g = detail::localized_symbol(sg, m, k);
    double mx = 0.0;
    for (const auto& v : g.values) mx = std::max(mx, std::abs(v));
    if (!(mx < 1e8))
      throw std::invalid_argument("hormander_norm: symbol is not essentially bounded on the grid");
    const double norm = detail::sobolev_norm_fft(sg, m, k, alpha);
    if (norm > worst) {
      worst = norm;
      if (arg_k) *arg_k = k;
    }
  }
  return worst;
}

inline SampledField apply_multiplier(const SampledField& f, const Symbol& m) {
  if (f.grid.dim != 1) throw std::invalid_argument("apply_multiplier runs at d=1");
  Spectrum sp = forward_spectrum(f);
  for (std::size_t i = 0; i < sp.coeff.size(); ++i) sp.coeff[i] *= m.eval(sp.xi(i)[0]);
  SampledField out = synthesize(sp);
  out.band = f.band;
  return out;
}

// ||T_m f|| / (A_alpha[m] * ||f||) on the homogeneous p = inf scale
inline RatioReport check_multiplier(const GridSpec& g, const GridSpec& symbol_grid,
                                    const Symbol& m, double alpha, double q, int count,
                                    std::uint64_t seed) {
  if (g.dim != 1) throw std::invalid_argument("check_multiplier runs at d=1");
  const double threshold = g.dim / std::min(1.0, q) - g.dim / 2.0;
  if (!(alpha > threshold))
    throw std::invalid_argument("check_multiplier: alpha must exceed d/min(1,q) - d/2");
  const double a_norm = hormander_norm(symbol_grid, m, alpha);
  RatioReport rep;
  rep.name = "multiplier_" + m.name;
  for (int t = 0; t < count; ++t) {
    const SampledField f =
        random_real_band_field(g, std::ldexp(1.0, default_k_hi(g)), derive_seed(seed, t));
    const SampledField tf = apply_multiplier(f, m);
    const double lhs = f_norm(tf, 0.0, std::numeric_limits<double>::infinity(), q).value;
    const double rhs =
        a_norm * f_norm(f, 0.0, std::numeric_limits<double>::infinity(), q).value;
    rep.trials.push_back(make_ratio_trial(lhs, rhs, json{{"trial", t}}));
  }
  rep.meta = json{{"symbol", m.name}, {"alpha", alpha}, {"q", q},
                  {"hormander_norm", a_norm}, {"grid", to_json(g)},
                  {"symbol_grid", to_json(symbol_grid)}};
  return rep;
}

}  // namespace finfty
