#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "finfty/dyadic.hpp"
#include "finfty/grid.hpp"
#include "finfty/lp.hpp"

namespace finfty {

struct NormReport {
  double value = 0.0;
  std::optional<DyadicCube> maximizer;  // cube attaining the sup, when one exists
  int k_lo = 0, k_hi = 0;               // shell range actually used
  json params;
};

inline json to_json(const NormReport& r) {
  json j;
  j["value"] = r.value;
  if (r.maximizer) {
    json c;
    c["level"] = r.maximizer->level;
    c["index"] = r.maximizer->dim == 1 ? json::array({r.maximizer->index[0]})
                                       : json::array({r.maximizer->index[0], r.maximizer->index[1]});
    j["maximizer"] = c;
  } else {
    j["maximizer"] = nullptr;
  }
  j["k_lo"] = r.k_lo;
  j["k_hi"] = r.k_hi;
  if (!r.params.is_null()) j["params"] = r.params;
  return j;
}

// Local dyadic average entering every p=infinity norm:
// ((1/|P|) sum_{k >= level(P)} 2^{skq} integral_P |f_k|^q)^(1/q),
// integrals as h^d-weighted sample sums.  The shell sum starts at the cube's
// own level; cubes coarser than the sequence base are refused.
inline double local_avg(const ScaleSequence& seq, const DyadicCube& cube, double q,
                        double s = 0.0) {
  if (!(q > 0.0) || !std::isfinite(q)) throw std::invalid_argument("local_avg: need 0 < q < inf");
  if (cube.level < seq.mu)
    throw std::invalid_argument("local_avg: cube coarser than the sequence base scale");
  const GridSpec& g = seq.grid();
  const double h = g.spacing();
  const double hd = g.dim == 1 ? h : h * h;
  const std::size_t per = cube_samples_per_axis(g, cube.level);
  const std::size_t base1 = cube.index[0] * per;
  const std::size_t base2 = g.dim == 2 ? cube.index[1] * per : 0;
  const std::size_t n = g.samples_per_axis();
  double total = 0.0;
  for (std::size_t i = static_cast<std::size_t>(cube.level - seq.mu); i < seq.entries.size();
       ++i) {
    const int k = seq.k_of(static_cast<int>(i));
    double cell = 0.0;
    const auto& vals = seq.entries[i].values;
    if (g.dim == 1) {
      for (std::size_t o = 0; o < per; ++o) cell += std::pow(std::abs(vals[base1 + o]), q);
    } else {
      for (std::size_t o1 = 0; o1 < per; ++o1)
        for (std::size_t o2 = 0; o2 < per; ++o2)
          cell += std::pow(std::abs(vals[(base1 + o1) * n + base2 + o2]), q);
    }
    total += std::pow(2.0, s * k * q) * hd * cell;
  }
  const double inv_measure = std::pow(2.0, cube.level * g.dim);
  return std::pow(inv_measure * total, 1.0 / q);
}

namespace detail {

// Per-shell cube sums of h^d |f_k|^q for all levels in [base, finest], built
// bottom-up so every local average is a couple of table lookups.
struct ShellPyramids {
  std::vector<CubePyramid> pyr;
  int base;

  ShellPyramids(const ScaleSequence& seq, double q, int base_level) : base(base_level) {
    const GridSpec& g = seq.grid();
    const double h = g.spacing();
    const double hd = g.dim == 1 ? h : h * h;
    pyr.reserve(seq.entries.size());
    for (const auto& e : seq.entries) {
      std::vector<double> w(e.values.size());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = hd * std::pow(std::abs(e.values[i]), q);
      pyr.emplace_back(g, w, base_level);
    }
  }
};

}  // namespace detail

// sup over dyadic cubes with level(P) in [level_lo, level_hi] of the local
// average; this is the sequence-space norm used on both sides of the maximal
// inequalities.  Levels are clamped to what the grid resolves.
inline NormReport v_norm(const ScaleSequence& seq, double q, double s, int level_lo,
                         int level_hi) {
  if (!(q > 0.0) || !std::isfinite(q)) throw std::invalid_argument("v_norm: need 0 < q < inf");
  const GridSpec& g = seq.grid();
  level_lo = std::max({level_lo, seq.mu, g.coarsest_level()});
  level_hi = std::min(level_hi, g.finest_level());
  if (level_lo > level_hi)
    throw std::invalid_argument("v_norm: no admissible cube level in range");
  const detail::ShellPyramids sp(seq, q, level_lo);
  NormReport rep;
  rep.value = -1.0;
  rep.k_lo = seq.mu;
  rep.k_hi = seq.k_max();
  for (int lev = level_lo; lev <= level_hi; ++lev) {
    const std::size_t count = cube_count(g, lev);
    const double inv_measure = std::pow(2.0, lev * g.dim);
    const std::size_t first_shell =
        lev <= seq.mu ? 0 : static_cast<std::size_t>(lev - seq.mu);
    for (std::size_t c = 0; c < count; ++c) {
      double total = 0.0;
      for (std::size_t i = first_shell; i < sp.pyr.size(); ++i) {
        const int k = seq.k_of(static_cast<int>(i));
        total += std::pow(2.0, s * k * q) * sp.pyr[i].sums(lev)[c];
      }
      const double v = std::pow(inv_measure * total, 1.0 / q);
      if (v > rep.value) {
        rep.value = v;
        rep.maximizer = cube_at(g, lev, c);
      }
    }
  }
  if (rep.value < 0.0) rep.value = 0.0;
  return rep;
}

// sup over all levels from the sequence base scale down to single samples
inline NormReport v_norm(const ScaleSequence& seq, double q, double s = 0.0) {
  return v_norm(seq, q, s, seq.mu, seq.grid().finest_level());
}

// sup restricted to cubes of exactly one level (right-hand side of the
// level-mu maximal bounds)
inline NormReport v_norm_at_level(const ScaleSequence& seq, double q, double s, int level) {
  return v_norm(seq, q, s, level, level);
}

// sup over cubes with side at most 2^-mu; mu may not precede the sequence base
inline NormReport v_norm(const ScaleSequence& seq, int mu, double q) {
  if (mu < seq.mu) throw std::invalid_argument("v_norm: mu precedes the sequence base scale");
  return v_norm(seq, q, 0.0, mu, seq.grid().finest_level());
}

inline std::string norm_report_csv(const NormReport& r) {
  char buf[160];
  if (r.maximizer) {
    if (r.maximizer->dim == 1)
      std::snprintf(buf, sizeof buf, "%.17g,%d,%lld,", r.value, r.maximizer->level,
                    static_cast<long long>(r.maximizer->index[0]));
    else
      std::snprintf(buf, sizeof buf, "%.17g,%d,%lld,%lld", r.value, r.maximizer->level,
                    static_cast<long long>(r.maximizer->index[0]),
                    static_cast<long long>(r.maximizer->index[1]));
  } else {
    std::snprintf(buf, sizeof buf, "%.17g,,,", r.value);
  }
  return buf;
}

struct FNormParams {
  double s = 0.0;
  double p = std::numeric_limits<double>::infinity();
  double q = 2.0;
  bool homogeneous = true;
  int k_lo = 0, k_hi = 0;  // shell range; callers usually take the defaults
};

inline FNormParams default_f_params(const GridSpec& g, double s, double p, double q,
                                    bool homogeneous) {
  FNormParams par;
  par.s = s;
  par.p = p;
  par.q = q;
  par.homogeneous = homogeneous;
  par.k_lo = homogeneous ? default_k_lo(g) : 0;
  par.k_hi = default_k_hi(g);
  return par;
}

namespace detail {

inline std::vector<SampledField> build_shells(const SampledField& f, const FNormParams& par) {
  const GridSpec& g = f.grid;
  if (par.k_hi > default_k_hi(g))
    throw std::invalid_argument("norm: shell range exceeds grid Nyquist headroom");
  if (par.k_lo > par.k_hi) throw std::invalid_argument("norm: empty shell range");
  if (!par.homogeneous && par.k_lo < 0)
    throw std::invalid_argument("norm: inhomogeneous shells start at k = 0");
  std::vector<SampledField> shells;
  shells.reserve(par.k_hi - par.k_lo + 1);
  for (int k = par.k_lo; k <= par.k_hi; ++k)
    shells.push_back(par.homogeneous ? project(f, k) : inhomog_project(f, k));
  return shells;
}

}  // namespace detail

// Triebel-Lizorkin scale on the torus grid.  p finite: L^p norm of the
// pointwise l^q aggregate of weighted shells.  p = infinity, q finite: sup of
// local dyadic averages over all resolvable cubes (inhomogeneous case: the
// k = 0 shell enters in sup norm and cubes start at level 1, matching how the
// scale is defined at p = infinity).  q = infinity: l^q becomes sup over k.
inline NormReport f_norm(const SampledField& f, const FNormParams& par) {
  const GridSpec& g = f.grid;
  const bool p_inf = std::isinf(par.p);
  const bool q_inf = std::isinf(par.q);
  if (!p_inf && !(par.p > 0.0)) throw std::invalid_argument("f_norm: need p > 0");
  if (!q_inf && !(par.q > 0.0)) throw std::invalid_argument("f_norm: need q > 0");
  const auto shells = detail::build_shells(f, par);
  NormReport rep;
  rep.k_lo = par.k_lo;
  rep.k_hi = par.k_hi;
  rep.params = json{{"s", par.s},
                    {"p", p_inf ? json("inf") : json(par.p)},
                    {"q", q_inf ? json("inf") : json(par.q)},
                    {"homogeneous", par.homogeneous}};

  if (!p_inf) {
    std::vector<double> agg(g.total(), 0.0);
    for (std::size_t i = 0; i < shells.size(); ++i) {
      const int k = par.k_lo + static_cast<int>(i);
      const double wk = std::pow(2.0, par.s * k);
      for (std::size_t x = 0; x < agg.size(); ++x) {
        const double v = wk * std::abs(shells[i].values[x]);
        if (q_inf)
          agg[x] = std::max(agg[x], v);
        else
          agg[x] += std::pow(v, par.q);
      }
    }
    const double hd = g.dim == 1 ? g.spacing() : g.spacing() * g.spacing();
    double acc = 0.0;
    for (double a : agg) {
      const double gx = q_inf ? a : std::pow(a, 1.0 / par.q);
      acc += hd * std::pow(gx, par.p);
    }
    rep.value = std::pow(acc, 1.0 / par.p);
    return rep;
  }

  if (q_inf) {
    double sup = 0.0;
    for (std::size_t i = 0; i < shells.size(); ++i) {
      const int k = par.k_lo + static_cast<int>(i);
      const double wk = std::pow(2.0, par.s * k);
      for (const auto& z : shells[i].values) sup = std::max(sup, wk * std::abs(z));
    }
    rep.value = sup;
    return rep;
  }

  // p = infinity, q finite
  double base_term = 0.0;
  std::size_t first = 0;
  int level_lo = par.homogeneous ? g.coarsest_level() : 1;
  if (!par.homogeneous) {
    base_term = sup_norm(shells[0]);
    first = 1;
    if (shells.size() == 1 || g.finest_level() < 1) {
      if (g.finest_level() < 1 && shells.size() > 1)
        throw std::invalid_argument("f_norm: no admissible cube below level 1 on this grid");
      rep.value = base_term;
      return rep;
    }
  }
  ScaleSequence seq;
  seq.mu = par.k_lo + static_cast<int>(first);
  seq.entries.assign(shells.begin() + first, shells.end());
  // cubes coarser than the first available shell sum over every shell present
  const int lo = std::max(level_lo, g.coarsest_level());
  const int hi = g.finest_level();
  const detail::ShellPyramids sp(seq, par.q, lo);
  NormReport inner;
  inner.value = -1.0;
  for (int lev = lo; lev <= hi; ++lev) {
    const std::size_t count = cube_count(g, lev);
    const double inv_measure = std::pow(2.0, lev * g.dim);
    const std::size_t first_shell =
        lev <= seq.mu ? 0 : static_cast<std::size_t>(lev - seq.mu);
    for (std::size_t c = 0; c < count; ++c) {
      double total = 0.0;
      for (std::size_t i = first_shell; i < sp.pyr.size(); ++i) {
        const int k = seq.k_of(static_cast<int>(i));
        total += std::pow(2.0, par.s * k * par.q) * sp.pyr[i].sums(lev)[c];
      }
      const double v = std::pow(inv_measure * total, 1.0 / par.q);
      if (v > inner.value) {
        inner.value = v;
        inner.maximizer = cube_at(g, lev, c);
      }
    }
  }
  rep.value = base_term + std::max(inner.value, 0.0);
  rep.maximizer = inner.maximizer;
  return rep;
}

inline NormReport f_norm(const SampledField& f, double s, double p, double q,
                         bool homogeneous = true) {
  return f_norm(f, default_f_params(f.grid, s, p, q, homogeneous));
}

// Besov scale: l^q over k of weighted shell L^p norms (sup over k at
// q = infinity, sup norm at p = infinity).
inline NormReport besov_norm(const SampledField& f, const FNormParams& par) {
  const bool p_inf = std::isinf(par.p);
  const bool q_inf = std::isinf(par.q);
  if (!p_inf && !(par.p > 0.0)) throw std::invalid_argument("besov_norm: need p > 0");
  if (!q_inf && !(par.q > 0.0)) throw std::invalid_argument("besov_norm: need q > 0");
  const auto shells = detail::build_shells(f, par);
  NormReport rep;
  rep.k_lo = par.k_lo;
  rep.k_hi = par.k_hi;
  rep.params = json{{"s", par.s},
                    {"p", p_inf ? json("inf") : json(par.p)},
                    {"q", q_inf ? json("inf") : json(par.q)},
                    {"homogeneous", par.homogeneous},
                    {"scale", "besov"}};
  double acc = 0.0, sup = 0.0;
  for (std::size_t i = 0; i < shells.size(); ++i) {
    const int k = par.k_lo + static_cast<int>(i);
    const double term =
        std::pow(2.0, par.s * k) * (p_inf ? sup_norm(shells[i]) : lp_norm(shells[i], par.p));
    if (q_inf)
      sup = std::max(sup, term);
    else
      acc += std::pow(term, par.q);
  }
  rep.value = q_inf ? sup : std::pow(acc, 1.0 / par.q);
  return rep;
}

inline NormReport besov_norm(const SampledField& f, double s, double p, double q,
                             bool homogeneous = true) {
  return besov_norm(f, default_f_params(f.grid, s, p, q, homogeneous));
}

}  // namespace finfty
