#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "finfty/grid.hpp"

namespace finfty {

enum class MaximalKind { HardyLittlewood, ScaleLimited, Peetre };

struct MaximalField {
  GridSpec grid;
  std::vector<double> values;
  MaximalKind kind = MaximalKind::HardyLittlewood;
  double exponent = 1.0;  // r for window operators, sigma for Peetre
  int k = 0;
  double eps = 0.0;
};

inline const char* maximal_kind_name(MaximalKind k) {
  switch (k) {
    case MaximalKind::HardyLittlewood: return "hardy_littlewood";
    case MaximalKind::ScaleLimited: return "scale_limited";
    case MaximalKind::Peetre: return "peetre";
  }
  return "?";
}

inline json to_json(const MaximalField& m) {
  json j;
  j["grid"] = to_json(m.grid);
  json prov;
  prov["operator"] = maximal_kind_name(m.kind);
  prov[m.kind == MaximalKind::Peetre ? "sigma" : "r"] = m.exponent;
  if (m.kind != MaximalKind::HardyLittlewood) prov["k"] = m.k;
  if (m.kind == MaximalKind::ScaleLimited) prov["eps"] = m.eps;
  j["provenance"] = std::move(prov);
  j["values"] = m.values;
  return j;
}

// Dyadic ladder of periodic grid-aligned windows: sizes w_j = h * 2^j for
// j = 0..log2(N), all N^d periodic positions per size.  Window averages of
// |f|^r come from prefix sums over the doubled (periodized) array; this is
// the one normative window family every operator and oracle shares.
class WindowLadder {
 public:
  WindowLadder(const SampledField& f, double r) : grid_(f.grid), r_(r) {
    if (!(r > 0.0)) throw std::invalid_argument("WindowLadder: r must be positive");
    const std::size_t n = grid_.samples_per_axis();
    std::vector<double> w(f.values.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(std::abs(f.values[i]), r);
    if (grid_.dim == 1) {
      prefix_.assign(2 * n + 1, 0.0);
      for (std::size_t i = 0; i < 2 * n; ++i) prefix_[i + 1] = prefix_[i] + w[i % n];
    } else {
      const std::size_t dn = 2 * n + 1;
      prefix_.assign(dn * dn, 0.0);
      for (std::size_t i = 0; i < 2 * n; ++i)
        for (std::size_t j = 0; j < 2 * n; ++j)
          prefix_[(i + 1) * dn + (j + 1)] = w[(i % n) * n + (j % n)] + prefix_[i * dn + (j + 1)] +
                                            prefix_[(i + 1) * dn + j] - prefix_[i * dn + j];
    }
  }

  int num_sizes() const { return grid_.log2_samples + 1; }  // j = 0..log2(N)
  double window_side(int j) const { return std::ldexp(grid_.spacing(), j); }
  double r() const { return r_; }
  const GridSpec& grid() const { return grid_; }

  // average of |f|^r over the size-j window with lower corner at sample t
  double window_average(int j, std::size_t t1, std::size_t t2 = 0) const {
    const std::size_t m = std::size_t{1} << j;
    if (grid_.dim == 1) return (prefix_[t1 + m] - prefix_[t1]) / static_cast<double>(m);
    const std::size_t dn = 2 * grid_.samples_per_axis() + 1;
    const double s = prefix_[(t1 + m) * dn + (t2 + m)] - prefix_[t1 * dn + (t2 + m)] -
                     prefix_[(t1 + m) * dn + t2] + prefix_[t1 * dn + t2];
    return s / static_cast<double>(m * m);
  }

  // all positions of one size, indexed by lower corner
  std::vector<double> window_averages(int j) const {
    const std::size_t n = grid_.samples_per_axis();
    std::vector<double> a(grid_.total());
    if (grid_.dim == 1) {
      for (std::size_t t = 0; t < n; ++t) a[t] = window_average(j, t);
    } else {
      for (std::size_t t1 = 0; t1 < n; ++t1)
        for (std::size_t t2 = 0; t2 < n; ++t2) a[t1 * n + t2] = window_average(j, t1, t2);
    }
    return a;
  }

 private:
  GridSpec grid_;
  double r_;
  std::vector<double> prefix_;
};

namespace detail {

// out[x] = max over t in [x-m+1, x] (mod n) of a[t]; monotone deque over the
// doubled index range.
inline void sliding_max_periodic(const double* a, std::size_t n, std::size_t m, double* out) {
  std::deque<std::size_t> dq;
  for (std::size_t i = 0; i < 2 * n; ++i) {
    const double v = a[i % n];
    while (!dq.empty() && a[dq.back() % n] <= v) dq.pop_back();
    dq.push_back(i);
    if (dq.front() + m <= i) dq.pop_front();
    if (i >= n) out[i - n] = a[dq.front() % n];
  }
}

// per-sample maximum of window averages of one size over all positions
// containing the sample
inline std::vector<double> size_max(const WindowLadder& lad, int j) {
  const GridSpec& g = lad.grid();
  const std::size_t n = g.samples_per_axis();
  const std::size_t m = std::size_t{1} << j;
  const std::vector<double> a = lad.window_averages(j);
  std::vector<double> out(a.size());
  if (g.dim == 1) {
    sliding_max_periodic(a.data(), n, m, out.data());
    return out;
  }
  std::vector<double> rows(a.size());
  for (std::size_t t1 = 0; t1 < n; ++t1)
    sliding_max_periodic(a.data() + t1 * n, n, m, rows.data() + t1 * n);
  std::vector<double> col_in(n), col_out(n);
  for (std::size_t x2 = 0; x2 < n; ++x2) {
    for (std::size_t t1 = 0; t1 < n; ++t1) col_in[t1] = rows[t1 * n + x2];
    sliding_max_periodic(col_in.data(), n, m, col_out.data());
    for (std::size_t x1 = 0; x1 < n; ++x1) out[x1 * n + x2] = col_out[x1];
  }
  return out;
}

inline void warn_uncertified_peetre() {
  static std::once_flag flag;
  std::call_once(flag, [] {
    std::fprintf(stderr,
                 "finfty: peetre_maximal on a field without band certificate; "
                 "operator is still defined on the samples\n");
  });
}

}  // namespace detail

// Hardy-Littlewood r-maximal function over the shared window ladder:
// M_r f(x) = sup over ladder windows containing x of (avg |f|^r)^(1/r).
inline MaximalField hl_maximal(const SampledField& f, double r) {
  const WindowLadder lad(f, r);
  MaximalField out{f.grid, std::vector<double>(f.grid.total(), 0.0),
                   MaximalKind::HardyLittlewood, r, 0, 0.0};
  // the 1/r power is applied per size so the scale-limited operator at eps = 0
  // reproduces this engine bit for bit
  for (int j = 0; j < lad.num_sizes(); ++j) {
    const auto sm = detail::size_max(lad, j);
    for (std::size_t i = 0; i < sm.size(); ++i)
      out.values[i] = std::max(out.values[i], std::pow(sm[i], 1.0 / r));
  }
  return out;
}

// Same value by direct enumeration of every (size, position) pair; shares the
// ladder averages, so agreement with the fast engine is exact.
inline MaximalField hl_maximal_brute(const SampledField& f, double r) {
  const WindowLadder lad(f, r);
  const GridSpec& g = f.grid;
  const std::size_t n = g.samples_per_axis();
  MaximalField out{g, std::vector<double>(g.total(), 0.0), MaximalKind::HardyLittlewood, r, 0,
                   0.0};
  for (int j = 0; j < lad.num_sizes(); ++j) {
    const std::size_t m = std::size_t{1} << j;
    if (g.dim == 1) {
      for (std::size_t t = 0; t < n; ++t) {
        const double a = std::pow(lad.window_average(j, t), 1.0 / r);
        for (std::size_t o = 0; o < m; ++o) {
          const std::size_t x = (t + o) % n;
          out.values[x] = std::max(out.values[x], a);
        }
      }
    } else {
      for (std::size_t t1 = 0; t1 < n; ++t1)
        for (std::size_t t2 = 0; t2 < n; ++t2) {
          const double a = std::pow(lad.window_average(j, t1, t2), 1.0 / r);
          for (std::size_t o1 = 0; o1 < m; ++o1)
            for (std::size_t o2 = 0; o2 < m; ++o2) {
              const std::size_t x = ((t1 + o1) % n) * n + (t2 + o2) % n;
              out.values[x] = std::max(out.values[x], a);
            }
        }
    }
  }
  return out;
}

// Size-dependent penalty of the scale-limited operator: windows at or below
// the scale cutoff 2^-k enter at full weight, larger windows are damped by
// (2^k w)^-eps.
inline double scale_penalty(double w, int k, double eps) {
  const double t = std::ldexp(w, k);
  return t <= 1.0 ? 1.0 : std::pow(t, -eps);
}

// Scale-limited maximal operator: sup over all ladder windows of
// penalty(w) * (avg |f|^r)^(1/r).  At eps = 0 this is exactly hl_maximal.
inline MaximalField scale_limited_maximal(const SampledField& f, double r, int k, double eps) {
  const GridSpec& g = f.grid;
  if (k < g.coarsest_level() || k > g.finest_level())
    throw std::invalid_argument("scale_limited_maximal: cutoff 2^-k outside [h, L]");
  if (eps < 0.0) throw std::invalid_argument("scale_limited_maximal: eps must be >= 0");
  const WindowLadder lad(f, r);
  MaximalField out{g, std::vector<double>(g.total(), 0.0), MaximalKind::ScaleLimited, r, k, eps};
  for (int j = 0; j < lad.num_sizes(); ++j) {
    const double pen = scale_penalty(lad.window_side(j), k, eps);
    const auto sm = detail::size_max(lad, j);
    for (std::size_t i = 0; i < sm.size(); ++i)
      out.values[i] = std::max(out.values[i], pen * std::pow(sm[i], 1.0 / r));
  }
  return out;
}

inline MaximalField scale_limited_maximal_brute(const SampledField& f, double r, int k,
                                                double eps) {
  const GridSpec& g = f.grid;
  if (k < g.coarsest_level() || k > g.finest_level())
    throw std::invalid_argument("scale_limited_maximal: cutoff 2^-k outside [h, L]");
  const WindowLadder lad(f, r);
  const std::size_t n = g.samples_per_axis();
  MaximalField out{g, std::vector<double>(g.total(), 0.0), MaximalKind::ScaleLimited, r, k, eps};
  for (int j = 0; j < lad.num_sizes(); ++j) {
    const double pen = scale_penalty(lad.window_side(j), k, eps);
    const std::size_t m = std::size_t{1} << j;
    if (g.dim == 1) {
      for (std::size_t t = 0; t < n; ++t) {
        const double v = pen * std::pow(lad.window_average(j, t), 1.0 / r);
        for (std::size_t o = 0; o < m; ++o) {
          const std::size_t x = (t + o) % n;
          out.values[x] = std::max(out.values[x], v);
        }
      }
    } else {
      for (std::size_t t1 = 0; t1 < n; ++t1)
        for (std::size_t t2 = 0; t2 < n; ++t2) {
          const double v = pen * std::pow(lad.window_average(j, t1, t2), 1.0 / r);
          for (std::size_t o1 = 0; o1 < m; ++o1)
            for (std::size_t o2 = 0; o2 < m; ++o2) {
              const std::size_t x = ((t1 + o1) % n) * n + (t2 + o2) % n;
              out.values[x] = std::max(out.values[x], v);
            }
        }
    }
  }
  return out;
}

namespace detail {

// torus distance table and |f| for the Peetre engines
struct PeetreTables {
  std::vector<double> absf;
  std::vector<double> weight;  // per offset, indexed like samples

  PeetreTables(const SampledField& f, double sigma, int k) {
    const GridSpec& g = f.grid;
    const std::size_t n = g.samples_per_axis();
    const double h = g.spacing();
    const double L = g.side();
    absf.resize(f.values.size());
    for (std::size_t i = 0; i < absf.size(); ++i) absf[i] = std::abs(f.values[i]);
    weight.resize(g.total());
    const double tk = std::ldexp(1.0, k);
    if (g.dim == 1) {
      for (std::size_t o = 0; o < n; ++o) {
        const double y = std::min(o * h, L - o * h);
        weight[o] = std::pow(1.0 + tk * y, -sigma);
      }
    } else {
      for (std::size_t o1 = 0; o1 < n; ++o1)
        for (std::size_t o2 = 0; o2 < n; ++o2) {
          const double y1 = std::min(o1 * h, L - o1 * h);
          const double y2 = std::min(o2 * h, L - o2 * h);
          weight[o1 * n + o2] = std::pow(1.0 + tk * std::hypot(y1, y2), -sigma);
        }
    }
  }
};

}  // namespace detail

// Peetre maximal operator on grid offsets:
// M_{sigma,2^k} f(x) = max over offsets y of |f(x-y)| / (1 + 2^k |y|)^sigma,
// |y| measured in the torus metric.  Direct O(N^2d) evaluation; this is the
// reference engine.
inline MaximalField peetre_maximal(const SampledField& f, double sigma, int k) {
  if (!(sigma > 0.0)) throw std::invalid_argument("peetre_maximal: sigma must be positive");
  if (!f.band) detail::warn_uncertified_peetre();
  const GridSpec& g = f.grid;
  const std::size_t n = g.samples_per_axis();
  const detail::PeetreTables tab(f, sigma, k);
  MaximalField out{g, std::vector<double>(g.total(), 0.0), MaximalKind::Peetre, sigma, k, 0.0};
  if (g.dim == 1) {
    for (std::size_t x = 0; x < n; ++x) {
      double best = 0.0;
      for (std::size_t o = 0; o < n; ++o) {
        const double v = tab.absf[(x + n - o) % n] * tab.weight[o];
        if (v > best) best = v;
      }
      out.values[x] = best;
    }
  } else {
    for (std::size_t x1 = 0; x1 < n; ++x1)
      for (std::size_t x2 = 0; x2 < n; ++x2) {
        double best = 0.0;
        for (std::size_t o1 = 0; o1 < n; ++o1)
          for (std::size_t o2 = 0; o2 < n; ++o2) {
            const double v =
                tab.absf[((x1 + n - o1) % n) * n + (x2 + n - o2) % n] * tab.weight[o1 * n + o2];
            if (v > best) best = v;
          }
        out.values[x1 * n + x2] = best;
      }
  }
  return out;
}

// Same offsets visited in decreasing-weight order with an early exit once the
// remaining weights cannot beat the running best; value matches the direct
// engine exactly because skipped offsets are provably dominated.
inline MaximalField peetre_maximal_pruned(const SampledField& f, double sigma, int k) {
  if (!(sigma > 0.0)) throw std::invalid_argument("peetre_maximal: sigma must be positive");
  if (!f.band) detail::warn_uncertified_peetre();
  const GridSpec& g = f.grid;
  const std::size_t n = g.samples_per_axis();
  const detail::PeetreTables tab(f, sigma, k);
  std::vector<std::size_t> order(g.total());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return tab.weight[a] > tab.weight[b]; });
  double maxabs = 0.0;
  for (double v : tab.absf) maxabs = std::max(maxabs, v);
  MaximalField out{g, std::vector<double>(g.total(), 0.0), MaximalKind::Peetre, sigma, k, 0.0};
  for (std::size_t xi = 0; xi < g.total(); ++xi) {
    const std::size_t x1 = g.dim == 1 ? xi : xi / n;
    const std::size_t x2 = g.dim == 1 ? 0 : xi % n;
    double best = 0.0;
    for (const std::size_t o : order) {
      const double w = tab.weight[o];
      if (w * maxabs <= best) break;
      std::size_t src;
      if (g.dim == 1) {
        src = (x1 + n - o) % n;
      } else {
        src = ((x1 + n - o / n) % n) * n + (x2 + n - o % n) % n;
      }
      const double v = tab.absf[src] * w;
      if (v > best) best = v;
    }
    out.values[xi] = best;
  }
  return out;
}

}  // namespace finfty
