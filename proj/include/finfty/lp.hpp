#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "finfty/bumps.hpp"
#include "finfty/grid.hpp"

namespace finfty {

// Frequency projection onto the dyadic annulus at scale k: multiplies the
// spectrum by mother(2^-k |xi|).  The result is exactly supported in
// {2^(k-1) < |xi| < 2^(k+1)} and carries the certificate (k, A=2).
inline SampledField project(const SampledField& f, int k, const FourierProfile& mother) {
  if (std::ldexp(1.0, k + 1) > f.grid.nyquist() * (1.0 + 1e-12))
    throw std::invalid_argument("project: annulus at scale k exceeds the grid Nyquist band");
  Spectrum s = forward_spectrum(f);
  for (std::size_t i = 0; i < s.coeff.size(); ++i)
    s.coeff[i] *= mother(std::ldexp(s.xi_abs(i), -k));
  SampledField out = synthesize(s);
  out.band = BandSpec{k, 2.0};
  return out;
}

inline SampledField project(const SampledField& f, int k) {
  return project(f, k, profiles().mother);
}

// Inhomogeneous projection: scale 0 uses the father (low-pass), scales k >= 1
// the mother annuli.
inline SampledField inhomog_project(const SampledField& f, int k) {
  if (k < 0) throw std::invalid_argument("inhomog_project: scale must be >= 0");
  if (k >= 1) return project(f, k);
  Spectrum s = forward_spectrum(f);
  const auto& father = profiles().father;
  for (std::size_t i = 0; i < s.coeff.size(); ++i) s.coeff[i] *= father(s.xi_abs(i));
  SampledField out = synthesize(s);
  out.band = BandSpec{0, 2.0};
  return out;
}

// A ladder of fields indexed by consecutive scales mu, mu+1, ..., all on one
// grid.  entry(i) corresponds to scale mu + i.
struct ScaleSequence {
  int mu = 0;
  std::vector<SampledField> entries;

  int k_of(std::size_t i) const { return mu + static_cast<int>(i); }
  int k_max() const { return mu + static_cast<int>(entries.size()) - 1; }
  const GridSpec& grid() const {
    if (entries.empty()) throw std::invalid_argument("ScaleSequence: empty");
    return entries.front().grid;
  }
};

// Widest scale whose annulus fits two octaves below Nyquist: log2(N / (4 L)).
inline int default_k_hi(const GridSpec& g) { return g.log2_samples - g.log2_side - 2; }
// Widest meaningful low scale: the shell containing the fundamental 1/L.
inline int default_k_lo(const GridSpec& g) { return -g.log2_side; }

inline ScaleSequence decompose(const SampledField& f, int k_lo, int k_hi) {
  if (k_lo > k_hi) throw std::invalid_argument("decompose: empty scale range");
  ScaleSequence seq;
  seq.mu = k_lo;
  seq.entries.reserve(k_hi - k_lo + 1);
  for (int k = k_lo; k <= k_hi; ++k) seq.entries.push_back(project(f, k));
  return seq;
}

struct SamplingExpansionResult {
  SampledField reconstruction;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
};

// Corner-sample expansion at scale k: a field with certified spectrum inside
// {|xi| <= 2^(k-2)} is recovered exactly from its samples on the level-k cube
// corners, smoothed by the reproducing kernel.  Frequency-side identity: the
// corner comb periodizes the spectrum with period 2^k, the kernel plateau
// keeps the central copy and its support kills every replica.
inline SamplingExpansionResult sampling_expansion(const SampledField& f, int k) {
  const GridSpec& g = f.grid;
  if (!f.band) throw std::invalid_argument("sampling_expansion: field carries no band certificate");
  if (f.band->radius() > std::ldexp(1.0, k - 2) * (1.0 + 1e-12))
    throw std::invalid_argument("sampling_expansion: certified band exceeds 2^(k-2)");
  if (k > g.finest_level() || k < g.coarsest_level())
    throw std::invalid_argument("sampling_expansion: cube corners at scale k are off-grid");

  const std::size_t n = g.samples_per_axis();
  const std::size_t stride = std::size_t{1} << (g.log2_samples - g.log2_side - k);
  SampledField comb(g);
  if (g.dim == 1) {
    for (std::size_t i = 0; i < n; i += stride) comb.values[i] = f.values[i];
  } else {
    for (std::size_t i = 0; i < n; i += stride)
      for (std::size_t j = 0; j < n; j += stride)
        comb.values[i * n + j] = f.values[i * n + j];
  }

  const FourierProfile psi = make_reproducing_kernel(k);
  Spectrum s = forward_spectrum(comb);
  const double scale = std::pow(std::ldexp(1.0, -k) / g.spacing(), g.dim);
  for (std::size_t i = 0; i < s.coeff.size(); ++i)
    s.coeff[i] *= psi(s.xi_abs(i)) * scale;

  SamplingExpansionResult res;
  res.reconstruction = synthesize(s);
  res.reconstruction.band = BandSpec{k - 1, 1.0};
  double max_err = 0.0, max_abs = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    max_err = std::max(max_err, std::abs(res.reconstruction.values[i] - f.values[i]));
    max_abs = std::max(max_abs, std::abs(f.values[i]));
  }
  res.max_abs_error = max_err;
  res.max_rel_error = max_abs > 0.0 ? max_err / max_abs : max_err;
  return res;
}

}  // namespace finfty
