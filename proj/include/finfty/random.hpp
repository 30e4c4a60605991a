#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "finfty/bumps.hpp"
#include "finfty/grid.hpp"
#include "finfty/lp.hpp"

namespace finfty {

// splitmix64: tiny, portable, and identical on every platform, which keeps
// artifacts byte-stable across compilers; std::mt19937 ties the stream to
// library internals.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller; the pair structure is part of the stream
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

 private:
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// independent sub-stream for trial `index`; mixing through one splitmix64
// step decorrelates neighbouring indices
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  Rng r(base ^ (0xD1B54A32D192ED03ULL * (index + 1)));
  return r.next_u64();
}

// iid complex gaussian samples in space; no band certificate
inline SampledField random_field(const GridSpec& g, std::uint64_t seed) {
  Rng rng(seed);
  SampledField f(g);
  for (auto& z : f.values) z = {rng.normal(), rng.normal()};
  return f;
}

// real-valued field with spectrum inside |xi| <= radius: gaussian
// coefficients on the admissible frequencies, Hermitian-symmetrized by
// discarding the imaginary part after synthesis
inline SampledField random_real_band_field(const GridSpec& g, double radius,
                                           std::uint64_t seed) {
  if (radius > g.nyquist() * (1.0 + 1e-12))
    throw std::invalid_argument("random_real_band_field: radius beyond grid Nyquist");
  Rng rng(seed);
  Spectrum sp(g);
  for (std::size_t i = 0; i < sp.coeff.size(); ++i) {
    const double a = rng.normal(), b = rng.normal();  // consume stream uniformly
    if (sp.xi_abs(i) <= radius) sp.coeff[i] = {a, b};
  }
  SampledField f = synthesize(sp);
  for (auto& z : f.values) z = {z.real(), 0.0};
  return f;
}

// generic member of the scale-k annulus family: the k-th projection of
// complex white noise, certified band (k, 2)
inline SampledField random_shell_field(const GridSpec& g, int k, std::uint64_t seed) {
  SampledField noise = random_field(g, seed);
  return project(noise, k);
}

// sequence f_mu, f_mu+1, ..., each an independent scale-k shell field
inline ScaleSequence random_sequence(const GridSpec& g, int mu, int count, std::uint64_t seed) {
  if (count <= 0) throw std::invalid_argument("random_sequence: count must be positive");
  ScaleSequence seq;
  seq.mu = mu;
  seq.entries.reserve(count);
  for (int i = 0; i < count; ++i)
    seq.entries.push_back(random_shell_field(g, mu + i, derive_seed(seed, i)));
  return seq;
}

// random field with spectrum in the closed ball |xi| <= 2^(k-2), the widest
// band the scale-k sampling expansion reproduces exactly; certificate (k-2, 1)
inline SampledField random_ball_field(const GridSpec& g, int k, std::uint64_t seed) {
  const double radius = std::ldexp(1.0, k - 2);
  if (radius > g.nyquist() * (1.0 + 1e-12))
    throw std::invalid_argument("random_ball_field: ball exceeds grid Nyquist");
  Rng rng(seed);
  Spectrum sp(g);
  for (std::size_t i = 0; i < sp.coeff.size(); ++i) {
    const double a = rng.normal(), b = rng.normal();
    if (sp.xi_abs(i) <= radius) sp.coeff[i] = {a, b};
  }
  SampledField f = synthesize(sp);
  f.band = BandSpec{k - 2, 1.0};
  return f;
}

}  // namespace finfty
