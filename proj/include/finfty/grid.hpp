#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "finfty/fft.hpp"

namespace finfty {

using cplx = std::complex<double>;
using json = nlohmann::ordered_json;

// Uniform periodic grid on [0,L)^d.  L = 2^J and N = 2^m per axis, so the
// spacing h = L/N and every dyadic cube boundary down to side h lands on
// grid points exactly.
struct GridSpec {
  int dim = 1;
  int log2_side = 0;     // J, side L = 2^J
  int log2_samples = 3;  // m, N = 2^m samples per axis

  GridSpec() = default;
  GridSpec(int d, int j, int m) : dim(d), log2_side(j), log2_samples(m) {
    if (d != 1 && d != 2) throw std::invalid_argument("GridSpec: dim must be 1 or 2");
    if (j < 0) throw std::invalid_argument("GridSpec: side must be a power of two >= 1");
    if (m < 1 || m > 24) throw std::invalid_argument("GridSpec: samples per axis out of range");
    if (m < j) throw std::invalid_argument("GridSpec: spacing h = L/N must be <= 1... need N >= L");
  }

  double side() const { return std::ldexp(1.0, log2_side); }
  std::size_t samples_per_axis() const { return std::size_t{1} << log2_samples; }
  double spacing() const { return std::ldexp(1.0, log2_side - log2_samples); }
  std::size_t total() const {
    std::size_t n = samples_per_axis();
    return dim == 1 ? n : n * n;
  }
  double nyquist() const { return std::ldexp(1.0, log2_samples - log2_side - 1); }
  // finest dyadic-cube level whose cubes still contain at least one sample
  int finest_level() const { return log2_samples - log2_side; }
  // coarsest level: cubes of side L
  int coarsest_level() const { return -log2_side; }

  bool operator==(const GridSpec& o) const {
    return dim == o.dim && log2_side == o.log2_side && log2_samples == o.log2_samples;
  }

  // row-major flattening; axis-2 index varies fastest in d=2
  std::size_t flat(std::size_t i1, std::size_t i2 = 0) const {
    return dim == 1 ? i1 : i1 * samples_per_axis() + i2;
  }
  std::array<double, 2> point(std::size_t idx) const {
    const double h = spacing();
    if (dim == 1) return {static_cast<double>(idx) * h, 0.0};
    const std::size_t n = samples_per_axis();
    return {static_cast<double>(idx / n) * h, static_cast<double>(idx % n) * h};
  }
};

inline GridSpec make_grid(int dim, double side, std::size_t samples_per_axis) {
  const double j = std::log2(side);
  const double m = std::log2(static_cast<double>(samples_per_axis));
  if (j != std::floor(j)) throw std::invalid_argument("make_grid: side must be a power of two");
  if (m != std::floor(m)) throw std::invalid_argument("make_grid: N must be a power of two");
  return GridSpec(dim, static_cast<int>(j), static_cast<int>(m));
}

// Certificate that a field's spectrum lives in {|xi| <= A*2^k}.
struct BandSpec {
  int k = 0;
  double A = 1.0;
  double radius() const { return A * std::ldexp(1.0, k); }
};

struct SampledField {
  GridSpec grid;
  std::vector<cplx> values;  // row-major, size grid.total()
  std::optional<BandSpec> band;

  SampledField() = default;
  explicit SampledField(const GridSpec& g) : grid(g), values(g.total()) {}
  SampledField(const GridSpec& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.total())
      throw std::invalid_argument("SampledField: value count does not match grid");
  }
};

// Physical Fourier coefficients c_n = h^d * DFT, stored in natural DFT order;
// axis index i maps to integer frequency n = i < N/2 ? i : i - N, and the
// physical frequency is xi = n / L.
struct Spectrum {
  GridSpec grid;
  std::vector<cplx> coeff;

  Spectrum() = default;
  explicit Spectrum(const GridSpec& g) : grid(g), coeff(g.total()) {}

  std::int64_t freq_index(std::size_t i) const {
    const std::int64_t n = static_cast<std::int64_t>(grid.samples_per_axis());
    const std::int64_t v = static_cast<std::int64_t>(i);
    return v < n / 2 ? v : v - n;
  }
  // physical frequency vector of the flattened entry
  std::array<double, 2> xi(std::size_t idx) const {
    const double invL = 1.0 / grid.side();
    if (grid.dim == 1) return {static_cast<double>(freq_index(idx)) * invL, 0.0};
    const std::size_t n = grid.samples_per_axis();
    return {static_cast<double>(freq_index(idx / n)) * invL,
            static_cast<double>(freq_index(idx % n)) * invL};
  }
  double xi_abs(std::size_t idx) const {
    const auto v = xi(idx);
    return grid.dim == 1 ? std::abs(v[0]) : std::hypot(v[0], v[1]);
  }
};

inline Spectrum forward_spectrum(const SampledField& f) {
  Spectrum s(f.grid);
  s.coeff = f.values;
  detail::fft_nd(s.coeff, f.grid.dim, f.grid.samples_per_axis(), -1);
  const double hd = std::pow(f.grid.spacing(), f.grid.dim);
  for (auto& c : s.coeff) c *= hd;
  return s;
}

inline SampledField synthesize(const Spectrum& s) {
  SampledField f(s.grid);
  f.values = s.coeff;
  detail::fft_nd(f.values, s.grid.dim, s.grid.samples_per_axis(), +1);
  const double scale = 1.0 / std::pow(s.grid.side(), s.grid.dim);
  for (auto& v : f.values) v *= scale;
  return f;
}

// Fraction of spectral energy outside {|xi| <= band.radius()}.  Zero-energy
// fields report fraction 0.
inline double band_energy_fraction(const Spectrum& s, const BandSpec& band) {
  const double r2 = band.radius() * band.radius();
  double total = 0.0, outside = 0.0;
  for (std::size_t i = 0; i < s.coeff.size(); ++i) {
    const double e = std::norm(s.coeff[i]);
    total += e;
    const auto v = s.xi(i);
    if (v[0] * v[0] + v[1] * v[1] > r2) outside += e;
  }
  return total > 0.0 ? outside / total : 0.0;
}

inline double band_energy_fraction(const SampledField& f, const BandSpec& band) {
  return band_energy_fraction(forward_spectrum(f), band);
}

// Checks a claimed certificate and stamps it onto the field.
inline bool band_check(SampledField& f, const BandSpec& band, double tol = 1e-12) {
  const double frac = band_energy_fraction(f, band);
  if (frac <= tol) {
    f.band = band;
    return true;
  }
  return false;
}

// Trigonometric interpolation at an arbitrary point of the torus.  Only
// meaningful for certified band-limited fields, where the interpolant is the
// unique band-limited extension of the samples.
inline cplx evaluate_offgrid(const SampledField& f, const std::array<double, 2>& x) {
  if (!f.band) throw std::invalid_argument("evaluate_offgrid: field carries no band certificate");
  const Spectrum s = forward_spectrum(f);
  const double two_pi = 2.0 * 3.14159265358979323846;
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < s.coeff.size(); ++i) {
    if (s.coeff[i] == cplx{0.0, 0.0}) continue;
    const auto v = s.xi(i);
    const double phase = two_pi * (v[0] * x[0] + v[1] * x[1]);
    acc += s.coeff[i] * std::polar(1.0, phase);
  }
  return acc / std::pow(s.grid.side(), s.grid.dim);
}

// Riemann L^p norm over the torus; p = inf handled by callers via sup.
inline double lp_norm(const SampledField& f, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("lp_norm: p must be positive");
  const double hd = std::pow(f.grid.spacing(), f.grid.dim);
  double acc = 0.0;
  for (const auto& v : f.values) acc += std::pow(std::abs(v), p);
  return std::pow(hd * acc, 1.0 / p);
}

inline double sup_norm(const SampledField& f) {
  double m = 0.0;
  for (const auto& v : f.values) m = std::max(m, std::abs(v));
  return m;
}

inline double space_energy(const SampledField& f) {
  const double hd = std::pow(f.grid.spacing(), f.grid.dim);
  double acc = 0.0;
  for (const auto& v : f.values) acc += std::norm(v);
  return hd * acc;
}

inline double spectral_energy(const Spectrum& s) {
  double acc = 0.0;
  for (const auto& c : s.coeff) acc += std::norm(c);
  return acc / std::pow(s.grid.side(), s.grid.dim);
}

// Pointwise spectral product; equals the h^d-weighted circular convolution of
// the two sample sets.
inline SampledField convolve(const SampledField& a, const SampledField& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("convolve: grid mismatch");
  Spectrum sa = forward_spectrum(a), sb = forward_spectrum(b);
  for (std::size_t i = 0; i < sa.coeff.size(); ++i) sa.coeff[i] *= sb.coeff[i];
  return synthesize(sa);
}

// ---- serialization ----

inline json to_json(const GridSpec& g) {
  return json{{"d", g.dim}, {"L", g.side()}, {"N", g.samples_per_axis()}};
}

inline json to_json(const SampledField& f) {
  json j;
  j["grid"] = to_json(f.grid);
  if (f.band)
    j["band"] = json{{"k", f.band->k}, {"A", f.band->A}};
  else
    j["band"] = nullptr;
  json vals = json::array();
  for (const auto& v : f.values) vals.push_back(json::array({v.real(), v.imag()}));
  j["values"] = std::move(vals);
  return j;
}

inline SampledField field_from_json(const json& j) {
  const auto& g = j.at("grid");
  GridSpec grid = make_grid(g.at("d").get<int>(), g.at("L").get<double>(),
                            g.at("N").get<std::size_t>());
  SampledField f(grid);
  const auto& vals = j.at("values");
  if (vals.size() != f.values.size())
    throw std::invalid_argument("field_from_json: value count does not match grid");
  for (std::size_t i = 0; i < f.values.size(); ++i)
    f.values[i] = cplx(vals[i][0].get<double>(), vals[i][1].get<double>());
  if (!j.at("band").is_null())
    f.band = BandSpec{j["band"].at("k").get<int>(), j["band"].at("A").get<double>()};
  return f;
}

inline void write_field_csv(const SampledField& f, std::ostream& out) {
  out << "# finfty.field.v1\n";
  out << (f.grid.dim == 1 ? "index,x1,re,im\n" : "index,x1,x2,re,im\n");
  out.precision(17);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const auto p = f.grid.point(i);
    out << i << ',' << p[0];
    if (f.grid.dim == 2) out << ',' << p[1];
    out << ',' << f.values[i].real() << ',' << f.values[i].imag() << '\n';
  }
}

}  // namespace finfty
