#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "finfty/grid.hpp"

namespace finfty {

inline constexpr double kPi = 3.14159265358979323846;

// Standard compactly supported mollifier; C^inf on all of R.
inline double mollifier(double t) {
  const double a = 1.0 - t * t;
  return a > 0.0 ? std::exp(-1.0 / a) : 0.0;
}

namespace detail {

// Composite Simpson on [a,b] with a fixed panel count: deterministic and
// accurate enough for all smooth integrands used here.
template <typename F>
double simpson(F&& f, double a, double b, int panels) {
  const double w = (b - a) / panels;
  double acc = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double l = a + i * w;
    const double r = l + w;
    acc += f(l) + 4.0 * f(0.5 * (l + r)) + f(r);
  }
  return acc * w / 6.0;
}

// Normalized cumulative integral of the mollifier: C(-1)=0, C(1)=1, C^inf,
// strictly increasing on (-1,1).  Tabulated once; evaluation uses cubic
// Hermite interpolation with the exact derivative rho(u)/Z, so interpolation
// error is ~1e-15 while plateau values are exact.
class SmoothedStep {
 public:
  static const SmoothedStep& instance() {
    static SmoothedStep s;
    return s;
  }

  double cumulative(double u) const {
    if (u <= -1.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double pos = (u + 1.0) / step_;
    std::size_t i = static_cast<std::size_t>(pos);
    if (i >= table_.size() - 1) i = table_.size() - 2;
    const double t0 = -1.0 + i * step_;
    const double s = (u - t0) / step_;
    const double c0 = table_[i], c1 = table_[i + 1];
    const double d0 = mollifier(t0) * inv_z_, d1 = mollifier(t0 + step_) * inv_z_;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * c0 + (s3 - 2 * s2 + s) * step_ * d0 +
           (-2 * s3 + 3 * s2) * c1 + (s3 - s2) * step_ * d1;
  }

 private:
  SmoothedStep() {
    const std::size_t panels = std::size_t{1} << 16;
    step_ = 2.0 / panels;
    table_.resize(panels + 1);
    table_[0] = 0.0;
    for (std::size_t i = 0; i < panels; ++i) {
      const double l = -1.0 + i * step_;
      table_[i + 1] = table_[i] + simpson(mollifier, l, l + step_, 1);
    }
    const double z = table_[panels];
    inv_z_ = 1.0 / z;
    for (auto& v : table_) v *= inv_z_;
    table_[panels] = 1.0;
  }

  std::vector<double> table_;
  double step_ = 0.0;
  double inv_z_ = 0.0;
};

}  // namespace detail

// Smooth transition: 1 for t <= a, 0 for t >= b, C^inf monotone in between.
inline double step_down(double t, double a, double b) {
  return detail::SmoothedStep::instance().cumulative((a + b - 2.0 * t) / (b - a));
}
inline double step_up(double t, double a, double b) { return 1.0 - step_down(t, a, b); }

enum class ProfileKind { LpMother, Father, ReproducingKernel, Eta, EtaTilde, Gamma, Beta, CutoffPhi };

inline const char* profile_kind_name(ProfileKind k) {
  switch (k) {
    case ProfileKind::LpMother: return "lp_mother";
    case ProfileKind::Father: return "father";
    case ProfileKind::ReproducingKernel: return "reproducing_kernel";
    case ProfileKind::Eta: return "eta";
    case ProfileKind::EtaTilde: return "eta_tilde";
    case ProfileKind::Gamma: return "gamma";
    case ProfileKind::Beta: return "beta";
    case ProfileKind::CutoffPhi: return "cutoff_phi";
  }
  return "unknown";
}

// A radial frequency-side profile.  `radial` evaluates the transform at |xi|
// and is exact on its plateau and outside its support; `spatial` (where
// present) evaluates the space-side function by fixed-panel quadrature.
struct FourierProfile {
  ProfileKind kind = ProfileKind::LpMother;
  double support_radius = 0.0;  // radial(|xi|) == 0 for |xi| >= this
  std::function<double(double)> radial;
  std::function<double(double)> spatial;  // empty unless space side is needed
  std::map<std::string, double> certificates;

  double operator()(double xi_abs) const { return radial(xi_abs); }
  bool has_spatial() const { return static_cast<bool>(spatial); }
};

// ---- factories ----

// Littlewood-Paley mother: plateau value 1 at |xi| = 1, support on the open
// annulus (1/2, 2), and exact dyadic telescoping: sums of phi(2^-k xi) over k
// collapse to a difference of two smoothed steps.
inline FourierProfile make_lp_mother() {
  FourierProfile p;
  p.kind = ProfileKind::LpMother;
  p.support_radius = 2.0;
  p.radial = [](double t) { return step_down(t, 1.0, 2.0) - step_down(2.0 * t, 1.0, 2.0); };
  p.certificates = {{"support_inner", 0.5}, {"support_outer", 2.0}, {"value_at_one", 1.0}};
  return p;
}

// Inhomogeneous father: 1 - sum_{k>=1} phi(2^-k xi) telescopes to the plateau
// step itself.
inline FourierProfile make_inhomogeneous_father() {
  FourierProfile p;
  p.kind = ProfileKind::Father;
  p.support_radius = 2.0;
  p.radial = [](double t) { return step_down(t, 1.0, 2.0); };
  p.certificates = {{"plateau_radius", 1.0}, {"support_radius", 2.0}};
  return p;
}

// Sampling kernel for scale k: identically 1 on {|xi| <= 2^(k-2)}, supported
// in {|xi| <= 2^(k-1)}.  The gap to the sampling rate 2^k is what makes the
// corner-sample expansion alias-free.
inline FourierProfile make_reproducing_kernel(int k) {
  FourierProfile p;
  p.kind = ProfileKind::ReproducingKernel;
  const double plateau = std::ldexp(1.0, k - 2);
  const double outer = std::ldexp(1.0, k - 1);
  p.support_radius = outer;
  p.radial = [plateau, outer](double t) { return step_down(t, plateau, outer); };
  p.certificates = {{"plateau_radius", plateau}, {"support_radius", outer},
                    {"scale", static_cast<double>(k)}};
  return p;
}

namespace detail {

// Space-side evaluation of a nonnegative-square bump: given ghat(xi) =
// mollifier(xi / s) supported in |xi| <= s, returns g(x) = int ghat e^{2pi i x xi}.
// Panel count tracks the oscillation count |x| s so the quadrature stays
// resolved at any tail distance.
inline double half_bump(double x, double s, int min_panels = 4096) {
  const double w = 2.0 * kPi * x * s;
  const int panels = std::max(min_panels, 16 * static_cast<int>(std::abs(x) * s + 1.0));
  return 2.0 * s *
         simpson([w](double u) { return mollifier(u) * std::cos(w * u); }, 0.0, 1.0, panels);
}

// Autocorrelation (ghat * ghat)(xi) for ghat = mollifier(./s); supported in
// |xi| <= 2s.
inline double half_bump_autocorr(double xi, double s, int panels = 2048) {
  const double lo = std::max(-s, xi - s);
  const double hi = std::min(s, xi + s);
  if (lo >= hi) return 0.0;
  return simpson([xi, s](double t) { return mollifier(t / s) * mollifier((xi - t) / s); }, lo,
                 hi, panels);
}

}  // namespace detail

// Space-side bump eta: eta = (g/g(0))^2 >= 0 with supp(eta-hat) inside
// {|xi| <= 1/100}, eta(0) = 1.  The lower bound on the small plateau cube and
// the 1e-9 tail radius are measured and recorded.
inline FourierProfile make_eta() {
  FourierProfile p;
  p.kind = ProfileKind::Eta;
  const double s = 1.0 / 200.0;
  p.support_radius = 2.0 * s;  // = 1/100
  const double g0 = detail::half_bump(0.0, s);
  p.spatial = [s, g0](double x) {
    const double g = detail::half_bump(x, s) / g0;
    return g * g;
  };
  const double g0sq = g0 * g0;
  p.radial = [s, g0sq](double t) { return detail::half_bump_autocorr(t, s) / g0sq; };

  double cmin = 1.0;
  for (int i = 0; i <= 64; ++i) cmin = std::min(cmin, p.spatial(i * (0.01 / 64.0)));
  double tail_radius = 0.0;
  for (double x = 256.0; x <= 1048576.0; x *= 2.0)
    if (std::abs(p.spatial(x)) > 1e-9) tail_radius = 2.0 * x;
  p.certificates = {{"plateau_min", cmin},
                    {"value_at_zero", 1.0},
                    {"band_radius", p.support_radius},
                    {"tail_radius_1e-9", std::max(tail_radius, 256.0)}};
  return p;
}

// Companion kernel with hat == 1 on the eta band and support in {|xi| <= 1/10}.
inline FourierProfile make_eta_tilde() {
  FourierProfile p;
  p.kind = ProfileKind::EtaTilde;
  p.support_radius = 0.1;
  p.radial = [](double t) { return step_down(t, 0.01, 0.1); };
  p.spatial = [](double x) {
    const double w = 2.0 * kPi * x;
    return 2.0 * detail::simpson(
                     [w](double t) { return step_down(t, 0.01, 0.1) * std::cos(w * t); }, 0.0,
                     0.1, 4096);
  };
  p.certificates = {{"plateau_radius", 0.01}, {"support_radius", 0.1}};
  return p;
}

// Interpolation window gamma: gamma(0) = 1, supp(gamma-hat) in {|xi| <= 1},
// with a measured polynomial-decay envelope |gamma(x)| <= C (1+|x|)^-8.
inline FourierProfile make_gamma() {
  FourierProfile p;
  p.kind = ProfileKind::Gamma;
  p.support_radius = 1.0;
  const double z = detail::simpson(mollifier, 0.0, 1.0, 4096);
  p.spatial = [z](double x) {
    const double w = 2.0 * kPi * x;
    return detail::simpson([w](double u) { return mollifier(u) * std::cos(w * u); }, 0.0, 1.0,
                           4096) /
           z;
  };
  p.radial = [z](double t) { return mollifier(t) / (2.0 * z); };

  double c8 = 0.0;
  for (int i = 0; i <= 512; ++i) {
    const double x = i * 0.125;
    c8 = std::max(c8, std::abs(p.spatial(x)) * std::pow(1.0 + x, 8.0));
  }
  p.certificates = {{"value_at_zero", 1.0}, {"support_radius", 1.0}, {"decay_c8", c8}};
  return p;
}

// Lattice bump beta for the sharpness family: beta >= 1 on [-2^-M, 2^-M],
// beta >= 0 everywhere, supp(beta-hat) in {|xi| <= 1}.  Scaling s is the
// smallest admissible and is recorded.
inline FourierProfile make_beta(int M) {
  if (M < 1 || M > 16) throw std::invalid_argument("make_beta: M out of range");
  FourierProfile p;
  p.kind = ProfileKind::Beta;
  const double s = 0.5;
  p.support_radius = 1.0;
  const double half_cube = std::ldexp(1.0, -M);
  double m0 = std::numeric_limits<double>::max();
  for (int i = 0; i <= 128; ++i) {
    const double g = detail::half_bump(i * half_cube / 128.0, s);
    m0 = std::min(m0, g * g);
  }
  const double scale = 1.0 / m0;
  if (!(scale > 0.0) || scale > 1e6)
    throw std::invalid_argument("make_beta: no admissible scaling at this M");
  p.spatial = [scale](double x) {
    const double g = detail::half_bump(x, 0.5);
    return scale * g * g;
  };
  p.radial = [scale, s](double t) { return scale * detail::half_bump_autocorr(t, s); };
  const double g0 = detail::half_bump(0.0, s);
  p.certificates = {{"scale", scale},
                    {"cube_half_side", half_cube},
                    {"cube_min", 1.0},
                    {"band_radius", 1.0},
                    {"value_at_zero", scale * g0 * g0}};
  return p;
}

// Hoermander cutoff: 1 on [1/2, 2], supported in [1/4, 4].
inline FourierProfile make_cutoff_phi() {
  FourierProfile p;
  p.kind = ProfileKind::CutoffPhi;
  p.support_radius = 4.0;
  p.radial = [](double t) { return step_up(t, 0.25, 0.5) * step_down(t, 2.0, 4.0); };
  p.certificates = {{"plateau_inner", 0.5}, {"plateau_outer", 2.0},
                    {"support_inner", 0.25}, {"support_outer", 4.0}};
  return p;
}

// Dyadic dilation of a space-side bump: result(x) = orig(2^a x).  Frequency
// support scales by 2^a; amplitude bookkeeping on the radial part is dropped
// since only support and spatial values are consumed downstream.
inline FourierProfile dilate_spatial(const FourierProfile& orig, int log2_a) {
  FourierProfile p = orig;
  const double a = std::ldexp(1.0, log2_a);
  p.support_radius = orig.support_radius * a;
  const auto orig_spatial = orig.spatial;
  const auto orig_radial = orig.radial;
  p.spatial = [orig_spatial, a](double x) { return orig_spatial(x * a); };
  p.radial = [orig_radial, a](double t) { return orig_radial(t / a); };
  p.certificates["dilation_log2"] = static_cast<double>(log2_a);
  if (p.certificates.count("tail_radius_1e-9")) p.certificates["tail_radius_1e-9"] /= a;
  if (p.certificates.count("band_radius")) p.certificates["band_radius"] *= a;
  return p;
}

// Partial dyadic sum of mother dilates; telescopes exactly to a step difference.
inline double partition_sum(const FourierProfile& mother, double xi_abs, int k_lo, int k_hi) {
  double acc = 0.0;
  for (int k = k_lo; k <= k_hi; ++k) acc += mother(std::ldexp(xi_abs, -k));
  return acc;
}

// Shared profile set, built once.
struct Profiles {
  FourierProfile mother = make_lp_mother();
  FourierProfile father = make_inhomogeneous_father();
  FourierProfile eta = make_eta();
  FourierProfile eta_tilde = make_eta_tilde();
  FourierProfile gamma = make_gamma();
  FourierProfile cutoff = make_cutoff_phi();
};

inline const Profiles& profiles() {
  static Profiles p;
  return p;
}

inline json to_json(const FourierProfile& p, int table_points = 257) {
  json j;
  j["kind"] = profile_kind_name(p.kind);
  j["rho"] = p.support_radius;
  const double spacing = p.support_radius / (table_points - 1);
  json samples = json::array();
  for (int i = 0; i < table_points; ++i) samples.push_back(p.radial(i * spacing));
  j["sample_spacing"] = spacing;
  j["samples"] = std::move(samples);
  json certs;
  for (const auto& [name, value] : p.certificates) certs[name] = value;
  j["certificates"] = std::move(certs);
  return j;
}

}  // namespace finfty
