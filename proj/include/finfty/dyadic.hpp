#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "finfty/grid.hpp"

namespace finfty {

// Dyadic cube of side 2^-level with lower-left corner at index * 2^-level.
// Levels can be negative (cubes larger than the unit cube); on a grid the
// admissible range is [-J, m - J].
struct DyadicCube {
  int dim = 1;
  int level = 0;
  std::array<std::int64_t, 2> index{0, 0};

  double side() const { return std::ldexp(1.0, -level); }
  std::array<double, 2> corner() const {
    return {static_cast<double>(index[0]) * side(),
            dim == 2 ? static_cast<double>(index[1]) * side() : 0.0};
  }
  bool operator==(const DyadicCube& o) const {
    return dim == o.dim && level == o.level && index == o.index;
  }
};

inline std::int64_t cubes_per_axis(const GridSpec& g, int level) {
  if (level < g.coarsest_level() || level > g.finest_level())
    throw std::invalid_argument("cubes_per_axis: level outside grid range");
  return std::int64_t{1} << (g.log2_side + level);
}

inline std::int64_t cube_count(const GridSpec& g, int level) {
  const std::int64_t per = cubes_per_axis(g, level);
  return g.dim == 1 ? per : per * per;
}

// samples per axis inside one cube of this level
inline std::size_t cube_samples_per_axis(const GridSpec& g, int level) {
  return std::size_t{1} << (g.log2_samples - g.log2_side - level);
}

inline DyadicCube cube_at(const GridSpec& g, int level, std::int64_t flat_index) {
  const std::int64_t per = cubes_per_axis(g, level);
  DyadicCube c;
  c.dim = g.dim;
  c.level = level;
  if (g.dim == 1) {
    c.index = {flat_index, 0};
  } else {
    c.index = {flat_index / per, flat_index % per};
  }
  return c;
}

inline std::int64_t cube_flat_index(const GridSpec& g, const DyadicCube& c) {
  const std::int64_t per = cubes_per_axis(g, c.level);
  return g.dim == 1 ? c.index[0] : c.index[0] * per + c.index[1];
}

// cube containing a sample index at a given level
inline std::int64_t cube_of_sample(const GridSpec& g, std::size_t flat_sample, int level) {
  const std::size_t span = cube_samples_per_axis(g, level);
  if (g.dim == 1) return static_cast<std::int64_t>(flat_sample / span);
  const std::size_t n = g.samples_per_axis();
  const std::int64_t per = cubes_per_axis(g, level);
  return static_cast<std::int64_t>(flat_sample / n / span) * per +
         static_cast<std::int64_t>(flat_sample % n / span);
}

// True if `inner` is contained in `outer` (standard dyadic nesting).
inline bool cube_contains(const DyadicCube& outer, const DyadicCube& inner) {
  if (inner.level < outer.level) return false;
  const int shift = inner.level - outer.level;
  for (int a = 0; a < outer.dim; ++a)
    if ((inner.index[a] >> shift) != outer.index[a]) return false;
  return true;
}

// Per-level sums of a sample-indexed weight array, built bottom-up: each
// cube's sum is the sum of its 2^d children, evaluated in fixed child order
// so results do not depend on scheduling.
class CubePyramid {
 public:
  CubePyramid(const GridSpec& g, const std::vector<double>& weights, int coarsest)
      : grid_(g), coarsest_(coarsest), finest_(g.finest_level()) {
    if (coarsest_ < g.coarsest_level() || coarsest_ > finest_)
      throw std::invalid_argument("CubePyramid: coarsest level outside grid range");
    if (weights.size() != g.total())
      throw std::invalid_argument("CubePyramid: weight count does not match grid");
    levels_.resize(finest_ - coarsest_ + 1);
    // finest level: cubes of side h hold exactly one sample
    auto& fine = levels_.back();
    fine = weights;
    for (int level = finest_ - 1; level >= coarsest_; --level) {
      const std::int64_t per = cubes_per_axis(g, level);
      const std::int64_t count = cube_count(g, level);
      const auto& child = levels_[level - coarsest_ + 1];
      auto& cur = levels_[level - coarsest_];
      cur.assign(count, 0.0);
      if (g.dim == 1) {
        for (std::int64_t i = 0; i < count; ++i) cur[i] = child[2 * i] + child[2 * i + 1];
      } else {
        const std::int64_t cper = 2 * per;
        for (std::int64_t r = 0; r < per; ++r)
          for (std::int64_t c = 0; c < per; ++c)
            cur[r * per + c] = child[2 * r * cper + 2 * c] + child[2 * r * cper + 2 * c + 1] +
                               child[(2 * r + 1) * cper + 2 * c] +
                               child[(2 * r + 1) * cper + 2 * c + 1];
      }
    }
  }

  const std::vector<double>& sums(int level) const {
    if (level < coarsest_ || level > finest_)
      throw std::invalid_argument("CubePyramid: level not built");
    return levels_[level - coarsest_];
  }
  int coarsest() const { return coarsest_; }
  int finest() const { return finest_; }

 private:
  GridSpec grid_;
  int coarsest_;
  int finest_;
  std::vector<std::vector<double>> levels_;
};

}  // namespace finfty
