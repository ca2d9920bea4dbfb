#pragma once

#include "orlhom/common.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace orlhom {

struct PaletteEntry {
  double value;
  double probability;
};

// Discrete law of an iid-per-cell coefficient. Probabilities must sum to 1
// within 1e-12 and all values must be strictly positive.
struct Palette {
  std::vector<PaletteEntry> entries;

  void validate() const;
  double invert_cdf(double u) const;  // u in [0,1)
  double min_value() const;
  double max_value() const;
};

// Half-open box [lo, hi) in Z^d.
struct Region {
  int dim = 0;
  std::array<long, kMaxDim> lo{};
  std::array<long, kMaxDim> hi{};

  bool empty() const {
    for (int i = 0; i < dim; ++i)
      if (hi[i] <= lo[i]) return true;
    return dim == 0;
  }
};

// A Z^d-indexed positive coefficient field with an exact shift action.
// Cells are right-open unit cubes [z, z+1). The Random kind never stores
// values: each cell is a pure function of (seed, cell + base_offset), so
// shifting and regeneration are exact.
class LatticeField {
 public:
  enum class Kind { Periodic, Random };

  static LatticeField periodic(int dim, std::vector<double> pattern,
                               std::array<long, kMaxDim> period);
  static LatticeField constant(int dim, double value);
  static LatticeField random(int dim, std::uint64_t seed, Palette palette);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  const Palette& palette() const { return palette_; }
  const std::vector<double>& pattern() const { return pattern_; }
  const std::array<long, kMaxDim>& period() const { return period_; }
  const std::array<long, kMaxDim>& base_offset() const { return base_offset_; }

  double value_at(std::span<const double> x) const;
  double value_at_cell(std::span<const long> cell) const;

  // Realizes tau_z: value_at(shifted(z), x) == value_at(x + z), bit-exact.
  LatticeField shifted(std::span<const long> z) const;
  LatticeField reseeded(std::uint64_t seed) const;  // Random kind only; Periodic unchanged

  // The set of values the field can take (pattern entries or palette values).
  std::vector<double> distinct_values() const;
  double min_value() const;
  double max_value() const;

 private:
  LatticeField() = default;

  Kind kind_ = Kind::Periodic;
  int dim_ = 1;
  std::array<long, kMaxDim> base_offset_{};
  // Periodic
  std::vector<double> pattern_;             // row-major over the period box
  std::array<long, kMaxDim> period_{1, 1, 1};
  // Random
  std::uint64_t seed_ = 0;
  Palette palette_;
};

// Validates the palette and region, then returns the deterministic Random
// field; no values are materialized (regeneration is the persistence
// mechanism).
LatticeField sample_lattice_field(std::uint64_t seed, const Palette& palette, const Region& region);

}  // namespace orlhom
