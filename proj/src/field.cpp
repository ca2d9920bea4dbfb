#include "orlhom/field.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace orlhom {

void Palette::validate() const {
  if (entries.empty()) throw ConfigError("palette: no entries");
  double total = 0.0;
  for (const auto& e : entries) {
    if (!(e.value > 0.0)) throw ConfigError("palette: values must be strictly positive");
    if (!(e.probability >= 0.0)) throw ConfigError("palette: negative probability");
    total += e.probability;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("palette: probabilities must sum to 1");
}

double Palette::invert_cdf(double u) const {
  double cum = 0.0;
  for (const auto& e : entries) {
    cum += e.probability;
    if (u < cum) return e.value;
  }
  return entries.back().value;
}

double Palette::min_value() const {
  double m = entries.front().value;
  for (const auto& e : entries) m = std::min(m, e.value);
  return m;
}

double Palette::max_value() const {
  double m = entries.front().value;
  for (const auto& e : entries) m = std::max(m, e.value);
  return m;
}

LatticeField LatticeField::periodic(int dim, std::vector<double> pattern,
                                    std::array<long, kMaxDim> period) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("field: dim must be in {1,2,3}");
  long cells = 1;
  for (int i = 0; i < dim; ++i) {
    if (period[i] < 1) throw ConfigError("field: period components must be >= 1");
    cells *= period[i];
  }
  if (static_cast<long>(pattern.size()) != cells)
    throw ConfigError("field: pattern size does not match period box");
  for (double v : pattern)
    if (!(v > 0.0)) throw ConfigError("field: pattern values must be strictly positive");
  LatticeField f;
  f.kind_ = Kind::Periodic;
  f.dim_ = dim;
  f.pattern_ = std::move(pattern);
  f.period_ = period;
  return f;
}

LatticeField LatticeField::constant(int dim, double value) {
  return periodic(dim, {value}, {1, 1, 1});
}

LatticeField LatticeField::random(int dim, std::uint64_t seed, Palette palette) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("field: dim must be in {1,2,3}");
  palette.validate();
  LatticeField f;
  f.kind_ = Kind::Random;
  f.dim_ = dim;
  f.seed_ = seed;
  f.palette_ = std::move(palette);
  return f;
}

double LatticeField::value_at(std::span<const double> x) const {
  if (static_cast<int>(x.size()) < dim_) throw InputDomainError("field: query point has too few coordinates");
  std::array<long, kMaxDim> cell{};
  for (int i = 0; i < dim_; ++i) {
    if (!std::isfinite(x[i])) throw InputDomainError("field: non-finite query point");
    cell[i] = static_cast<long>(std::floor(x[i]));
  }
  return value_at_cell(std::span<const long>(cell.data(), dim_));
}

double LatticeField::value_at_cell(std::span<const long> cell) const {
  if (kind_ == Kind::Periodic) {
    long flat = 0;
    for (int i = 0; i < dim_; ++i) {
      long L = period_[i];
      long idx = ((cell[i] + base_offset_[i]) % L + L) % L;
      flat = flat * L + idx;
    }
    return pattern_[static_cast<std::size_t>(flat)];
  }
  std::array<long, kMaxDim> abs_cell{};
  for (int i = 0; i < dim_; ++i) abs_cell[i] = cell[i] + base_offset_[i];
  std::uint64_t h = hash_cell(seed_, std::span<const long>(abs_cell.data(), dim_));
  return palette_.invert_cdf(uniform01(h));
}

LatticeField LatticeField::shifted(std::span<const long> z) const {
  LatticeField f = *this;
  for (int i = 0; i < dim_; ++i) f.base_offset_[i] += z[i];
  return f;
}

LatticeField LatticeField::reseeded(std::uint64_t seed) const {
  LatticeField f = *this;
  if (kind_ == Kind::Random) f.seed_ = seed;
  return f;
}

std::vector<double> LatticeField::distinct_values() const {
  std::set<double> vals;
  if (kind_ == Kind::Periodic) {
    vals.insert(pattern_.begin(), pattern_.end());
  } else {
    for (const auto& e : palette_.entries) vals.insert(e.value);
  }
  return {vals.begin(), vals.end()};
}

double LatticeField::min_value() const {
  auto v = distinct_values();
  return v.front();
}

double LatticeField::max_value() const {
  auto v = distinct_values();
  return v.back();
}

LatticeField sample_lattice_field(std::uint64_t seed, const Palette& palette, const Region& region) {
  palette.validate();
  if (region.empty()) throw ConfigError("field: empty sampling region");
  return LatticeField::random(region.dim, seed, palette);
}

}  // namespace orlhom
