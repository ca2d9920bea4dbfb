#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace orlhom {

inline constexpr const char* kVersion = "0.1.0";

// Spatial dimension and component count are capped at 3; all small dense
// objects live on the stack.
inline constexpr int kMaxDim = 3;

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::AutoAlign, kMaxDim, kMaxDim>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::AutoAlign, kMaxDim, 1>;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputDomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedFamilyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based hash of an integer lattice cell: a pure function of
// (seed, cell), independent of query order.
inline std::uint64_t hash_cell(std::uint64_t seed, std::span<const long> cell) {
  std::uint64_t h = mix64(seed);
  for (long c : cell) h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(c)));
  return h;
}

inline double uniform01(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Deterministic standard Gaussian draw indexed by (seed, i), Box-Muller.
double counter_gaussian(std::uint64_t seed, std::uint64_t i);

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Tasks must be
// independent; results keyed by i so scheduling cannot affect output.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace orlhom
