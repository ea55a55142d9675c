#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fuplab/geometry.hpp"

namespace fuplab {

/// Weighted atomic approximation of a compactly supported measure on R^d.
/// Faithful down to scale_floor; all downstream integrals are sums over atoms.
struct FractalMeasure {
  int dim = 1;
  std::vector<double> atoms;    // flat, atom i at [i*dim, (i+1)*dim)
  std::vector<double> weights;  // same count as atoms
  double scale_floor = 0.0;
  Box bounding_box;

  int64_t count() const { return static_cast<int64_t>(weights.size()); }
  std::span<const double> atom(int64_t i) const {
    return {atoms.data() + i * dim, static_cast<size_t>(dim)};
  }
  double total_mass() const;

  /// Throws std::invalid_argument on the first violated structural invariant.
  void validate(bool probability = false) const;
};

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Default atom budget for generators (overridable per call).
inline constexpr int64_t kDefaultAtomBudget = int64_t(1) << 23;

/// Uniform probability measure on the arithmetic Cantor set C_{k,A} / M^k.
/// One atom per digit string, weight |A|^{-k}, scale_floor M^{-k}.
FractalMeasure make_cantor_measure(int M, int dim,
                                   const std::vector<std::vector<int>>& alphabet,
                                   int k,
                                   int64_t atom_budget = kDefaultAtomBudget);

/// Level-`level` Sierpinski carpet approximation in [0,1]^2
/// (M = 3, alphabet {0,1,2}^2 minus the middle cell).
FractalMeasure make_carpet_measure(int level,
                                   int64_t atom_budget = kDefaultAtomBudget);

struct SegmentPair {
  FractalMeasure x;   // horizontal segment
  FractalMeasure y;   // vertical segment
  double scale;       // original coords = scale * (unit coords) + offset
  std::vector<double> offset;
};

/// Atomic length measures on X = [-5,5] x {0} and Y = {0} x [-5,5],
/// rescaled into the unit box. Negative control: the pair is orthogonal
/// for the dot-product phase at every scale.
SegmentPair make_segment_pair(int64_t atoms_per_segment = 1024);

std::string measure_to_json(const FractalMeasure& mu);
FractalMeasure measure_from_json(const std::string& text);

}  // namespace fuplab
