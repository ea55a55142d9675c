#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fuplab/geometry.hpp"
#include "fuplab/measure.hpp"

namespace fuplab {

/// Tile of a discretization: a finite union of axis-aligned boxes modified
/// from a standard L-adic cube.
struct Tile {
  int level = 0;
  Region geometry;
  Box base_cube;
  std::vector<double> anchor;   // witness point in supp mu, empty if none
  std::vector<int> children;    // indices into the next stored level
  double measure = 0.0;
  std::vector<int64_t> atom_ids;

  bool has_anchor() const { return !anchor.empty(); }
};

struct TileTree {
  FractalMeasure source;
  int64_t L = 2;
  int depth = 1;  // N: perturbation applies on levels 1..N
  bool perturbed = false;
  std::vector<std::vector<Tile>> levels;  // stored levels 0..max_level

  int max_level() const { return static_cast<int>(levels.size()) - 1; }
  double tile_side(int level) const;       // L^{-level}
  double perturb_radius(int level) const;  // L^{-2/3-level}
};

struct DiscretizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Plain L-adic cubes meeting supp mu, levels 0..N.
TileTree standard_discretization(const FractalMeasure& mu, int64_t L, int N);

/// The perturbed standard discretization: type classification, tubular
/// absorption, and tree re-assembly. Stores levels 0..N+1 (level N+1 keeps
/// the standard cubes the level-N tiles were assembled from).
TileTree perturbed_discretization(const FractalMeasure& mu, int64_t L, int N);

struct CheckItem {
  std::string invariant;
  int64_t checked = 0;
  int64_t failed = 0;
  double worst_margin = 0.0;  // signed; negative = violated by that much
  std::string note;
};

struct CheckReport {
  std::vector<CheckItem> items;
  bool all_pass = true;
  std::string to_json() const;
};

/// Verifies partition, nesting, the cube-perturbation containment, and the
/// anchor interior-distance condition on every tile.
CheckReport check_tree(const TileTree& tree);

/// JSON serialization of the full tree (levels -> tiles).
std::string tree_to_json(const TileTree& tree);

}  // namespace fuplab
