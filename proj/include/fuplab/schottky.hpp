#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "fuplab/linalg.hpp"
#include "fuplab/measure.hpp"
#include "fuplab/regularity.hpp"

namespace fuplab {

struct Disk {
  cdouble center;
  double radius = 0.0;

  bool contains(cdouble z) const { return std::abs(z - center) <= radius; }
  bool disjoint_from(const Disk& o) const {
    return std::abs(center - o.center) > radius + o.radius;
  }
};

/// Element of PSL(2,C), normalized to determinant 1.
struct MobiusMap {
  cdouble a{1.0}, b{0.0}, c{0.0}, d{1.0};

  static MobiusMap normalized(cdouble a, cdouble b, cdouble c, cdouble d);
  cdouble apply(cdouble z) const { return (a * z + b) / (c * z + d); }
  MobiusMap compose(const MobiusMap& o) const;
  MobiusMap inverse() const;  // adjugate
  /// Exact disk image via affine-inversion-affine; throws if the pole lies
  /// inside the disk.
  Disk map_disk(const Disk& disk) const;
};

struct SchottkyGroup {
  int genus = 0;
  std::vector<Disk> disks;           // D_1..D_{2g}
  std::vector<MobiusMap> generators; // gamma_a with gamma_a(ext D_abar) = D_a

  int paired(int a) const { return (a + genus) % (2 * genus); }
  double mapping_error() const;  // worst boundary-sample deviation
};

/// Canonical generators gamma_a(z) = c_a + r_a r_abar / (z - c_abar) from
/// 2g pairwise disjoint disks, pairing a <-> a+g.
SchottkyGroup make_schottky(const std::vector<Disk>& disks);

struct WordDisk {
  std::vector<int> word;  // a_1 ... a_n, 0-based letters
  Disk disk;
};

/// All admissible words of length n with their nested disk images.
std::vector<WordDisk> iterate_disks(const SchottkyGroup& group, int n,
                                    int64_t word_budget = kDefaultAtomBudget);

/// One atom per admissible word at the disk center, uniform weights,
/// rescaled into the unit box; scale_floor = max level-n radius (rescaled).
FractalMeasure sample_limit_set(const SchottkyGroup& group, int n,
                                int64_t word_budget = kDefaultAtomBudget);

/// c0 = min over (atom x, eps, direction w) of
///      max_{y in B(x,eps)} |<y - x, w>| / eps.
ConstantReport nonconcentration_constant(const FractalMeasure& atoms,
                                         const std::vector<double>& eps_grid,
                                         int dir_count);

struct CircleWitness {
  bool is_line = false;
  cdouble center;   // circles
  double radius = 0.0;
  double angle = 0.0, offset = 0.0;  // lines: <p, (cos,sin)> = offset
};

struct CircleMarginResult {
  double margin = 0.0;
  CircleWitness witness;
};

/// Minimum over circles and lines of the worst gap to the four disks;
/// multi-start local search with a fixed seed. margin > 0 certifies that no
/// circle or line meets all four disks.
CircleMarginResult circle_margin(const std::vector<Disk>& disks, uint64_t seed = 7,
                                 int starts = 64);

struct NonorthFromNonconcentration {
  double c_N = 0.0;
  double scale_ceiling = 0.0;  // inf when the C^3 bound vanishes
};

/// c_N = c1^3 c0^6 / (200 (1 + ||Phi||_C3)^2), with the admissible-scale
/// ceiling r <= c1 c0^2 / (10 ||Phi||_C3).
NonorthFromNonconcentration nonorthogonality_from_nonconcentration(double c0, double c1,
                                                                   double phi_c3);

std::string disks_to_json(const std::vector<WordDisk>& disks);

}  // namespace fuplab
