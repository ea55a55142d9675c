#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fuplab/measure.hpp"
#include "fuplab/phase.hpp"

namespace fuplab {

/// Geometric grid of test scales in [alpha, beta], coarse to fine.
struct ScaleRange {
  double alpha = 0.0;
  double beta = 1.0;
  double ratio = 2.0;

  std::vector<double> grid() const;
  void validate() const;
};

struct PerScaleEntry {
  double r_x = 0.0;
  double r_y = 0.0;  // 0 when a single scale applies
  double value = 0.0;
};

struct ConstantWitness {
  std::string kind;
  std::vector<double> box_lo, box_hi;
  std::vector<int64_t> atoms;  // atom ids involved (centers / quadruple)
  double r_x = 0.0, r_y = 0.0;
  double value = 0.0;
};

/// Empirical bound on a continuum constant, evaluated over atoms only.
struct ConstantReport {
  double value = 0.0;
  std::vector<PerScaleEntry> per_scale;
  ConstantWitness witness;
  int64_t under_resolved = 0;  // configurations with < 2 atoms per ball
  std::string to_json() const;
  std::string per_scale_csv() const;
};

/// Smallest C_R >= 1 with mu(I) <= C_R r^delta on sampled boxes and
/// C_R^{-1} r^delta <= mu(I) on atom-centered boxes (closed boxes).
ConstantReport estimate_regularity(const FractalMeasure& mu, const ScaleRange& range,
                                   double delta);

/// Smallest C_D with mu(I*2) <= C_D mu(I) over atom-centered cubes,
/// r in [alpha, min(beta, 1/2)].
ConstantReport estimate_doubling(const FractalMeasure& mu, const ScaleRange& range);

struct NonorthOptions {
  int64_t max_centers = 24;        // deterministic stride subsample per side
  int64_t exhaustive_ball = 64;    // exhaustive quadruple search below this
  int random_samples = 2000;       // randomized draws above it
  uint64_t seed = 2024;
};

/// Empirical Phi-nonorthogonality constant: min over sampled
/// (x0, y0, r_X, r_Y) of the max mixed second difference over atom
/// quadruples in the l2 balls, normalized by r_X r_Y.
ConstantReport estimate_nonorthogonality(const FractalMeasure& mu_x,
                                         const FractalMeasure& mu_y, const Phase& phase,
                                         const ScaleRange& range_x,
                                         const ScaleRange& range_y,
                                         const NonorthOptions& opts = {});

struct MvtReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double error = 0.0;
};

/// Tensor Gauss quadrature of the mixed-Hessian bitangent integral over the
/// rectangle with vertices (x_i, y_j) against the exact second difference.
MvtReport verify_geometric_mvt(const Phase& phase, std::span<const double> x0,
                               std::span<const double> x1, std::span<const double> y0,
                               std::span<const double> y1, int quadrature_n);

struct PhaseRectangle {
  std::vector<double> x0, x1, y0, y1;
};

struct DiffBoundReport {
  double lhs = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  double eps_x = 0.0, eps_y = 0.0, c_x = 0.0, c_y = 0.0;
};

/// Homotopy difference bound: |I(R1) - I(R0)| <= 7 ||H||_C1 (eps_x c_y + eps_y c_x).
DiffBoundReport verify_mvt_difference_bound(const Phase& phase, const PhaseRectangle& r0,
                                            const PhaseRectangle& r1,
                                            int quadrature_n = 32);

/// Gauss-Legendre nodes and weights on [0,1].
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace fuplab
