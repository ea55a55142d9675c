#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "fuplab/linalg.hpp"
#include "fuplab/phase.hpp"
#include "fuplab/tiles.hpp"

namespace fuplab {

/// Explicit induction-on-scales constants, carried in natural-log space with
/// double approximations where representable.
struct DolgopyatConstants {
  double c_N = 1.0;
  double C_D_X = 1.0, C_D_Y = 1.0;
  int d = 1;
  double hessian_c1 = 1.0, hessian_c0 = 1.0;

  double L = 0.0;      // 10^14 d^3 max(1, ||H||_C1^3) / c_N^3
  double log_L = 0.0;
  double theta = 0.0;  // 1 / (8 max(1, ||H||_C0))
  long long ceil_log2_20L53 = 0;

  double log_rho_lower = 0.0;  // -2 ceil(log2(20 L^{5/3})) (log C_DX + log C_DY)
  double log_epsilon1 = 0.0;   // rho^2 c_N^2 / (10^9 d^2 L^{2/3})
  double log_epsilon0 = 0.0;   // epsilon1 / (6 log L)
  double rho_lower = 0.0, epsilon1 = 0.0, epsilon0 = 0.0;  // 0 on underflow

  std::string to_json() const;
};

DolgopyatConstants compute_constants(double c_N, double C_D_X, double C_D_Y, int d,
                                     double hessian_c1, double hessian_c0 = -1.0);

struct ChildQuadruple {
  int child_a = -1, child_ap = -1, child_b = -1, child_bp = -1;
  std::vector<double> x_a, x_ap, y_b, y_bp;
  double omega_ab = 0, omega_apb = 0, omega_abp = 0, omega_apbp = 0;
  double rcs_value = 0.0;  // L^{n+m+4/3} |mixed second difference|
  double sep_x = 0.0, sep_y = 0.0;
  bool certified = false;
  std::string failure;       // empty, "lower_bound", or "upper_bound"
  double best_value = 0.0;   // best admissible rcs achieved
  double lower = 0.0, upper = 0.0;
};

/// Searches child pairs of I and J for a quadruple certifying the reverse
/// Cauchy-Schwarz window, subject to the even-spacing and line-segment
/// conditions. A miss is a structured failure, not an exception.
ChildQuadruple select_child_quadruple(const TileTree& tree_x, const TileTree& tree_y,
                                      int level_i, int idx_i, int level_j, int idx_j,
                                      const Phase& phase, double c_N);

struct QuadrupleProbability {
  double rho_emp = 0.0;
  double log_rho_emp = 0.0;  // -inf when zero
  double log_rho_bound = 0.0;
  bool satisfied = false;  // log rho_emp >= log bound
};

QuadrupleProbability probability_of_quadruple(const TileTree& tree_x,
                                              const TileTree& tree_y, int level_i,
                                              int idx_i, int level_j, int idx_j,
                                              const ChildQuadruple& q,
                                              const DolgopyatConstants& constants);

using TileFunction = std::function<cdouble(std::span<const double>)>;

struct CThetaValue {
  double value = 0.0;
  double sup_f = 0.0;
  double grad_term = 0.0;  // theta * diam * sup |grad f|
};

/// max(sup |f|, theta diam(I) sup |grad f|) over the tile's atoms plus a
/// fixed 16^d-point grid per box; gradient by central differences.
CThetaValue c_theta_norm(const TileFunction& f, const Tile& tile,
                         const FractalMeasure& mu, double theta,
                         int grid_per_axis = 16);

/// F_J(x) = (1/mu(J)) sum_{y in J} w_y exp(i (Phi(x,y) - Phi(x,y_J))/h) p(x,y) f(y)
cdouble eval_localized_average(const FractalMeasure& mu_y, const Tile& J,
                               const Phase& phase, double h,
                               const std::vector<cdouble>& f_on_atoms,
                               std::span<const double> x);

struct ContractionReport {
  double lhs = 0.0;       // E_a ||F_J||^2_{C_theta(I_a)}
  double rhs = 0.0;       // R = E_b ||F_{J_b}||^2_{C_theta(I)}
  double sigma2 = 0.0;    // R - lhs
  double gap = 0.0;       // sigma^2 / R
  bool degenerate = false;
  bool gap_at_least_epsilon1 = false;  // log-space comparison
  double max_child_norm_sq = 0.0;      // max_a ||F_J||^2_{C_theta(I_a)}
  double first_moment = 0.0;           // E_b ||F_{J_b}||_{C_theta(I)}
};

/// One step of the statistical iteration on a tile pair with
/// level(I) + level(J) + 1 = floor(-log_L h).
ContractionReport contraction_step(const TileTree& tree_x, const TileTree& tree_y,
                                   const Phase& phase, double h, int level_i, int idx_i,
                                   int level_j, int idx_j,
                                   const std::vector<cdouble>& f_on_atoms,
                                   const DolgopyatConstants& constants);

struct LevelGap {
  int level_j = 0;
  int64_t pairs = 0;
  double min_gap = 0.0;
  double median_gap = 0.0;
};

struct IterationResult {
  double bound = 0.0;  // certified upper bound on ||B_h f||_{L^2(mu_X)}
  int K = 0;
  std::vector<LevelGap> per_level;
  std::string csv() const;  // level,pairs,min_gap,median_gap
};

/// Runs the full recursion: closed-form base case at the leaf level, then the
/// level recursion with the measured per-level gaps in place of epsilon_1.
IterationResult iterate_contraction(const TileTree& tree_x, const TileTree& tree_y,
                                    const Phase& phase, double h,
                                    const std::vector<cdouble>& f_on_atoms,
                                    const DolgopyatConstants& constants);

}  // namespace fuplab
