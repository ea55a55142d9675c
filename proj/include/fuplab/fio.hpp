#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fuplab/linalg.hpp"
#include "fuplab/measure.hpp"
#include "fuplab/phase.hpp"

namespace fuplab {

/// Discretized B_h: kernel[j][l] = exp(i Phi(x_j, y_l)/h) p(x_j, y_l) w_l,
/// with the row weights kept for the L^2(mu_X) pairing.
struct OperatorMatrix {
  std::vector<double> row_points, col_points;  // flat, dim-major like measures
  std::vector<double> row_weights, col_weights;
  int dim = 1;
  CMatrix kernel;
  double h = 0.0;
};

OperatorMatrix build_fio(const FractalMeasure& mu_x, const FractalMeasure& mu_y,
                         const Phase& phase, double h);

/// L^2(mu_Y) -> L^2(mu_X) operator norm of the weighted kernel.
double operator_norm(const OperatorMatrix& mat, const SvOptions& opts = {});

/// Atomic approximation of mu_h(A) = h^{delta-d} |X_h ∩ A|: quasi-uniform
/// low-discrepancy samples of X + B(0,h) with mass h^{delta-d} vol(X_h).
FractalMeasure thicken(const FractalMeasure& mu, double h, double delta,
                       int64_t qmc_samples = 1 << 16);

struct FupGridOptions {
  bool check_refinement = false;  // flag grids whose halving moves the norm > 2%
  SvOptions sv;
};

struct FupGridResult {
  double norm = 0.0;
  int64_t rows = 0, cols = 0;
  bool tensor_path = false;
  double refined_norm = -1.0;
};

/// || 1_{X_h} F_h 1_{Y_h} ||_{L^2 -> L^2} on uniform grids with cell-volume
/// weights and the continuum (2 pi h)^{-d/2} normalization. X supplies the
/// frequency side, Y the space side; active cells have centers within h of
/// the respective atom sets.
FupGridResult fup_grid_norm(const FractalMeasure& mu_x, const FractalMeasure& mu_y,
                            double h, double grid_step, const FupGridOptions& opts = {});

/// Rayleigh quotient ||T u|| / ||u|| of the grid operator applied to a given
/// function on the space side.
double fup_grid_rayleigh(const FractalMeasure& mu_x, const FractalMeasure& mu_y,
                         double h, double grid_step,
                         const std::function<cdouble(std::span<const double>)>& u);

struct SweepRowF {
  double h = 0.0;
  double norm = 0.0;
};

struct SweepResult {
  std::vector<SweepRowF> table;
  double fitted_slope = 0.0;  // least squares on (log h, log norm)
  double intercept = 0.0;
  double baseline = 0.0;  // max(0, (d - delta - delta')/2)
  double gain = 0.0;      // fitted_slope - baseline
  std::string csv() const;
  std::string to_json() const;
};

SweepResult norm_sweep(const std::function<double(double)>& norm_at,
                       const std::vector<double>& h_values, double baseline);

}  // namespace fuplab
