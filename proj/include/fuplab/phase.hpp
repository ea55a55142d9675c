#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fuplab {

/// Evaluator bundle for a phase function Phi(x,y), its mixed Hessian
/// d^2/dx_i dy_j Phi (row-major d x d), and a symbol p(x,y).
struct Phase {
  using Scalar = std::function<double(std::span<const double>, std::span<const double>)>;
  using HessianEval =
      std::function<void(std::span<const double>, std::span<const double>, double*)>;

  int dim = 1;
  Scalar phi;
  HessianEval mixed_hessian;
  double c0_bound = 1.0;  // ||d2_xy Phi||_C0
  double c1_bound = 1.0;  // ||d2_xy Phi||_C1
  Scalar symbol;
  double symbol_c1 = 1.0;  // ||p||_C1

  double eval(std::span<const double> x, std::span<const double> y) const {
    return phi(x, y);
  }
  void hessian(std::span<const double> x, std::span<const double> y, double* out) const {
    mixed_hessian(x, y, out);
  }
};

/// Phi(x,y) = -x.y with exact mixed Hessian -I, unit bounds, p == 1.
Phase standard_phase(int dim);

/// Builds a Phase from phi alone; the mixed Hessian falls back to central
/// finite differences with the given step.
Phase phase_from_phi(Phase::Scalar phi, int dim, double c0_bound, double c1_bound,
                     double fd_step = 1e-5);

/// Max relative deviation between the bundled Hessian and central finite
/// differences of phi over `probes` deterministic probe points in [0,1]^2d.
double phase_consistency_error(const Phase& ph, int probes, unsigned seed = 17);

/// Spectral norm of a d x d matrix (row-major), by cyclic Jacobi on A^T A.
double spectral_norm(const double* a, int d);

}  // namespace fuplab
