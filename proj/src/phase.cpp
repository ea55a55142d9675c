#include "fuplab/phase.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace fuplab {

Phase standard_phase(int dim) {
  Phase p;
  p.dim = dim;
  p.phi = [](std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return -s;
  };
  p.mixed_hessian = [dim](std::span<const double>, std::span<const double>, double* out) {
    for (int i = 0; i < dim * dim; ++i) out[i] = 0.0;
    for (int i = 0; i < dim; ++i) out[i * dim + i] = -1.0;
  };
  p.c0_bound = 1.0;
  p.c1_bound = 1.0;
  p.symbol = [](std::span<const double>, std::span<const double>) { return 1.0; };
  p.symbol_c1 = 1.0;
  return p;
}

Phase phase_from_phi(Phase::Scalar phi, int dim, double c0_bound, double c1_bound,
                     double fd_step) {
  Phase p;
  p.dim = dim;
  p.phi = phi;
  p.mixed_hessian = [phi, dim, fd_step](std::span<const double> x,
                                        std::span<const double> y, double* out) {
    std::vector<double> xp(x.begin(), x.end()), yp(y.begin(), y.end());
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        double acc = 0.0;
        for (int sx : {+1, -1})
          for (int sy : {+1, -1}) {
            xp[i] = x[i] + sx * fd_step;
            yp[j] = y[j] + sy * fd_step;
            acc += sx * sy * phi(xp, yp);
          }
        xp[i] = x[i];
        yp[j] = y[j];
        out[i * dim + j] = acc / (4.0 * fd_step * fd_step);
      }
  };
  p.c0_bound = c0_bound;
  p.c1_bound = c1_bound;
  p.symbol = [](std::span<const double>, std::span<const double>) { return 1.0; };
  p.symbol_c1 = 1.0;
  return p;
}

double phase_consistency_error(const Phase& ph, int probes, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.1, 0.9);
  const int d = ph.dim;
  std::vector<double> x(d), y(d), h(d * d), fd(d * d);
  const double step = 1e-3;
  double worst = 0.0;
  std::vector<double> xp(d), yp(d);
  for (int t = 0; t < probes; ++t) {
    for (int i = 0; i < d; ++i) x[i] = unif(rng);
    for (int i = 0; i < d; ++i) y[i] = unif(rng);
    ph.hessian(x, y, h.data());
    xp = x;
    yp = y;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int sx : {+1, -1})
          for (int sy : {+1, -1}) {
            xp[i] = x[i] + sx * step;
            yp[j] = y[j] + sy * step;
            acc += sx * sy * ph.eval(xp, yp);
          }
        xp[i] = x[i];
        yp[j] = y[j];
        fd[i * d + j] = acc / (4.0 * step * step);
      }
    double scale = 0.0;
    for (int i = 0; i < d * d; ++i) scale = std::max(scale, std::abs(h[i]));
    scale = std::max(scale, 1e-12);
    for (int i = 0; i < d * d; ++i)
      worst = std::max(worst, std::abs(h[i] - fd[i]) / scale);
  }
  return worst;
}

double spectral_norm(const double* a, int d) {
  // Gram matrix G = A^T A, then cyclic Jacobi for the top eigenvalue.
  std::vector<double> g(d * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += a[k * d + i] * a[k * d + j];
      g[i * d + j] = s;
    }
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) off += g[p * d + q] * g[p * d + q];
    if (off < 1e-30) break;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) {
        double apq = g[p * d + q];
        if (std::abs(apq) < 1e-300) continue;
        double app = g[p * d + p], aqq = g[q * d + q];
        double theta = 0.5 * std::atan2(2.0 * apq, aqq - app);
        double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < d; ++k) {
          double gp = g[p * d + k], gq = g[q * d + k];
          g[p * d + k] = c * gp - s * gq;
          g[q * d + k] = s * gp + c * gq;
        }
        for (int k = 0; k < d; ++k) {
          double gp = g[k * d + p], gq = g[k * d + q];
          g[k * d + p] = c * gp - s * gq;
          g[k * d + q] = s * gp + c * gq;
        }
      }
  }
  double top = 0.0;
  for (int i = 0; i < d; ++i) top = std::max(top, g[i * d + i]);
  return std::sqrt(std::max(0.0, top));
}

}  // namespace fuplab
