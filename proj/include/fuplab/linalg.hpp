#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace fuplab {

using cdouble = std::complex<double>;

/// Dense complex matrix, row-major.
struct CMatrix {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<cdouble> a;

  CMatrix() = default;
  CMatrix(int64_t r, int64_t c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}
  cdouble& at(int64_t i, int64_t j) { return a[static_cast<size_t>(i) * cols + j]; }
  const cdouble& at(int64_t i, int64_t j) const {
    return a[static_cast<size_t>(i) * cols + j];
  }
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SvOptions {
  double tol = 1e-12;
  int max_iter = 10000;
  int64_t dense_crossover = 512;  // dense route below this dimension
};

struct SvResult {
  double value = 0.0;
  int iterations = 0;
  bool dense = false;
};

double frobenius_norm(const CMatrix& m);

/// Largest singular value. Dense Hermitian eigensolve of the Gram matrix below
/// the crossover, power iteration on the Gram matrix above it. Both routes are
/// cross-validated in the test suite.
SvResult largest_singular_value(const CMatrix& m, const SvOptions& opts = {});

/// Always-dense and always-iterative routes, for cross-validation.
double largest_singular_value_dense(const CMatrix& m);
SvResult largest_singular_value_power(const CMatrix& m, const SvOptions& opts = {});

/// Matrix-free power iteration: apply(x, out) computes A x (size rows),
/// apply_adjoint(y, out) computes A^H y (size cols).
using ApplyFn = std::function<void(const std::vector<cdouble>&, std::vector<cdouble>&)>;
SvResult largest_singular_value_matfree(const ApplyFn& apply, const ApplyFn& apply_adjoint,
                                        int64_t rows, int64_t cols,
                                        const SvOptions& opts = {});

/// y = A x, one output row per thread. `ref` holds the serial reference
/// implementations kept for testing the OpenMP kernels.
void matvec(const CMatrix& m, const std::vector<cdouble>& x, std::vector<cdouble>& y);
void matvec_adjoint(const CMatrix& m, const std::vector<cdouble>& x,
                    std::vector<cdouble>& y);

namespace ref {
void matvec(const CMatrix& m, const std::vector<cdouble>& x, std::vector<cdouble>& y);
void matvec_adjoint(const CMatrix& m, const std::vector<cdouble>& x,
                    std::vector<cdouble>& y);
}  // namespace ref

}  // namespace fuplab
