#include "fuplab/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "fuplab/parallel.hpp"

namespace fuplab {

double frobenius_norm(const CMatrix& m) {
  double s = 0.0;
  for (const auto& v : m.a) s += std::norm(v);
  return std::sqrt(s);
}

namespace ref {

void matvec(const CMatrix& m, const std::vector<cdouble>& x, std::vector<cdouble>& y) {
  y.assign(static_cast<size_t>(m.rows), cdouble(0.0));
  for (int64_t i = 0; i < m.rows; ++i) {
    cdouble acc(0.0);
    const cdouble* row = m.a.data() + static_cast<size_t>(i) * m.cols;
    for (int64_t j = 0; j < m.cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void matvec_adjoint(const CMatrix& m, const std::vector<cdouble>& x,
                    std::vector<cdouble>& y) {
  y.assign(static_cast<size_t>(m.cols), cdouble(0.0));
  for (int64_t j = 0; j < m.cols; ++j) {
    cdouble acc(0.0);
    for (int64_t i = 0; i < m.rows; ++i)
      acc += std::conj(m.at(i, j)) * x[i];
    y[j] = acc;
  }
}

}  // namespace ref

void matvec(const CMatrix& m, const std::vector<cdouble>& x, std::vector<cdouble>& y) {
  if (max_threads() <= 1 || m.rows < 64) {
    ref::matvec(m, x, y);
    return;
  }
  y.assign(static_cast<size_t>(m.rows), cdouble(0.0));
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int64_t i = 0; i < m.rows; ++i) {
    cdouble acc(0.0);
    const cdouble* row = m.a.data() + static_cast<size_t>(i) * m.cols;
    for (int64_t j = 0; j < m.cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void matvec_adjoint(const CMatrix& m, const std::vector<cdouble>& x,
                    std::vector<cdouble>& y) {
  if (max_threads() <= 1 || m.cols < 64) {
    ref::matvec_adjoint(m, x, y);
    return;
  }
  y.assign(static_cast<size_t>(m.cols), cdouble(0.0));
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int64_t j = 0; j < m.cols; ++j) {
    cdouble acc(0.0);
    for (int64_t i = 0; i < m.rows; ++i)
      acc += std::conj(m.at(i, j)) * x[i];
    y[j] = acc;
  }
}

double largest_singular_value_dense(const CMatrix& m) {
  using EMat = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const EMat> a(m.a.data(), m.rows, m.cols);
  // Hermitian eigensolve of the smaller Gram matrix
  if (m.rows >= m.cols) {
    Eigen::MatrixXcd g = a.adjoint() * a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
  Eigen::MatrixXcd g = a * a.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

SvResult largest_singular_value_matfree(const ApplyFn& apply, const ApplyFn& apply_adjoint,
                                        int64_t rows, int64_t cols,
                                        const SvOptions& opts) {
  // power iteration on A^H A; the Rayleigh value converges even when the top
  // singular values cluster
  std::vector<cdouble> v(static_cast<size_t>(cols));
  uint64_t state = 0x9e3779b97f4a7c15ull;
  auto next = [&state]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return static_cast<double>(state >> 11) / 9007199254740992.0;
  };
  for (auto& z : v) z = cdouble(next() - 0.5, next() - 0.5);
  double nrm = 0.0;
  for (const auto& z : v) nrm += std::norm(z);
  nrm = std::sqrt(nrm);
  for (auto& z : v) z /= nrm;

  std::vector<cdouble> av(static_cast<size_t>(rows)), w(static_cast<size_t>(cols));
  double sigma = 0.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    apply(v, av);
    double s2 = 0.0;
    for (const auto& z : av) s2 += std::norm(z);
    double s = std::sqrt(s2);  // = ||A v||, Rayleigh estimate of sigma
    if (s == 0.0) return {0.0, it, false};
    apply_adjoint(av, w);
    double wn = 0.0;
    for (const auto& z : w) wn += std::norm(z);
    wn = std::sqrt(wn);
    if (wn == 0.0) return {s, it, false};
    for (size_t i = 0; i < w.size(); ++i) v[i] = w[i] / wn;
    if (std::abs(s - sigma) <= opts.tol * std::max(1.0, s)) return {s, it, false};
    sigma = s;
  }
  throw ConvergenceError("largest_singular_value: power iteration did not converge");
}

SvResult largest_singular_value_power(const CMatrix& m, const SvOptions& opts) {
  auto apply = [&m](const std::vector<cdouble>& x, std::vector<cdouble>& y) {
    matvec(m, x, y);
  };
  auto applyH = [&m](const std::vector<cdouble>& x, std::vector<cdouble>& y) {
    matvec_adjoint(m, x, y);
  };
  return largest_singular_value_matfree(apply, applyH, m.rows, m.cols, opts);
}

SvResult largest_singular_value(const CMatrix& m, const SvOptions& opts) {
  if (m.rows == 0 || m.cols == 0) return {0.0, 0, true};
  if (std::min(m.rows, m.cols) <= opts.dense_crossover) {
    SvResult r;
    r.value = largest_singular_value_dense(m);
    r.dense = true;
    return r;
  }
  return largest_singular_value_power(m, opts);
}

}  // namespace fuplab
