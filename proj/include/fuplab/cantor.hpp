#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fuplab/linalg.hpp"
#include "fuplab/measure.hpp"

namespace fuplab {

/// Arithmetic Cantor pair: base M, dimension d, digit alphabets A (rows)
/// and B (columns), level k.
struct CantorSpec {
  int M = 3;
  int d = 1;
  std::vector<std::vector<int>> A;
  std::vector<std::vector<int>> B;
  int k = 1;

  void validate() const;
  int64_t N() const;  // M^k
  double delta_A() const;
  double delta_B() const;
  double beta() const;  // (d - delta_A - delta_B) / 2

  CantorSpec with_k(int kk) const {
    CantorSpec s(*this);
    s.k = kk;
    return s;
  }
};

/// Helper: 1-d alphabet {a_0, a_1, ...} lifted to digit vectors.
std::vector<std::vector<int>> digits1d(std::initializer_list<int> v);

struct FupNormReport {
  double r = 0.0;     // operator norm of 1_{C_A} F_N 1_{C_B}
  double hs = 0.0;    // Hilbert-Schmidt norm
  double beta = 0.0;  // (d - delta_A - delta_B)/2
  double gain = 0.0;  // -log_N(r) - beta
  int64_t N = 0;
  int64_t rows = 0;
  int64_t cols = 0;
};

/// C_{k,A} as exact base-M integer lattice points, sorted lexicographically.
std::vector<std::vector<int64_t>> cantor_points(const CantorSpec& spec, bool rows = true);

/// Builds the |C_A| x |C_B| matrix N^{-d/2} exp(2 pi i j.l / N) and returns
/// its largest singular value and Frobenius norm. Entry phases are reduced as
/// exact integers mod N before trigonometric evaluation.
FupNormReport fup_norm(const CantorSpec& spec, const SvOptions& opts = {});

/// The assembled (unweighted) DFT submatrix; exposed for cross-module tests.
CMatrix fup_matrix(const CantorSpec& spec);

/// Streaming Frobenius norm without materializing the matrix.
double fup_hs_norm(const CantorSpec& spec);

struct SubmultReport {
  double r_k1 = 0.0, r_k2 = 0.0, r_sum = 0.0;
  double slack = 0.0;  // r_k1 * r_k2 - r_{k1+k2}
};
SubmultReport submultiplicativity_check(const CantorSpec& base, int k1, int k2,
                                        const SvOptions& opts = {});

struct MinorWitness {
  std::vector<int> j, jp, l, lp;  // digit vectors in A, A, B, B
  int64_t inner = 0;              // <j - j', l - lp> mod M, nonzero when found
};

/// Discrete nonorthogonality test at level 1: true iff some quadruple has
/// <j - j', l - l'> != 0 mod M.
std::pair<bool, std::optional<MinorWitness>> minor_test(const CantorSpec& spec);

struct SweepRow {
  int k;
  int64_t N;
  double r, hs, beta, gain;
};
std::vector<SweepRow> exponent_sweep(const CantorSpec& base, int k_max,
                                     const SvOptions& opts = {});
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

/// Measures-module generator fed by a CantorSpec (uses alphabet A).
inline FractalMeasure cantor_spec_measure(const CantorSpec& spec,
                                          int64_t atom_budget = kDefaultAtomBudget) {
  return make_cantor_measure(spec.M, spec.d, spec.A, spec.k, atom_budget);
}

}  // namespace fuplab
