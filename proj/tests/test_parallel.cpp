#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <random>

#include "doctest.h"
#include "fuplab/cantor.hpp"
#include "fuplab/fio.hpp"
#include "fuplab/parallel.hpp"
#include "fuplab/regularity.hpp"

using namespace fuplab;

namespace {
bool bits_equal(const std::vector<cdouble>& a, const std::vector<cdouble>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(cdouble)) == 0;
}
}  // namespace

TEST_CASE("matvec: OpenMP kernel matches the serial reference bit for bit") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  CMatrix m(257, 129);
  for (auto& v : m.a) v = cdouble(unif(rng), unif(rng));
  std::vector<cdouble> x(129);
  for (auto& v : x) v = cdouble(unif(rng), unif(rng));

  std::vector<cdouble> serial, parallel;
  ref::matvec(m, x, serial);
  set_max_threads(0);
  matvec(m, x, parallel);
  CHECK(bits_equal(serial, parallel));

  std::vector<cdouble> y(257);
  for (auto& v : y) v = cdouble(unif(rng), unif(rng));
  std::vector<cdouble> sh, ph;
  ref::matvec_adjoint(m, y, sh);
  matvec_adjoint(m, y, ph);
  CHECK(bits_equal(sh, ph));
}

TEST_CASE("matrix assembly is independent of the thread count") {
  CantorSpec s;
  s.M = 3;
  s.d = 1;
  s.A = digits1d({0, 2});
  s.B = digits1d({0, 1});
  s.k = 6;
  set_max_threads(1);
  auto m1 = fup_matrix(s);
  set_max_threads(0);
  auto m2 = fup_matrix(s);
  CHECK(bits_equal(m1.a, m2.a));
}

TEST_CASE("estimators are independent of the thread count") {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), 5);
  auto phase = standard_phase(1);
  ScaleRange r{std::pow(3.0, -4), 0.5};

  set_max_threads(1);
  auto a = estimate_nonorthogonality(mu, mu, phase, r, r);
  auto ra = estimate_regularity(mu, r, std::log(2.0) / std::log(3.0));
  set_max_threads(0);
  auto b = estimate_nonorthogonality(mu, mu, phase, r, r);
  auto rb = estimate_regularity(mu, r, std::log(2.0) / std::log(3.0));
  CHECK(a.value == b.value);
  CHECK(ra.value == rb.value);
}

TEST_CASE("operator assembly and norms are independent of the thread count") {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), 6);
  const double h = std::pow(3.0, -4);
  set_max_threads(1);
  auto op1 = build_fio(mu, mu, standard_phase(1), h);
  double n1 = operator_norm(op1);
  set_max_threads(0);
  auto op2 = build_fio(mu, mu, standard_phase(1), h);
  double n2 = operator_norm(op2);
  CHECK(bits_equal(op1.kernel.a, op2.kernel.a));
  CHECK(n1 == n2);
}
