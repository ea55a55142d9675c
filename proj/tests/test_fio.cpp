#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fuplab/cantor.hpp"
#include "fuplab/fio.hpp"
#include "fuplab/regularity.hpp"

using namespace fuplab;

namespace {
const double kDelta3 = std::log(2.0) / std::log(3.0);

FractalMeasure uniform_atoms(int64_t n) {
  FractalMeasure mu;
  mu.dim = 1;
  for (int64_t i = 0; i < n; ++i)
    mu.atoms.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  mu.weights.assign(n, 1.0 / static_cast<double>(n));
  mu.scale_floor = 1.0 / static_cast<double>(n);
  mu.bounding_box = Box({0.0}, {1.0});
  return mu;
}

SegmentPair original_segments(int64_t n) {
  auto pair = make_segment_pair(n);
  for (auto* mu : {&pair.x, &pair.y}) {
    for (size_t i = 0; i < mu->atoms.size(); ++i)
      mu->atoms[i] = mu->atoms[i] * pair.scale + pair.offset[i % 2];
    mu->scale_floor *= pair.scale;
    mu->bounding_box = Box({-5.0, -5.0}, {5.0, 5.0});
  }
  return pair;
}

}  // namespace

TEST_CASE("zero symbol gives the zero operator") {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), 4);
  Phase p = standard_phase(1);
  p.symbol = [](std::span<const double>, std::span<const double>) { return 0.0; };
  auto op = build_fio(mu, mu, p, 0.1);
  CHECK(operator_norm(op) == doctest::Approx(0.0));
}

TEST_CASE("large-h limit is rank one with unit norm") {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), 4);
  auto op = build_fio(mu, mu, standard_phase(1), 1e12);
  CHECK(operator_norm(op) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("atomic FIO reproduces the discrete submatrix norms") {
  for (int k = 1; k <= 5; ++k) {
    CantorSpec s;
    s.M = 3;
    s.d = 1;
    s.A = digits1d({0, 2});
    s.B = s.A;
    s.k = k;
    auto discrete = fup_norm(s);
    auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), k);
    const double N = std::pow(3.0, k);
    const double h = 1.0 / (2.0 * std::numbers::pi * N);
    mu.scale_floor = h;  // the discrete set is exact at every scale
    auto op = build_fio(mu, mu, standard_phase(1), h);
    double mapped = operator_norm(op) * std::pow(2.0, k) / std::sqrt(N);
    CHECK(mapped == doctest::Approx(discrete.r).epsilon(0.1));
    CHECK(mapped == doctest::Approx(discrete.r).epsilon(1e-9));
  }
}

TEST_CASE("operator norm basics") {
  OperatorMatrix m;
  m.dim = 1;
  m.h = 1.0;
  m.row_points = {0.0, 1.0};
  m.col_points = {0.0, 1.0};
  m.row_weights = {1.0, 1.0};
  m.col_weights = {1.0, 1.0};
  m.kernel = CMatrix(2, 2);
  for (auto& v : m.kernel.a) v = cdouble(1.0);
  CHECK(operator_norm(m) == doctest::Approx(2.0).epsilon(1e-12));

  // norm never exceeds the Frobenius norm of the weighted kernel
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  CMatrix r(40, 30);
  for (auto& v : r.a) v = cdouble(unif(rng), unif(rng));
  OperatorMatrix rm;
  rm.kernel = r;
  rm.row_weights.assign(40, 1.0);
  rm.col_weights.assign(30, 1.0);
  CHECK(operator_norm(rm) <= frobenius_norm(r) + 1e-9);
}

TEST_CASE("power iteration matches dense decomposition on random matrices") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  CMatrix m(100, 100);
  for (auto& v : m.a) v = cdouble(unif(rng), unif(rng));
  double dense = largest_singular_value_dense(m);
  double power = largest_singular_value_power(m).value;
  CHECK(std::abs(dense - power) < 1e-8);
}

TEST_CASE("thicken: closed-form masses") {
  FractalMeasure one;
  one.dim = 1;
  one.atoms = {0.5};
  one.weights = {1.0};
  one.scale_floor = 1e-6;
  one.bounding_box = Box({0.0}, {1.0});
  auto th = thicken(one, 0.01, 0.0);
  CHECK(th.total_mass() == doctest::Approx(2.0).epsilon(0.02));

  FractalMeasure two = one;
  two.atoms = {0.25, 0.75};
  two.weights = {0.5, 0.5};
  auto th2 = thicken(two, 0.01, 0.0);
  CHECK(th2.total_mass() == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("thicken: regularity constant obeys the thickened bound") {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), 6);
  const double h = std::pow(3.0, -6);
  auto cr_x = estimate_regularity(mu, ScaleRange{h, 1.0}, kDelta3);
  auto th = thicken(mu, h, kDelta3);
  auto cr_th = estimate_regularity(th, ScaleRange{2.0 * h, 1.0}, kDelta3);
  // C_R(X_h) <= 6^delta |B^1| C_R(X)^2 with |B^1| = 2
  CHECK(cr_th.value <= std::pow(6.0, kDelta3) * 2.0 * cr_x.value * cr_x.value);
}

TEST_CASE("thickened pairs keep a quarter of the nonorthogonality constant") {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), 6);
  const double h = std::pow(3.0, -6);
  auto phase = standard_phase(1);
  ScaleRange base{2.0 * h, 0.5};
  auto direct = estimate_nonorthogonality(mu, mu, phase, base, base);
  auto th = thicken(mu, h, kDelta3);
  auto thick = estimate_nonorthogonality(th, th, phase, base, base);
  CHECK(thick.value >= direct.value / 4.0 * 0.9);
}

TEST_CASE("grid FUP: full interval is a near-unitary restriction") {
  auto mu = uniform_atoms(4096);
  const double h = 1.0 / 64.0;
  auto res = fup_grid_norm(mu, mu, h, h / 4.0);
  CHECK(res.tensor_path);
  CHECK(res.norm >= 0.9);
  CHECK(res.norm <= 1.05);
}

TEST_CASE("grid FUP: invariant under common translations") {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), 5);
  const double h = std::pow(3.0, -4);
  const double step = h / 4.0;
  auto base = fup_grid_norm(mu, mu, h, step);
  FractalMeasure shifted = mu;
  const double t = 8.0 * step;
  for (auto& v : shifted.atoms) v += t;
  shifted.bounding_box.lo[0] += t;
  shifted.bounding_box.hi[0] += t;
  auto moved = fup_grid_norm(shifted, shifted, h, step);
  CHECK(moved.norm == doctest::Approx(base.norm).epsilon(1e-9));
}

TEST_CASE("grid FUP: gaussian witness on the orthogonal segments") {
  auto pair = original_segments(4096);
  for (double h : {1.0 / 16.0, 1.0 / 32.0}) {
    // f = exp(-x^2/2 - y^2/(2h^2)) concentrates on X_h; its semiclassical
    // transform lives on Y_h and drives the operator from the space side
    auto witness = [h](std::span<const double> x) {
      return cdouble(std::exp(-x[0] * x[0] / (2.0 * h * h) - x[1] * x[1] / 2.0));
    };
    double q = fup_grid_rayleigh(pair.x, pair.y, h, h / 4.0, witness);
    INFO("h=", h, " rayleigh=", q);
    CHECK(q >= 0.5);
  }
}

TEST_CASE("conversion identity diagnostics") {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), 7);
  const double h = std::pow(3.0, -6);
  auto th = thicken(mu, h, kDelta3, 1 << 14);
  auto grid = fup_grid_norm(mu, mu, h, h / 4.0);
  auto op = build_fio(th, th, standard_phase(1), h);
  double fio_norm = operator_norm(op);
  double factor_paper = std::pow(h, 0.5 - kDelta3) * std::pow(2.0 * std::numbers::pi,
                                                              -0.5 * kDelta3);
  double factor_dim = std::pow(h, 0.5 - kDelta3) * std::pow(2.0 * std::numbers::pi,
                                                            -0.5);
  std::cout << "[conversion] grid=" << grid.norm << " fio=" << fio_norm
            << " paper_factor*fio=" << factor_paper * fio_norm
            << " dim_factor*fio=" << factor_dim * fio_norm << "\n";
  CHECK(grid.norm > 0.0);
  CHECK(fio_norm > 0.0);
}

TEST_CASE("norm sweep fitting") {
  auto res = norm_sweep([](double h) { return std::pow(h, 0.3); },
                        {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32}, 0.1);
  CHECK(res.fitted_slope == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(res.gain == doctest::Approx(0.2).epsilon(1e-12));
  // the fitted slope reproduces from the emitted table
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& row : res.table) {
    double lx = std::log(row.h), ly = std::log(row.norm);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double n = static_cast<double>(res.table.size());
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(res.fitted_slope).epsilon(1e-12));

  CHECK_THROWS_AS(norm_sweep([](double) { return 1.0; }, {0.5, 0.25},
                             0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(norm_sweep([](double) { return 1.0; }, {0.5, 0.4, 0.3}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("nested atom resolutions move the norm by at most 2%") {
  const double h = std::pow(3.0, -5);
  auto a = make_cantor_measure(3, 1, digits1d({0, 2}), 7);
  auto b = make_cantor_measure(3, 1, digits1d({0, 2}), 8);
  double na = operator_norm(build_fio(a, a, standard_phase(1), h));
  double nb = operator_norm(build_fio(b, b, standard_phase(1), h));
  CHECK(std::abs(na - nb) <= 0.02 * std::max(na, nb));
}

TEST_CASE("preconditions and budget") {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), 6);
  CHECK_THROWS_AS(build_fio(mu, mu, standard_phase(1), mu.scale_floor / 10.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fup_grid_norm(mu, mu, 0.01, 0.01), std::invalid_argument);
}
