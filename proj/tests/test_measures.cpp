#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>

#include "doctest.h"
#include "fuplab/cantor.hpp"
#include "fuplab/measure.hpp"
#include "fuplab/phase.hpp"
#include "test_util.hpp"

using namespace fuplab;

TEST_CASE("box region algebra") {
  Box a({0.0, 0.0}, {1.0, 1.0});
  CHECK(a.volume() == doctest::Approx(1.0));
  Region r(a);
  r.subtract(Box({0.25, 0.25}, {0.5, 0.5}));
  CHECK(r.volume() == doctest::Approx(1.0 - 0.0625));
  std::vector<double> p{0.3, 0.3};
  CHECK(!r.contains(p));
  p = {0.1, 0.1};
  CHECK(r.contains(p));
  r.add(Box({0.25, 0.25}, {0.5, 0.5}));
  CHECK(r.volume() == doctest::Approx(1.0));
  // adding an overlapping box must not double-count
  r.add(Box({0.5, 0.5}, {1.5, 1.5}));
  CHECK(r.volume() == doctest::Approx(1.75));

  std::vector<double> q{0.5, 0.5};
  CHECK(Region(a).interior_distance(q, 0.1) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("cantor measure: one digit") {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), 1);
  mu.validate(true);
  REQUIRE(mu.count() == 2);
  CHECK(mu.atoms[0] == 0.0);
  CHECK(mu.atoms[1] == doctest::Approx(2.0 / 3.0));
  CHECK(mu.weights[0] == 0.5);
  CHECK(mu.scale_floor == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("cantor measure: full alphabet is the uniform grid") {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 1, 2}), 2);
  mu.validate(true);
  REQUIRE(mu.count() == 9);
  std::vector<double> sorted(mu.atoms);
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 9; ++i) CHECK(sorted[i] == doctest::Approx(i / 9.0));
}

TEST_CASE("cantor measure d=2: box-counting slope") {
  std::vector<std::vector<int>> alphabet{{0, 0}, {0, 2}, {2, 0}, {2, 2}};
  auto mu = make_cantor_measure(3, 2, alphabet, 3);
  REQUIRE(mu.count() == 64);
  double slope = testutil::box_count_slope(mu, {1.0 / 3, 1.0 / 9, 1.0 / 27});
  CHECK(slope == doctest::Approx(std::log(4.0) / std::log(3.0)).epsilon(1e-9));
}

TEST_CASE("cantor self-similarity is exact in integer coordinates") {
  const int M = 3, k = 3;
  const int64_t mk = 27;  // M^k
  auto mu_k = make_cantor_measure(M, 1, digits1d({0, 2}), k);
  auto mu_k1 = make_cantor_measure(M, 1, digits1d({0, 2}), k + 1);
  std::vector<int64_t> base;
  for (int64_t i = 0; i < mu_k.count(); ++i)
    base.push_back(llround(mu_k.atoms[i] * static_cast<double>(mk)));
  std::sort(base.begin(), base.end());
  // level-(k+1) atoms grouped by the most significant digit are shifted
  // copies of the level-k integer set
  std::map<int64_t, std::vector<int64_t>> groups;
  for (int64_t i = 0; i < mu_k1.count(); ++i) {
    int64_t v = llround(mu_k1.atoms[i] * static_cast<double>(mk * M));
    groups[v / mk].push_back(v % mk);
  }
  REQUIRE(groups.size() == 2);
  CHECK(groups.count(0) == 1);
  CHECK(groups.count(2) == 1);
  for (auto& [digit, vals] : groups) {
    std::sort(vals.begin(), vals.end());
    CHECK(vals == base);
  }
}

TEST_CASE("carpet measure") {
  auto l1 = make_carpet_measure(1);
  CHECK(l1.count() == 8);
  CHECK(l1.weights[0] == doctest::Approx(1.0 / 8));
  auto l2 = make_carpet_measure(2);
  CHECK(l2.count() == 64);
  auto l3 = make_carpet_measure(3);
  double slope = testutil::box_count_slope(l3, {1.0 / 3, 1.0 / 9, 1.0 / 27});
  CHECK(slope == doctest::Approx(std::log(8.0) / std::log(3.0)).epsilon(1e-9));
}

TEST_CASE("segment pair: orthogonal negative control") {
  auto pair = make_segment_pair(256);
  pair.x.validate(true);
  pair.y.validate(true);
  for (int64_t i = 0; i < pair.x.count(); ++i)
    CHECK(pair.x.atom(i)[1] == doctest::Approx(0.5));
  for (int64_t i = 0; i < pair.y.count(); ++i)
    CHECK(pair.y.atom(i)[0] == doctest::Approx(0.5));
  CHECK(pair.scale == doctest::Approx(10.0));

  // brute-force oracle: the dot-product mixed difference vanishes identically
  auto phase = standard_phase(2);
  double worst = 0.0;
  for (int64_t a = 0; a < pair.x.count(); a += 17)
    for (int64_t b = 0; b < pair.x.count(); b += 23)
      for (int64_t c = 0; c < pair.y.count(); c += 17)
        for (int64_t e = 0; e < pair.y.count(); e += 23) {
          double v = phase.eval(pair.x.atom(a), pair.y.atom(c)) -
                     phase.eval(pair.x.atom(b), pair.y.atom(c)) -
                     phase.eval(pair.x.atom(a), pair.y.atom(e)) +
                     phase.eval(pair.x.atom(b), pair.y.atom(e));
          worst = std::max(worst, std::abs(v));
        }
  CHECK(worst < 1e-15);

  CHECK(testutil::box_count_slope(pair.x, {1.0 / 4, 1.0 / 16, 1.0 / 64}) ==
        doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("standard phase") {
  auto p = standard_phase(2);
  std::vector<double> x{1, 0}, y{0, 1};
  CHECK(p.eval(x, y) == 0.0);
  x = {1, 2};
  y = {3, 4};
  CHECK(p.eval(x, y) == -11.0);
  double h[4];
  p.hessian(x, y, h);
  CHECK(h[0] == -1.0);
  CHECK(h[1] == 0.0);
  CHECK(h[2] == 0.0);
  CHECK(h[3] == -1.0);
  CHECK(phase_consistency_error(p, 100) < 1e-8);
}

TEST_CASE("finite-difference hessian fallback") {
  auto phi = [](std::span<const double> x, std::span<const double> y) {
    return std::sin(x[0]) * std::cos(y[0]) + x[0] * y[0];
  };
  auto p = phase_from_phi(phi, 1, 2.0, 2.0);
  CHECK(phase_consistency_error(p, 50) < 1e-5);
  std::vector<double> x{0.3}, y{0.2};
  double h;
  p.hessian(x, y, &h);
  CHECK(h == doctest::Approx(-std::cos(0.3) * std::sin(0.2) + 1.0).epsilon(1e-5));
}

TEST_CASE("json round trip is bit-exact") {
  auto mu = make_cantor_measure(3, 2, {{0, 0}, {2, 1}}, 3);
  auto text = measure_to_json(mu);
  auto back = measure_from_json(text);
  REQUIRE(back.count() == mu.count());
  CHECK(std::memcmp(back.atoms.data(), mu.atoms.data(),
                    mu.atoms.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(back.weights.data(), mu.weights.data(),
                    mu.weights.size() * sizeof(double)) == 0);
  CHECK(back.scale_floor == mu.scale_floor);
}

TEST_CASE("generator errors") {
  CHECK_THROWS_AS(make_cantor_measure(3, 1, {}, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_cantor_measure(3, 1, digits1d({0, 2}), 40), BudgetError);
  CHECK_THROWS_AS(make_carpet_measure(0), std::invalid_argument);
}
