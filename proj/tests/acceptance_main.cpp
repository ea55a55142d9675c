// Acceptance suite: one pass/fail line per criterion, exit code = failures.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "fuplab/cantor.hpp"
#include "fuplab/dolgopyat.hpp"
#include "fuplab/fio.hpp"
#include "fuplab/io.hpp"
#include "fuplab/regularity.hpp"
#include "fuplab/schottky.hpp"
#include "fuplab/tiles.hpp"

using namespace fuplab;
namespace fs = std::filesystem;

namespace {

const double kDelta3 = std::log(2.0) / std::log(3.0);
int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  if (!pass) ++g_failures;
  std::ostringstream os;
  os << "criterion " << (id < 10 ? "0" : "") << id << " "
     << (pass ? "PASS" : "FAIL") << "  " << name;
  if (!detail.empty()) os << "  (" << detail << ")";
  os << "  [" << std::fixed;
  os.precision(1);
  os << seconds << "s]";
  std::cout << os.str() << std::endl;
}

template <typename F>
void criterion(int id, const std::string& name, F&& body) {
  auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(id, name, pass, detail, secs);
}

std::vector<std::vector<std::vector<int>>> small_alphabets(int M, int d) {
  // all nonempty subsets of {0..M-1}^d with at most 3 digits
  std::vector<std::vector<int>> cells;
  std::vector<int> cur(d, 0);
  for (;;) {
    cells.push_back(cur);
    int c = 0;
    while (c < d && ++cur[c] == M) {
      cur[c] = 0;
      ++c;
    }
    if (c == d) break;
  }
  std::vector<std::vector<std::vector<int>>> out;
  const int n = static_cast<int>(cells.size());
  for (int i = 0; i < n; ++i) out.push_back({cells[i]});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back({cells[i], cells[j]});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) out.push_back({cells[i], cells[j], cells[k]});
  return out;
}

FractalMeasure random_cloud(int n, int dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  FractalMeasure mu;
  mu.dim = dim;
  for (int i = 0; i < n * dim; ++i) mu.atoms.push_back(unif(rng));
  mu.weights.assign(n, 1.0 / n);
  mu.scale_floor = 1e-10;
  mu.bounding_box = Box(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
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

std::vector<Disk> figure_disks() {
  return {{cdouble(0.0, 5.2), 1.0},
          {cdouble(-3.0, 0.0), 1.0},
          {cdouble(3.0, 0.0), 1.0},
          {cdouble(0.0, 1.732), 1.0}};
}

// --- criteria -------------------------------------------------------------

bool hs_identity(std::string& detail) {
  double worst = 0.0;
  for (int d = 1; d <= 2; ++d)
    for (int M = 3; M <= 5; ++M) {
      auto alphabets = small_alphabets(M, d);
      const int64_t na = static_cast<int64_t>(alphabets.size());
      std::vector<double> worst_a(static_cast<size_t>(na), 0.0);
#pragma omp parallel for schedule(dynamic, 4)
      for (int64_t ia = 0; ia < na; ++ia) {
        double local = 0.0;
        for (int64_t ib = 0; ib < na; ++ib)
          for (int k = 1; k <= 3; ++k) {
            CantorSpec s;
            s.M = M;
            s.d = d;
            s.A = alphabets[static_cast<size_t>(ia)];
            s.B = alphabets[static_cast<size_t>(ib)];
            s.k = k;
            double hs = fup_hs_norm(s);
            double expect = std::sqrt(
                std::pow(static_cast<double>(s.A.size()) * s.B.size(), k) /
                std::pow(static_cast<double>(s.N()), d));
            local = std::max(local, std::abs(hs - expect));
          }
        worst_a[static_cast<size_t>(ia)] = local;
      }
      for (double w : worst_a) worst = std::max(worst, w);
    }
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << "worst deviation " << worst;
  detail = os.str();
  return worst <= 1e-10;
}

bool submultiplicativity(std::string& detail) {
  double worst_slack = 1e300;
  int64_t checked = 0;
  for (int M = 3; M <= 4; ++M) {
    auto alphabets = small_alphabets(M, 1);
    // all nonempty subsets (sizes up to M)
    std::vector<std::vector<std::vector<int>>> all;
    for (int mask = 1; mask < (1 << M); ++mask) {
      std::vector<std::vector<int>> a;
      for (int b = 0; b < M; ++b)
        if (mask & (1 << b)) a.push_back({b});
      all.push_back(std::move(a));
    }
    for (const auto& A : all)
      for (const auto& B : all) {
        CantorSpec s;
        s.M = M;
        s.d = 1;
        s.A = A;
        s.B = B;
        s.k = 1;
        double r[5];
        for (int k = 1; k <= 4; ++k) r[k] = fup_norm(s.with_k(k)).r;
        for (int k1 = 1; k1 <= 3; ++k1)
          for (int k2 = 1; k1 + k2 <= 4; ++k2) {
            double slack = r[k1] * r[k2] - r[k1 + k2];
            worst_slack = std::min(worst_slack, slack);
            ++checked;
          }
      }
  }
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << checked << " triples, worst slack " << worst_slack;
  detail = os.str();
  return worst_slack >= -1e-9;
}

bool orthogonality_degeneracy(std::string& detail) {
  CantorSpec deg;
  deg.M = 4;
  deg.d = 1;
  deg.A = digits1d({0, 2});
  deg.B = deg.A;
  deg.k = 1;
  bool r_all_one = true;
  std::ostringstream os;
  os.precision(6);
  os << "M=4 r_k = ";
  for (int k = 1; k <= 4; ++k) {
    double r = fup_norm(deg.with_k(k)).r;
    os << r << (k < 4 ? "," : "");
    if (std::abs(r - 1.0) > 1e-9) r_all_one = false;
  }
  bool minor_deg = !minor_test(deg).first;

  CantorSpec mid;
  mid.M = 3;
  mid.d = 1;
  mid.A = digits1d({0, 2});
  mid.B = mid.A;
  mid.k = 1;
  bool minor_mid = minor_test(mid).first;
  bool gains_pos = true;
  for (const auto& row : exponent_sweep(mid, 4))
    if (!(row.gain > 0.0)) gains_pos = false;

  os << "; minor(M=4)=" << (minor_deg ? "false" : "true")
     << " minor(M=3)=" << (minor_mid ? "true" : "false")
     << " gains(M=3)>0=" << (gains_pos ? "yes" : "no");
  if (!r_all_one)
    os << "; r_k=1 clause unattainable for k>=2 under the cyclic-group DFT, see "
          "ledger";
  detail = os.str();
  return r_all_one && minor_deg && minor_mid && gains_pos;
}

bool discretization_invariants(std::string& detail) {
  int64_t failed_clouds = 0;
  for (int i = 0; i < 100; ++i) {
    int dim = (i % 2) + 1;
    auto mu = random_cloud(50, dim, 1000 + static_cast<unsigned>(i));
    auto tree = perturbed_discretization(mu, 1000, 2);
    auto rep = check_tree(tree);
    if (!rep.all_pass) ++failed_clouds;
  }
  detail = std::to_string(100 - failed_clouds) + "/100 clouds pass all invariants";
  return failed_clouds == 0;
}

bool geometric_mvt(std::string& detail) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  auto dot2 = standard_phase(2);
  Phase sinp = standard_phase(1);
  sinp.phi = [](std::span<const double> x, std::span<const double> y) {
    return std::sin(x[0]) * std::cos(y[0]) + x[0] * y[0];
  };
  sinp.mixed_hessian = [](std::span<const double> x, std::span<const double> y,
                          double* out) {
    out[0] = -std::cos(x[0]) * std::sin(y[0]) + 1.0;
  };
  sinp.c0_bound = 2.0;
  sinp.c1_bound = 2.0;

  double worst_err = 0.0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x0{unif(rng), unif(rng)}, x1{unif(rng), unif(rng)};
    std::vector<double> y0{unif(rng), unif(rng)}, y1{unif(rng), unif(rng)};
    if (dist2(x0, x1) < 1e-3 || dist2(y0, y1) < 1e-3) continue;
    worst_err = std::max(worst_err, verify_geometric_mvt(dot2, x0, x1, y0, y1, 24).error);
  }
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x0{unif(rng)}, x1{unif(rng)}, y0{unif(rng)}, y1{unif(rng)};
    if (std::abs(x0[0] - x1[0]) < 1e-3 || std::abs(y0[0] - y1[0]) < 1e-3) continue;
    worst_err = std::max(worst_err, verify_geometric_mvt(sinp, x0, x1, y0, y1, 32).error);
  }

  std::uniform_real_distribution<double> pos(0.0, 0.45);
  double worst_slack = 1e300;
  int pairs = 0;
  while (pairs < 500) {
    PhaseRectangle a{{pos(rng)}, {pos(rng) + 0.5}, {pos(rng)}, {pos(rng) + 0.5}};
    PhaseRectangle b = a;
    b.x0[0] += pos(rng) * 0.2;
    b.x1[0] -= pos(rng) * 0.2;
    b.y0[0] += pos(rng) * 0.2;
    b.y1[0] -= pos(rng) * 0.2;
    auto rep = verify_mvt_difference_bound(sinp, a, b);
    worst_slack = std::min(worst_slack, rep.slack);
    ++pairs;
  }
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << "worst error " << worst_err << ", worst slack "
     << worst_slack;
  detail = os.str();
  return worst_err <= 1e-8 && worst_slack >= -1e-9;
}

bool constants_exact(std::string& detail) {
  auto k = compute_constants(1.0, 2.0, 2.0, 1, 1.0);
  bool ok = k.L == 1e14 && k.theta == 0.125 && std::isfinite(k.log_epsilon0) &&
            k.ceil_log2_20L53 == 82;
  auto half = compute_constants(0.5, 2.0, 2.0, 1, 1.0);
  auto quarter = compute_constants(0.25, 2.0, 2.0, 1, 1.0);
  ok = ok && half.L == 8.0 * k.L && quarter.L == 64.0 * k.L;
  std::ostringstream os;
  os.precision(6);
  os << "L=" << k.L << " theta=" << k.theta << " ceil=" << k.ceil_log2_20L53
     << " log(1/eps0)=" << -k.log_epsilon0;
  detail = os.str();
  return ok;
}

bool child_quadruples(std::string& detail) {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), 19);
  auto tree = perturbed_discretization(mu, 1000, 2);
  auto phase = standard_phase(1);

  // measured nonorthogonality constant feeds the certification
  auto small = make_cantor_measure(3, 1, digits1d({0, 2}), 6);
  ScaleRange r{std::pow(3.0, -4), 0.5};
  double c_N = std::min(1.0, estimate_nonorthogonality(small, small, phase, r, r).value);

  int64_t admissible = 0, certified = 0, skipped = 0;
  for (int n = 0; n <= 2; ++n)
    for (int m = 0; m + n <= 2; ++m) {
      for (size_t ii = 0; ii < tree.levels[n].size(); ++ii)
        for (size_t jj = 0; jj < tree.levels[m].size(); ++jj) {
          if (tree.levels[n][ii].children.size() < 2 ||
              tree.levels[m][jj].children.size() < 2) {
            ++skipped;
            continue;
          }
          ++admissible;
          auto q = select_child_quadruple(tree, tree, n, static_cast<int>(ii), m,
                                          static_cast<int>(jj), phase, c_N);
          if (q.certified) ++certified;
        }
    }

  auto seg = make_segment_pair(4097);
  auto tx = standard_discretization(seg.x, 1000, 1);
  auto ty = standard_discretization(seg.y, 1000, 1);
  auto qs = select_child_quadruple(tx, ty, 0, 0, 0, 0, standard_phase(2), c_N);
  bool seg_fails_low = !qs.certified && qs.failure == "lower_bound";

  std::ostringstream os;
  os.precision(4);
  os << "c_N=" << c_N << ", certified " << certified << "/" << admissible
     << " pairs (n+m<=2, " << skipped << " with <2 children skipped), segments: "
     << (seg_fails_low ? "lower-bound failure" : qs.failure);
  detail = os.str();
  return certified == admissible && admissible > 0 && seg_fails_low;
}

bool contraction(std::string& detail) {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), 13);
  auto tree = perturbed_discretization(mu, 1000, 1);
  auto phase = standard_phase(1);
  auto constants = compute_constants(0.1, 4.0, 4.0, 1, 1.0);
  const double h = std::pow(3.0, -8);
  std::vector<cdouble> f(mu.count(), cdouble(1.0));

  // every (I, J) with n + m + 1 = K must show a positive gap
  const int K = static_cast<int>(std::floor(-std::log(h) / std::log(1000.0)));
  double min_gap = 1e300;
  int64_t pairs = 0;
  for (int m = 0; m < K; ++m) {
    int n = K - 1 - m;
    for (size_t ii = 0; ii < tree.levels[n].size(); ++ii)
      for (size_t jj = 0; jj < tree.levels[m].size(); ++jj) {
        auto rep = contraction_step(tree, tree, phase, h, n, static_cast<int>(ii), m,
                                    static_cast<int>(jj), f, constants);
        if (rep.degenerate) continue;
        min_gap = std::min(min_gap, rep.gap);
        ++pairs;
      }
  }

  auto res = iterate_contraction(tree, tree, phase, h, f, constants);
  auto op = build_fio(mu, mu, phase, h);
  double image2 = 0.0;
  for (int64_t i = 0; i < op.kernel.rows; ++i) {
    cdouble acc(0.0);
    for (int64_t j = 0; j < op.kernel.cols; ++j) acc += op.kernel.at(i, j);
    image2 += mu.weights[static_cast<size_t>(i)] * std::norm(acc);
  }
  double direct = std::sqrt(image2);

  std::ostringstream os;
  os.precision(4);
  os << "min gap " << min_gap << " over " << pairs << " pairs, bound " << res.bound
     << " vs direct " << direct;
  detail = os.str();
  return pairs > 0 && min_gap > 0.0 && direct <= res.bound * (1.0 + 1e-6);
}

bool negative_control(std::string& detail) {
  auto pair = original_segments(4096);
  std::vector<double> hs{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
  double min_rayleigh = 1e300;
  for (double h : hs) {
    auto witness = [h](std::span<const double> x) {
      return cdouble(std::exp(-x[0] * x[0] / (2.0 * h * h) - x[1] * x[1] / 2.0));
    };
    min_rayleigh =
        std::min(min_rayleigh, fup_grid_rayleigh(pair.x, pair.y, h, h / 4.0, witness));
  }
  auto sweep = norm_sweep(
      [&](double h) { return fup_grid_norm(pair.x, pair.y, h, h / 4.0).norm; }, hs,
      0.0);
  std::ostringstream os;
  os.precision(4);
  os << "min rayleigh " << min_rayleigh << ", fitted slope " << sweep.fitted_slope;
  detail = os.str();
  return min_rayleigh >= 0.5 && sweep.fitted_slope <= 0.05;
}

bool decay_with_gain(std::string& detail) {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), 9);
  std::vector<double> hs;
  for (int k = 4; k <= 8; ++k) hs.push_back(std::pow(3.0, -k));
  const double baseline = std::max(0.0, 0.5 * (1.0 - 2.0 * kDelta3));
  auto sweep = norm_sweep(
      [&](double h) { return fup_grid_norm(mu, mu, h, h / 4.0).norm; }, hs, baseline);
  std::ostringstream os;
  os.precision(4);
  os << "fitted slope " << sweep.fitted_slope << ", baseline " << baseline
     << ", margin " << sweep.gain;
  detail = os.str();
  return sweep.gain > 0.0;
}

bool thickening(std::string& detail) {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), 6);
  const double h = std::pow(3.0, -6);
  auto phase = standard_phase(1);

  auto cr_x = estimate_regularity(mu, ScaleRange{h, 1.0}, kDelta3);
  auto th = thicken(mu, h, kDelta3);
  auto cr_th = estimate_regularity(th, ScaleRange{2.0 * h, 1.0}, kDelta3);
  double cr_bound = std::pow(6.0, kDelta3) * 2.0 * cr_x.value * cr_x.value;

  ScaleRange base{2.0 * h, 0.5};
  auto direct = estimate_nonorthogonality(mu, mu, phase, base, base);
  auto thick = estimate_nonorthogonality(th, th, phase, base, base);

  std::ostringstream os;
  os.precision(4);
  os << "C_R(X)=" << cr_x.value << " C_R(X_h)=" << cr_th.value << " bound "
     << cr_bound << "; c_N=" << direct.value << " thick " << thick.value
     << " needs >= " << direct.value / 4.0 * 0.9;
  detail = os.str();
  return cr_th.value <= cr_bound && thick.value >= direct.value / 4.0 * 0.9;
}

bool schottky(std::string& detail) {
  auto group = make_schottky(figure_disks());
  double map_err = group.mapping_error();

  bool nested = true;
  for (int n = 2; n <= 6; ++n) {
    auto level = iterate_disks(group, n);
    auto prev = iterate_disks(group, n - 1);
    std::map<std::vector<int>, Disk> by_word;
    for (const auto& wd : prev) by_word[wd.word] = wd.disk;
    for (const auto& wd : level) {
      std::vector<int> prefix(wd.word.begin(), wd.word.end() - 1);
      const Disk& parent = by_word.at(prefix);
      if (!(std::abs(wd.disk.center - parent.center) + wd.disk.radius <
            parent.radius))
        nested = false;
    }
  }

  auto margin = circle_margin(figure_disks());
  auto mu8 = sample_limit_set(group, 8);
  auto c0 = nonconcentration_constant(mu8, {0.1, 0.05}, 32);

  auto slope = [&](int depth) {
    auto m = sample_limit_set(group, depth);
    std::map<std::pair<int64_t, int64_t>, int> cells;
    double slopes[2];
    int idx = 0;
    for (double r : {1.0 / 16, 1.0 / 64}) {
      cells.clear();
      for (int64_t i = 0; i < m.count(); ++i)
        cells[{static_cast<int64_t>(std::floor(m.atom(i)[0] / r)),
               static_cast<int64_t>(std::floor(m.atom(i)[1] / r))}] = 1;
      slopes[idx++] = std::log(static_cast<double>(cells.size()));
    }
    return (slopes[1] - slopes[0]) / std::log(4.0);
  };
  double d7 = slope(7), d8 = slope(8);

  std::ostringstream os;
  os.precision(4);
  os << "map err " << std::scientific << map_err << std::defaultfloat
     << ", margin " << margin.margin << ", c0 " << c0.value << ", dim " << d7 << "/"
     << d8;
  detail = os.str();
  return map_err <= 1e-9 && nested && margin.margin > 0.0 && c0.value > 0.0 &&
         d8 > 0.0 && d8 < 2.0 && std::abs(d8 - d7) <= 0.05;
}

bool conversion_identity(std::string& detail) {
  auto mu = make_cantor_measure(3, 1, digits1d({0, 2}), 7);
  const double h = std::pow(3.0, -6);
  auto th = thicken(mu, h, kDelta3, 1 << 14);
  double grid = fup_grid_norm(mu, mu, h, h / 4.0).norm;
  double fio = operator_norm(build_fio(th, th, standard_phase(1), h));
  const double factor_spec =
      std::pow(h, 0.5 - kDelta3) * std::pow(2.0 * std::numbers::pi, -0.5 * kDelta3);
  const double factor_dim =
      std::pow(h, 0.5 - kDelta3) * std::pow(2.0 * std::numbers::pi, -0.5);
  double rel_spec = std::abs(grid - factor_spec * fio) / grid;
  double rel_dim = std::abs(grid - factor_dim * fio) / grid;
  std::ostringstream os;
  os.precision(4);
  os << "grid " << grid << ", (2pi)^{-delta/2} conversion off by "
     << rel_spec * 100.0 << "%; diagnostic (2pi)^{-d/2} off by " << rel_dim * 100.0
     << "% (paper-constant defect, see ledger)";
  detail = os.str();
  return rel_spec <= 0.10;
}

bool reproducibility(std::string& detail) {
  const char* bin = std::getenv("FUP_LAB_BIN");
  if (!bin) {
    detail = "FUP_LAB_BIN not set";
    return false;
  }
  auto dir1 = fs::temp_directory_path() / "fup_accept_r1";
  auto dir2 = fs::temp_directory_path() / "fup_accept_r2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);

  std::vector<std::pair<std::string, std::vector<std::string>>> runs = {
      {"cantor --M 3 --A 0,2 --kmax 4", {"cantor_sweep.csv", "minor_test.json"}},
      {"estimate --what regularity --M 3 --A 0,2 --k 6 --alpha 0.005",
       {"estimate.json", "per_scale.csv"}},
      {"schottky --depth 5 --sample-depth 7", {"disks.json", "schottky.json"}},
  };
  for (size_t i = 0; i < runs.size(); ++i) {
    auto d1 = dir1 / std::to_string(i);
    auto d2 = dir2 / std::to_string(i);
    std::string c1 = std::string(bin) + " --output-dir " + d1.string() + " " +
                     runs[i].first + " >/dev/null 2>&1";
    if (std::system(c1.c_str()) != 0) {
      detail = "run failed: " + runs[i].first;
      return false;
    }
    std::string c2 = std::string(bin) + " --output-dir " + d2.string() + " run " +
                     (d1 / "manifest.json").string() + " >/dev/null 2>&1";
    if (std::system(c2.c_str()) != 0) {
      detail = "manifest rerun failed: " + runs[i].first;
      return false;
    }
    for (const auto& name : runs[i].second)
      if (read_file((d1 / name).string()) != read_file((d2 / name).string())) {
        detail = "artifact differs: " + name;
        return false;
      }
  }
  detail = "3 manifests, all artifacts bit-identical";
  return true;
}

}  // namespace

int main() {
  std::cout << "fup-lab acceptance suite" << std::endl;
  criterion(1, "hilbert-schmidt identity", hs_identity);
  criterion(2, "submultiplicativity", submultiplicativity);
  criterion(3, "orthogonality degeneracy", orthogonality_degeneracy);
  criterion(4, "discretization invariants", discretization_invariants);
  criterion(5, "geometric mean value bounds", geometric_mvt);
  criterion(6, "explicit constants", constants_exact);
  criterion(7, "child quadruples", child_quadruples);
  criterion(8, "contraction", contraction);
  criterion(9, "negative control", negative_control);
  criterion(10, "decay with gain", decay_with_gain);
  criterion(11, "thickening", thickening);
  criterion(12, "schottky", schottky);
  criterion(13, "conversion identity", conversion_identity);
  criterion(14, "reproducibility", reproducibility);
  std::cout << (g_failures == 0 ? "all criteria pass"
                                : std::to_string(g_failures) + " criteria fail")
            << std::endl;
  return g_failures;
}
