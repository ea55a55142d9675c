#include "fuplab/dolgopyat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fuplab/parallel.hpp"
#include "json.hpp"

namespace fuplab {

DolgopyatConstants compute_constants(double c_N, double C_D_X, double C_D_Y, int d,
                                     double hessian_c1, double hessian_c0) {
  if (!(c_N > 0.0) || c_N > 1.0)
    throw std::invalid_argument("compute_constants: need 0 < c_N <= 1");
  if (C_D_X < 1.0 || C_D_Y < 1.0)
    throw std::invalid_argument("compute_constants: doubling constants < 1");
  if (d < 1) throw std::invalid_argument("compute_constants: d < 1");
  if (hessian_c0 < 0.0) hessian_c0 = hessian_c1;

  DolgopyatConstants k;
  k.c_N = c_N;
  k.C_D_X = C_D_X;
  k.C_D_Y = C_D_Y;
  k.d = d;
  k.hessian_c1 = hessian_c1;
  k.hessian_c0 = hessian_c0;

  const double d3 = static_cast<double>(d) * d * d;
  const double b3 = std::max(1.0, hessian_c1 * hessian_c1 * hessian_c1);
  k.L = 1e14 * d3 * b3 / (c_N * c_N * c_N);
  k.log_L = std::log(1e14) + 3.0 * std::log(static_cast<double>(d)) +
            std::log(b3) - 3.0 * std::log(c_N);
  k.theta = 1.0 / (8.0 * std::max(1.0, hessian_c0));

  // ceil(log2(20 L^{5/3})) in log space
  const double log2_arg = (std::log(20.0) + (5.0 / 3.0) * k.log_L) / std::log(2.0);
  k.ceil_log2_20L53 = static_cast<long long>(std::ceil(log2_arg - 1e-12));
  if (static_cast<double>(k.ceil_log2_20L53) < log2_arg)
    k.ceil_log2_20L53 += 1;

  k.log_rho_lower = -2.0 * static_cast<double>(k.ceil_log2_20L53) *
                    (std::log(C_D_X) + std::log(C_D_Y));
  k.log_epsilon1 = 2.0 * k.log_rho_lower + 2.0 * std::log(c_N) - std::log(1e9) -
                   2.0 * std::log(static_cast<double>(d)) - (2.0 / 3.0) * k.log_L;
  k.log_epsilon0 = k.log_epsilon1 - std::log(6.0 * k.log_L);

  k.rho_lower = std::exp(k.log_rho_lower);
  k.epsilon1 = std::exp(k.log_epsilon1);
  k.epsilon0 = std::exp(k.log_epsilon0);
  return k;
}

std::string DolgopyatConstants::to_json() const {
  nlohmann::json j;
  j["inputs"] = {{"c_N", c_N},
                 {"C_D_X", C_D_X},
                 {"C_D_Y", C_D_Y},
                 {"d", d},
                 {"hessian_c1", hessian_c1},
                 {"hessian_c0", hessian_c0}};
  j["L"] = L;
  j["log_L"] = log_L;
  j["theta"] = theta;
  j["ceil_log2_20L53"] = ceil_log2_20L53;
  j["log_rho_lower"] = log_rho_lower;
  j["log_epsilon1"] = log_epsilon1;
  j["log_epsilon0"] = log_epsilon0;
  j["rho_lower"] = rho_lower;
  j["epsilon1"] = epsilon1;
  j["epsilon0"] = epsilon0;
  return j.dump(2);
}

namespace {

// representative points of a child tile: first atom plus coordinate extremes
// over a strided subsample (the search only needs spread-out candidates)
std::vector<int64_t> representative_atoms(const Tile& t, const FractalMeasure& mu) {
  std::vector<int64_t> reps;
  if (t.atom_ids.empty()) return reps;
  const int d = mu.dim;
  const int64_t n = static_cast<int64_t>(t.atom_ids.size());
  const int64_t cap = 256;
  auto at = [&](int64_t j) { return t.atom_ids[static_cast<size_t>(j)]; };
  std::vector<int64_t> lo(d, at(0)), hi(d, at(0));
  const int64_t count = std::min(n, cap);
  for (int64_t j = 0; j < count; ++j) {
    int64_t id = at(n <= cap ? j : j * (n - 1) / (cap - 1));
    auto x = mu.atom(id);
    for (int c = 0; c < d; ++c) {
      if (x[c] < mu.atom(lo[c])[c]) lo[c] = id;
      if (x[c] > mu.atom(hi[c])[c]) hi[c] = id;
    }
  }
  reps.push_back(at(0));
  for (int c = 0; c < d; ++c) {
    reps.push_back(lo[c]);
    reps.push_back(hi[c]);
  }
  std::sort(reps.begin(), reps.end());
  reps.erase(std::unique(reps.begin(), reps.end()), reps.end());
  return reps;
}

struct SidePair {
  int a = 0, ap = 0;          // child indices
  int64_t pa = 0, pap = 0;    // atom ids
  double sep = 0.0;
};

// admissible point pairs across distinct children: even spacing (3.5) and the
// line-segment condition (3.6) via the pair bounding box
std::vector<SidePair> admissible_pairs(const TileTree& tree, const Tile& parent,
                                       int child_level, double sep_cap) {
  const FractalMeasure& mu = tree.source;
  std::vector<SidePair> out;
  const auto& kids = parent.children;
  std::vector<std::vector<int64_t>> reps(kids.size());
  for (size_t i = 0; i < kids.size(); ++i)
    reps[i] = representative_atoms(tree.levels[child_level][kids[i]], mu);

  std::vector<std::vector<bool>> segment_ok(kids.size());
  for (size_t i = 0; i < kids.size(); ++i) segment_ok[i].assign(kids.size(), false);
  for (size_t i = 0; i < kids.size(); ++i)
    for (size_t j = i + 1; j < kids.size(); ++j) {
      const Tile& ca = tree.levels[child_level][kids[i]];
      const Tile& cb = tree.levels[child_level][kids[j]];
      Box bba = ca.geometry.bounding_box(), bbb = cb.geometry.bounding_box();
      Box hull = bba;
      for (int c = 0; c < hull.dim(); ++c) {
        hull.lo[c] = std::min(hull.lo[c], bbb.lo[c]);
        hull.hi[c] = std::max(hull.hi[c], bbb.hi[c]);
      }
      Region hull_region(hull);
      double missing = hull_region.difference_volume(parent.geometry);
      segment_ok[i][j] =
          missing <= 1e-9 * std::max(hull.volume(), 1e-300);
    }

  for (size_t i = 0; i < kids.size(); ++i)
    for (size_t j = i + 1; j < kids.size(); ++j) {
      if (!segment_ok[i][j]) continue;
      for (int64_t pa : reps[i])
        for (int64_t pb : reps[j]) {
          double sep = dist2(mu.atom(pa), mu.atom(pb));
          if (sep <= sep_cap && sep > 0.0)
            out.push_back({static_cast<int>(i), static_cast<int>(j), pa, pb, sep});
        }
    }
  std::sort(out.begin(), out.end(), [](const SidePair& a, const SidePair& b) {
    if (a.sep != b.sep) return a.sep > b.sep;
    if (a.pa != b.pa) return a.pa < b.pa;
    return a.pap < b.pap;
  });
  return out;
}

}  // namespace

ChildQuadruple select_child_quadruple(const TileTree& tree_x, const TileTree& tree_y,
                                      int level_i, int idx_i, int level_j, int idx_j,
                                      const Phase& phase, double c_N) {
  const Tile& I = tree_x.levels[level_i][idx_i];
  const Tile& J = tree_y.levels[level_j][idx_j];
  if (I.children.size() < 2 || J.children.size() < 2)
    throw std::invalid_argument("select_child_quadruple: fewer than two children");
  const double Ld = static_cast<double>(tree_x.L);
  const int n = level_i, m = level_j;

  ChildQuadruple q;
  q.lower = c_N / 1000.0;
  q.upper = phase.c0_bound / 20.0;

  const double cap_x = 0.5 * std::pow(Ld, -(n + 2.0 / 3.0));
  const double cap_y = 0.5 * std::pow(Ld, -(m + 2.0 / 3.0));
  auto xs = admissible_pairs(tree_x, I, level_i + 1, cap_x);
  auto ys = admissible_pairs(tree_y, J, level_j + 1, cap_y);
  if (xs.empty() || ys.empty()) {
    q.failure = "lower_bound";
    q.best_value = 0.0;
    return q;
  }

  const double scale = std::pow(Ld, n + m + 4.0 / 3.0);
  // evaluate an even-rank subsample across the separation range, so both
  // large and small mixed differences are represented
  const size_t cap_side = 192;
  auto stride_select = [cap_side](std::vector<SidePair>& v) {
    if (v.size() <= cap_side) return;
    std::vector<SidePair> kept;
    kept.reserve(cap_side);
    for (size_t t = 0; t < cap_side; ++t)
      kept.push_back(v[t * (v.size() - 1) / (cap_side - 1)]);
    v.swap(kept);
  };
  stride_select(xs);
  stride_select(ys);
  const size_t nx = xs.size(), ny = ys.size();

  const FractalMeasure& mx = tree_x.source;
  const FractalMeasure& my = tree_y.source;

  double best_ok = -1.0, best_any = -1.0;
  size_t arg_ok_x = 0, arg_ok_y = 0;

  std::vector<double> vals(nx * ny);
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int64_t xi = 0; xi < static_cast<int64_t>(nx); ++xi) {
    const SidePair& px = xs[static_cast<size_t>(xi)];
    auto xa = mx.atom(px.pa);
    auto xap = mx.atom(px.pap);
    for (size_t yi = 0; yi < ny; ++yi) {
      const SidePair& py = ys[yi];
      auto yb = my.atom(py.pa);
      auto ybp = my.atom(py.pap);
      double mixed = phase.eval(xa, yb) - phase.eval(xap, yb) - phase.eval(xa, ybp) +
                     phase.eval(xap, ybp);
      vals[static_cast<size_t>(xi) * ny + yi] = scale * std::abs(mixed);
    }
  }
  for (size_t xi = 0; xi < nx; ++xi)
    for (size_t yi = 0; yi < ny; ++yi) {
      double v = vals[xi * ny + yi];
      best_any = std::max(best_any, v);
      if (v <= q.upper && v > best_ok) {
        best_ok = v;
        arg_ok_x = xi;
        arg_ok_y = yi;
      }
    }

  if (best_ok < 0.0) {
    q.failure = "upper_bound";
    q.best_value = best_any;
    return q;
  }
  q.best_value = best_ok;
  if (best_ok < q.lower) {
    q.failure = "lower_bound";
    return q;
  }

  const SidePair& px = xs[arg_ok_x];
  const SidePair& py = ys[arg_ok_y];
  q.child_a = I.children[px.a];
  q.child_ap = I.children[px.ap];
  q.child_b = J.children[py.a];
  q.child_bp = J.children[py.ap];
  auto fill = [](std::vector<double>& dst, std::span<const double> src) {
    dst.assign(src.begin(), src.end());
  };
  fill(q.x_a, mx.atom(px.pa));
  fill(q.x_ap, mx.atom(px.pap));
  fill(q.y_b, my.atom(py.pa));
  fill(q.y_bp, my.atom(py.pap));
  q.omega_ab = phase.eval(q.x_a, q.y_b);
  q.omega_apb = phase.eval(q.x_ap, q.y_b);
  q.omega_abp = phase.eval(q.x_a, q.y_bp);
  q.omega_apbp = phase.eval(q.x_ap, q.y_bp);
  q.rcs_value = best_ok;
  q.sep_x = px.sep;
  q.sep_y = py.sep;
  q.certified = true;
  return q;
}

QuadrupleProbability probability_of_quadruple(const TileTree& tree_x,
                                              const TileTree& tree_y, int level_i,
                                              int idx_i, int level_j, int idx_j,
                                              const ChildQuadruple& q,
                                              const DolgopyatConstants& constants) {
  const Tile& I = tree_x.levels[level_i][idx_i];
  const Tile& J = tree_y.levels[level_j][idx_j];
  if (!(I.measure > 0.0) || !(J.measure > 0.0))
    throw std::invalid_argument("probability_of_quadruple: zero parent measure");
  auto pr = [](const TileTree& tree, int level, int child_idx, double parent_mass) {
    return tree.levels[level][child_idx].measure / parent_mass;
  };
  QuadrupleProbability out;
  double pa = pr(tree_x, level_i + 1, q.child_a, I.measure);
  double pap = pr(tree_x, level_i + 1, q.child_ap, I.measure);
  double pb = pr(tree_y, level_j + 1, q.child_b, J.measure);
  double pbp = pr(tree_y, level_j + 1, q.child_bp, J.measure);
  out.rho_emp = pa * pap * pb * pbp;
  out.log_rho_emp = out.rho_emp > 0.0 ? std::log(pa) + std::log(pap) + std::log(pb) +
                                            std::log(pbp)
                                      : -std::numeric_limits<double>::infinity();
  out.log_rho_bound = constants.log_rho_lower;
  out.satisfied = out.log_rho_emp >= out.log_rho_bound;
  return out;
}

CThetaValue c_theta_norm(const TileFunction& f, const Tile& tile,
                         const FractalMeasure& mu, double theta, int grid_per_axis) {
  const int d = mu.dim;
  std::vector<std::vector<double>> samples;
  for (int64_t id : tile.atom_ids) {
    auto x = mu.atom(id);
    samples.emplace_back(x.begin(), x.end());
  }
  for (const auto& b : tile.geometry.boxes()) {
    std::vector<int> idx(d, 0);
    for (;;) {
      std::vector<double> p(d);
      for (int c = 0; c < d; ++c) {
        double t = grid_per_axis == 1
                       ? 0.5
                       : static_cast<double>(idx[c]) / (grid_per_axis - 1);
        // nudged inside so finite-difference stencils stay in the closure
        p[c] = b.lo[c] + (0.02 + 0.96 * t) * (b.hi[c] - b.lo[c]);
      }
      samples.push_back(std::move(p));
      int c = 0;
      while (c < d && ++idx[c] == grid_per_axis) {
        idx[c] = 0;
        ++c;
      }
      if (c == d) break;
    }
  }
  if (samples.empty()) throw std::invalid_argument("c_theta_norm: empty sample set");

  const double diam = tile.geometry.boxes().size() <= 64
                          ? tile.geometry.diam()
                          : tile.geometry.bounding_box().diam();
  const double step = 1e-4 * std::max(diam, 1e-300);

  const int64_t ns = static_cast<int64_t>(samples.size());
  std::vector<double> sup_vals(static_cast<size_t>(ns)), grad_vals(static_cast<size_t>(ns));
#pragma omp parallel for schedule(dynamic, 16) num_threads(max_threads())
  for (int64_t s = 0; s < ns; ++s) {
    const auto& p = samples[static_cast<size_t>(s)];
    sup_vals[static_cast<size_t>(s)] = std::abs(f(p));
    double g2 = 0.0;
    std::vector<double> pp(p);
    for (int c = 0; c < d; ++c) {
      pp[c] = p[c] + step;
      cdouble fp = f(pp);
      pp[c] = p[c] - step;
      cdouble fm = f(pp);
      pp[c] = p[c];
      g2 += std::norm((fp - fm) / (2.0 * step));
    }
    grad_vals[static_cast<size_t>(s)] = std::sqrt(g2);
  }
  CThetaValue out;
  for (int64_t s = 0; s < ns; ++s) {
    out.sup_f = std::max(out.sup_f, sup_vals[static_cast<size_t>(s)]);
    out.grad_term = std::max(out.grad_term, grad_vals[static_cast<size_t>(s)]);
  }
  out.grad_term *= theta * diam;
  out.value = std::max(out.sup_f, out.grad_term);
  return out;
}

cdouble eval_localized_average(const FractalMeasure& mu_y, const Tile& J,
                               const Phase& phase, double h,
                               const std::vector<cdouble>& f_on_atoms,
                               std::span<const double> x) {
  auto yj = J.base_cube.center();
  double phi_yj = phase.eval(x, yj);
  cdouble acc(0.0);
  for (int64_t id : J.atom_ids) {
    auto y = mu_y.atom(id);
    double ph = (phase.eval(x, y) - phi_yj) / h;
    double p = phase.symbol(x, y);
    acc += mu_y.weights[static_cast<size_t>(id)] * std::polar(p, ph) *
           f_on_atoms[static_cast<size_t>(id)];
  }
  return acc / J.measure;
}

ContractionReport contraction_step(const TileTree& tree_x, const TileTree& tree_y,
                                   const Phase& phase, double h, int level_i, int idx_i,
                                   int level_j, int idx_j,
                                   const std::vector<cdouble>& f_on_atoms,
                                   const DolgopyatConstants& constants) {
  const double Ld = static_cast<double>(tree_x.L);
  const int K = static_cast<int>(std::floor(-std::log(h) / std::log(Ld)));
  if (level_i + level_j + 1 != K)
    throw std::invalid_argument("contraction_step: level(I)+level(J)+1 != K");
  const Tile& I = tree_x.levels[level_i][idx_i];
  const Tile& J = tree_y.levels[level_j][idx_j];
  if (I.atom_ids.empty() || J.atom_ids.empty())
    throw std::invalid_argument("contraction_step: empty tile");
  if (level_j + 1 > tree_y.max_level())
    throw std::invalid_argument("contraction_step: J children unresolved");

  const FractalMeasure& mx = tree_x.source;
  const FractalMeasure& my = tree_y.source;
  const double theta = constants.theta;

  TileFunction fj = [&](std::span<const double> x) {
    return eval_localized_average(my, J, phase, h, f_on_atoms, x);
  };

  ContractionReport rep;
  double lhs = 0.0;
  for (int ci : I.children) {
    const Tile& ia = tree_x.levels[level_i + 1][ci];
    double pr = ia.measure / I.measure;
    double nrm = c_theta_norm(fj, ia, mx, theta).value;
    lhs += pr * nrm * nrm;
    rep.max_child_norm_sq = std::max(rep.max_child_norm_sq, nrm * nrm);
  }

  double rhs = 0.0, first = 0.0;
  for (int cj : J.children) {
    const Tile& jb = tree_y.levels[level_j + 1][cj];
    double pr = jb.measure / J.measure;
    TileFunction fjb = [&](std::span<const double> x) {
      return eval_localized_average(my, jb, phase, h, f_on_atoms, x);
    };
    double nrm = c_theta_norm(fjb, I, mx, theta).value;
    rhs += pr * nrm * nrm;
    first += pr * nrm;
  }

  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.sigma2 = rhs - lhs;
  rep.first_moment = first;
  if (rhs <= 0.0) {
    rep.degenerate = true;
    return rep;
  }
  rep.gap = rep.sigma2 / rhs;
  rep.gap_at_least_epsilon1 =
      rep.gap > 0.0 && std::log(rep.gap) >= constants.log_epsilon1;
  return rep;
}

IterationResult iterate_contraction(const TileTree& tree_x, const TileTree& tree_y,
                                    const Phase& phase, double h,
                                    const std::vector<cdouble>& f_on_atoms,
                                    const DolgopyatConstants& constants) {
  const double Ld = static_cast<double>(tree_x.L);
  const int K = static_cast<int>(std::floor(-std::log(h) / std::log(Ld)));
  if (K < 1) throw std::invalid_argument("iterate_contraction: K < 1");
  if (K > tree_y.max_level() || K - 1 > tree_x.max_level() - 1)
    throw std::invalid_argument("iterate_contraction: trees too shallow for K");
  if (tree_y.levels[0].size() != 1)
    throw std::invalid_argument("iterate_contraction: expected a single root tile");

  const FractalMeasure& my = tree_y.source;
  IterationResult out;
  out.K = K;

  // measured per-level gaps
  std::vector<double> level_gap(static_cast<size_t>(K), 0.0);
  for (int m = 0; m < K; ++m) {
    int n = K - 1 - m;
    std::vector<double> gaps;
    for (size_t ii = 0; ii < tree_x.levels[n].size(); ++ii)
      for (size_t jj = 0; jj < tree_y.levels[m].size(); ++jj) {
        const Tile& I = tree_x.levels[n][ii];
        const Tile& J = tree_y.levels[m][jj];
        if (I.children.size() < 1 || J.children.size() < 1) continue;
        auto rep = contraction_step(tree_x, tree_y, phase, h, n, static_cast<int>(ii),
                                    m, static_cast<int>(jj), f_on_atoms, constants);
        if (!rep.degenerate) gaps.push_back(rep.gap);
      }
    LevelGap lg;
    lg.level_j = m;
    lg.pairs = static_cast<int64_t>(gaps.size());
    if (!gaps.empty()) {
      std::sort(gaps.begin(), gaps.end());
      lg.min_gap = gaps.front();
      lg.median_gap = gaps[gaps.size() / 2];
    }
    out.per_level.push_back(lg);
    level_gap[static_cast<size_t>(m)] = gaps.empty() ? 0.0 : gaps.front();
  }

  // E_J recursion: closed-form base case at level K, then fold downward with
  // the measured gaps
  const double p_c1 = phase.symbol_c1;
  const double mass_x = tree_x.source.total_mass();
  std::vector<double> e2(tree_y.levels[K].size());
  for (size_t j = 0; j < tree_y.levels[K].size(); ++j) {
    const Tile& J = tree_y.levels[K][j];
    double f2 = 0.0;
    for (int64_t id : J.atom_ids)
      f2 += my.weights[static_cast<size_t>(id)] *
            std::norm(f_on_atoms[static_cast<size_t>(id)]);
    e2[j] = p_c1 * p_c1 * mass_x / J.measure * f2;
  }
  for (int m = K - 1; m >= 0; --m) {
    std::vector<double> up(tree_y.levels[m].size(), 0.0);
    for (size_t j = 0; j < tree_y.levels[m].size(); ++j) {
      const Tile& J = tree_y.levels[m][j];
      double acc = 0.0;
      for (int cj : J.children)
        acc += tree_y.levels[m + 1][cj].measure / J.measure * e2[cj];
      up[j] = (1.0 - level_gap[static_cast<size_t>(m)]) * acc;
    }
    e2.swap(up);
  }
  out.bound = my.total_mass() * std::sqrt(std::max(0.0, e2[0]));
  return out;
}

std::string IterationResult::csv() const {
  std::ostringstream os;
  os << "level,pairs,min_gap,median_gap\n";
  os.precision(17);
  for (const auto& lg : per_level)
    os << lg.level_j << ',' << lg.pairs << ',' << lg.min_gap << ',' << lg.median_gap
       << '\n';
  return os.str();
}

}  // namespace fuplab
