#include "fuplab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fuplab/parallel.hpp"
#include "json.hpp"

namespace fuplab {

void ScaleRange::validate() const {
  if (!(alpha > 0.0) || !(alpha <= beta))
    throw std::invalid_argument("scale range: need 0 < alpha <= beta");
  if (!(ratio > 1.0)) throw std::invalid_argument("scale range: ratio <= 1");
}

std::vector<double> ScaleRange::grid() const {
  validate();
  std::vector<double> g;
  for (double r = beta; r >= alpha * (1.0 - 1e-12); r /= ratio) g.push_back(r);
  if (g.empty() || g.back() > alpha * (1.0 + 1e-12)) g.push_back(alpha);
  return g;
}

namespace {

double mass_in_closed_box(const FractalMeasure& mu, const Box& b) {
  double m = 0.0;
  for (int64_t i = 0; i < mu.count(); ++i) {
    auto x = mu.atom(i);
    bool in = true;
    for (int c = 0; c < mu.dim && in; ++c)
      in = x[c] >= b.lo[c] - 1e-15 && x[c] <= b.hi[c] + 1e-15;
    if (in) m += mu.weights[static_cast<size_t>(i)];
  }
  return m;
}

Box centered_box(std::span<const double> c, double r) {
  std::vector<double> lo(c.size()), hi(c.size());
  for (size_t i = 0; i < c.size(); ++i) {
    lo[i] = c[i] - 0.5 * r;
    hi[i] = c[i] + 0.5 * r;
  }
  return Box(std::move(lo), std::move(hi));
}

}  // namespace

ConstantReport estimate_regularity(const FractalMeasure& mu, const ScaleRange& range,
                                   double delta) {
  range.validate();
  if (range.alpha < mu.scale_floor * (1.0 - 1e-12))
    throw std::invalid_argument("estimate_regularity: scale range below floor");
  ConstantReport rep;
  rep.value = 1.0;
  const auto grid = range.grid();
  const int64_t n = mu.count();

  for (double r : grid) {
    double level_best = 1.0;
    ConstantWitness level_wit;

    // atom-centered boxes: both directions of the regularity bracket
    std::vector<double> ratios(static_cast<size_t>(n));
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (int64_t i = 0; i < n; ++i) {
      Box b = centered_box(mu.atom(i), r);
      double m = mass_in_closed_box(mu, b);
      double rd = std::pow(r, delta);
      double c = std::max(m / rd, m > 0.0 ? rd / m : 0.0);
      ratios[static_cast<size_t>(i)] = c;
    }
    for (int64_t i = 0; i < n; ++i)
      if (ratios[static_cast<size_t>(i)] > level_best) {
        level_best = ratios[static_cast<size_t>(i)];
        Box b = centered_box(mu.atom(i), r);
        level_wit = {"regularity_atom_box", b.lo, b.hi, {i}, r, 0.0, level_best};
      }

    // off-support grid boxes: upper bound only
    {
      const Box& bb = mu.bounding_box;
      std::vector<int64_t> steps(mu.dim);
      int64_t total = 1;
      for (int c = 0; c < mu.dim; ++c) {
        steps[c] = std::max<int64_t>(1, static_cast<int64_t>(std::ceil(
                                            (bb.hi[c] - bb.lo[c]) / r)));
        total *= steps[c];
      }
      if (total <= 100000) {
        std::vector<double> vals(static_cast<size_t>(total), 0.0);
#pragma omp parallel for schedule(static) num_threads(max_threads())
        for (int64_t cell = 0; cell < total; ++cell) {
          std::vector<double> lo(mu.dim), hi(mu.dim);
          int64_t rem = cell;
          for (int c = 0; c < mu.dim; ++c) {
            int64_t q = rem % steps[c];
            rem /= steps[c];
            lo[c] = bb.lo[c] + static_cast<double>(q) * r;
            hi[c] = lo[c] + r;
          }
          double m = mass_in_closed_box(mu, Box(lo, hi));
          vals[static_cast<size_t>(cell)] = m / std::pow(r, delta);
        }
        for (int64_t cell = 0; cell < total; ++cell)
          if (vals[static_cast<size_t>(cell)] > level_best) {
            level_best = vals[static_cast<size_t>(cell)];
            std::vector<double> lo(mu.dim), hi(mu.dim);
            int64_t rem = cell;
            for (int c = 0; c < mu.dim; ++c) {
              int64_t q = rem % steps[c];
              rem /= steps[c];
              lo[c] = bb.lo[c] + static_cast<double>(q) * r;
              hi[c] = lo[c] + r;
            }
            level_wit = {"regularity_grid_box", lo, hi, {}, r, 0.0, level_best};
          }
      }
    }

    rep.per_scale.push_back({r, 0.0, level_best});
    if (level_best > rep.value) {
      rep.value = level_best;
      rep.witness = level_wit;
    }
  }
  return rep;
}

ConstantReport estimate_doubling(const FractalMeasure& mu, const ScaleRange& range) {
  range.validate();
  if (range.alpha < mu.scale_floor * (1.0 - 1e-12))
    throw std::invalid_argument("estimate_doubling: scale range below floor");
  ConstantReport rep;
  rep.value = 1.0;
  ScaleRange capped = range;
  capped.beta = std::min(range.beta, 0.5);
  if (capped.beta < capped.alpha) capped.beta = capped.alpha;
  const int64_t n = mu.count();

  for (double r : capped.grid()) {
    double level_best = 1.0;
    int64_t level_arg = -1;
    std::vector<double> ratios(static_cast<size_t>(n));
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (int64_t i = 0; i < n; ++i) {
      Box b = centered_box(mu.atom(i), r);
      double m1 = mass_in_closed_box(mu, b);
      double m2 = mass_in_closed_box(mu, b.dilated(2.0));
      ratios[static_cast<size_t>(i)] = m1 > 0.0 ? m2 / m1 : 1.0;
    }
    for (int64_t i = 0; i < n; ++i)
      if (ratios[static_cast<size_t>(i)] > level_best) {
        level_best = ratios[static_cast<size_t>(i)];
        level_arg = i;
      }
    rep.per_scale.push_back({r, 0.0, level_best});
    if (level_best > rep.value) {
      rep.value = level_best;
      Box b = centered_box(mu.atom(level_arg), r);
      rep.witness = {"doubling_atom_box", b.lo, b.hi, {level_arg}, r, 0.0, level_best};
    }
  }
  return rep;
}

namespace {

std::vector<int64_t> subsample_ids(int64_t n, int64_t cap) {
  std::vector<int64_t> ids;
  if (n <= cap) {
    ids.resize(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) ids[static_cast<size_t>(i)] = i;
  } else {
    for (int64_t j = 0; j < cap; ++j) ids.push_back(j * n / cap);
  }
  return ids;
}

struct QuadrupleMax {
  double value = 0.0;
  int64_t x1 = -1, x2 = -1, y1 = -1, y2 = -1;
};

// max over quadruples of |P[i1][j1] - P[i2][j1] - P[i1][j2] + P[i2][j2]|
// via per-x-pair extremes of the column difference
QuadrupleMax quadruple_max(const std::vector<double>& p, int64_t nx, int64_t ny,
                           const std::vector<int64_t>& xs,
                           const std::vector<int64_t>& ys) {
  QuadrupleMax best;
  for (int64_t i1 = 0; i1 < nx; ++i1)
    for (int64_t i2 = i1 + 1; i2 < nx; ++i2) {
      double mn = std::numeric_limits<double>::infinity();
      double mx = -mn;
      int64_t amn = 0, amx = 0;
      const double* r1 = p.data() + i1 * ny;
      const double* r2 = p.data() + i2 * ny;
      for (int64_t j = 0; j < ny; ++j) {
        double d = r1[j] - r2[j];
        if (d < mn) {
          mn = d;
          amn = j;
        }
        if (d > mx) {
          mx = d;
          amx = j;
        }
      }
      if (mx - mn > best.value) {
        best.value = mx - mn;
        best.x1 = xs[static_cast<size_t>(i1)];
        best.x2 = xs[static_cast<size_t>(i2)];
        best.y1 = ys[static_cast<size_t>(amx)];
        best.y2 = ys[static_cast<size_t>(amn)];
      }
    }
  return best;
}

}  // namespace

ConstantReport estimate_nonorthogonality(const FractalMeasure& mu_x,
                                         const FractalMeasure& mu_y, const Phase& phase,
                                         const ScaleRange& range_x,
                                         const ScaleRange& range_y,
                                         const NonorthOptions& opts) {
  range_x.validate();
  range_y.validate();
  if (range_x.alpha < mu_x.scale_floor * (1.0 - 1e-12) ||
      range_y.alpha < mu_y.scale_floor * (1.0 - 1e-12))
    throw std::invalid_argument("estimate_nonorthogonality: scale below floor");

  auto centers_x = subsample_ids(mu_x.count(), opts.max_centers);
  auto centers_y = subsample_ids(mu_y.count(), opts.max_centers);
  auto grid_x = range_x.grid();
  auto grid_y = range_y.grid();

  ConstantReport rep;
  rep.value = std::numeric_limits<double>::infinity();

  for (double rx : grid_x)
    for (double ry : grid_y) {
      double scale_min = std::numeric_limits<double>::infinity();
      ConstantWitness scale_wit;
      int64_t scale_unres = 0;

      struct ConfigOut {
        double value = -1.0;
        QuadrupleMax q;
        int64_t x0 = -1, y0 = -1;
        bool under = false;
      };
      const int64_t ncfg =
          static_cast<int64_t>(centers_x.size()) * static_cast<int64_t>(centers_y.size());
      std::vector<ConfigOut> outs(static_cast<size_t>(ncfg));

#pragma omp parallel for schedule(dynamic, 4) num_threads(max_threads())
      for (int64_t cfg = 0; cfg < ncfg; ++cfg) {
        int64_t ci = cfg / static_cast<int64_t>(centers_y.size());
        int64_t cj = cfg % static_cast<int64_t>(centers_y.size());
        int64_t x0 = centers_x[static_cast<size_t>(ci)];
        int64_t y0 = centers_y[static_cast<size_t>(cj)];
        ConfigOut& out = outs[static_cast<size_t>(cfg)];
        out.x0 = x0;
        out.y0 = y0;

        std::vector<int64_t> bx, by;
        auto cx = mu_x.atom(x0);
        for (int64_t i = 0; i < mu_x.count(); ++i)
          if (dist2(mu_x.atom(i), cx) <= rx) bx.push_back(i);
        auto cy = mu_y.atom(y0);
        for (int64_t j = 0; j < mu_y.count(); ++j)
          if (dist2(mu_y.atom(j), cy) <= ry) by.push_back(j);
        if (bx.size() < 2 || by.size() < 2) {
          out.under = true;
          continue;
        }

        QuadrupleMax best;
        auto run_exhaustive = [&](const std::vector<int64_t>& xs,
                                  const std::vector<int64_t>& ys) {
          const int64_t nx = static_cast<int64_t>(xs.size());
          const int64_t ny = static_cast<int64_t>(ys.size());
          std::vector<double> p(static_cast<size_t>(nx) * ny);
          for (int64_t i = 0; i < nx; ++i)
            for (int64_t j = 0; j < ny; ++j)
              p[static_cast<size_t>(i) * ny + j] =
                  phase.eval(mu_x.atom(xs[static_cast<size_t>(i)]),
                             mu_y.atom(ys[static_cast<size_t>(j)]));
          QuadrupleMax q = quadruple_max(p, nx, ny, xs, ys);
          if (q.value > best.value) best = q;
        };

        if (static_cast<int64_t>(bx.size()) <= opts.exhaustive_ball &&
            static_cast<int64_t>(by.size()) <= opts.exhaustive_ball) {
          run_exhaustive(bx, by);
        } else {
          std::mt19937_64 rng(opts.seed ^ (0x9e37u + static_cast<uint64_t>(cfg)));
          auto pick = [&rng](const std::vector<int64_t>& v, int64_t cap) {
            std::vector<int64_t> w = v;
            std::shuffle(w.begin(), w.end(), rng);
            if (static_cast<int64_t>(w.size()) > cap) w.resize(static_cast<size_t>(cap));
            std::sort(w.begin(), w.end());
            return w;
          };
          run_exhaustive(pick(bx, opts.exhaustive_ball), pick(by, opts.exhaustive_ball));
          std::uniform_int_distribution<size_t> dx(0, bx.size() - 1), dy(0, by.size() - 1);
          for (int s = 0; s < opts.random_samples; ++s) {
            int64_t a = bx[dx(rng)], b = bx[dx(rng)], c = by[dy(rng)], d = by[dy(rng)];
            double v = std::abs(phase.eval(mu_x.atom(a), mu_y.atom(c)) -
                                phase.eval(mu_x.atom(b), mu_y.atom(c)) -
                                phase.eval(mu_x.atom(a), mu_y.atom(d)) +
                                phase.eval(mu_x.atom(b), mu_y.atom(d)));
            if (v > best.value) best = {v, a, b, c, d};
          }
        }
        out.value = best.value / (rx * ry);
        out.q = best;
      }

      for (const auto& out : outs) {
        if (out.under) {
          ++scale_unres;
          continue;
        }
        if (out.value < scale_min) {
          scale_min = out.value;
          scale_wit = {"nonorthogonality_quadruple",
                       {},
                       {},
                       {out.x0, out.y0, out.q.x1, out.q.x2, out.q.y1, out.q.y2},
                       rx,
                       ry,
                       out.value};
        }
      }
      rep.under_resolved += scale_unres;
      if (scale_min == std::numeric_limits<double>::infinity()) continue;
      rep.per_scale.push_back({rx, ry, scale_min});
      if (scale_min < rep.value) {
        rep.value = scale_min;
        rep.witness = scale_wit;
      }
    }

  if (rep.per_scale.empty())
    throw std::invalid_argument(
        "estimate_nonorthogonality: every configuration under-resolved");
  return rep;
}

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev initial guess
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[n - 1 - i] = 0.5 * (x + 1.0);
    weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

double bitangent_integral(const Phase& phase, std::span<const double> x0,
                          std::span<const double> x1, std::span<const double> y0,
                          std::span<const double> y1, int n) {
  const int d = phase.dim;
  std::vector<double> nodes, weights;
  gauss_legendre_01(n, nodes, weights);
  std::vector<double> v(d), w(d), xp(d), yp(d), h(d * d);
  for (int i = 0; i < d; ++i) {
    v[i] = x1[i] - x0[i];
    w[i] = y1[i] - y0[i];
  }
  double acc = 0.0;
  for (int qi = 0; qi < n; ++qi)
    for (int qj = 0; qj < n; ++qj) {
      for (int i = 0; i < d; ++i) {
        xp[i] = x0[i] + nodes[qi] * v[i];
        yp[i] = y0[i] + nodes[qj] * w[i];
      }
      phase.hessian(xp, yp, h.data());
      double q = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) q += v[i] * h[i * d + j] * w[j];
      acc += weights[qi] * weights[qj] * q;
    }
  return acc;
}

}  // namespace

MvtReport verify_geometric_mvt(const Phase& phase, std::span<const double> x0,
                               std::span<const double> x1, std::span<const double> y0,
                               std::span<const double> y1, int quadrature_n) {
  double vx = 0.0, vy = 0.0;
  for (int i = 0; i < phase.dim; ++i) {
    vx += (x1[i] - x0[i]) * (x1[i] - x0[i]);
    vy += (y1[i] - y0[i]) * (y1[i] - y0[i]);
  }
  if (!(vx > 0.0) || !(vy > 0.0))
    throw std::invalid_argument("verify_geometric_mvt: degenerate rectangle");
  MvtReport rep;
  rep.lhs = bitangent_integral(phase, x0, x1, y0, y1, quadrature_n);
  rep.rhs = phase.eval(x0, y0) - phase.eval(x0, y1) - phase.eval(x1, y0) +
            phase.eval(x1, y1);
  rep.error = std::abs(rep.lhs - rep.rhs);
  return rep;
}

DiffBoundReport verify_mvt_difference_bound(const Phase& phase, const PhaseRectangle& r0,
                                            const PhaseRectangle& r1, int quadrature_n) {
  auto l2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  };
  DiffBoundReport rep;
  rep.eps_x = std::max(l2(r0.x0, r1.x0), l2(r0.x1, r1.x1));
  rep.eps_y = std::max(l2(r0.y0, r1.y0), l2(r0.y1, r1.y1));
  rep.c_x = std::max(l2(r0.x0, r0.x1), l2(r1.x0, r1.x1));
  rep.c_y = std::max(l2(r0.y0, r0.y1), l2(r1.y0, r1.y1));
  if (rep.eps_x > 1.0 || rep.eps_y > 1.0 || rep.c_x > 1.0 || rep.c_y > 1.0)
    throw std::invalid_argument("verify_mvt_difference_bound: hypothesis violated");
  double i0 = bitangent_integral(phase, r0.x0, r0.x1, r0.y0, r0.y1, quadrature_n);
  double i1 = bitangent_integral(phase, r1.x0, r1.x1, r1.y0, r1.y1, quadrature_n);
  rep.lhs = std::abs(i1 - i0);
  rep.bound = 7.0 * phase.c1_bound * (rep.eps_x * rep.c_y + rep.eps_y * rep.c_x);
  rep.slack = rep.bound - rep.lhs;
  return rep;
}

std::string ConstantReport::to_json() const {
  nlohmann::json j;
  j["value"] = value;
  j["under_resolved"] = under_resolved;
  j["witness"] = {{"kind", witness.kind},   {"box_lo", witness.box_lo},
                  {"box_hi", witness.box_hi}, {"atoms", witness.atoms},
                  {"r_x", witness.r_x},     {"r_y", witness.r_y},
                  {"value", witness.value}};
  auto& arr = j["per_scale"] = nlohmann::json::array();
  for (const auto& e : per_scale)
    arr.push_back({{"r_x", e.r_x}, {"r_y", e.r_y}, {"value", e.value}});
  return j.dump(2);
}

std::string ConstantReport::per_scale_csv() const {
  std::ostringstream os;
  os << "r_x,r_y,value\n";
  os.precision(17);
  for (const auto& e : per_scale) os << e.r_x << ',' << e.r_y << ',' << e.value << '\n';
  return os.str();
}

}  // namespace fuplab
