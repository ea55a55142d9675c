#include "fuplab/schottky.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fuplab/parallel.hpp"
#include "json.hpp"

namespace fuplab {

MobiusMap MobiusMap::normalized(cdouble a, cdouble b, cdouble c, cdouble d) {
  cdouble det = a * d - b * c;
  if (std::abs(det) < 1e-300)
    throw std::invalid_argument("mobius: singular matrix");
  cdouble s = std::sqrt(det);
  return {a / s, b / s, c / s, d / s};
}

MobiusMap MobiusMap::compose(const MobiusMap& o) const {
  return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
}

MobiusMap MobiusMap::inverse() const { return {d, -b, -c, a}; }

Disk MobiusMap::map_disk(const Disk& disk) const {
  if (std::abs(c) < 1e-300) {
    cdouble f = a / d;
    return {f * disk.center + b / d, std::abs(f) * disk.radius};
  }
  // gamma(z) = a/c + B / (c z + d), B = (bc - ad)/c
  cdouble pole = -d / c;
  if (std::abs(disk.center - pole) <= disk.radius * (1.0 + 1e-12))
    throw std::invalid_argument("mobius: pole inside disk, image is a half-plane");
  cdouble q = c * disk.center + d;
  double s = std::abs(c) * disk.radius;
  double denom = std::norm(q) - s * s;  // positive since the pole is outside
  cdouble inv_center = std::conj(q) / denom;
  double inv_radius = s / denom;
  cdouble B = (b * c - a * d) / c;
  return {a / c + B * inv_center, std::abs(B) * inv_radius};
}

double SchottkyGroup::mapping_error() const {
  double worst = 0.0;
  const int n2g = 2 * genus;
  for (int a = 0; a < n2g; ++a) {
    const Disk& target = disks[a];
    const Disk& source = disks[paired(a)];
    for (int s = 0; s < 64; ++s) {
      double ang = 2.0 * std::numbers::pi * s / 64.0;
      cdouble z = source.center + source.radius * std::polar(1.0, ang);
      double dev = std::abs(std::abs(generators[a].apply(z) - target.center) -
                            target.radius);
      worst = std::max(worst, dev);
    }
  }
  return worst;
}

SchottkyGroup make_schottky(const std::vector<Disk>& disks) {
  if (disks.size() < 4 || disks.size() % 2 != 0)
    throw std::invalid_argument("make_schottky: need 2g >= 4 disks");
  for (const auto& d : disks)
    if (!(d.radius > 0.0)) throw std::invalid_argument("make_schottky: bad radius");
  for (size_t i = 0; i < disks.size(); ++i)
    for (size_t j = i + 1; j < disks.size(); ++j)
      if (!disks[i].disjoint_from(disks[j]))
        throw std::invalid_argument("make_schottky: disks overlap");

  SchottkyGroup g;
  g.genus = static_cast<int>(disks.size()) / 2;
  g.disks = disks;
  for (int a = 0; a < 2 * g.genus; ++a) {
    const Disk& da = disks[a];
    const Disk& dab = disks[g.paired(a)];
    // gamma_a(z) = c_a + r_a r_abar / (z - c_abar)
    g.generators.push_back(MobiusMap::normalized(
        da.center, da.radius * dab.radius - da.center * dab.center, 1.0,
        -dab.center));
  }
  if (g.mapping_error() > 1e-9)
    throw std::invalid_argument("make_schottky: mapping property validation failed");
  return g;
}

std::vector<WordDisk> iterate_disks(const SchottkyGroup& group, int n,
                                    int64_t word_budget) {
  if (n < 1) throw std::invalid_argument("iterate_disks: n < 1");
  const int n2g = 2 * group.genus;
  double count = n2g * std::pow(static_cast<double>(n2g - 1), n - 1);
  if (count > static_cast<double>(word_budget))
    throw BudgetError("iterate_disks: word budget exceeded");

  std::vector<WordDisk> level;
  for (int a = 0; a < n2g; ++a) level.push_back({{a}, group.disks[a]});
  for (int depth = 2; depth <= n; ++depth) {
    std::vector<WordDisk> next;
    next.reserve(level.size() * (n2g - 1));
    for (int a = 0; a < n2g; ++a)
      for (const auto& wd : level) {
        if (group.paired(a) == wd.word.front()) continue;
        WordDisk nw;
        nw.word.reserve(wd.word.size() + 1);
        nw.word.push_back(a);
        nw.word.insert(nw.word.end(), wd.word.begin(), wd.word.end());
        nw.disk = group.generators[a].map_disk(wd.disk);
        next.push_back(std::move(nw));
      }
    level.swap(next);
  }
  std::sort(level.begin(), level.end(),
            [](const WordDisk& x, const WordDisk& y) { return x.word < y.word; });
  return level;
}

FractalMeasure sample_limit_set(const SchottkyGroup& group, int n,
                                int64_t word_budget) {
  auto disks = iterate_disks(group, n, word_budget);
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300, rmax = 0.0;
  for (const auto& wd : disks) {
    xmin = std::min(xmin, wd.disk.center.real());
    xmax = std::max(xmax, wd.disk.center.real());
    ymin = std::min(ymin, wd.disk.center.imag());
    ymax = std::max(ymax, wd.disk.center.imag());
    rmax = std::max(rmax, wd.disk.radius);
  }
  const double span = std::max(xmax - xmin, ymax - ymin) + 2.0 * rmax;
  const double ox = xmin - rmax, oy = ymin - rmax;

  FractalMeasure mu;
  mu.dim = 2;
  mu.atoms.reserve(disks.size() * 2);
  for (const auto& wd : disks) {
    mu.atoms.push_back((wd.disk.center.real() - ox) / span);
    mu.atoms.push_back((wd.disk.center.imag() - oy) / span);
  }
  mu.weights.assign(disks.size(), 1.0 / static_cast<double>(disks.size()));
  mu.scale_floor = rmax / span;
  mu.bounding_box = Box({0.0, 0.0}, {1.0, 1.0});
  return mu;
}

ConstantReport nonconcentration_constant(const FractalMeasure& atoms,
                                         const std::vector<double>& eps_grid,
                                         int dir_count) {
  if (atoms.dim != 2)
    throw std::invalid_argument("nonconcentration_constant: need d = 2 atoms");
  if (eps_grid.empty() || dir_count < 1)
    throw std::invalid_argument("nonconcentration_constant: empty grids");
  for (double eps : eps_grid)
    if (eps < atoms.scale_floor)
      throw std::invalid_argument("nonconcentration_constant: eps below resolution");

  std::vector<std::pair<double, double>> dirs;
  for (int k = 0; k < dir_count; ++k) {
    double ang = std::numbers::pi * k / dir_count;  // directions modulo sign
    dirs.emplace_back(std::cos(ang), std::sin(ang));
  }

  ConstantReport rep;
  rep.value = std::numeric_limits<double>::infinity();
  const int64_t n = atoms.count();

  for (double eps : eps_grid) {
    double scale_min = std::numeric_limits<double>::infinity();
    int64_t scale_arg = -1, scale_under = 0;
    int scale_dir = -1;
    std::vector<double> vals(static_cast<size_t>(n),
                             std::numeric_limits<double>::infinity());
    std::vector<int> argdir(static_cast<size_t>(n), -1);
    std::vector<char> under(static_cast<size_t>(n), 0);
#pragma omp parallel for schedule(dynamic, 8) num_threads(max_threads())
    for (int64_t i = 0; i < n; ++i) {
      auto x = atoms.atom(i);
      std::vector<int64_t> ball;
      for (int64_t j = 0; j < n; ++j)
        if (j != i && dist2(atoms.atom(j), x) <= eps) ball.push_back(j);
      if (ball.empty()) {
        under[static_cast<size_t>(i)] = 1;
        continue;
      }
      double worst_dir = std::numeric_limits<double>::infinity();
      int worst_k = -1;
      for (int k = 0; k < dir_count; ++k) {
        double best = 0.0;
        for (int64_t j : ball) {
          auto y = atoms.atom(j);
          double ip =
              std::abs((y[0] - x[0]) * dirs[k].first + (y[1] - x[1]) * dirs[k].second);
          best = std::max(best, ip);
        }
        if (best / eps < worst_dir) {
          worst_dir = best / eps;
          worst_k = k;
        }
      }
      vals[static_cast<size_t>(i)] = worst_dir;
      argdir[static_cast<size_t>(i)] = worst_k;
    }
    for (int64_t i = 0; i < n; ++i) {
      if (under[static_cast<size_t>(i)]) {
        ++scale_under;
        continue;
      }
      if (vals[static_cast<size_t>(i)] < scale_min) {
        scale_min = vals[static_cast<size_t>(i)];
        scale_arg = i;
        scale_dir = argdir[static_cast<size_t>(i)];
      }
    }
    rep.under_resolved += scale_under;
    if (scale_arg < 0) continue;
    rep.per_scale.push_back({eps, 0.0, scale_min});
    if (scale_min < rep.value) {
      rep.value = scale_min;
      rep.witness = {"nonconcentration", {}, {}, {scale_arg, scale_dir}, eps, 0.0,
                     scale_min};
    }
  }
  if (rep.per_scale.empty())
    throw std::invalid_argument("nonconcentration_constant: all balls under-resolved");
  return rep;
}

namespace {

// best circle radius for a fixed center: minimax over the four disks
double circle_objective(cdouble m, const std::vector<Disk>& disks, double* rho_out) {
  double lo = -1e300, hi = 1e300;
  for (const auto& d : disks) {
    double a = std::abs(d.center - m);
    lo = std::max(lo, a - d.radius);
    hi = std::min(hi, a + d.radius);
  }
  double rho = 0.5 * (lo + hi);
  if (rho_out) *rho_out = std::max(rho, 0.0);
  return std::max(0.0, 0.5 * (lo - hi));
}

double line_objective(double angle, const std::vector<Disk>& disks, double* t_out) {
  double nx = std::cos(angle), ny = std::sin(angle);
  double lo = -1e300, hi = 1e300;
  for (const auto& d : disks) {
    double b = d.center.real() * nx + d.center.imag() * ny;
    lo = std::max(lo, b - d.radius);
    hi = std::min(hi, b + d.radius);
  }
  if (t_out) *t_out = 0.5 * (lo + hi);
  return std::max(0.0, 0.5 * (lo - hi));
}

cdouble circumcenter(cdouble p, cdouble q, cdouble r) {
  double ax = p.real(), ay = p.imag(), bx = q.real(), by = q.imag(), cx = r.real(),
         cy = r.imag();
  double dd = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
  if (std::abs(dd) < 1e-12) return (p + q + r) / 3.0;
  double ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) +
               (cx * cx + cy * cy) * (ay - by)) /
              dd;
  double uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) +
               (cx * cx + cy * cy) * (bx - ax)) /
              dd;
  return {ux, uy};
}

}  // namespace

CircleMarginResult circle_margin(const std::vector<Disk>& disks, uint64_t seed,
                                 int starts) {
  if (disks.size() != 4)
    throw std::invalid_argument("circle_margin: need exactly 4 disks");

  CircleMarginResult best;
  best.margin = std::numeric_limits<double>::infinity();

  // line family: dense angular scan plus local refinement
  {
    double best_ang = 0.0, best_val = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 1024; ++k) {
      double ang = std::numbers::pi * k / 1024.0;
      double v = line_objective(ang, disks, nullptr);
      if (v < best_val) {
        best_val = v;
        best_ang = ang;
      }
    }
    double step = std::numbers::pi / 1024.0;
    while (step > 1e-12) {
      for (double ang : {best_ang - step, best_ang + step}) {
        double v = line_objective(ang, disks, nullptr);
        if (v < best_val) {
          best_val = v;
          best_ang = ang;
        }
      }
      step *= 0.5;
    }
    double t;
    line_objective(best_ang, disks, &t);
    if (best_val < best.margin) {
      best.margin = best_val;
      best.witness.is_line = true;
      best.witness.angle = best_ang;
      best.witness.offset = t;
    }
  }

  // circle family: multi-start Nelder-Mead on the center
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double spread = 0.0;
  for (const auto& d : disks)
    for (const auto& e : disks) spread = std::max(spread, std::abs(d.center - e.center));
  if (spread <= 0.0) spread = 1.0;

  std::vector<cdouble> start_pts;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k)
        start_pts.push_back(circumcenter(disks[i].center, disks[j].center,
                                         disks[k].center));
  while (static_cast<int>(start_pts.size()) < starts) {
    cdouble base = start_pts[start_pts.size() % 4];
    start_pts.push_back(base + 0.15 * spread * cdouble(gauss(rng), gauss(rng)));
  }

  for (const auto& s : start_pts) {
    // Nelder-Mead in 2d
    std::array<cdouble, 3> simplex{s, s + cdouble(0.1 * spread, 0.0),
                                   s + cdouble(0.0, 0.1 * spread)};
    std::array<double, 3> f;
    for (int i = 0; i < 3; ++i) f[i] = circle_objective(simplex[i], disks, nullptr);
    for (int it = 0; it < 200; ++it) {
      std::array<int, 3> ord{0, 1, 2};
      std::sort(ord.begin(), ord.end(), [&](int a, int b) { return f[a] < f[b]; });
      if (f[ord[2]] - f[ord[0]] < 1e-14 &&
          std::abs(simplex[ord[2]] - simplex[ord[0]]) < 1e-12 * spread)
        break;
      cdouble centroid = 0.5 * (simplex[ord[0]] + simplex[ord[1]]);
      cdouble refl = centroid + (centroid - simplex[ord[2]]);
      double fr = circle_objective(refl, disks, nullptr);
      if (fr < f[ord[0]]) {
        cdouble exp_pt = centroid + 2.0 * (centroid - simplex[ord[2]]);
        double fe = circle_objective(exp_pt, disks, nullptr);
        if (fe < fr) {
          simplex[ord[2]] = exp_pt;
          f[ord[2]] = fe;
        } else {
          simplex[ord[2]] = refl;
          f[ord[2]] = fr;
        }
      } else if (fr < f[ord[1]]) {
        simplex[ord[2]] = refl;
        f[ord[2]] = fr;
      } else {
        cdouble contr = centroid + 0.5 * (simplex[ord[2]] - centroid);
        double fc = circle_objective(contr, disks, nullptr);
        if (fc < f[ord[2]]) {
          simplex[ord[2]] = contr;
          f[ord[2]] = fc;
        } else {
          for (int i : {1, 2}) {
            simplex[ord[i]] =
                simplex[ord[0]] + 0.5 * (simplex[ord[i]] - simplex[ord[0]]);
            f[ord[i]] = circle_objective(simplex[ord[i]], disks, nullptr);
          }
        }
      }
    }
    int arg = 0;
    for (int i = 1; i < 3; ++i)
      if (f[i] < f[arg]) arg = i;
    if (f[arg] < best.margin) {
      double rho;
      circle_objective(simplex[arg], disks, &rho);
      best.margin = f[arg];
      best.witness.is_line = false;
      best.witness.center = simplex[arg];
      best.witness.radius = rho;
    }
  }
  return best;
}

NonorthFromNonconcentration nonorthogonality_from_nonconcentration(double c0, double c1,
                                                                   double phi_c3) {
  if (!(c0 > 0.0) || c0 > 1.0 || !(c1 > 0.0) || c1 > 1.0 || phi_c3 < 0.0)
    throw std::invalid_argument("nonorthogonality_from_nonconcentration: bad inputs");
  NonorthFromNonconcentration out;
  const double c0_6 = std::pow(c0, 6);
  out.c_N = c1 * c1 * c1 * c0_6 / (200.0 * (1.0 + phi_c3) * (1.0 + phi_c3));
  out.scale_ceiling = phi_c3 > 0.0 ? c1 * c0 * c0 / (10.0 * phi_c3)
                                   : std::numeric_limits<double>::infinity();
  return out;
}

std::string disks_to_json(const std::vector<WordDisk>& disks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& wd : disks) {
    std::string w;
    for (int a : wd.word) w += static_cast<char>('1' + a);
    nlohmann::json item;
    item["word"] = w;
    item["center"] = {wd.disk.center.real(), wd.disk.center.imag()};
    item["radius"] = wd.disk.radius;
    arr.push_back(std::move(item));
  }
  return arr.dump(2);
}

}  // namespace fuplab
