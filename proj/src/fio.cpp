#include "fuplab/fio.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "fuplab/parallel.hpp"
#include "json.hpp"

namespace fuplab {

OperatorMatrix build_fio(const FractalMeasure& mu_x, const FractalMeasure& mu_y,
                         const Phase& phase, double h) {
  if (h < std::max(mu_x.scale_floor, mu_y.scale_floor))
    throw std::invalid_argument("build_fio: h below scale floor");
  require_budget(mu_x.count() * mu_y.count(), "build_fio");
  OperatorMatrix m;
  m.dim = mu_x.dim;
  m.h = h;
  m.row_points = mu_x.atoms;
  m.row_weights = mu_x.weights;
  m.col_points = mu_y.atoms;
  m.col_weights = mu_y.weights;
  m.kernel = CMatrix(mu_x.count(), mu_y.count());
  const int64_t R = m.kernel.rows;
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int64_t i = 0; i < R; ++i) {
    auto x = mu_x.atom(i);
    cdouble* row = m.kernel.a.data() + static_cast<size_t>(i) * m.kernel.cols;
    for (int64_t j = 0; j < m.kernel.cols; ++j) {
      auto y = mu_y.atom(j);
      row[j] = std::polar(phase.symbol(x, y) * mu_y.weights[static_cast<size_t>(j)],
                          phase.eval(x, y) / h);
    }
  }
  return m;
}

double operator_norm(const OperatorMatrix& mat, const SvOptions& opts) {
  CMatrix w = mat.kernel;
  for (int64_t i = 0; i < w.rows; ++i) {
    double rv = std::sqrt(mat.row_weights[static_cast<size_t>(i)]);
    for (int64_t j = 0; j < w.cols; ++j) {
      double cw = mat.col_weights[static_cast<size_t>(j)];
      w.at(i, j) = cw > 0.0 ? w.at(i, j) * rv / std::sqrt(cw) : cdouble(0.0);
    }
  }
  return largest_singular_value(w, opts).value;
}

namespace {

// Halton sequence, one prime base per coordinate
double halton(int64_t index, int base) {
  double f = 1.0, r = 0.0;
  int64_t i = index;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13};

// cell-list nearest-atom query structure
struct AtomGrid {
  const FractalMeasure& mu;
  double cell;
  std::map<std::vector<int64_t>, std::vector<int64_t>> cells;

  AtomGrid(const FractalMeasure& m, double c) : mu(m), cell(c) {
    for (int64_t i = 0; i < mu.count(); ++i) cells[key(mu.atom(i))].push_back(i);
  }
  std::vector<int64_t> key(std::span<const double> x) const {
    std::vector<int64_t> k(x.size());
    for (size_t c = 0; c < x.size(); ++c)
      k[c] = static_cast<int64_t>(std::floor(x[c] / cell));
    return k;
  }
  bool within(std::span<const double> x, double r) const {
    auto k = key(x);
    const int d = mu.dim;
    std::vector<int64_t> nb(d);
    int64_t span = static_cast<int64_t>(std::ceil(r / cell)) + 1;
    std::vector<int64_t> off(d, -span);
    for (;;) {
      for (int c = 0; c < d; ++c) nb[c] = k[c] + off[c];
      auto it = cells.find(nb);
      if (it != cells.end())
        for (int64_t id : it->second)
          if (dist2(mu.atom(id), x) <= r) return true;
      int c = 0;
      while (c < d && ++off[c] > span) {
        off[c] = -span;
        ++c;
      }
      if (c == d) break;
    }
    return false;
  }
};

}  // namespace

FractalMeasure thicken(const FractalMeasure& mu, double h, double delta,
                       int64_t qmc_samples) {
  if (h < mu.scale_floor) throw std::invalid_argument("thicken: h below scale floor");
  const int d = mu.dim;
  Box bb = mu.bounding_box.expanded(h);
  AtomGrid grid(mu, h);

  std::vector<char> hit(static_cast<size_t>(qmc_samples), 0);
  std::vector<double> pts(static_cast<size_t>(qmc_samples) * d);
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int64_t s = 0; s < qmc_samples; ++s) {
    std::vector<double> p(d);
    for (int c = 0; c < d; ++c)
      p[c] = bb.lo[c] + halton(s + 1, kPrimes[c]) * (bb.hi[c] - bb.lo[c]);
    for (int c = 0; c < d; ++c) pts[static_cast<size_t>(s) * d + c] = p[c];
    hit[static_cast<size_t>(s)] = grid.within(p, h) ? 1 : 0;
  }

  int64_t nhit = 0;
  for (char c : hit) nhit += c;
  if (nhit == 0) throw std::invalid_argument("thicken: no samples hit the thickened set");
  const double vol = bb.volume() * static_cast<double>(nhit) /
                     static_cast<double>(qmc_samples);
  const double mass = std::pow(h, delta - d) * vol;

  FractalMeasure out;
  out.dim = d;
  out.atoms.reserve(static_cast<size_t>(nhit) * d);
  for (int64_t s = 0; s < qmc_samples; ++s)
    if (hit[static_cast<size_t>(s)])
      for (int c = 0; c < d; ++c)
        out.atoms.push_back(pts[static_cast<size_t>(s) * d + c]);
  out.weights.assign(static_cast<size_t>(nhit), mass / static_cast<double>(nhit));
  out.bounding_box = bb;
  out.scale_floor = 2.0 * std::pow(vol / static_cast<double>(nhit), 1.0 / d);
  return out;
}

namespace {

struct GridSide {
  std::vector<int64_t> lo, extent;     // index ranges per axis
  std::vector<std::vector<int64_t>> cells;  // active cell indices
  std::vector<double> centers;         // flat coordinates
  bool full_rectangle = false;
};

GridSide build_grid_side(const FractalMeasure& mu, double h, double step) {
  const int d = mu.dim;
  Box bb = mu.bounding_box.expanded(h);
  GridSide g;
  g.lo.resize(d);
  g.extent.resize(d);
  for (int c = 0; c < d; ++c) {
    g.lo[c] = static_cast<int64_t>(std::floor(bb.lo[c] / step));
    g.extent[c] = static_cast<int64_t>(std::floor(bb.hi[c] / step)) - g.lo[c] + 1;
  }
  AtomGrid atoms(mu, std::max(h, step));
  std::vector<int64_t> idx(d, 0);
  for (;;) {
    std::vector<double> center(d);
    std::vector<int64_t> cell(d);
    for (int c = 0; c < d; ++c) {
      cell[c] = g.lo[c] + idx[c];
      center[c] = (static_cast<double>(cell[c]) + 0.5) * step;
    }
    if (atoms.within(center, h)) {
      g.cells.push_back(cell);
      for (int c = 0; c < d; ++c) g.centers.push_back(center[c]);
    }
    int c = 0;
    while (c < d && ++idx[c] == g.extent[c]) {
      idx[c] = 0;
      ++c;
    }
    if (c == d) break;
  }
  // tensor fast path applies when the active set is a full index rectangle
  if (!g.cells.empty()) {
    std::vector<int64_t> mn(d, INT64_MAX), mx(d, INT64_MIN);
    for (const auto& cell : g.cells)
      for (int c = 0; c < d; ++c) {
        mn[c] = std::min(mn[c], cell[c]);
        mx[c] = std::max(mx[c], cell[c]);
      }
    int64_t prod = 1;
    for (int c = 0; c < d; ++c) prod *= (mx[c] - mn[c] + 1);
    g.full_rectangle = prod == static_cast<int64_t>(g.cells.size());
    if (g.full_rectangle) {
      g.lo = mn;
      for (int c = 0; c < d; ++c) g.extent[c] = mx[c] - mn[c] + 1;
    }
  }
  return g;
}

double grid_norm_once(const FractalMeasure& mu_x, const FractalMeasure& mu_y, double h,
                      double step, const SvOptions& sv, int64_t* rows, int64_t* cols,
                      bool* tensor) {
  const int d = mu_x.dim;
  GridSide gx = build_grid_side(mu_x, h, step);
  GridSide gy = build_grid_side(mu_y, h, step);
  if (gx.cells.empty() || gy.cells.empty())
    throw std::invalid_argument("fup_grid_norm: empty grid");
  *rows = static_cast<int64_t>(gx.cells.size());
  *cols = static_cast<int64_t>(gy.cells.size());
  const double cell_vol = std::pow(step, d);
  const double prefactor =
      std::pow(2.0 * std::numbers::pi * h, -0.5 * d) * cell_vol;

  if (gx.full_rectangle && gy.full_rectangle) {
    // kernel factorizes across axes on complete product grids
    *tensor = true;
    double sigma = prefactor;
    for (int c = 0; c < d; ++c) {
      const int64_t nr = gx.extent[c], nc = gy.extent[c];
      CMatrix m1(nr, nc);
      for (int64_t i = 0; i < nr; ++i) {
        double xi = (static_cast<double>(gx.lo[c] + i) + 0.5) * step;
        for (int64_t j = 0; j < nc; ++j) {
          double yj = (static_cast<double>(gy.lo[c] + j) + 0.5) * step;
          m1.at(i, j) = std::polar(1.0, -xi * yj / h);
        }
      }
      sigma *= largest_singular_value(m1, sv).value;
    }
    return sigma;
  }

  *tensor = false;
  const int64_t R = *rows, C = *cols;
  if (R * C <= matrix_budget()) {
    CMatrix m(R, C);
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (int64_t i = 0; i < R; ++i) {
      const double* xi = gx.centers.data() + static_cast<size_t>(i) * d;
      cdouble* row = m.a.data() + static_cast<size_t>(i) * C;
      for (int64_t j = 0; j < C; ++j) {
        const double* yj = gy.centers.data() + static_cast<size_t>(j) * d;
        double ph = 0.0;
        for (int c = 0; c < d; ++c) ph += xi[c] * yj[c];
        row[j] = std::polar(prefactor, -ph / h);
      }
    }
    return largest_singular_value(m, sv).value;
  }

  // matrix-free fallback for oversized grids
  auto apply = [&](const std::vector<cdouble>& v, std::vector<cdouble>& out) {
    out.assign(static_cast<size_t>(R), cdouble(0.0));
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (int64_t i = 0; i < R; ++i) {
      const double* xi = gx.centers.data() + static_cast<size_t>(i) * d;
      cdouble acc(0.0);
      for (int64_t j = 0; j < C; ++j) {
        const double* yj = gy.centers.data() + static_cast<size_t>(j) * d;
        double ph = 0.0;
        for (int c = 0; c < d; ++c) ph += xi[c] * yj[c];
        acc += std::polar(prefactor, -ph / h) * v[static_cast<size_t>(j)];
      }
      out[static_cast<size_t>(i)] = acc;
    }
  };
  auto applyH = [&](const std::vector<cdouble>& v, std::vector<cdouble>& out) {
    out.assign(static_cast<size_t>(C), cdouble(0.0));
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (int64_t j = 0; j < C; ++j) {
      const double* yj = gy.centers.data() + static_cast<size_t>(j) * d;
      cdouble acc(0.0);
      for (int64_t i = 0; i < R; ++i) {
        const double* xi = gx.centers.data() + static_cast<size_t>(i) * d;
        double ph = 0.0;
        for (int c = 0; c < d; ++c) ph += xi[c] * yj[c];
        acc += std::polar(prefactor, ph / h) * v[static_cast<size_t>(i)];
      }
      out[static_cast<size_t>(j)] = acc;
    }
  };
  return largest_singular_value_matfree(apply, applyH, R, C, sv).value;
}

}  // namespace

FupGridResult fup_grid_norm(const FractalMeasure& mu_x, const FractalMeasure& mu_y,
                            double h, double grid_step, const FupGridOptions& opts) {
  if (grid_step > h / 4.0 * (1.0 + 1e-12))
    throw std::invalid_argument("fup_grid_norm: grid_step > h/4");
  FupGridResult res;
  res.norm = grid_norm_once(mu_x, mu_y, h, grid_step, opts.sv, &res.rows, &res.cols,
                            &res.tensor_path);
  if (opts.check_refinement) {
    int64_t r2, c2;
    bool t2;
    res.refined_norm =
        grid_norm_once(mu_x, mu_y, h, grid_step / 2.0, opts.sv, &r2, &c2, &t2);
    if (std::abs(res.refined_norm - res.norm) > 0.02 * std::max(res.norm, 1e-300))
      throw std::invalid_argument("fup_grid_norm: grid too coarse");
  }
  return res;
}

double fup_grid_rayleigh(const FractalMeasure& mu_x, const FractalMeasure& mu_y,
                         double h, double grid_step,
                         const std::function<cdouble(std::span<const double>)>& u) {
  const int d = mu_x.dim;
  GridSide gx = build_grid_side(mu_x, h, grid_step);
  GridSide gy = build_grid_side(mu_y, h, grid_step);
  const double cell_vol = std::pow(grid_step, d);
  const double prefactor =
      std::pow(2.0 * std::numbers::pi * h, -0.5 * d) * cell_vol;

  const int64_t C = static_cast<int64_t>(gy.cells.size());
  const int64_t R = static_cast<int64_t>(gx.cells.size());
  std::vector<cdouble> v(static_cast<size_t>(C));
  double unorm2 = 0.0;
  for (int64_t j = 0; j < C; ++j) {
    std::span<const double> yj(gy.centers.data() + static_cast<size_t>(j) * d,
                               static_cast<size_t>(d));
    v[static_cast<size_t>(j)] = u(yj);
    unorm2 += std::norm(v[static_cast<size_t>(j)]);
  }
  if (unorm2 <= 0.0) throw std::invalid_argument("fup_grid_rayleigh: zero witness");

  std::vector<double> out_norm2(static_cast<size_t>(R), 0.0);
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int64_t i = 0; i < R; ++i) {
    const double* xi = gx.centers.data() + static_cast<size_t>(i) * d;
    cdouble acc(0.0);
    for (int64_t j = 0; j < C; ++j) {
      const double* yj = gy.centers.data() + static_cast<size_t>(j) * d;
      double ph = 0.0;
      for (int c = 0; c < d; ++c) ph += xi[c] * yj[c];
      acc += std::polar(prefactor, -ph / h) * v[static_cast<size_t>(j)];
    }
    out_norm2[static_cast<size_t>(i)] = std::norm(acc);
  }
  double tnorm2 = 0.0;
  for (int64_t i = 0; i < R; ++i) tnorm2 += out_norm2[static_cast<size_t>(i)];
  // cell volumes cancel in the quotient
  return std::sqrt(tnorm2 / unorm2);
}

SweepResult norm_sweep(const std::function<double(double)>& norm_at,
                       const std::vector<double>& h_values, double baseline) {
  if (h_values.size() < 3)
    throw std::invalid_argument("norm_sweep: need at least 3 h values");
  double hmin = h_values[0], hmax = h_values[0];
  for (double h : h_values) {
    hmin = std::min(hmin, h);
    hmax = std::max(hmax, h);
  }
  if (hmax / hmin < 4.0 * (1.0 - 1e-12))
    throw std::invalid_argument("norm_sweep: h values span fewer than 2 octaves");

  SweepResult res;
  res.baseline = baseline;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double h : h_values) {
    double nrm = norm_at(h);
    res.table.push_back({h, nrm});
    double lx = std::log(h), ly = std::log(nrm);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(h_values.size());
  res.fitted_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  res.intercept = (sy - res.fitted_slope * sx) / n;
  res.gain = res.fitted_slope - baseline;
  return res;
}

std::string SweepResult::csv() const {
  std::ostringstream os;
  os << "h,norm,log_h,log_norm\n";
  os.precision(17);
  for (const auto& row : table)
    os << row.h << ',' << row.norm << ',' << std::log(row.h) << ','
       << std::log(row.norm) << '\n';
  return os.str();
}

std::string SweepResult::to_json() const {
  nlohmann::json j;
  j["fitted_slope"] = fitted_slope;
  j["intercept"] = intercept;
  j["baseline"] = baseline;
  j["gain"] = gain;
  auto& arr = j["table"] = nlohmann::json::array();
  for (const auto& row : table) arr.push_back({{"h", row.h}, {"norm", row.norm}});
  return j.dump(2);
}

}  // namespace fuplab
