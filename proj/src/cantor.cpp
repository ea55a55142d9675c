#include "fuplab/cantor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fuplab/parallel.hpp"

namespace fuplab {

void CantorSpec::validate() const {
  if (M < 3) throw std::invalid_argument("cantor spec: M < 3");
  if (d < 1) throw std::invalid_argument("cantor spec: d < 1");
  if (k < 1) throw std::invalid_argument("cantor spec: k < 1");
  if (A.empty() || B.empty()) throw std::invalid_argument("cantor spec: empty alphabet");
  for (const auto* alpha : {&A, &B})
    for (const auto& digit : *alpha) {
      if (static_cast<int>(digit.size()) != d)
        throw std::invalid_argument("cantor spec: digit dim mismatch");
      for (int v : digit)
        if (v < 0 || v >= M) throw std::invalid_argument("cantor spec: digit range");
    }
  // N^d grid budget
  double nd = std::pow(static_cast<double>(M), static_cast<double>(k) * d);
  if (nd > static_cast<double>(matrix_budget()))
    throw BudgetError("cantor spec: N^d exceeds budget");
}

int64_t CantorSpec::N() const {
  int64_t n = 1;
  for (int i = 0; i < k; ++i) n *= M;
  return n;
}

double CantorSpec::delta_A() const {
  return std::log(static_cast<double>(A.size())) / std::log(static_cast<double>(M));
}
double CantorSpec::delta_B() const {
  return std::log(static_cast<double>(B.size())) / std::log(static_cast<double>(M));
}
double CantorSpec::beta() const { return 0.5 * (d - delta_A() - delta_B()); }

std::vector<std::vector<int>> digits1d(std::initializer_list<int> v) {
  std::vector<std::vector<int>> out;
  for (int x : v) out.push_back({x});
  return out;
}

std::vector<std::vector<int64_t>> cantor_points(const CantorSpec& spec, bool rows) {
  spec.validate();
  const auto& alpha = rows ? spec.A : spec.B;
  const int64_t na = static_cast<int64_t>(alpha.size());
  int64_t n = 1;
  for (int i = 0; i < spec.k; ++i) {
    require_budget(n * na, "cantor_points");
    n *= na;
  }
  std::vector<std::vector<int64_t>> pts;
  pts.reserve(static_cast<size_t>(n));
  std::vector<int> digit_idx(spec.k, 0);
  for (;;) {
    std::vector<int64_t> p(spec.d, 0);
    int64_t pw = 1;
    for (int i = 0; i < spec.k; ++i) {
      const auto& a = alpha[digit_idx[i]];
      for (int j = 0; j < spec.d; ++j) p[j] += a[j] * pw;
      pw *= spec.M;
    }
    pts.push_back(std::move(p));
    int carry = 0;
    while (carry < spec.k && ++digit_idx[carry] == static_cast<int>(na)) {
      digit_idx[carry] = 0;
      ++carry;
    }
    if (carry == spec.k) break;
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

namespace {

// exact integer phase <j, l> mod N
int64_t phase_mod(const std::vector<int64_t>& j, const std::vector<int64_t>& l,
                  int64_t N) {
  int64_t t = 0;
  for (size_t c = 0; c < j.size(); ++c) {
    int64_t p = (j[c] % N) * (l[c] % N) % N;
    t = (t + p) % N;
  }
  return t;
}

struct PhaseTable {
  int64_t N;
  std::vector<cdouble> tab;  // built when N is small
  explicit PhaseTable(int64_t n) : N(n) {
    if (N <= (1 << 22)) {
      tab.resize(static_cast<size_t>(N));
      for (int64_t t = 0; t < N; ++t) {
        double ang = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(N);
        tab[static_cast<size_t>(t)] = cdouble(std::cos(ang), std::sin(ang));
      }
    }
  }
  cdouble operator()(int64_t t) const {
    if (!tab.empty()) return tab[static_cast<size_t>(t)];
    double ang = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(N);
    return cdouble(std::cos(ang), std::sin(ang));
  }
};

}  // namespace

CMatrix fup_matrix(const CantorSpec& spec) {
  auto rows = cantor_points(spec, true);
  auto cols = cantor_points(spec, false);
  const int64_t N = spec.N();
  require_budget(static_cast<int64_t>(rows.size()) * static_cast<int64_t>(cols.size()),
                 "fup_matrix");
  CMatrix m(static_cast<int64_t>(rows.size()), static_cast<int64_t>(cols.size()));
  const double scale = std::pow(static_cast<double>(N), -0.5 * spec.d);
  PhaseTable table(N);
  const int64_t R = m.rows;
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int64_t i = 0; i < R; ++i) {
    cdouble* out = m.a.data() + static_cast<size_t>(i) * m.cols;
    for (int64_t j = 0; j < m.cols; ++j)
      out[j] = scale * table(phase_mod(rows[static_cast<size_t>(i)],
                                       cols[static_cast<size_t>(j)], N));
  }
  return m;
}

double fup_hs_norm(const CantorSpec& spec) {
  auto rows = cantor_points(spec, true);
  auto cols = cantor_points(spec, false);
  const int64_t N = spec.N();
  const double scale = std::pow(static_cast<double>(N), -0.5 * spec.d);
  PhaseTable table(N);
  double s = 0.0;
  for (const auto& j : rows)
    for (const auto& l : cols) s += std::norm(scale * table(phase_mod(j, l, N)));
  return std::sqrt(s);
}

FupNormReport fup_norm(const CantorSpec& spec, const SvOptions& opts) {
  CMatrix m = fup_matrix(spec);
  FupNormReport rep;
  rep.N = spec.N();
  rep.rows = m.rows;
  rep.cols = m.cols;
  rep.hs = frobenius_norm(m);
  rep.r = largest_singular_value(m, opts).value;
  rep.beta = spec.beta();
  rep.gain = -std::log(rep.r) / std::log(static_cast<double>(rep.N)) - rep.beta;
  return rep;
}

SubmultReport submultiplicativity_check(const CantorSpec& base, int k1, int k2,
                                        const SvOptions& opts) {
  SubmultReport rep;
  rep.r_k1 = fup_norm(base.with_k(k1), opts).r;
  rep.r_k2 = fup_norm(base.with_k(k2), opts).r;
  rep.r_sum = fup_norm(base.with_k(k1 + k2), opts).r;
  rep.slack = rep.r_k1 * rep.r_k2 - rep.r_sum;
  return rep;
}

std::pair<bool, std::optional<MinorWitness>> minor_test(const CantorSpec& spec) {
  CantorSpec s1 = spec.with_k(1);
  s1.validate();
  for (const auto& j : s1.A)
    for (const auto& jp : s1.A)
      for (const auto& l : s1.B)
        for (const auto& lp : s1.B) {
          int64_t inner = 0;
          for (int c = 0; c < s1.d; ++c)
            inner += static_cast<int64_t>(j[c] - jp[c]) * (l[c] - lp[c]);
          int64_t mod = ((inner % s1.M) + s1.M) % s1.M;
          if (mod != 0) {
            MinorWitness w;
            w.j = j;
            w.jp = jp;
            w.l = l;
            w.lp = lp;
            w.inner = mod;
            return {true, w};
          }
        }
  return {false, std::nullopt};
}

std::vector<SweepRow> exponent_sweep(const CantorSpec& base, int k_max,
                                     const SvOptions& opts) {
  std::vector<SweepRow> rows;
  for (int k = 1; k <= k_max; ++k) {
    auto rep = fup_norm(base.with_k(k), opts);
    rows.push_back({k, rep.N, rep.r, rep.hs, rep.beta, rep.gain});
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "k,N,r,hs,beta,gain\n";
  os.precision(17);
  for (const auto& row : rows)
    os << row.k << ',' << row.N << ',' << row.r << ',' << row.hs << ',' << row.beta
       << ',' << row.gain << '\n';
  return os.str();
}

}  // namespace fuplab
