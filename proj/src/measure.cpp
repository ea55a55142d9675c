#include "fuplab/measure.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "json.hpp"

namespace fuplab {

double FractalMeasure::total_mass() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

void FractalMeasure::validate(bool probability) const {
  if (dim < 1) throw std::invalid_argument("measure: dim < 1");
  if (atoms.size() != weights.size() * static_cast<size_t>(dim))
    throw std::invalid_argument("measure: atom/weight count mismatch");
  if (weights.empty()) throw std::invalid_argument("measure: no atoms");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("measure: negative or non-finite weight");
    total += w;
  }
  if (!(total > 0.0) || !std::isfinite(total))
    throw std::invalid_argument("measure: non-positive total mass");
  if (probability && std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("measure: not a probability measure");
  if (bounding_box.dim() != dim)
    throw std::invalid_argument("measure: bounding box dim mismatch");
  // closed-box containment: generators place atoms on the closure
  for (int64_t i = 0; i < count(); ++i) {
    auto x = atom(i);
    for (int j = 0; j < dim; ++j)
      if (x[j] < bounding_box.lo[j] - 1e-15 || x[j] > bounding_box.hi[j] + 1e-15)
        throw std::invalid_argument("measure: atom outside bounding box");
  }
  if (!(scale_floor > 0.0) || scale_floor >= bounding_box.min_side())
    throw std::invalid_argument("measure: bad scale_floor");
}

FractalMeasure make_cantor_measure(int M, int dim,
                                   const std::vector<std::vector<int>>& alphabet,
                                   int k, int64_t atom_budget) {
  if (M < 3) throw std::invalid_argument("cantor: M < 3");
  if (k < 1) throw std::invalid_argument("cantor: k < 1");
  if (alphabet.empty()) throw std::invalid_argument("cantor: empty alphabet");
  for (const auto& a : alphabet) {
    if (static_cast<int>(a.size()) != dim)
      throw std::invalid_argument("cantor: digit dim mismatch");
    for (int v : a)
      if (v < 0 || v >= M) throw std::invalid_argument("cantor: digit out of range");
  }
  const int64_t na = static_cast<int64_t>(alphabet.size());
  int64_t n = 1;
  for (int i = 0; i < k; ++i) {
    if (n > atom_budget / na) throw BudgetError("cantor: atom budget exceeded");
    n *= na;
  }

  FractalMeasure mu;
  mu.dim = dim;
  mu.atoms.resize(static_cast<size_t>(n) * dim);
  mu.weights.assign(static_cast<size_t>(n), 1.0 / static_cast<double>(n));
  mu.scale_floor = std::pow(static_cast<double>(M), -k);
  mu.bounding_box = Box(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));

  const double Nk = std::pow(static_cast<double>(M), k);
  std::vector<int> digits(k, 0);  // digits[0] = a_0 (least significant)
  std::vector<int64_t> coord(dim);
  for (int64_t idx = 0;; ++idx) {
    for (int j = 0; j < dim; ++j) coord[j] = 0;
    int64_t pw = 1;
    for (int i = 0; i < k; ++i) {
      const auto& a = alphabet[digits[i]];
      for (int j = 0; j < dim; ++j) coord[j] += a[j] * pw;
      pw *= M;
    }
    // exact integer coordinates divided once
    for (int j = 0; j < dim; ++j)
      mu.atoms[static_cast<size_t>(idx) * dim + j] = static_cast<double>(coord[j]) / Nk;
    int carry = 0;
    while (carry < k && ++digits[carry] == static_cast<int>(na)) {
      digits[carry] = 0;
      ++carry;
    }
    if (carry == k) break;
  }
  return mu;
}

FractalMeasure make_carpet_measure(int level, int64_t atom_budget) {
  if (level < 1) throw std::invalid_argument("carpet: level < 1");
  std::vector<std::vector<int>> alphabet;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (!(i == 1 && j == 1)) alphabet.push_back({i, j});
  return make_cantor_measure(3, 2, alphabet, level, atom_budget);
}

SegmentPair make_segment_pair(int64_t atoms_per_segment) {
  if (atoms_per_segment < 2) throw std::invalid_argument("segments: too few atoms");
  SegmentPair out;
  out.scale = 10.0;
  out.offset = {-5.0, -5.0};

  auto build = [&](bool horizontal) {
    FractalMeasure mu;
    mu.dim = 2;
    mu.atoms.resize(static_cast<size_t>(atoms_per_segment) * 2);
    mu.weights.assign(static_cast<size_t>(atoms_per_segment),
                      1.0 / static_cast<double>(atoms_per_segment));
    const double step = 1.0 / static_cast<double>(atoms_per_segment - 1);
    for (int64_t i = 0; i < atoms_per_segment; ++i) {
      double t = static_cast<double>(i) * step;
      double u = horizontal ? t : 0.5;
      double v = horizontal ? 0.5 : t;
      mu.atoms[i * 2] = u;
      mu.atoms[i * 2 + 1] = v;
    }
    mu.scale_floor = step;
    mu.bounding_box = Box({0.0, 0.0}, {1.0, 1.0});
    return mu;
  };
  out.x = build(true);
  out.y = build(false);
  return out;
}

namespace {
uint64_t bits_of(double v) {
  uint64_t u;
  std::memcpy(&u, &v, sizeof(u));
  return u;
}
double double_of(uint64_t u) {
  double v;
  std::memcpy(&v, &u, sizeof(v));
  return v;
}
}  // namespace

std::string measure_to_json(const FractalMeasure& mu) {
  nlohmann::json j;
  j["dim"] = mu.dim;
  auto& atoms = j["atoms"] = nlohmann::json::array();
  for (int64_t i = 0; i < mu.count(); ++i) {
    nlohmann::json pt = nlohmann::json::array();
    for (int c = 0; c < mu.dim; ++c) pt.push_back(mu.atoms[i * mu.dim + c]);
    atoms.push_back(std::move(pt));
  }
  j["weights"] = mu.weights;
  j["scale_floor"] = mu.scale_floor;
  j["bounding_box"] = {{"lo", mu.bounding_box.lo}, {"hi", mu.bounding_box.hi}};
  // doubles additionally carried as hex bit patterns so round-trips are
  // bit-exact regardless of the decimal printer
  auto& bits = j["atom_bits"] = nlohmann::json::array();
  for (double v : mu.atoms) bits.push_back(bits_of(v));
  auto& wbits = j["weight_bits"] = nlohmann::json::array();
  for (double v : mu.weights) wbits.push_back(bits_of(v));
  return j.dump(2);
}

FractalMeasure measure_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  FractalMeasure mu;
  mu.dim = j.at("dim").get<int>();
  if (j.contains("atom_bits")) {
    for (const auto& u : j.at("atom_bits")) mu.atoms.push_back(double_of(u.get<uint64_t>()));
    for (const auto& u : j.at("weight_bits"))
      mu.weights.push_back(double_of(u.get<uint64_t>()));
  } else {
    for (const auto& pt : j.at("atoms"))
      for (const auto& v : pt) mu.atoms.push_back(v.get<double>());
    mu.weights = j.at("weights").get<std::vector<double>>();
  }
  mu.scale_floor = j.at("scale_floor").get<double>();
  mu.bounding_box = Box(j.at("bounding_box").at("lo").get<std::vector<double>>(),
                        j.at("bounding_box").at("hi").get<std::vector<double>>());
  return mu;
}

}  // namespace fuplab
