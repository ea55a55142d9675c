#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace fuplab {

/// Axis-aligned half-open box [lo, hi) in R^d.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;
  Box(std::vector<double> lo_, std::vector<double> hi_)
      : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size()) throw std::invalid_argument("box: dim mismatch");
  }
  static Box cube(std::span<const double> corner, double side) {
    std::vector<double> l(corner.begin(), corner.end()), h(l);
    for (auto& v : h) v += side;
    return Box(std::move(l), std::move(h));
  }

  int dim() const { return static_cast<int>(lo.size()); }

  bool empty() const {
    for (int i = 0; i < dim(); ++i)
      if (!(lo[i] < hi[i])) return true;
    return false;
  }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
    return v;
  }

  bool contains(std::span<const double> x) const {
    for (int i = 0; i < dim(); ++i)
      if (!(x[i] >= lo[i] && x[i] < hi[i])) return false;
    return true;
  }

  std::vector<double> center() const {
    std::vector<double> c(lo.size());
    for (size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
    return c;
  }

  double min_side() const {
    double s = hi[0] - lo[0];
    for (int i = 1; i < dim(); ++i) s = std::min(s, hi[i] - lo[i]);
    return s;
  }
  double max_side() const {
    double s = hi[0] - lo[0];
    for (int i = 1; i < dim(); ++i) s = std::max(s, hi[i] - lo[i]);
    return s;
  }

  /// Euclidean diameter.
  double diam() const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    return std::sqrt(s);
  }

  /// Dilation by factor alpha about the barycenter.
  Box dilated(double alpha) const {
    Box b(*this);
    for (int i = 0; i < dim(); ++i) {
      double c = 0.5 * (lo[i] + hi[i]);
      double half = 0.5 * (hi[i] - lo[i]) * alpha;
      b.lo[i] = c - half;
      b.hi[i] = c + half;
    }
    return b;
  }

  /// Expand every face outward by t.
  Box expanded(double t) const {
    Box b(*this);
    for (int i = 0; i < dim(); ++i) {
      b.lo[i] -= t;
      b.hi[i] += t;
    }
    return b;
  }

  bool intersects(const Box& o) const {
    for (int i = 0; i < dim(); ++i)
      if (lo[i] >= o.hi[i] || o.lo[i] >= hi[i]) return false;
    return true;
  }

  Box intersection(const Box& o) const {
    Box b(*this);
    for (int i = 0; i < dim(); ++i) {
      b.lo[i] = std::max(lo[i], o.lo[i]);
      b.hi[i] = std::min(hi[i], o.hi[i]);
      if (b.hi[i] < b.lo[i]) b.hi[i] = b.lo[i];
    }
    return b;
  }

  /// dist_inf from an interior point to the box boundary (0 if outside).
  double interior_distance(std::span<const double> x) const {
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim(); ++i) {
      d = std::min(d, x[i] - lo[i]);
      d = std::min(d, hi[i] - x[i]);
    }
    return std::max(0.0, d);
  }

  /// dist_inf from a point to the k-boundary of the closed box: the k-th
  /// smallest per-coordinate face distance, for a point inside the box.
  double skeleton_distance(std::span<const double> x, int k) const {
    const int d = dim();
    if (k < 1 || k > d) throw std::invalid_argument("skeleton_distance: bad k");
    std::vector<double> m(d);
    for (int i = 0; i < d; ++i)
      m[i] = std::min(x[i] - lo[i], hi[i] - x[i]);
    std::nth_element(m.begin(), m.begin() + (k - 1), m.end());
    return m[k - 1];
  }
};

inline double dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double dist_inf(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

/// Finite union of pairwise-disjoint half-open boxes. All set operations
/// preserve disjointness, so volumes and membership are exact.
class Region {
 public:
  Region() = default;
  explicit Region(Box b) {
    if (!b.empty()) boxes_.push_back(std::move(b));
  }

  const std::vector<Box>& boxes() const { return boxes_; }
  bool empty() const { return boxes_.empty(); }
  int dim() const { return boxes_.empty() ? 0 : boxes_[0].dim(); }

  double volume() const {
    double v = 0.0;
    for (const auto& b : boxes_) v += b.volume();
    return v;
  }

  bool contains(std::span<const double> x) const {
    for (const auto& b : boxes_)
      if (b.contains(x)) return true;
    return false;
  }

  Box bounding_box() const {
    if (boxes_.empty()) return Box();
    Box bb = boxes_[0];
    for (size_t i = 1; i < boxes_.size(); ++i)
      for (int j = 0; j < bb.dim(); ++j) {
        bb.lo[j] = std::min(bb.lo[j], boxes_[i].lo[j]);
        bb.hi[j] = std::max(bb.hi[j], boxes_[i].hi[j]);
      }
    return bb;
  }

  double diam() const {
    // max Euclidean distance between corners of member boxes
    double best = 0.0;
    for (size_t i = 0; i < boxes_.size(); ++i)
      for (size_t j = i; j < boxes_.size(); ++j) {
        double s = 0.0;
        for (int c = 0; c < boxes_[i].dim(); ++c) {
          double lo = std::min(boxes_[i].lo[c], boxes_[j].lo[c]);
          double hi = std::max(boxes_[i].hi[c], boxes_[j].hi[c]);
          s += (hi - lo) * (hi - lo);
        }
        best = std::max(best, s);
      }
    return std::sqrt(best);
  }

  void add(const Box& b) {
    if (b.empty()) return;
    std::vector<Box> pieces{b};
    for (const auto& mine : boxes_) {
      std::vector<Box> next;
      for (const auto& p : pieces) subtract_box(p, mine, next);
      pieces.swap(next);
      if (pieces.empty()) return;
    }
    for (auto& p : pieces) boxes_.push_back(std::move(p));
  }

  void add(const Region& r) {
    for (const auto& b : r.boxes()) add(b);
  }

  void subtract(const Box& b) {
    if (b.empty()) return;
    std::vector<Box> next;
    for (const auto& mine : boxes_) subtract_box(mine, b, next);
    boxes_.swap(next);
  }

  void subtract(const Region& r) {
    for (const auto& b : r.boxes()) subtract(b);
  }

  Region intersect(const Box& b) const {
    Region out;
    for (const auto& mine : boxes_) {
      Box c = mine.intersection(b);
      if (!c.empty()) out.boxes_.push_back(std::move(c));
    }
    return out;
  }

  double intersection_volume(const Region& other) const {
    double v = 0.0;
    for (const auto& b : other.boxes()) v += intersect(b).volume();
    return v;
  }

  /// volume of (*this) \ other
  double difference_volume(const Region& other) const {
    return volume() - intersection_volume(other);
  }

  /// dist_inf from a point of the region to its boundary, by bisection on
  /// the largest t with B_inf(x,t) inside the region (up to null sets).
  double interior_distance(std::span<const double> x, double hi_guess) const {
    if (!contains(x)) return 0.0;
    auto fits = [&](double t) {
      Box c = Box::cube(x, 0.0).expanded(t);
      double vol = c.volume();
      if (vol <= 0.0) return true;
      return intersect_volume_box(c) >= vol * (1.0 - 1e-12);
    };
    double lo = 0.0, hi = std::max(hi_guess, 1e-300);
    while (fits(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e6) return hi;
    }
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      if (fits(mid))
        lo = mid;
      else
        hi = mid;
    }
    return lo;
  }

 private:
  double intersect_volume_box(const Box& b) const {
    double v = 0.0;
    for (const auto& mine : boxes_) v += mine.intersection(b).volume();
    return v;
  }

  // a \ b appended to out as disjoint boxes
  static void subtract_box(const Box& a, const Box& b, std::vector<Box>& out) {
    if (!a.intersects(b)) {
      out.push_back(a);
      return;
    }
    Box cur = a;
    for (int i = 0; i < a.dim(); ++i) {
      if (b.lo[i] > cur.lo[i]) {
        Box piece = cur;
        piece.hi[i] = b.lo[i];
        if (!piece.empty()) out.push_back(std::move(piece));
        cur.lo[i] = b.lo[i];
      }
      if (b.hi[i] < cur.hi[i]) {
        Box piece = cur;
        piece.lo[i] = b.hi[i];
        if (!piece.empty()) out.push_back(std::move(piece));
        cur.hi[i] = b.hi[i];
      }
    }
    // what remains of cur lies inside b and is dropped
  }

  std::vector<Box> boxes_;
};

}  // namespace fuplab
