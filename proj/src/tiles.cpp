#include "fuplab/tiles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

namespace fuplab {

namespace {

using Key = std::vector<int64_t>;

// cube index aligned with half-open box-bound comparisons
int64_t cube_index_1d(double x, double side) {
  int64_t q = static_cast<int64_t>(std::floor(x / side));
  while (x < static_cast<double>(q) * side) --q;
  while (x >= static_cast<double>(q + 1) * side) ++q;
  return q;
}

Key cube_key(std::span<const double> x, double side) {
  Key k(x.size());
  for (size_t i = 0; i < x.size(); ++i) k[i] = cube_index_1d(x[i], side);
  return k;
}

Box cube_box(const Key& idx, double side) {
  std::vector<double> lo(idx.size()), hi(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) {
    lo[i] = static_cast<double>(idx[i]) * side;
    hi[i] = static_cast<double>(idx[i] + 1) * side;
  }
  return Box(std::move(lo), std::move(hi));
}

std::map<Key, std::vector<int64_t>> atoms_by_cube(const FractalMeasure& mu, double side) {
  std::map<Key, std::vector<int64_t>> groups;
  for (int64_t i = 0; i < mu.count(); ++i) groups[cube_key(mu.atom(i), side)].push_back(i);
  return groups;
}

double level_side(int64_t L, int n) {
  return std::pow(static_cast<double>(L), -static_cast<double>(n));
}

// working tile during the per-level perturbation
struct PTile {
  Key idx;
  Box cube;
  Region region;
  std::vector<int64_t> atoms;
  bool good = false;
  std::vector<int64_t> anchor_candidates;  // atom ids
};

double min_face_dist(std::span<const double> x, const Box& cube) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cube.dim(); ++i)
    m = std::min(m, std::min(x[i] - cube.lo[i], cube.hi[i] - x[i]));
  return m;
}

int atom_high_type(std::span<const double> x, const Box& cube, double half_r) {
  // number of coordinates with face distance > r/2; the tile type is the max
  int t = 0;
  for (int i = 0; i < cube.dim(); ++i)
    if (std::min(x[i] - cube.lo[i], cube.hi[i] - x[i]) > half_r) ++t;
  return t;
}

int tile_type(const PTile& t, const FractalMeasure& mu, double half_r) {
  if (t.atoms.empty()) return -1;
  int ty = 0;
  for (int64_t id : t.atoms) ty = std::max(ty, atom_high_type(mu.atom(id), t.cube, half_r));
  return ty;
}

// enumerate subsets of {0..d-1} of given size, lexicographic
void enumerate_pin_sets(int d, int size, std::vector<std::vector<int>>& out) {
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == size) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < d; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
}

struct Component {
  std::vector<int> pins;
  std::vector<int> sides;  // 0 = lo face, 1 = hi face, per pin
};

// perturbation of one level: modifies cubes into good tiles per the
// absorption lemma, preserving the three construction invariants
std::map<Key, PTile> perturb_level(const FractalMeasure& mu, int64_t L, int n) {
  const int d = mu.dim;
  const double side = level_side(L, n);
  const double r = std::pow(static_cast<double>(L), -(static_cast<double>(n) + 2.0 / 3.0));
  const double half_r = 0.5 * r;

  std::map<Key, PTile> tiles;
  for (auto& [key, ids] : atoms_by_cube(mu, side)) {
    PTile t;
    t.idx = key;
    t.cube = cube_box(key, side);
    t.region = Region(t.cube);
    t.atoms = ids;
    double best = -1.0;
    int64_t best_id = ids.front();
    for (int64_t id : ids) {
      double m = min_face_dist(mu.atom(id), t.cube);
      if (m > best) {
        best = m;
        best_id = id;
      }
    }
    t.good = best >= r / 5.0;
    t.anchor_candidates.push_back(best_id);
    tiles.emplace(key, std::move(t));
  }

  auto move_atoms = [&](PTile& from, PTile& to, const Box& where) {
    std::vector<int64_t> keep;
    for (int64_t id : from.atoms) {
      if (where.contains(mu.atom(id)))
        to.atoms.push_back(id);
      else
        keep.push_back(id);
    }
    from.atoms.swap(keep);
    std::sort(to.atoms.begin(), to.atoms.end());
  };

  for (int stage = d - 1; stage >= 0; --stage) {
    const int pin_count = d - stage;
    std::vector<std::vector<int>> pin_sets;
    enumerate_pin_sets(d, pin_count, pin_sets);

    std::vector<Key> order;
    order.reserve(tiles.size());
    for (const auto& [key, t] : tiles) order.push_back(key);

    for (const auto& key : order) {
      PTile& t = tiles.at(key);
      if (t.atoms.empty() || t.good) continue;
      int ty = tile_type(t, mu, half_r);
      if (ty > stage)
        throw DiscretizationError("type invariant violated at level " +
                                  std::to_string(n) + " stage " + std::to_string(stage));
      if (ty != stage) continue;

      for (const auto& pins : pin_sets) {
        if (t.good) break;
        const int nsides = 1 << pin_count;
        for (int mask = 0; mask < nsides && !t.good; ++mask) {
          Component comp;
          comp.pins = pins;
          for (int b = 0; b < pin_count; ++b) comp.sides.push_back((mask >> b) & 1);

          std::vector<double> cvals(pin_count);
          for (int b = 0; b < pin_count; ++b)
            cvals[b] = comp.sides[b] ? t.cube.hi[pins[b]] : t.cube.lo[pins[b]];

          // trigger: an atom of T within r/2 of the trimmed face component
          std::vector<int64_t> trig;
          for (int64_t id : t.atoms) {
            auto x = mu.atom(id);
            bool in_tube = true;
            for (int b = 0; b < pin_count && in_tube; ++b)
              in_tube = std::abs(x[pins[b]] - cvals[b]) < half_r;
            for (int i = 0; i < d && in_tube; ++i) {
              if (std::find(pins.begin(), pins.end(), i) != pins.end()) continue;
              in_tube = (x[i] - t.cube.lo[i] >= half_r) && (t.cube.hi[i] - x[i] >= half_r);
            }
            if (in_tube) trig.push_back(id);
          }
          if (trig.empty()) continue;

          // tube box around the trimmed component
          Box tube = t.cube;
          for (int b = 0; b < pin_count; ++b) {
            tube.lo[pins[b]] = cvals[b] - half_r;
            tube.hi[pins[b]] = cvals[b] + half_r;
          }
          for (int i = 0; i < d; ++i) {
            if (std::find(pins.begin(), pins.end(), i) != pins.end()) continue;
            tube.lo[i] = t.cube.lo[i] + half_r;
            tube.hi[i] = t.cube.hi[i] - half_r;
          }

          // tiles sharing the component
          std::vector<Key> adjacent;
          std::vector<Key> offsets{Key(d, 0)};
          for (int b = 0; b < pin_count; ++b) {
            size_t cur = offsets.size();
            for (size_t o = 0; o < cur; ++o) {
              Key shifted = offsets[o];
              shifted[pins[b]] += comp.sides[b] ? 1 : -1;
              offsets.push_back(std::move(shifted));
            }
          }
          for (size_t o = 1; o < offsets.size(); ++o) {
            Key nb(d);
            for (int i = 0; i < d; ++i) nb[i] = key[i] + offsets[o][i];
            if (tiles.count(nb)) adjacent.push_back(nb);
          }
          std::sort(adjacent.begin(), adjacent.end());

          const Key* good_nb = nullptr;
          for (const auto& nb : adjacent)
            if (tiles.at(nb).good && !tiles.at(nb).atoms.empty()) {
              good_nb = &nb;
              break;
            }

          if (good_nb) {
            // case 1: the good neighbor absorbs the tube piece of T
            PTile& dst = tiles.at(*good_nb);
            Region moved = t.region.intersect(tube);
            for (const auto& b : moved.boxes()) dst.region.add(b);
            t.region.subtract(tube);
            move_atoms(t, dst, tube);
            if (t.atoms.empty()) break;
          } else {
            // case 2: T absorbs the tubular neighborhood and becomes good
            Box ball = t.cube;
            double quarter = 0.25 * r;
            for (int b = 0; b < pin_count; ++b) {
              ball.lo[pins[b]] = cvals[b] - quarter;
              ball.hi[pins[b]] = cvals[b] + quarter;
            }
            for (int i = 0; i < d; ++i) {
              if (std::find(pins.begin(), pins.end(), i) != pins.end()) continue;
              ball.lo[i] = t.cube.lo[i] + quarter;
              ball.hi[i] = t.cube.hi[i] - quarter;
            }
            for (const auto& nb : adjacent) {
              PTile& u = tiles.at(nb);
              Region stolen = u.region.intersect(tube);
              Region stolen2 = u.region.intersect(ball);
              for (const auto& b : stolen.boxes()) t.region.add(b);
              for (const auto& b : stolen2.boxes()) t.region.add(b);
              u.region.subtract(tube);
              u.region.subtract(ball);
              move_atoms(u, t, tube);
              move_atoms(u, t, ball);
            }
            t.region.add(tube);
            t.region.add(ball);
            t.good = true;
            for (size_t q = 0; q < trig.size() && q < 4; ++q)
              t.anchor_candidates.push_back(trig[q]);
          }
        }
      }
    }
  }

  // drop emptied tiles; everything that kept atoms must be good
  for (auto it = tiles.begin(); it != tiles.end();) {
    if (it->second.atoms.empty()) {
      it = tiles.erase(it);
      continue;
    }
    if (!it->second.good)
      throw DiscretizationError("bad tile survived perturbation at level " +
                                std::to_string(n));
    ++it;
  }
  return tiles;
}

// best anchor among candidates, by interior distance in the tile region
void finalize_anchor(PTile& t, const FractalMeasure& mu, double r) {
  std::sort(t.anchor_candidates.begin(), t.anchor_candidates.end());
  t.anchor_candidates.erase(
      std::unique(t.anchor_candidates.begin(), t.anchor_candidates.end()),
      t.anchor_candidates.end());
  double best = -1.0;
  int64_t best_id = -1;
  for (int64_t id : t.anchor_candidates) {
    if (!std::binary_search(t.atoms.begin(), t.atoms.end(), id)) continue;
    double dd = t.region.interior_distance(mu.atom(id), r);
    if (dd > best) {
      best = dd;
      best_id = id;
    }
  }
  if (best < r / 5.0 * (1.0 - 1e-9)) {
    // fall back to a full scan before declaring failure
    for (int64_t id : t.atoms) {
      double dd = t.region.interior_distance(mu.atom(id), r);
      if (dd > best) {
        best = dd;
        best_id = id;
      }
    }
  }
  if (best_id < 0 || best < r / 5.0 * (1.0 - 1e-9))
    throw DiscretizationError("no good anchor in perturbed tile (level " +
                              std::to_string(t.idx.empty() ? -1 : 0) + ")");
  t.anchor_candidates = {best_id};
}

// assign already-final child tiles to the working tiles one level up. A child
// whose atoms all live in one working tile goes there; a straddler goes to
// the tile holding most of its mass. The parent keeps its perturbed region
// (the object the dilation bracket and anchor condition describe) plus its
// children's regions, and its atom content is the union of its children's.
std::vector<Tile> assemble_level(std::map<Key, PTile>& parents,
                                 std::vector<Tile>& children, int level,
                                 const FractalMeasure& mu) {
  std::map<int64_t, const Key*> owner_of_atom;
  for (const auto& [key, pt] : parents)
    for (int64_t id : pt.atoms) owner_of_atom[id] = &key;

  std::map<Key, std::vector<int>> assign;
  for (int ci = 0; ci < static_cast<int>(children.size()); ++ci) {
    const Tile& c = children[ci];
    if (c.atom_ids.empty())
      throw DiscretizationError("child tile without atoms at level " +
                                std::to_string(level + 1));
    std::map<Key, double> mass;
    for (int64_t id : c.atom_ids) {
      auto it = owner_of_atom.find(id);
      if (it == owner_of_atom.end())
        throw DiscretizationError("atom lost during assembly at level " +
                                  std::to_string(level));
      mass[*it->second] += mu.weights[static_cast<size_t>(id)];
    }
    const Key* best = nullptr;
    double best_mass = -1.0;
    for (const auto& [key, m] : mass)
      if (m > best_mass) {
        best_mass = m;
        best = &key;
      }
    assign[*best].push_back(ci);
  }

  std::vector<Tile> out;
  for (auto& [key, pt] : parents) {
    auto it = assign.find(key);
    if (it == assign.end()) continue;  // every child went elsewhere
    Tile tile;
    tile.level = level;
    tile.base_cube = pt.cube;
    tile.geometry = pt.region;
    if (!pt.anchor_candidates.empty()) {
      auto x = mu.atom(pt.anchor_candidates.front());
      tile.anchor.assign(x.begin(), x.end());
    }
    tile.children = it->second;
    std::sort(tile.children.begin(), tile.children.end());
    for (int ci : tile.children) {
      const Tile& c = children[ci];
      for (const auto& b : c.geometry.boxes()) tile.geometry.add(b);
      tile.atom_ids.insert(tile.atom_ids.end(), c.atom_ids.begin(), c.atom_ids.end());
      tile.measure += c.measure;
    }
    std::sort(tile.atom_ids.begin(), tile.atom_ids.end());
    out.push_back(std::move(tile));
  }
  return out;
}

std::vector<Tile> standard_level_tiles(const FractalMeasure& mu, int64_t L, int n) {
  const double side = level_side(L, n);
  std::vector<Tile> out;
  for (auto& [key, ids] : atoms_by_cube(mu, side)) {
    Tile t;
    t.level = n;
    t.base_cube = cube_box(key, side);
    t.geometry = Region(t.base_cube);
    t.atom_ids = ids;
    for (int64_t id : ids) t.measure += mu.weights[static_cast<size_t>(id)];
    double best = -1.0;
    int64_t best_id = ids.front();
    for (int64_t id : ids) {
      double m = min_face_dist(mu.atom(id), t.base_cube);
      if (m > best) {
        best = m;
        best_id = id;
      }
    }
    auto x = mu.atom(best_id);
    t.anchor.assign(x.begin(), x.end());
    out.push_back(std::move(t));
  }
  return out;
}

void link_standard_children(TileTree& tree) {
  for (int n = 0; n + 1 <= tree.max_level(); ++n) {
    std::map<Key, int> parent_of;
    const double side = tree.tile_side(n);
    for (int i = 0; i < static_cast<int>(tree.levels[n].size()); ++i) {
      Key k(tree.source.dim);
      for (int c = 0; c < tree.source.dim; ++c)
        k[c] = cube_index_1d(tree.levels[n][i].base_cube.lo[c] +
                                 0.5 * (tree.levels[n][i].base_cube.hi[c] -
                                        tree.levels[n][i].base_cube.lo[c]),
                             side);
      parent_of[k] = i;
    }
    for (int j = 0; j < static_cast<int>(tree.levels[n + 1].size()); ++j) {
      const Tile& c = tree.levels[n + 1][j];
      auto mid = c.base_cube.center();
      Key k = cube_key(mid, side);
      auto it = parent_of.find(k);
      if (it == parent_of.end())
        throw DiscretizationError("standard child without parent");
      tree.levels[n][it->second].children.push_back(j);
    }
  }
}

}  // namespace

double TileTree::tile_side(int level) const {
  return std::pow(static_cast<double>(L), -static_cast<double>(level));
}

double TileTree::perturb_radius(int level) const {
  return std::pow(static_cast<double>(L), -(static_cast<double>(level) + 2.0 / 3.0));
}

TileTree standard_discretization(const FractalMeasure& mu, int64_t L, int N) {
  if (L < 2) throw std::invalid_argument("standard_discretization: L < 2");
  if (N < 0) throw std::invalid_argument("standard_discretization: N < 0");
  if (level_side(L, N) < mu.scale_floor)
    throw std::invalid_argument("standard_discretization: depth below scale floor");
  TileTree tree;
  tree.source = mu;
  tree.L = L;
  tree.depth = N;
  tree.perturbed = false;
  tree.levels.resize(N + 1);
  for (int n = 0; n <= N; ++n) tree.levels[n] = standard_level_tiles(mu, L, n);
  link_standard_children(tree);
  return tree;
}

TileTree perturbed_discretization(const FractalMeasure& mu, int64_t L, int N) {
  if (L < 1000) throw std::invalid_argument("perturbed_discretization: L < 10^3");
  if (N < 1) throw std::invalid_argument("perturbed_discretization: N < 1");
  if (level_side(L, N + 1) < mu.scale_floor)
    throw std::invalid_argument("perturbed_discretization: depth below scale floor");

  TileTree tree;
  tree.source = mu;
  tree.L = L;
  tree.depth = N;
  tree.perturbed = true;
  tree.levels.resize(N + 2);

  // leaf layer: standard cubes at level N+1
  tree.levels[N + 1] = standard_level_tiles(mu, L, N + 1);

  // backward induction: perturb level n, then assemble from level n+1 tiles
  for (int n = N; n >= 1; --n) {
    auto tilde = perturb_level(mu, L, n);
    const double r = tree.perturb_radius(n);
    for (auto& [key, pt] : tilde) finalize_anchor(pt, mu, r);
    tree.levels[n] =
        assemble_level(tilde, tree.levels[n + 1], n, mu);
  }

  // root layer: standard level-0 cubes
  {
    std::map<Key, PTile> roots;
    const double side = level_side(L, 0);
    for (auto& [key, ids] : atoms_by_cube(mu, side)) {
      PTile t;
      t.idx = key;
      t.cube = cube_box(key, side);
      t.region = Region(t.cube);
      t.atoms = ids;
      t.good = true;
      double best = -1.0;
      int64_t best_id = ids.front();
      for (int64_t id : ids) {
        double m = min_face_dist(mu.atom(id), t.cube);
        if (m > best) {
          best = m;
          best_id = id;
        }
      }
      t.anchor_candidates.push_back(best_id);
      roots.emplace(key, std::move(t));
    }
    tree.levels[0] = assemble_level(roots, tree.levels[1], 0, mu);
  }
  return tree;
}

namespace {

void add_item(CheckReport& rep, CheckItem item) {
  if (item.failed > 0) rep.all_pass = false;
  rep.items.push_back(std::move(item));
}

}  // namespace

CheckReport check_tree(const TileTree& tree) {
  CheckReport rep;
  const FractalMeasure& mu = tree.source;

  // partition: every atom in exactly one tile per level
  {
    CheckItem item{"partition", 0, 0, std::numeric_limits<double>::infinity(), ""};
    for (int n = 0; n <= tree.max_level(); ++n) {
      std::vector<int> owners(static_cast<size_t>(mu.count()), 0);
      for (const auto& t : tree.levels[n])
        for (int64_t id : t.atom_ids) {
          ++owners[static_cast<size_t>(id)];
          if (!t.geometry.contains(mu.atom(id))) {
            ++item.failed;
            item.note = "atom outside its tile at level " + std::to_string(n);
          }
        }
      for (int64_t id = 0; id < mu.count(); ++id) {
        ++item.checked;
        if (owners[static_cast<size_t>(id)] != 1) {
          ++item.failed;
          item.note = "atom covered " + std::to_string(owners[static_cast<size_t>(id)]) +
                      " times at level " + std::to_string(n);
        }
      }
    }
    item.worst_margin = item.failed ? -1.0 : 0.0;
    add_item(rep, std::move(item));
  }

  // nesting: children partition into unique parents, the parent's atom
  // content is exactly the union of its children's, and every child region
  // stays inside its parent's region
  {
    CheckItem item{"nesting", 0, 0, 0.0, ""};
    double worst = 0.0;
    for (int n = 0; n + 1 <= tree.max_level(); ++n) {
      std::vector<int> child_owner(tree.levels[n + 1].size(), -1);
      for (int i = 0; i < static_cast<int>(tree.levels[n].size()); ++i) {
        const Tile& t = tree.levels[n][i];
        ++item.checked;
        std::vector<int64_t> from_children;
        for (int ci : t.children) {
          if (child_owner[ci] != -1) {
            ++item.failed;
            item.note = "child shared between parents at level " + std::to_string(n);
          }
          child_owner[ci] = i;
          const Tile& c = tree.levels[n + 1][ci];
          from_children.insert(from_children.end(), c.atom_ids.begin(),
                               c.atom_ids.end());
          double outside = c.geometry.difference_volume(t.geometry);
          worst = std::max(worst, outside / std::max(c.geometry.volume(), 1e-300));
          if (outside > 1e-9 * std::max(c.geometry.volume(), 1e-300)) {
            ++item.failed;
            item.note = "child escapes parent at level " + std::to_string(n);
          }
        }
        std::sort(from_children.begin(), from_children.end());
        if (from_children != t.atom_ids) {
          ++item.failed;
          item.note = "parent atoms differ from union of children at level " +
                      std::to_string(n);
        }
      }
      for (size_t ci = 0; ci < child_owner.size(); ++ci)
        if (child_owner[ci] == -1) {
          ++item.failed;
          item.note = "orphan child at level " + std::to_string(n + 1);
        }
    }
    item.worst_margin = -worst;
    add_item(rep, std::move(item));
  }

  // cube perturbation containment, levels 1..N of a perturbed tree
  if (tree.perturbed) {
    CheckItem item{"perturbation_containment", 0, 0,
                   std::numeric_limits<double>::infinity(), ""};
    double worst = std::numeric_limits<double>::infinity();
    const double lf = std::pow(static_cast<double>(tree.L), -2.0 / 3.0);
    for (int n = 1; n <= std::min(tree.depth, tree.max_level()); ++n)
      for (const auto& t : tree.levels[n]) {
        ++item.checked;
        Region inner(t.base_cube.dilated(1.0 - lf));
        Region outer(t.base_cube.dilated(1.0 + lf));
        double missing = inner.difference_volume(t.geometry);
        double excess = t.geometry.difference_volume(outer);
        double tol = 1e-9 * std::max(t.base_cube.volume(), 1e-300);
        double margin = -std::max(missing, excess);
        worst = std::min(worst, margin);
        if (missing > tol || excess > tol) {
          ++item.failed;
          item.note = "tile escapes dilation bracket at level " + std::to_string(n);
        }
      }
    item.worst_margin = item.checked ? worst : 0.0;
    add_item(rep, std::move(item));
  }

  // anchor condition: dist_inf(anchor, boundary) >= L^{-2/3-n}/10, levels 1..N
  {
    CheckItem item{"anchor_distance", 0, 0, std::numeric_limits<double>::infinity(), ""};
    double worst = std::numeric_limits<double>::infinity();
    int top = tree.perturbed ? std::min(tree.depth, tree.max_level()) : tree.max_level();
    for (int n = 1; n <= top; ++n) {
      const double need = tree.perturb_radius(n) / 10.0;
      for (const auto& t : tree.levels[n]) {
        ++item.checked;
        if (!t.has_anchor()) {
          ++item.failed;
          item.note = "missing anchor at level " + std::to_string(n);
          continue;
        }
        double dd = t.geometry.interior_distance(t.anchor, need * 4.0);
        double margin = dd / need - 1.0;
        worst = std::min(worst, margin);
        if (dd < need * (1.0 - 1e-9)) {
          ++item.failed;
          item.note = "anchor too close to boundary at level " + std::to_string(n);
        }
      }
    }
    item.worst_margin = item.checked ? worst : 0.0;
    add_item(rep, std::move(item));
  }

  return rep;
}

std::string CheckReport::to_json() const {
  nlohmann::json j;
  j["all_pass"] = all_pass;
  auto& arr = j["invariants"] = nlohmann::json::array();
  for (const auto& it : items)
    arr.push_back({{"invariant", it.invariant},
                   {"checked", it.checked},
                   {"failed", it.failed},
                   {"worst_margin", it.worst_margin},
                   {"note", it.note}});
  return j.dump(2);
}

std::string tree_to_json(const TileTree& tree) {
  nlohmann::json j;
  j["L"] = tree.L;
  j["depth"] = tree.depth;
  j["perturbed"] = tree.perturbed;
  auto& levels = j["levels"] = nlohmann::json::array();
  for (int n = 0; n <= tree.max_level(); ++n) {
    nlohmann::json lv = nlohmann::json::array();
    for (const auto& t : tree.levels[n]) {
      nlohmann::json tj;
      tj["level"] = t.level;
      auto& boxes = tj["boxes"] = nlohmann::json::array();
      for (const auto& b : t.geometry.boxes())
        boxes.push_back({{"lo", b.lo}, {"hi", b.hi}});
      tj["base_cube"] = {{"lo", t.base_cube.lo}, {"hi", t.base_cube.hi}};
      if (t.has_anchor()) tj["anchor"] = t.anchor;
      tj["children"] = t.children;
      tj["measure"] = t.measure;
      lv.push_back(std::move(tj));
    }
    levels.push_back(std::move(lv));
  }
  return j.dump();
}

}  // namespace fuplab
