#include "mmreg/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace mmreg {

Clustering Clustering::from_labels(std::vector<int> labels) {
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw std::invalid_argument("negative cluster label");
    k = std::max(k, l);
  }
  return {std::move(labels), k};
}

std::vector<std::vector<std::size_t>> Clustering::members() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(num_clusters));
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] > 0) out[static_cast<std::size_t>(labels[i] - 1)].push_back(i);
  return out;
}

std::vector<std::size_t> Clustering::cluster_sizes() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(num_clusters), 0);
  for (int l : labels)
    if (l > 0) ++out[static_cast<std::size_t>(l - 1)];
  return out;
}

std::size_t Clustering::num_assigned() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](int l) { return l > 0; }));
}

Clustering compact(const Clustering& c) {
  const auto sizes = c.cluster_sizes();
  std::vector<int> remap(sizes.size() + 1, 0);
  int next = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k)
    if (sizes[k] > 0) remap[k + 1] = ++next;
  Clustering out{c.labels, next};
  for (int& l : out.labels) l = remap[static_cast<std::size_t>(l)];
  return out;
}

Clustering canonicalize(const Clustering& c) {
  const auto members = c.members();
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < members.size(); ++k)
    if (!members[k].empty()) order.push_back(k);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (members[x].size() != members[y].size()) return members[x].size() > members[y].size();
    return members[x].front() < members[y].front();
  });
  Clustering out{std::vector<int>(c.labels.size(), 0), static_cast<int>(order.size())};
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    for (auto i : members[order[rank]]) out.labels[i] = static_cast<int>(rank + 1);
  return out;
}

UnionFind::UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t UnionFind::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

void UnionFind::unite(std::size_t x, std::size_t y) {
  x = find(x);
  y = find(y);
  if (x == y) return;
  if (rank_[x] < rank_[y]) std::swap(x, y);
  parent_[y] = x;
  if (rank_[x] == rank_[y]) ++rank_[x];
}

SpatialHash::SpatialHash(std::span<const Vec3> points, double cell) : points_(points), cell_(cell) {
  if (!(cell > 0.0)) throw std::invalid_argument("SpatialHash: cell size must be positive");
  cells_.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = cell_of(points[i]);
    cells_[key(c[0], c[1], c[2])].push_back(i);
  }
}

std::array<std::int64_t, 3> SpatialHash::cell_of(const Vec3& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
          static_cast<std::int64_t>(std::floor(p.y() / cell_)),
          static_cast<std::int64_t>(std::floor(p.z() / cell_))};
}

std::uint64_t SpatialHash::key(std::int64_t x, std::int64_t y, std::int64_t z) {
  // 21 bits per axis; collisions only merge buckets, never drop neighbors.
  constexpr std::uint64_t mask = (1ULL << 21) - 1;
  return (static_cast<std::uint64_t>(x) & mask) | ((static_cast<std::uint64_t>(y) & mask) << 21) |
         ((static_cast<std::uint64_t>(z) & mask) << 42);
}

double d_cluster(std::span<const Vec3> cluster_points, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : cluster_points) best = std::min(best, (q - p).squaredNorm());
  return std::sqrt(best);
}

namespace {

// Cells of side tau/sqrt(3) are internally connected, so only neighboring
// cell pairs (index offset <= 2) in different components need a point search.
UnionFind tau_components(std::span<const Vec3> points, double tau) {
  using Cell = std::array<std::int64_t, 3>;
  UnionFind uf(points.size());
  const double side = tau / std::sqrt(3.0) * (1.0 - 1e-12);
  std::map<Cell, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Cell c{static_cast<std::int64_t>(std::floor(points[i].x() / side)),
                 static_cast<std::int64_t>(std::floor(points[i].y() / side)),
                 static_cast<std::int64_t>(std::floor(points[i].z() / side))};
    auto& members = cells[c];
    if (!members.empty()) uf.unite(members.front(), i);
    members.push_back(i);
  }
  const double tau2 = tau * tau;
  for (const auto& [c, members] : cells) {
    for (std::int64_t dx = -2; dx <= 2; ++dx)
      for (std::int64_t dy = -2; dy <= 2; ++dy)
        for (std::int64_t dz = -2; dz <= 2; ++dz) {
          const Cell n{c[0] + dx, c[1] + dy, c[2] + dz};
          if (!(c < n)) continue;
          const auto it = cells.find(n);
          if (it == cells.end() || uf.find(members.front()) == uf.find(it->second.front())) continue;
          bool linked = false;
          for (auto i : members) {
            for (auto j : it->second)
              if ((points[i] - points[j]).squaredNorm() <= tau2) {
                uf.unite(i, j);
                linked = true;
                break;
              }
            if (linked) break;
          }
        }
  }
  return uf;
}

std::vector<Vec3> a_points(const CorrespondenceSet& cs) {
  std::vector<Vec3> out;
  out.reserve(cs.size());
  for (const auto& c : cs) out.push_back(c.a);
  return out;
}

}  // namespace

bool is_tau_connected(std::span<const Vec3> points, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (points.size() <= 1) return true;
  auto uf = tau_components(points, tau);
  const auto root = uf.find(0);
  for (std::size_t i = 1; i < points.size(); ++i)
    if (uf.find(i) != root) return false;
  return true;
}

Clustering euclidean_cluster(const CorrespondenceSet& cs, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  const auto pts = a_points(cs);
  auto uf = tau_components(pts, tau);
  std::vector<int> root_label(pts.size(), 0);
  Clustering c{std::vector<int>(pts.size(), 0), 0};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto r = uf.find(i);
    if (root_label[r] == 0) root_label[r] = ++c.num_clusters;
    c.labels[i] = root_label[r];
  }
  return canonicalize(c);
}

namespace {

constexpr int kFragmentAttempts = 64;

// Grows a tau-connected region of `target` points from `seed` among the
// points flagged in `available`, nearest-to-seed first.
std::vector<std::size_t> grow_region(std::span<const Vec3> points, const SpatialHash& grid,
                                     double tau, const std::vector<bool>& available,
                                     std::size_t seed, std::size_t target) {
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  std::vector<bool> seen(points.size(), false);
  std::vector<std::size_t> region;
  frontier.emplace(0.0, seed);
  seen[seed] = true;
  while (!frontier.empty() && region.size() < target) {
    const auto [d, i] = frontier.top();
    frontier.pop();
    region.push_back(i);
    grid.for_each_within(points[i], tau, [&](std::size_t j) {
      if (available[j] && !seen[j]) {
        seen[j] = true;
        frontier.emplace((points[j] - points[seed]).squaredNorm(), j);
      }
    });
  }
  return region;
}

bool subset_connected(std::span<const Vec3> points, const std::vector<bool>& mask, double tau) {
  std::vector<Vec3> sub;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (mask[i]) sub.push_back(points[i]);
  return is_tau_connected(sub, tau);
}

}  // namespace

std::vector<int> fragment_cluster(std::span<const Vec3> points, double tau,
                                  std::span<const std::size_t> target_sizes, RngSeed seed) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (target_sizes.empty()) throw std::invalid_argument("fragment_cluster: no targets");
  const std::size_t total = std::accumulate(target_sizes.begin(), target_sizes.end(), std::size_t{0});
  if (total != points.size())
    throw std::invalid_argument("fragment_cluster: target sizes do not sum to the point count");
  for (auto s : target_sizes)
    if (s == 0) throw std::invalid_argument("fragment_cluster: empty fragment requested");

  const auto remainder = static_cast<std::size_t>(
      std::max_element(target_sizes.begin(), target_sizes.end()) - target_sizes.begin());
  std::vector<int> out(points.size(), static_cast<int>(remainder));
  if (target_sizes.size() == 1) return out;

  const SpatialHash grid(points, tau);
  Rng rng(seed);
  std::vector<bool> available(points.size(), true);

  for (std::size_t f = 0; f < target_sizes.size(); ++f) {
    if (f == remainder) continue;
    bool placed = false;
    for (int attempt = 0; attempt < kFragmentAttempts && !placed; ++attempt) {
      std::vector<std::size_t> pool;
      Vec3 centroid = Vec3::Zero();
      for (std::size_t i = 0; i < points.size(); ++i)
        if (available[i]) {
          pool.push_back(i);
          centroid += points[i];
        }
      centroid /= static_cast<double>(pool.size());

      std::size_t seed_idx = pool[0];
      if (attempt == 0) {
        double far = -1.0;
        for (auto i : pool) {
          const double d = (points[i] - centroid).squaredNorm();
          if (d > far) {
            far = d;
            seed_idx = i;
          }
        }
      } else {
        seed_idx = pool[rng.index(pool.size())];
      }

      auto region = grow_region(points, grid, tau, available, seed_idx, target_sizes[f]);
      if (region.size() != target_sizes[f]) continue;
      auto rest = available;
      for (auto i : region) rest[i] = false;
      if (!subset_connected(points, rest, tau)) continue;
      for (auto i : region) out[i] = static_cast<int>(f);
      available = std::move(rest);
      placed = true;
    }
    if (!placed) throw std::runtime_error("fragment_cluster: could not satisfy fragment sizes");
  }
  return out;
}

GoodnessReport check_goodness(const Clustering& clustering, const CorrespondenceSet& cs,
                              std::span<const int> truth_labels, int num_objects, double tau,
                              double alpha, std::size_t m0) {
  if (clustering.size() != cs.size() || truth_labels.size() != cs.size())
    throw std::invalid_argument("check_goodness: length mismatch");
  GoodnessReport rep;
  const auto members = clustering.members();
  rep.partition = clustering.num_assigned() == clustering.size();
  rep.connected = rep.large = rep.pure = true;
  for (const auto& m : members) {
    std::vector<Vec3> pts;
    std::vector<int> owners;
    for (auto i : m) {
      pts.push_back(cs[i].a);
      owners.push_back(truth_labels[i]);
    }
    const bool conn = is_tau_connected(pts, tau);
    const bool pure = std::all_of(owners.begin(), owners.end(),
                                  [&](int o) { return o == owners.front(); });
    rep.cluster_connected.push_back(conn);
    rep.cluster_sizes.push_back(m.size());
    rep.cluster_pure.push_back(pure);
    rep.connected = rep.connected && conn;
    rep.large = rep.large && m.size() >= m0;
    rep.pure = rep.pure && pure;
  }

  rep.identifying = true;
  for (int g = 1; g <= num_objects; ++g) {
    std::vector<std::size_t> touching;
    for (std::size_t k = 0; k < members.size(); ++k)
      if (std::any_of(members[k].begin(), members[k].end(),
                      [&](std::size_t i) { return truth_labels[i] == g; }))
        touching.push_back(members[k].size());
    std::sort(touching.begin(), touching.end(), std::greater<>());
    double ratio = std::numeric_limits<double>::infinity();
    if (touching.empty()) {
      ratio = 0.0;
    } else if (touching.size() > 1) {
      ratio = static_cast<double>(touching[0]) / static_cast<double>(touching[1]);
    }
    rep.object_alpha.push_back(ratio);
    const bool ok = !touching.empty() &&
                    (touching.size() == 1 ||
                     static_cast<double>(touching[0]) > alpha * static_cast<double>(touching[1]));
    rep.identifying = rep.identifying && ok;
  }
  rep.pass = rep.partition && rep.connected && rep.large && rep.identifying && rep.pure;
  return rep;
}

}  // namespace mmreg
