#ifndef MMREG_CLUSTERING_HPP
#define MMREG_CLUSTERING_HPP

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "mmreg/geometry.hpp"

namespace mmreg {

/// Partition of correspondence indices. Label 0 marks unassigned / outlier
/// points; clusters are labeled 1..num_clusters.
struct Clustering {
  std::vector<int> labels;
  int num_clusters = 0;

  std::size_t size() const { return labels.size(); }

  /// Builds a clustering whose num_clusters is the largest label.
  /// Throws std::invalid_argument on negative labels.
  static Clustering from_labels(std::vector<int> labels);

  /// Member indices of each cluster; entry k holds cluster k + 1.
  std::vector<std::vector<std::size_t>> members() const;
  std::vector<std::size_t> cluster_sizes() const;
  std::size_t num_assigned() const;

  bool operator==(const Clustering&) const = default;
};

/// Drops empty cluster ids, keeping the relative order of the survivors.
Clustering compact(const Clustering& c);

/// Relabels clusters by decreasing size, ties broken by smallest member index.
Clustering canonicalize(const Clustering& c);

class UnionFind {
 public:
  explicit UnionFind(std::size_t n);
  std::size_t find(std::size_t x);
  void unite(std::size_t x, std::size_t y);

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

/// Uniform spatial hash with cubic cells of side `cell`. Radius queries with
/// radius <= cell only need the 27 surrounding cells.
class SpatialHash {
 public:
  SpatialHash(std::span<const Vec3> points, double cell);

  /// Calls fn(j) for every stored point j with ||p_j - q|| <= radius.
  /// Requires radius <= cell.
  template <typename Fn>
  void for_each_within(const Vec3& q, double radius, Fn&& fn) const {
    const auto base = cell_of(q);
    const double r2 = radius * radius;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find(key(base[0] + dx, base[1] + dy, base[2] + dz));
          if (it == cells_.end()) continue;
          for (auto j : it->second)
            if ((points_[j] - q).squaredNorm() <= r2) fn(j);
        }
  }

 private:
  std::array<std::int64_t, 3> cell_of(const Vec3& p) const;
  static std::uint64_t key(std::int64_t x, std::int64_t y, std::int64_t z);

  std::span<const Vec3> points_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

/// Minimum Euclidean distance from p to the cluster; +infinity for an empty cluster.
double d_cluster(std::span<const Vec3> cluster_points, const Vec3& p);

/// True iff the graph with edges ||p_i - p_j|| <= tau is connected.
/// Empty and singleton sets are connected. Throws if tau <= 0.
bool is_tau_connected(std::span<const Vec3> points, double tau);

/// Connected components of the tau-ball graph over the a-points, labeled by
/// decreasing size (ties by smallest member index).
Clustering euclidean_cluster(const CorrespondenceSet& cs, double tau);

/// Splits a tau-connected point set into tau-connected fragments with the
/// requested sizes. Returns the fragment index (position in `target_sizes`)
/// of every point. The largest target is left as the remainder; the others
/// are region-grown from peripheral seeds. Throws std::runtime_error if no
/// valid split is found after bounded retries.
std::vector<int> fragment_cluster(std::span<const Vec3> points, double tau,
                                  std::span<const std::size_t> target_sizes, RngSeed seed);

struct GoodnessReport {
  std::vector<bool> cluster_connected;  ///< per cluster (index k = id k + 1)
  std::vector<std::size_t> cluster_sizes;
  std::vector<bool> cluster_pure;       ///< inside one object or only outliers
  std::vector<double> object_alpha;     ///< |H*| / max other |H| per object (inf if alone)
  bool partition = false;               ///< no point left unassigned
  bool connected = false;
  bool large = false;
  bool identifying = false;
  bool pure = false;
  bool pass = false;
};

/// Checks the (tau, alpha, m0)-goodness conditions of `clustering` against
/// ground-truth labels (0 = outlier, 1..M objects).
GoodnessReport check_goodness(const Clustering& clustering, const CorrespondenceSet& cs,
                              std::span<const int> truth_labels, int num_objects, double tau,
                              double alpha, std::size_t m0);

}  // namespace mmreg

#endif  // MMREG_CLUSTERING_HPP
