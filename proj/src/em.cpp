#include "mmreg/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mmreg {

void EMConfig::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("em: tau must be positive");
  if (m_min < 3) throw std::invalid_argument("em: m_min must be >= 3");
  if (max_iters < 1) throw std::invalid_argument("em: max_iters must be >= 1");
  if (!(sigma_floor > 0.0)) throw std::invalid_argument("em: sigma_floor must be positive");
}

std::vector<ClusterModel> fit_models(const CorrespondenceSet& cs, const Clustering& clustering,
                                     const EMConfig& cfg) {
  if (clustering.size() != cs.size()) throw std::invalid_argument("fit_models: length mismatch");
  const auto members = clustering.members();
  std::size_t total = 0;
  for (const auto& m : members) total += m.size();

  std::vector<ClusterModel> models;
  models.reserve(members.size());
  for (const auto& m : members) {
    if (m.size() < 3) throw std::logic_error("fit_models: cluster with fewer than 3 points");
    const auto est = horn_register(cs, m, cfg.sigma_floor);
    models.push_back({est.transform, est.sigma_hat,
                      static_cast<double>(m.size()) / static_cast<double>(total)});
  }
  return models;
}

double log_weighted_density(const ClusterModel& model, const Correspondence& c) {
  const double r2 = (c.b - apply(model.transform, c.a)).squaredNorm();
  const double s = model.sigma_hat;
  return std::log(model.weight) - 3.0 * std::log(s) - r2 / (2.0 * s * s);
}

Eigen::MatrixXd e_step(const CorrespondenceSet& cs, const Clustering& clustering,
                       const std::vector<ClusterModel>& models, const EMConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(cs.size());
  const auto K = static_cast<Eigen::Index>(models.size());
  if (clustering.size() != cs.size()) throw std::invalid_argument("e_step: length mismatch");
  if (clustering.num_clusters != K) throw std::invalid_argument("e_step: model count mismatch");

  std::vector<Vec3> a(cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) a[i] = cs[i].a;
  const SpatialHash grid(a, cfg.tau);

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, K);
  if (K == 0) return W;
  Eigen::VectorXd logp(K);
  std::vector<char> near(static_cast<std::size_t>(K));
  const double tau2 = cfg.tau * cfg.tau;

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = cs[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < K; ++j)
      logp(j) = log_weighted_density(models[static_cast<std::size_t>(j)], c);
    const double mx = logp.maxCoeff();
    const Eigen::VectorXd p = (logp.array() - mx).exp();
    const double denom = p.sum();

    std::fill(near.begin(), near.end(), 0);
    // The indicator is strict: d_cluster < tau.
    grid.for_each_within(c.a, cfg.tau, [&](std::size_t q) {
      const int l = clustering.labels[q];
      if (l > 0 && (a[q] - c.a).squaredNorm() < tau2) near[static_cast<std::size_t>(l - 1)] = 1;
    });
    for (Eigen::Index j = 0; j < K; ++j)
      if (near[static_cast<std::size_t>(j)]) W(i, j) = p(j) / denom;
  }
  return W;
}

Clustering m_step(const Eigen::MatrixXd& W, const Clustering& previous, const EMConfig&) {
  if (static_cast<std::size_t>(W.rows()) != previous.size())
    throw std::invalid_argument("m_step: row count mismatch");
  if (!W.allFinite()) throw std::invalid_argument("m_step: non-finite weights");
  Clustering out{previous.labels, static_cast<int>(W.cols())};
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    double best = 0.0;
    int label = -1;
    for (Eigen::Index j = 0; j < W.cols(); ++j)
      if (W(i, j) > best) {
        best = W(i, j);
        label = static_cast<int>(j) + 1;
      }
    if (label > 0) out.labels[static_cast<std::size_t>(i)] = label;
  }
  return out;
}

Clustering prune_small(const Clustering& clustering, const EMConfig& cfg) {
  const auto sizes = clustering.cluster_sizes();
  Clustering out = clustering;
  for (int& l : out.labels)
    if (l > 0 && sizes[static_cast<std::size_t>(l - 1)] < cfg.m_min) l = 0;
  return compact(out);
}

namespace {

// Points whose cluster membership differs between the iteration's input and
// output. Id renumbering from compaction is not a change; dissolution is.
std::size_t count_changes(const Clustering& before, const Clustering& pruned,
                          const Clustering& after) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    const bool dissolved = before.labels[i] > 0 && pruned.labels[i] == 0;
    n += dissolved || pruned.labels[i] != after.labels[i];
  }
  return n;
}

}  // namespace

EMResult run_em(const CorrespondenceSet& cs, const Clustering& initial, const EMConfig& cfg) {
  cfg.validate();
  if (initial.size() != cs.size()) throw std::invalid_argument("run_em: length mismatch");
  for (int l : initial.labels)
    if (l < 0 || l > initial.num_clusters) throw std::invalid_argument("run_em: invalid label");

  EMResult res;
  Clustering current = initial;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const Clustering pruned = prune_small(current, cfg);
    if (pruned.num_clusters == 0) throw NoViableClusters();
    const auto models = fit_models(cs, pruned, cfg);
    const auto W = e_step(cs, pruned, models, cfg);
    Clustering next = m_step(W, pruned, cfg);
    const std::size_t changes = count_changes(current, pruned, next);

    EMTraceRecord rec;
    rec.iteration = it;
    rec.sizes = pruned.cluster_sizes();
    for (const auto& m : models) {
      rec.weights.push_back(m.weight);
      rec.sigma_hats.push_back(m.sigma_hat);
    }
    rec.changes = changes;
    res.trace.push_back(std::move(rec));
    res.changes_per_iteration.push_back(changes);
    res.iterations_run = it;

    if (changes == 0) {
      res.converged = true;
      res.clustering = std::move(next);
      res.models = models;
      return res;
    }
    current = std::move(next);
  }

  // Iteration cap reached: report models for the final (pruned) assignment.
  res.clustering = prune_small(current, cfg);
  if (res.clustering.num_clusters == 0) throw NoViableClusters();
  res.models = fit_models(cs, res.clustering, cfg);
  return res;
}

}  // namespace mmreg
