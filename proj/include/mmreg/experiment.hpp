#ifndef MMREG_EXPERIMENT_HPP
#define MMREG_EXPERIMENT_HPP

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmreg/baselines.hpp"
#include "mmreg/clustering.hpp"
#include "mmreg/em.hpp"
#include "mmreg/io.hpp"
#include "mmreg/metrics.hpp"
#include "mmreg/scene.hpp"

namespace mmreg {

inline constexpr const char* kToolVersion = "0.1.0";

/// Bad configuration key or value.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Flat key=value experiment configuration. Every key has a default; an empty
/// value means "derive from other keys" where documented.
class ExperimentConfig {
 public:
  ExperimentConfig();

  /// Throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value);
  /// Parses a "key=value" assignment (as given to --set).
  void set_assignment(const std::string& assignment);
  /// Reads a config file: one key=value per line, '#' comments allowed.
  void load_text(const std::string& text);
  void load_file(const std::string& path);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;

  /// Sorted, fully resolved "key=value" lines.
  std::string canonical_text() const;
  /// FNV-1a 64 of canonical_text, as 16 hex digits.
  std::string hash() const;
  const std::map<std::string, std::string>& values() const { return values_; }

  SceneSpec scene_spec() const;
  EMConfig em_config(double scene_tau) const;
  RansacConfig ransac_config(double scene_sigma, std::uint64_t seed) const;
  TLinkageConfig tlinkage_config(double scene_sigma, double scene_tau, std::uint64_t seed) const;

 private:
  std::map<std::string, std::string> values_;
};

/// Transforms for every cluster: Horn fit, or (for clusters of 1-2 points)
/// identity rotation with the mean displacement.
std::vector<RigidTransform> fit_cluster_transforms(const CorrespondenceSet& cs, const Clustering& c);

struct RunOutcome {
  bool ok = true;
  std::string error;
  std::string algorithm;
  Clustering initial;
  Clustering clustering;
  std::vector<ClusterModel> models;
  std::optional<EMResult> em;
  EvalReport report;
  double wall_seconds = 0.0;
};

/// Builds the initial clustering selected by `init`.
Clustering build_initialization(const ExperimentConfig& cfg, const LabeledScene& scene);

/// Runs the configured algorithm on the scene and evaluates it. Algorithm
/// failures are reported through RunOutcome::ok / error; configuration
/// problems throw ConfigError.
RunOutcome run_experiment(const ExperimentConfig& cfg, const LabeledScene& scene);

/// Result file contents; wall-clock time is deliberately not included so that
/// identical runs produce identical files.
KeyValueRecord result_record(const ExperimentConfig& cfg, const RunOutcome& out);

/// Parsed view of a result file.
struct ResultRecord {
  std::string tool_version;
  std::string config_hash;
  std::map<std::string, std::string> config;
  std::string status;
  std::string error;
  EvalReport report;
  Clustering clustering;
  std::vector<ClusterModel> models;
  int em_iterations = 0;
  bool em_converged = false;
  std::vector<double> em_changes;
};
ResultRecord parse_result(const KeyValueRecord& rec);

/// Evaluates a prediction against a scene. Cluster ids are canonicalized
/// first (models follow their clusters), so relabeling does not change the
/// report.
EvalReport evaluate_prediction(const Clustering& pred, std::span<const RigidTransform> models,
                               const LabeledScene& scene);

KeyValueRecord eval_record(const EvalReport& report);

/// Runs the bench suite selected by bench.suite; returns {per-trial CSV, summary CSV}.
std::pair<std::string, std::string> run_bench(const ExperimentConfig& cfg);

}  // namespace mmreg

#endif  // MMREG_EXPERIMENT_HPP
