#include "mmreg/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mmreg/horn.hpp"
#include "mmreg/theory.hpp"

namespace mmreg {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d = {
      {"seed", "0"},
      {"algorithm", "em"},
      {"scene.num_objects", "3"},
      {"scene.points_per_object", "500"},
      {"scene.sigma", "0.001"},
      {"scene.tau", "0.05"},
      {"scene.bound_B", "1"},
      {"scene.num_outliers", "0"},
      {"scene.separation_margin", ""},  // 2 * tau
      {"scene.object_radius", "0"},     // 3 * tau
      {"scene.file", ""},
      {"init", "good-split"},
      {"init.file", ""},
      {"init.alpha", "2"},
      {"init.fragments", "3"},
      {"init.tau", ""},  // scene tau
      {"em.tau", ""},    // scene tau
      {"em.m_min", "10"},
      {"em.max_iters", "100"},
      {"em.sigma_floor", "1e-08"},
      {"ransac.inlier_threshold", ""},  // sqrt(3) * sigma
      {"ransac.max_trials", "500"},
      {"ransac.min_model_inliers", "10"},
      {"tlinkage.tau_t", ""},  // sigma
      {"tlinkage.tau", ""},    // scene tau
      {"tlinkage.num_hypotheses", "200"},
      {"bench.suite", "consistency"},
      {"bench.m_values", "100,1000,10000"},
      {"bench.sigma", "0.1"},
      {"bench.B", "1"},
      {"bench.delta", "0.05"},
      {"bench.trials", "200"},
  };
  return d;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(trim(item));
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

template <typename T>
std::string join_sizes(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

ExperimentConfig::ExperimentConfig() : values_(defaults()) {}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = trim(value);
}

void ExperimentConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void ExperimentConfig::load_text(const std::string& text) {
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    set_assignment(t);
  }
}

void ExperimentConfig::load_file(const std::string& path) { load_text(read_text_file(path)); }

const std::string& ExperimentConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double ExperimentConfig::get_double(const std::string& key) const {
  try {
    return parse_double(get(key));
  } catch (const ParseError&) {
    throw ConfigError("config key '" + key + "' must be a number");
  }
}

long long ExperimentConfig::get_int(const std::string& key) const {
  const double v = get_double(key);
  if (v != std::floor(v)) throw ConfigError("config key '" + key + "' must be an integer");
  return static_cast<long long>(v);
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key) const {
  const std::string& s = get(key);
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || s[0] == '-' || end != s.c_str() + s.size())
    throw ConfigError("config key '" + key + "' must be an unsigned integer");
  return v;
}

std::string ExperimentConfig::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_text()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SceneSpec ExperimentConfig::scene_spec() const {
  SceneSpec s;
  s.num_objects = static_cast<int>(get_int("scene.num_objects"));
  if (s.num_objects < 1) throw ConfigError("scene.num_objects must be positive");
  const auto counts = split_commas(get("scene.points_per_object"));
  s.points_per_object.clear();
  for (const auto& c : counts) {
    const double v = parse_double(c);
    if (!(v >= 1.0) || v != std::floor(v))
      throw ConfigError("scene.points_per_object entries must be positive integers");
    s.points_per_object.push_back(static_cast<std::size_t>(v));
  }
  if (s.points_per_object.size() == 1)
    s.points_per_object.assign(static_cast<std::size_t>(s.num_objects), s.points_per_object[0]);
  s.sigma = get_double("scene.sigma");
  s.tau = get_double("scene.tau");
  s.bound_B = get_double("scene.bound_B");
  const long long outliers = get_int("scene.num_outliers");
  if (outliers < 0) throw ConfigError("scene.num_outliers must be >= 0");
  s.num_outliers = static_cast<std::size_t>(outliers);
  s.separation_margin =
      get("scene.separation_margin").empty() ? 2.0 * s.tau : get_double("scene.separation_margin");
  s.object_radius = get_double("scene.object_radius");
  s.seed = get_u64("seed");
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

EMConfig ExperimentConfig::em_config(double scene_tau) const {
  EMConfig c;
  c.tau = get("em.tau").empty() ? scene_tau : get_double("em.tau");
  const long long m_min = get_int("em.m_min");
  if (m_min < 3) throw ConfigError("em.m_min must be >= 3");
  c.m_min = static_cast<std::size_t>(m_min);
  c.max_iters = static_cast<int>(get_int("em.max_iters"));
  c.sigma_floor = get_double("em.sigma_floor");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RansacConfig ExperimentConfig::ransac_config(double scene_sigma, std::uint64_t seed) const {
  RansacConfig c;
  // Noise is bounded by sqrt(3) sigma in L2; a tiny floor keeps noiseless scenes usable.
  c.inlier_threshold = get("ransac.inlier_threshold").empty()
                           ? std::max(std::sqrt(3.0) * scene_sigma, 1e-9)
                           : get_double("ransac.inlier_threshold");
  c.max_trials = static_cast<int>(get_int("ransac.max_trials"));
  const long long mi = get_int("ransac.min_model_inliers");
  if (mi < 3) throw ConfigError("ransac.min_model_inliers must be >= 3");
  c.min_model_inliers = static_cast<std::size_t>(mi);
  c.seed = seed;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

TLinkageConfig ExperimentConfig::tlinkage_config(double scene_sigma, double scene_tau,
                                                 std::uint64_t seed) const {
  TLinkageConfig c;
  c.tau_t = get("tlinkage.tau_t").empty() ? std::max(scene_sigma, 1e-9) : get_double("tlinkage.tau_t");
  c.tau = get("tlinkage.tau").empty() ? scene_tau : get_double("tlinkage.tau");
  c.num_hypotheses = static_cast<int>(get_int("tlinkage.num_hypotheses"));
  c.seed = seed;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::vector<RigidTransform> fit_cluster_transforms(const CorrespondenceSet& cs, const Clustering& c) {
  std::vector<RigidTransform> out;
  for (const auto& m : c.members()) {
    if (m.size() >= 3) {
      out.push_back(horn_register(cs, m).transform);
      continue;
    }
    Vec3 d = Vec3::Zero();
    for (auto i : m) d += cs[i].b - cs[i].a;
    if (!m.empty()) d /= static_cast<double>(m.size());
    out.push_back({RotationMatrix::identity(), d});
  }
  return out;
}

namespace {

std::vector<ClusterModel> models_from_transforms(const CorrespondenceSet& cs, const Clustering& c,
                                                 const std::vector<RigidTransform>& transforms) {
  const auto members = c.members();
  const double assigned = static_cast<double>(c.num_assigned());
  std::vector<ClusterModel> out;
  for (std::size_t k = 0; k < members.size(); ++k) {
    std::vector<Vec3> res;
    for (auto i : members[k]) res.push_back(cs[i].b - apply(transforms[k], cs[i].a));
    const double s = res.size() >= 2 ? estimate_noise_std(res) : kSigmaFloor;
    out.push_back({transforms[k], s, assigned > 0 ? static_cast<double>(members[k].size()) / assigned : 0.0});
  }
  return out;
}

std::vector<RigidTransform> transforms_of(const std::vector<ClusterModel>& models) {
  std::vector<RigidTransform> out;
  for (const auto& m : models) out.push_back(m.transform);
  return out;
}

}  // namespace

Clustering build_initialization(const ExperimentConfig& cfg, const LabeledScene& scene) {
  const std::string& init = cfg.get("init");
  const double tau = cfg.get("init.tau").empty() ? scene.spec.tau : cfg.get_double("init.tau");
  if (init == "euclidean") return euclidean_cluster(scene.correspondences, tau);
  if (init == "good-split") {
    const long long f = cfg.get_int("init.fragments");
    if (f < 1) throw ConfigError("init.fragments must be >= 1");
    return make_good_initial_clustering(scene, cfg.get_double("init.alpha"), static_cast<int>(f),
                                        derive_seed(cfg.get_u64("seed"), 1));
  }
  if (init == "from-file") {
    if (cfg.get("init.file").empty()) throw ConfigError("init=from-file needs init.file");
    auto c = load_clustering(cfg.get("init.file"));
    if (c.size() != scene.correspondences.size())
      throw ConfigError("init.file has " + std::to_string(c.size()) + " labels, scene has " +
                        std::to_string(scene.correspondences.size()) + " correspondences");
    return c;
  }
  if (init == "ground-truth") return scene.truth();
  throw ConfigError("unknown init '" + init + "' (euclidean|good-split|from-file|ground-truth)");
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const LabeledScene& scene) {
  RunOutcome out;
  out.algorithm = cfg.get("algorithm");
  const auto& cs = scene.correspondences;
  const std::uint64_t seed = cfg.get_u64("seed");
  const auto start = std::chrono::steady_clock::now();

  const bool needs_init = out.algorithm != "sransac";
  if (out.algorithm != "em" && out.algorithm != "sransac" && out.algorithm != "tlinkage" &&
      out.algorithm != "naive-horn-per-cluster")
    throw ConfigError("unknown algorithm '" + out.algorithm +
                      "' (em|sransac|tlinkage|naive-horn-per-cluster)");

  try {
    if (needs_init) out.initial = build_initialization(cfg, scene);
  } catch (const ConfigError&) {
    throw;
  } catch (const IoError&) {
    throw;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = std::string("initialization failed: ") + e.what();
    return out;
  }

  try {
    if (out.algorithm == "em") {
      out.em = run_em(cs, out.initial, cfg.em_config(scene.spec.tau));
      out.clustering = out.em->clustering;
      out.models = out.em->models;
    } else if (out.algorithm == "sransac") {
      out.clustering = sequential_ransac(cs, cfg.ransac_config(scene.spec.sigma, derive_seed(seed, 2)));
      out.models = models_from_transforms(cs, out.clustering, fit_cluster_transforms(cs, out.clustering));
    } else if (out.algorithm == "tlinkage") {
      out.clustering = tlinkage_cluster(
          cs, out.initial, cfg.tlinkage_config(scene.spec.sigma, scene.spec.tau, derive_seed(seed, 3)));
      out.models = models_from_transforms(cs, out.clustering, fit_cluster_transforms(cs, out.clustering));
    } else {
      out.clustering = out.initial;
      out.models = models_from_transforms(cs, out.clustering, fit_cluster_transforms(cs, out.clustering));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
    return out;
  }

  const auto transforms = transforms_of(out.models);
  out.report = evaluate(out.clustering, transforms, scene);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

namespace {

void put_report(KeyValueRecord& rec, const EvalReport& r) {
  rec.set("metrics.point_error", r.point_error);
  rec.set("metrics.point_error_per_point", r.point_error_per_point);
  rec.set("metrics.rotation_error", r.rotation_error);
  rec.set("metrics.translation_error", r.translation_error);
  rec.set("metrics.mask_iou", r.mask_iou);
  rec.set("metrics.per_object_point_error", join_doubles(r.per_object_point_error));
  rec.set("metrics.per_cluster_rotation_error", join_doubles(r.per_cluster_rotation_error));
  rec.set("metrics.per_cluster_translation_error", join_doubles(r.per_cluster_translation_error));
  rec.set("metrics.per_cluster_iou", join_doubles(r.per_cluster_iou));
}

EvalReport get_report(const KeyValueRecord& rec) {
  EvalReport r;
  r.point_error = parse_double(rec.get("metrics.point_error"));
  r.point_error_per_point = parse_double(rec.get("metrics.point_error_per_point"));
  r.rotation_error = parse_double(rec.get("metrics.rotation_error"));
  r.translation_error = parse_double(rec.get("metrics.translation_error"));
  r.mask_iou = parse_double(rec.get("metrics.mask_iou"));
  r.per_object_point_error = split_doubles(rec.get("metrics.per_object_point_error"));
  r.per_cluster_rotation_error = split_doubles(rec.get("metrics.per_cluster_rotation_error"));
  r.per_cluster_translation_error = split_doubles(rec.get("metrics.per_cluster_translation_error"));
  r.per_cluster_iou = split_doubles(rec.get("metrics.per_cluster_iou"));
  return r;
}

std::string rotation_text(const RotationMatrix& R) {
  std::vector<double> v;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) v.push_back(R.matrix()(r, c));
  return join_doubles(v);
}

}  // namespace

KeyValueRecord result_record(const ExperimentConfig& cfg, const RunOutcome& out) {
  KeyValueRecord rec;
  rec.set("tool.version", kToolVersion);
  rec.set("config.hash", cfg.hash());
  for (const auto& [k, v] : cfg.values()) rec.set("config." + k, v);
  rec.set("status", out.ok ? std::string("ok") : std::string("error"));
  rec.set("error", out.error);
  if (!out.ok) return rec;

  put_report(rec, out.report);
  rec.set("clustering.num_clusters", std::to_string(out.clustering.num_clusters));
  rec.set("clustering.labels", join_ints(out.clustering.labels));
  rec.set("model.count", std::to_string(out.models.size()));
  for (std::size_t k = 0; k < out.models.size(); ++k) {
    const std::string p = "model." + std::to_string(k + 1) + ".";
    rec.set(p + "rotation", rotation_text(out.models[k].transform.rotation));
    rec.set(p + "translation", join_doubles({out.models[k].transform.translation.x(),
                                             out.models[k].transform.translation.y(),
                                             out.models[k].transform.translation.z()}));
    rec.set(p + "sigma_hat", out.models[k].sigma_hat);
    rec.set(p + "weight", out.models[k].weight);
  }
  if (out.em) {
    rec.set("em.iterations", std::to_string(out.em->iterations_run));
    rec.set("em.converged", out.em->converged ? std::string("true") : std::string("false"));
    rec.set("em.changes", join_sizes(out.em->changes_per_iteration));
    for (const auto& t : out.em->trace) {
      const std::string p = "trace." + std::to_string(t.iteration) + ".";
      rec.set(p + "sizes", join_sizes(t.sizes));
      rec.set(p + "weights", join_doubles(t.weights));
      rec.set(p + "sigma_hat", join_doubles(t.sigma_hats));
      rec.set(p + "changes", std::to_string(t.changes));
    }
  }
  return rec;
}

ResultRecord parse_result(const KeyValueRecord& rec) {
  ResultRecord r;
  r.tool_version = rec.get("tool.version");
  r.config_hash = rec.get("config.hash");
  for (const auto& [k, v] : rec.entries())
    if (k.rfind("config.", 0) == 0 && k != "config.hash") r.config[k.substr(7)] = v;
  r.status = rec.get("status");
  r.error = rec.contains("error") ? rec.get("error") : std::string();
  if (r.status != "ok") return r;

  r.report = get_report(rec);
  std::vector<int> labels;
  for (double v : split_doubles(rec.get("clustering.labels"))) labels.push_back(static_cast<int>(v));
  r.clustering = Clustering::from_labels(std::move(labels));
  r.clustering.num_clusters = static_cast<int>(parse_double(rec.get("clustering.num_clusters")));
  const auto count = static_cast<std::size_t>(parse_double(rec.get("model.count")));
  for (std::size_t k = 1; k <= count; ++k) {
    const std::string p = "model." + std::to_string(k) + ".";
    const auto rv = split_doubles(rec.get(p + "rotation"));
    const auto tv = split_doubles(rec.get(p + "translation"));
    if (rv.size() != 9 || tv.size() != 3) throw ParseError("malformed " + p + " entry");
    Mat3 R;
    for (int i = 0; i < 9; ++i) R(i / 3, i % 3) = rv[static_cast<std::size_t>(i)];
    ClusterModel m;
    try {
      m.transform = {RotationMatrix(R), Vec3(tv[0], tv[1], tv[2])};
    } catch (const std::invalid_argument&) {
      throw ParseError(p + "rotation is not a rotation");
    }
    m.sigma_hat = parse_double(rec.get(p + "sigma_hat"));
    m.weight = parse_double(rec.get(p + "weight"));
    r.models.push_back(m);
  }
  if (rec.contains("em.iterations")) {
    r.em_iterations = static_cast<int>(parse_double(rec.get("em.iterations")));
    r.em_converged = rec.get("em.converged") == "true";
    r.em_changes = split_doubles(rec.get("em.changes"));
  }
  return r;
}

EvalReport evaluate_prediction(const Clustering& pred, std::span<const RigidTransform> models,
                               const LabeledScene& scene) {
  if (pred.size() != scene.correspondences.size())
    throw std::invalid_argument("prediction has " + std::to_string(pred.size()) + " labels, scene has " +
                                std::to_string(scene.correspondences.size()) + " correspondences");
  if (models.size() < static_cast<std::size_t>(pred.num_clusters))
    throw std::invalid_argument("prediction lacks a model for every cluster");
  const Clustering canon = canonicalize(pred);
  std::vector<RigidTransform> remapped(static_cast<std::size_t>(canon.num_clusters));
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (canon.labels[i] > 0)
      remapped[static_cast<std::size_t>(canon.labels[i] - 1)] = models[static_cast<std::size_t>(pred.labels[i] - 1)];
  return evaluate(canon, remapped, scene);
}

KeyValueRecord eval_record(const EvalReport& report) {
  KeyValueRecord rec;
  rec.set("tool.version", kToolVersion);
  put_report(rec, report);
  return rec;
}

std::pair<std::string, std::string> run_bench(const ExperimentConfig& cfg) {
  std::vector<std::size_t> ms;
  for (const auto& s : split_commas(cfg.get("bench.m_values"))) {
    double v = 0.0;
    try {
      v = parse_double(s);
    } catch (const ParseError&) {
      throw ConfigError("bench.m_values must be a comma-separated list of integers");
    }
    if (!(v >= 3.0) || v != std::floor(v)) throw ConfigError("bench.m_values entries must be integers >= 3");
    ms.push_back(static_cast<std::size_t>(v));
  }
  const long long trials = cfg.get_int("bench.trials");
  if (trials < 1) throw ConfigError("bench.trials must be >= 1");
  const std::string& suite = cfg.get("bench.suite");
  try {
    if (suite == "consistency") {
      const auto b = run_consistency_bench(ms, cfg.get_double("bench.sigma"), cfg.get_double("bench.B"),
                                           cfg.get_double("bench.delta"), static_cast<std::size_t>(trials),
                                           cfg.get_u64("seed"));
      return {consistency_csv(b), consistency_summary_csv(b)};
    }
    if (suite == "sigma-ratio") {
      const auto b = run_sigma_ratio_bench(ms, cfg.get_double("bench.sigma"), cfg.get_double("bench.delta"),
                                           static_cast<std::size_t>(trials), cfg.get_u64("seed"));
      return {sigma_ratio_csv(b), sigma_ratio_summary_csv(b)};
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown bench.suite '" + suite + "' (consistency|sigma-ratio)");
}

}  // namespace mmreg
