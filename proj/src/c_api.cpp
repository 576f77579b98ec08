#include "mmreg/mmreg.h"

#include <cstring>
#include <fstream>
#include <cstdlib>
#include <map>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "mmreg/experiment.hpp"
#include "mmreg/horn.hpp"

struct mmreg_config {
  mmreg::ExperimentConfig cfg;
};

struct mmreg_scene {
  mmreg::LabeledScene scene;
};

struct mmreg_result {
  mmreg::KeyValueRecord record;
  bool ok = true;
  std::string error;
  mmreg::Clustering clustering;
  std::map<std::string, double> metrics;
};

namespace {

thread_local std::string g_last_error;

mmreg_status fail(mmreg_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Maps exceptions from the core onto status codes.
template <typename F>
mmreg_status guarded(F&& f) {
  g_last_error.clear();
  try {
    return f();
  } catch (const mmreg::InfeasibleSpec& e) {
    return fail(MMREG_INFEASIBLE, e.what());
  } catch (const mmreg::ParseError& e) {
    return fail(MMREG_PARSE, e.what());
  } catch (const mmreg::IoError& e) {
    return fail(MMREG_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(MMREG_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MMREG_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MMREG_ALGORITHM, e.what());
  } catch (...) {
    return fail(MMREG_INTERNAL, "unknown error");
  }
}

void fill_metrics(mmreg_result& r, const mmreg::EvalReport& rep) {
  r.metrics["point_error"] = rep.point_error;
  r.metrics["point_error_per_point"] = rep.point_error_per_point;
  r.metrics["rotation_error"] = rep.rotation_error;
  r.metrics["translation_error"] = rep.translation_error;
  r.metrics["mask_iou"] = rep.mask_iou;
}

bool looks_like_record(const std::string& text) {
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) {
    const auto p = line.find_first_not_of(" \t\r");
    if (p == std::string::npos || line[p] == '#') continue;
    return line.find('=') != std::string::npos;
  }
  return false;
}

}  // namespace

extern "C" {

const char* mmreg_version(void) { return mmreg::kToolVersion; }

const char* mmreg_last_error(void) { return g_last_error.c_str(); }

void mmreg_string_free(char* s) { std::free(s); }

mmreg_status mmreg_config_create(mmreg_config** out) {
  if (!out) return fail(MMREG_INVALID_ARGUMENT, "null output pointer");
  return guarded([&] {
    *out = new mmreg_config();
    return MMREG_OK;
  });
}

void mmreg_config_destroy(mmreg_config* cfg) { delete cfg; }

mmreg_status mmreg_config_load(mmreg_config* cfg, const char* path) {
  if (!cfg || !path) return fail(MMREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    cfg->cfg.load_file(path);
    return MMREG_OK;
  });
}

mmreg_status mmreg_config_set(mmreg_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail(MMREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    cfg->cfg.set(key, value);
    return MMREG_OK;
  });
}

mmreg_status mmreg_config_set_assignment(mmreg_config* cfg, const char* assignment) {
  if (!cfg || !assignment) return fail(MMREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    cfg->cfg.set_assignment(assignment);
    return MMREG_OK;
  });
}

mmreg_status mmreg_config_get(const mmreg_config* cfg, const char* key, char** out) {
  if (!cfg || !key || !out) return fail(MMREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const std::string& v = cfg->cfg.get(key);
    char* s = static_cast<char*>(std::malloc(v.size() + 1));
    if (!s) throw std::bad_alloc();
    std::memcpy(s, v.c_str(), v.size() + 1);
    *out = s;
    return MMREG_OK;
  });
}

mmreg_status mmreg_config_hash(const mmreg_config* cfg, char out[17]) {
  if (!cfg || !out) return fail(MMREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const std::string h = cfg->cfg.hash();
    std::memcpy(out, h.c_str(), 17);
    return MMREG_OK;
  });
}

mmreg_status mmreg_scene_generate(const mmreg_config* cfg, mmreg_scene** out) {
  if (!cfg || !out) return fail(MMREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto s = std::make_unique<mmreg_scene>();
    s->scene = mmreg::generate_scene(cfg->cfg.scene_spec());
    *out = s.release();
    return MMREG_OK;
  });
}

mmreg_status mmreg_scene_load(const char* path, mmreg_scene** out) {
  if (!path || !out) return fail(MMREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto s = std::make_unique<mmreg_scene>();
    s->scene = mmreg::load_scene(path);
    *out = s.release();
    return MMREG_OK;
  });
}

mmreg_status mmreg_scene_save(const mmreg_scene* scene, const char* path) {
  if (!scene || !path) return fail(MMREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    mmreg::save_scene(path, scene->scene);
    return MMREG_OK;
  });
}

void mmreg_scene_destroy(mmreg_scene* scene) { delete scene; }

size_t mmreg_scene_size(const mmreg_scene* scene) { return scene ? scene->scene.correspondences.size() : 0; }

int mmreg_scene_num_objects(const mmreg_scene* scene) { return scene ? scene->scene.spec.num_objects : 0; }

double mmreg_scene_sigma(const mmreg_scene* scene) { return scene ? scene->scene.spec.sigma : 0.0; }

double mmreg_scene_tau(const mmreg_scene* scene) { return scene ? scene->scene.spec.tau : 0.0; }

mmreg_status mmreg_scene_correspondence(const mmreg_scene* scene, size_t i, double a[3], double b[3],
                                        int* label) {
  if (!scene || !a || !b || !label) return fail(MMREG_INVALID_ARGUMENT, "null argument");
  if (i >= scene->scene.correspondences.size()) return fail(MMREG_INVALID_ARGUMENT, "index out of range");
  const auto& c = scene->scene.correspondences[i];
  for (int k = 0; k < 3; ++k) {
    a[k] = c.a[k];
    b[k] = c.b[k];
  }
  *label = scene->scene.true_labels[i];
  return MMREG_OK;
}

mmreg_status mmreg_run(const mmreg_config* cfg, const mmreg_scene* scene, mmreg_result** out) {
  if (!cfg || !scene || !out) return fail(MMREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto outcome = mmreg::run_experiment(cfg->cfg, scene->scene);
    auto r = std::make_unique<mmreg_result>();
    r->record = mmreg::result_record(cfg->cfg, outcome);
    r->ok = outcome.ok;
    r->error = outcome.error;
    r->metrics["wall_seconds"] = outcome.wall_seconds;
    if (outcome.ok) {
      r->clustering = outcome.clustering;
      fill_metrics(*r, outcome.report);
      if (outcome.em) {
        r->metrics["em_iterations"] = outcome.em->iterations_run;
        r->metrics["em_converged"] = outcome.em->converged ? 1.0 : 0.0;
      }
    }
    const bool ok = r->ok;
    *out = r.release();
    return ok ? MMREG_OK : fail(MMREG_ALGORITHM, outcome.error);
  });
}

mmreg_status mmreg_eval(const mmreg_scene* scene, const char* pred_path, mmreg_result** out) {
  if (!scene || !pred_path || !out) return fail(MMREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const std::string text = mmreg::read_text_file(pred_path);
    mmreg::Clustering pred;
    std::vector<mmreg::RigidTransform> models;
    const auto& cs = scene->scene.correspondences;
    if (looks_like_record(text)) {
      std::istringstream is(text);
      const auto parsed = mmreg::parse_result(mmreg::KeyValueRecord::read(is));
      if (parsed.status != "ok") throw std::invalid_argument("result file has status '" + parsed.status + "'");
      pred = parsed.clustering;
      for (const auto& m : parsed.models) models.push_back(m.transform);
    } else {
      std::istringstream is(text);
      pred = mmreg::read_clustering(is);
      if (pred.size() == cs.size()) models = mmreg::fit_cluster_transforms(cs, pred);
    }
    const auto report = mmreg::evaluate_prediction(pred, models, scene->scene);
    auto r = std::make_unique<mmreg_result>();
    r->record = mmreg::eval_record(report);
    r->clustering = mmreg::canonicalize(pred);
    fill_metrics(*r, report);
    *out = r.release();
    return MMREG_OK;
  });
}

mmreg_status mmreg_result_save(const mmreg_result* res, const char* path) {
  if (!res || !path) return fail(MMREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::ostringstream os;
    res->record.write(os);
    mmreg::write_text_file(path, os.str());
    return MMREG_OK;
  });
}

mmreg_status mmreg_result_metric(const mmreg_result* res, const char* name, double* out) {
  if (!res || !name || !out) return fail(MMREG_INVALID_ARGUMENT, "null argument");
  const auto it = res->metrics.find(name);
  if (it == res->metrics.end()) return fail(MMREG_INVALID_ARGUMENT, std::string("no metric '") + name + "'");
  *out = it->second;
  return MMREG_OK;
}

int mmreg_result_num_clusters(const mmreg_result* res) { return res ? res->clustering.num_clusters : 0; }

int mmreg_result_ok(const mmreg_result* res) { return res && res->ok ? 1 : 0; }

const char* mmreg_result_error(const mmreg_result* res) { return res ? res->error.c_str() : ""; }

size_t mmreg_result_labels(const mmreg_result* res, int* out, size_t n) {
  if (!res) return 0;
  const auto& l = res->clustering.labels;
  if (out)
    for (size_t i = 0; i < n && i < l.size(); ++i) out[i] = l[i];
  return l.size();
}

void mmreg_result_destroy(mmreg_result* res) { delete res; }

mmreg_status mmreg_bench(const mmreg_config* cfg, const char* csv_path, const char* summary_path) {
  if (!cfg || !csv_path || !summary_path) return fail(MMREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto [csv, summary] = mmreg::run_bench(cfg->cfg);
    mmreg::write_text_file(csv_path, csv);
    mmreg::write_text_file(summary_path, summary);
    return MMREG_OK;
  });
}

mmreg_status mmreg_horn_register(const double* a, const double* b, size_t n, double R[9], double t[3],
                                 double* sigma_hat) {
  if (!a || !b || !R || !t) return fail(MMREG_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    mmreg::CorrespondenceSet cs(n);
    for (size_t i = 0; i < n; ++i) {
      cs[i].a = mmreg::Vec3(a[3 * i], a[3 * i + 1], a[3 * i + 2]);
      cs[i].b = mmreg::Vec3(b[3 * i], b[3 * i + 1], b[3 * i + 2]);
    }
    const auto est = mmreg::horn_register(cs);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) R[3 * r + c] = est.transform.rotation.matrix()(r, c);
    for (int k = 0; k < 3; ++k) t[k] = est.transform.translation[k];
    if (sigma_hat) *sigma_hat = est.sigma_hat;
    return MMREG_OK;
  });
}

}  // extern "C"
