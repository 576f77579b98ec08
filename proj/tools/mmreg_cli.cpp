// Command-line front end over the C API.
//
// Exit codes: 0 success, 1 algorithm failure, 2 usage/config/input error.
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mmreg/mmreg.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAlgorithm = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::string seed;
};

int report(mmreg_status s, const char* what) {
  if (s == MMREG_OK) return kExitOk;
  std::fprintf(stderr, "error: %s: %s\n", what, mmreg_last_error());
  return s == MMREG_ALGORITHM ? kExitAlgorithm : kExitUsage;
}

int build_config(const CommonOptions& o, const std::string& algorithm, mmreg_config** out) {
  if (int rc = report(mmreg_config_create(out), "config")) return rc;
  if (!o.config.empty())
    if (int rc = report(mmreg_config_load(*out, o.config.c_str()), "config")) return rc;
  for (const auto& s : o.sets)
    if (int rc = report(mmreg_config_set_assignment(*out, s.c_str()), "--set")) return rc;
  if (!o.seed.empty())
    if (int rc = report(mmreg_config_set(*out, "seed", o.seed.c_str()), "--seed")) return rc;
  if (!algorithm.empty())
    if (int rc = report(mmreg_config_set(*out, "algorithm", algorithm.c_str()), "--algorithm")) return rc;
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "key=value config file");
  cmd->add_option("--set", o.sets, "override a config key (key=value), repeatable");
  cmd->add_option("--seed", o.seed, "master seed");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void print_metrics(const mmreg_result* r) {
  for (const char* name : {"mask_iou", "point_error", "rotation_error", "translation_error"}) {
    double v = 0.0;
    if (mmreg_result_metric(r, name, &v) == MMREG_OK) std::printf("%-18s %.6g\n", name, v);
  }
}

int cmd_synth(const CommonOptions& o, const std::string& out) {
  mmreg_config* cfg = nullptr;
  int rc = build_config(o, "", &cfg);
  mmreg_scene* scene = nullptr;
  if (!rc) rc = report(mmreg_scene_generate(cfg, &scene), "synth");
  if (!rc) rc = report(mmreg_scene_save(scene, out.c_str()), "synth");
  if (!rc)
    std::printf("wrote %s: %zu correspondences, %d objects\n", out.c_str(), mmreg_scene_size(scene),
                mmreg_scene_num_objects(scene));
  mmreg_scene_destroy(scene);
  mmreg_config_destroy(cfg);
  return rc;
}

int cmd_run(const CommonOptions& o, const std::string& algorithm, const std::string& scene_path,
            const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  mmreg_config* cfg = nullptr;
  int rc = build_config(o, algorithm, &cfg);
  mmreg_scene* scene = nullptr;
  std::string path = scene_path;
  if (!rc && path.empty()) {
    char* from_cfg = nullptr;
    if (mmreg_config_get(cfg, "scene.file", &from_cfg) == MMREG_OK) path = from_cfg;
    mmreg_string_free(from_cfg);
  }
  if (!rc) {
    if (!path.empty())
      rc = report(mmreg_scene_load(path.c_str(), &scene), "scene");
    else
      rc = report(mmreg_scene_generate(cfg, &scene), "scene");
  }
  mmreg_result* res = nullptr;
  if (!rc) {
    const mmreg_status s = mmreg_run(cfg, scene, &res);
    rc = report(s, "run");
    if (res && !out.empty()) {
      if (int wrc = report(mmreg_result_save(res, out.c_str()), "write result")) rc = rc ? rc : wrc;
    }
    if (s == MMREG_OK) {
      char hash[17];
      mmreg_config_hash(cfg, hash);
      std::printf("config_hash        %s\n", hash);
      std::printf("clusters           %d\n", mmreg_result_num_clusters(res));
      print_metrics(res);
      double v = 0.0;
      if (mmreg_result_metric(res, "em_iterations", &v) == MMREG_OK) std::printf("em_iterations      %g\n", v);
      if (mmreg_result_metric(res, "wall_seconds", &v) == MMREG_OK) std::printf("algorithm_seconds  %.3f\n", v);
    }
  }
  std::printf("total_seconds      %.3f\n", seconds_since(t0));
  mmreg_result_destroy(res);
  mmreg_scene_destroy(scene);
  mmreg_config_destroy(cfg);
  return rc;
}

int cmd_eval(const std::string& scene_path, const std::string& pred, const std::string& out) {
  mmreg_scene* scene = nullptr;
  int rc = report(mmreg_scene_load(scene_path.c_str(), &scene), "scene");
  mmreg_result* res = nullptr;
  if (!rc) rc = report(mmreg_eval(scene, pred.c_str(), &res), "eval");
  if (!rc && !out.empty()) rc = report(mmreg_result_save(res, out.c_str()), "write eval");
  if (!rc) print_metrics(res);
  mmreg_result_destroy(res);
  mmreg_scene_destroy(scene);
  return rc;
}

int cmd_bench(const CommonOptions& o, const std::string& out, const std::string& summary) {
  const auto t0 = std::chrono::steady_clock::now();
  mmreg_config* cfg = nullptr;
  int rc = build_config(o, "", &cfg);
  if (!rc) rc = report(mmreg_bench(cfg, out.c_str(), summary.c_str()), "bench");
  if (!rc) std::printf("wrote %s and %s in %.3f s\n", out.c_str(), summary.c_str(), seconds_since(t0));
  mmreg_config_destroy(cfg);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-body point cloud registration"};
  app.set_version_flag("--version", std::string(mmreg_version()));
  app.require_subcommand(1);

  CommonOptions common;
  std::string out, scene_path, pred, algorithm, summary;

  auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
  add_common(synth, common);
  synth->add_option("--out", out, "scene file to write")->required();

  auto* run = app.add_subcommand("run", "run a segmentation algorithm and write a result file");
  add_common(run, common);
  run->add_option("--algorithm", algorithm, "em | sransac | tlinkage | naive-horn-per-cluster");
  run->add_option("--scene", scene_path, "scene file (default: generate from config)");
  run->add_option("--out", out, "result file to write");

  auto* eval = app.add_subcommand("eval", "score a result or clustering file against a scene");
  eval->add_option("--scene", scene_path, "scene file")->required();
  eval->add_option("--pred", pred, "result file or one-label-per-line clustering")->required();
  eval->add_option("--out", out, "eval record to write");

  auto* bench = app.add_subcommand("bench", "run an estimator bench suite");
  add_common(bench, common);
  bench->add_option("--out", out, "per-trial CSV")->required();
  bench->add_option("--summary", summary, "summary CSV (default: <out>.summary.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (*synth) return cmd_synth(common, out);
  if (*run) return cmd_run(common, algorithm, scene_path, out);
  if (*eval) return cmd_eval(scene_path, pred, out);
  if (summary.empty()) summary = out + ".summary.csv";
  return cmd_bench(common, out, summary);
}
