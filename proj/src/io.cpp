#include "mmreg/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace mmreg {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s) {
  const std::string tmp(s);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size())
    throw ParseError("not a number: '" + tmp + "'");
  return v;
}

namespace {

long long parse_integer(std::string_view s) {
  const std::string tmp(s);
  char* end = nullptr;
  const long long v = std::strtoll(tmp.c_str(), &end, 10);
  if (tmp.empty() || end != tmp.c_str() + tmp.size())
    throw ParseError("not an integer: '" + tmp + "'");
  return v;
}

std::uint64_t parse_u64(std::string_view s) {
  const std::string tmp(s);
  char* end = nullptr;
  const unsigned long long v = std::strtoull(tmp.c_str(), &end, 10);
  if (tmp.empty() || tmp[0] == '-' || end != tmp.c_str() + tmp.size())
    throw ParseError("not an unsigned integer: '" + tmp + "'");
  return v;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

std::vector<double> split_doubles(std::string_view s) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.push_back(parse_double(trim(s.substr(start, comma - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scene

void write_scene(std::ostream& os, const LabeledScene& scene) {
  const auto& s = scene.spec;
  os << "# version 1\n";
  os << "# n " << scene.correspondences.size() << '\n';
  os << "# M " << s.num_objects << '\n';
  os << "# sigma " << format_double(s.sigma) << '\n';
  os << "# tau " << format_double(s.tau) << '\n';
  os << "# B " << format_double(s.bound_B) << '\n';
  os << "# seed " << s.seed << '\n';
  os << "# separation_margin " << format_double(s.separation_margin) << '\n';
  os << "# object_radius " << format_double(s.object_radius) << '\n';
  for (std::size_t i = 0; i < scene.correspondences.size(); ++i) {
    const auto& c = scene.correspondences[i];
    os << format_double(c.a.x()) << ' ' << format_double(c.a.y()) << ' ' << format_double(c.a.z()) << ' '
       << format_double(c.b.x()) << ' ' << format_double(c.b.y()) << ' ' << format_double(c.b.z()) << ' '
       << scene.true_labels[i] << '\n';
  }
  for (std::size_t j = 0; j < scene.true_transforms.size(); ++j) {
    const auto& T = scene.true_transforms[j];
    os << "POSE " << j + 1;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) os << ' ' << format_double(T.rotation.matrix()(r, c));
    for (int k = 0; k < 3; ++k) os << ' ' << format_double(T.translation(k));
    os << '\n';
  }
}

LabeledScene read_scene(std::istream& is) {
  std::map<std::string, std::string> header;
  LabeledScene scene;
  std::vector<std::pair<int, RigidTransform>> poses;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    std::istringstream ls(t);
    if (t[0] == '#') {
      std::string hash, key, value;
      ls >> hash >> key >> value;
      if (key.empty() || value.empty()) throw ParseError("bad header at line " + std::to_string(lineno));
      header[key] = value;
      continue;
    }
    std::vector<std::string> tok;
    for (std::string w; ls >> w;) tok.push_back(w);
    if (tok[0] == "POSE") {
      if (tok.size() != 14) throw ParseError("bad POSE line " + std::to_string(lineno));
      Mat3 R;
      for (int k = 0; k < 9; ++k) R(k / 3, k % 3) = parse_double(tok[2 + static_cast<std::size_t>(k)]);
      Vec3 tr(parse_double(tok[11]), parse_double(tok[12]), parse_double(tok[13]));
      try {
        poses.emplace_back(static_cast<int>(parse_integer(tok[1])), RigidTransform{RotationMatrix(R), tr});
      } catch (const std::invalid_argument&) {
        throw ParseError("POSE at line " + std::to_string(lineno) + " is not a rotation");
      }
      continue;
    }
    if (tok.size() != 7) throw ParseError("expected 7 fields at line " + std::to_string(lineno));
    Vec3 a(parse_double(tok[0]), parse_double(tok[1]), parse_double(tok[2]));
    Vec3 b(parse_double(tok[3]), parse_double(tok[4]), parse_double(tok[5]));
    scene.correspondences.push_back({a, b});
    scene.true_labels.push_back(static_cast<int>(parse_integer(tok[6])));
  }

  auto need = [&](const char* k) -> const std::string& {
    auto it = header.find(k);
    if (it == header.end()) throw ParseError(std::string("scene header missing '") + k + "'");
    return it->second;
  };
  if (need("version") != "1") throw ParseError("unsupported scene version " + need("version"));
  const auto n = static_cast<std::size_t>(parse_integer(need("n")));
  auto& spec = scene.spec;
  spec.num_objects = static_cast<int>(parse_integer(need("M")));
  spec.sigma = parse_double(need("sigma"));
  spec.tau = parse_double(need("tau"));
  spec.bound_B = parse_double(need("B"));
  spec.seed = parse_u64(need("seed"));
  spec.separation_margin =
      header.count("separation_margin") ? parse_double(header["separation_margin"]) : 2.0 * spec.tau;
  spec.object_radius = header.count("object_radius") ? parse_double(header["object_radius"]) : 0.0;
  if (scene.correspondences.size() != n)
    throw ParseError("scene header n=" + std::to_string(n) + " but " +
                     std::to_string(scene.correspondences.size()) + " correspondences");
  if (spec.num_objects < 1) throw ParseError("scene M must be positive");

  spec.points_per_object.assign(static_cast<std::size_t>(spec.num_objects), 0);
  spec.num_outliers = 0;
  for (int l : scene.true_labels) {
    if (l < 0 || l > spec.num_objects) throw ParseError("label out of range: " + std::to_string(l));
    if (l == 0)
      ++spec.num_outliers;
    else
      ++spec.points_per_object[static_cast<std::size_t>(l - 1)];
  }
  if (poses.size() != static_cast<std::size_t>(spec.num_objects))
    throw ParseError("expected one POSE line per object");
  scene.true_transforms.resize(poses.size());
  std::vector<bool> seen(poses.size(), false);
  for (auto& [j, T] : poses) {
    if (j < 1 || j > spec.num_objects || seen[static_cast<std::size_t>(j - 1)])
      throw ParseError("bad POSE index " + std::to_string(j));
    seen[static_cast<std::size_t>(j - 1)] = true;
    scene.true_transforms[static_cast<std::size_t>(j - 1)] = T;
  }
  return scene;
}

void save_scene(const std::string& path, const LabeledScene& scene) {
  std::ostringstream os;
  write_scene(os, scene);
  write_text_file(path, os.str());
}

LabeledScene load_scene(const std::string& path) {
  std::istringstream is(read_text_file(path));
  return read_scene(is);
}

// ---------------------------------------------------------------------------
// Clustering

void write_clustering(std::ostream& os, const Clustering& c) {
  for (int l : c.labels) os << l << '\n';
}

Clustering read_clustering(std::istream& is) {
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const long long v = parse_integer(t);
    if (v < 0) throw ParseError("negative label at line " + std::to_string(lineno));
    labels.push_back(static_cast<int>(v));
  }
  return Clustering::from_labels(std::move(labels));
}

void save_clustering(const std::string& path, const Clustering& c) {
  std::ostringstream os;
  write_clustering(os, c);
  write_text_file(path, os.str());
}

Clustering load_clustering(const std::string& path) {
  std::istringstream is(read_text_file(path));
  return read_clustering(is);
}

// ---------------------------------------------------------------------------
// Key-value records

void KeyValueRecord::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = std::move(value);
      return;
    }
  entries_.emplace_back(std::move(key), std::move(value));
}

bool KeyValueRecord::contains(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return true;
  return false;
}

const std::string& KeyValueRecord::get(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw ParseError("missing key '" + std::string(key) + "'");
}

void KeyValueRecord::write(std::ostream& os) const {
  for (const auto& [k, v] : entries_) os << k << " = " << v << '\n';
}

KeyValueRecord KeyValueRecord::read(std::istream& is) {
  KeyValueRecord rec;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value' at line " + std::to_string(lineno));
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw ParseError("empty key at line " + std::to_string(lineno));
    rec.set(std::move(key), trim(std::string_view(t).substr(eq + 1)));
  }
  return rec;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << text;
  os.flush();
  if (!os) throw IoError("short write to '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Bench CSV

std::string consistency_csv(const ConsistencyBench& bench) {
  std::ostringstream os;
  os << "m,sigma,B,delta,lambda_min,err_rot,bound_rot,err_trans,bound_trans,violated\n";
  for (const auto& t : bench.trials)
    os << t.m << ',' << format_double(t.sigma) << ',' << format_double(t.B) << ','
       << format_double(t.delta) << ',' << format_double(t.lambda_min) << ',' << format_double(t.err_rot)
       << ',' << format_double(t.bound_rot) << ',' << format_double(t.err_trans) << ','
       << format_double(t.bound_trans) << ','
       << (static_cast<int>(t.violated_rot) + 2 * static_cast<int>(t.violated_trans)) << '\n';
  return os.str();
}

std::string consistency_summary_csv(const ConsistencyBench& bench) {
  std::ostringstream os;
  os << "m,trials,violation_rate_rot,violation_rate_trans,median_err_rot,median_err_trans\n";
  for (const auto& s : bench.summary)
    os << s.m << ',' << s.trials << ',' << format_double(s.violation_rate_rot) << ','
       << format_double(s.violation_rate_trans) << ',' << format_double(s.median_err_rot) << ','
       << format_double(s.median_err_trans) << '\n';
  return os.str();
}

std::string sigma_ratio_csv(const SigmaRatioBench& bench) {
  std::ostringstream os;
  os << "m,sigma,delta,sigma_hat,ratio,lower,upper,within_001,violated\n";
  for (const auto& t : bench.trials)
    os << t.m << ',' << format_double(t.sigma) << ',' << format_double(t.delta) << ','
       << format_double(t.sigma_hat) << ',' << format_double(t.ratio) << ',' << format_double(t.lower)
       << ',' << format_double(t.upper) << ',' << int(t.within_001) << ',' << int(t.violated) << '\n';
  return os.str();
}

std::string sigma_ratio_summary_csv(const SigmaRatioBench& bench) {
  std::ostringstream os;
  os << "m,trials,within_001,violation_rate,mean_ratio\n";
  for (const auto& s : bench.summary)
    os << s.m << ',' << s.trials << ',' << s.within_001 << ',' << format_double(s.violation_rate) << ','
       << format_double(s.mean_ratio) << '\n';
  return os.str();
}

}  // namespace mmreg
