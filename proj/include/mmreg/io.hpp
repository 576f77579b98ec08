#ifndef MMREG_IO_HPP
#define MMREG_IO_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mmreg/clustering.hpp"
#include "mmreg/scene.hpp"
#include "mmreg/theory.hpp"

namespace mmreg {

/// Malformed input file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failure (cannot open, short write).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest-round-trip-safe decimal (17 significant digits).
std::string format_double(double v);
double parse_double(std::string_view s);
std::string join_doubles(const std::vector<double>& v);
std::vector<double> split_doubles(std::string_view s);

// Scene file: '#'-prefixed "key value" header, then one "ax ay az bx by bz
// label" line per correspondence, then M "POSE j r11 .. r33 tx ty tz" lines.
void write_scene(std::ostream& os, const LabeledScene& scene);
LabeledScene read_scene(std::istream& is);
void save_scene(const std::string& path, const LabeledScene& scene);
LabeledScene load_scene(const std::string& path);

// Clustering file: one integer label per line.
void write_clustering(std::ostream& os, const Clustering& c);
Clustering read_clustering(std::istream& is);
void save_clustering(const std::string& path, const Clustering& c);
Clustering load_clustering(const std::string& path);

/// Flat "key = value" record, in insertion order.
class KeyValueRecord {
 public:
  void set(std::string key, std::string value);
  void set(std::string key, double value) { set(std::move(key), format_double(value)); }
  bool contains(std::string_view key) const;
  /// Throws ParseError if absent.
  const std::string& get(std::string_view key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& os) const;
  static KeyValueRecord read(std::istream& is);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Writes `text` to `path`, replacing any existing file. Throws IoError.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

/// Per-trial consistency CSV: m,sigma,B,delta,lambda_min,err_rot,bound_rot,
/// err_trans,bound_trans,violated (violated = rot + 2 * trans).
std::string consistency_csv(const ConsistencyBench& bench);
std::string consistency_summary_csv(const ConsistencyBench& bench);
std::string sigma_ratio_csv(const SigmaRatioBench& bench);
std::string sigma_ratio_summary_csv(const SigmaRatioBench& bench);

}  // namespace mmreg

#endif  // MMREG_IO_HPP
