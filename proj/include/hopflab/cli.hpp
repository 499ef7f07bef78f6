#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hopflab/common.hpp"

namespace hopflab::cli {

/// Flat `key = value` configuration; `#` starts a comment, lists are comma separated
/// (optionally wrapped in brackets). Typed getters record which keys were consumed so
/// that leftovers can be reported as unknown.
class ExperimentConfig {
 public:
  std::string experiment;

  static ExperimentConfig parse(std::string_view text, const std::string& origin = "<config>");
  static ExperimentConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;

  /// Throws Configuration naming the first key no getter asked for.
  void reject_unknown() const;

  /// FNV-1a of the sorted `key=value` lines, experiment included.
  std::string digest() const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
  std::string origin_;
  mutable std::set<std::string> used_;

  const std::string* find(const std::string& key) const;
  [[noreturn]] void bad_value(const std::string& key, const std::string& what) const;
};

/// Split a list value ("1, 2, 3" or "[1, 2, 3]").
std::vector<std::string> split_list(std::string_view value);

const std::vector<std::string>& experiment_names();

/// Exit codes.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDivergence = 3;

int exit_code_for(ErrorKind kind);

struct RunRequest {
  std::string subcommand;  // experiment name, or "run" to take it from the config
  std::filesystem::path config_path;
  std::filesystem::path out_dir = "hopf-lab-out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> argv;  // recorded in the metadata file only
};

/// Loads the config, dispatches, writes summary.json, CSV tables and metadata.json
/// under out_dir, and returns the exit code. Messages go to `log`.
int run(const RunRequest& request, std::ostream& log);

/// Runs an already parsed config (the experiment field must be set).
int run_config(ExperimentConfig config, const std::filesystem::path& out_dir, std::ostream& log,
               const std::vector<std::string>& argv = {});

}  // namespace hopflab::cli
