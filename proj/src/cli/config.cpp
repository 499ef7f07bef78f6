#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hopflab/cli.hpp"
#include "hopflab/report.hpp"

namespace hopflab::cli {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool valid_key(const std::string& k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

}  // namespace

std::vector<std::string> split_list(std::string_view value) {
  std::string v = trim(value);
  if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = v.find(',', start);
    out.push_back(trim(std::string_view(v).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

ExperimentConfig ExperimentConfig::parse(std::string_view text, const std::string& origin) {
  ExperimentConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) fail(ErrorKind::Configuration, where + ": expected `key = value`");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!valid_key(key)) fail(ErrorKind::Configuration, where + ": invalid key '" + key + "'");
    if (key == "experiment") {
      if (!cfg.experiment.empty()) fail(ErrorKind::Configuration, where + ": duplicate key 'experiment'");
      cfg.experiment = value;
      continue;
    }
    if (cfg.entries_.count(key)) fail(ErrorKind::Configuration, where + ": duplicate key '" + key + "'");
    cfg.entries_[key] = value;
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Configuration, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "experiment") {
    experiment = value;
    return;
  }
  entries_[key] = value;
}

const std::string* ExperimentConfig::find(const std::string& key) const {
  used_.insert(key);
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void ExperimentConfig::bad_value(const std::string& key, const std::string& what) const {
  fail(ErrorKind::Configuration, origin_ + ": key '" + key + "': " + what);
}

namespace {

template <typename T>
bool parse_number(const std::string& s, T& out) {
  if constexpr (std::is_floating_point_v<T>) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
  } else {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
  }
}

}  // namespace

std::string ExperimentConfig::get_string(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  double out = 0;
  if (!parse_number(*v, out)) bad_value(key, "expected a number, got '" + *v + "'");
  return out;
}

int ExperimentConfig::get_int(const std::string& key, int fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  int out = 0;
  if (!parse_number(*v, out)) bad_value(key, "expected an integer, got '" + *v + "'");
  return out;
}

std::uint64_t ExperimentConfig::get_uint(const std::string& key, std::uint64_t fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  if (!parse_number(*v, out)) bad_value(key, "expected a nonnegative integer, got '" + *v + "'");
  return out;
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  bad_value(key, "expected true/false, got '" + *v + "'");
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(*v)) {
    double x = 0;
    if (!parse_number(item, x)) bad_value(key, "expected a list of numbers, got '" + item + "'");
    out.push_back(x);
  }
  if (out.empty()) bad_value(key, "list must be nonempty");
  return out;
}

std::vector<int> ExperimentConfig::get_ints(const std::string& key, const std::vector<int>& fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  std::vector<int> out;
  for (const auto& item : split_list(*v)) {
    int x = 0;
    if (!parse_number(item, x)) bad_value(key, "expected a list of integers, got '" + item + "'");
    out.push_back(x);
  }
  if (out.empty()) bad_value(key, "list must be nonempty");
  return out;
}

std::vector<std::string> ExperimentConfig::get_strings(const std::string& key,
                                                       const std::vector<std::string>& fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  auto out = split_list(*v);
  if (out.empty()) bad_value(key, "list must be nonempty");
  return out;
}

void ExperimentConfig::reject_unknown() const {
  for (const auto& [k, v] : entries_)
    if (!used_.count(k)) fail(ErrorKind::Configuration, origin_ + ": unknown key '" + k + "' for experiment " + experiment);
}

std::string ExperimentConfig::digest() const {
  std::string text = "experiment=" + experiment + "\n";
  for (const auto& [k, v] : entries_) text += k + "=" + v + "\n";
  return hex_digest(fnv1a(text));
}

}  // namespace hopflab::cli
