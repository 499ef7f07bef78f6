#include "hopflab/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "hopflab/barrier.hpp"
#include "hopflab/verify.hpp"

namespace hopflab {

using ordered_json = nlohmann::ordered_json;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string field_digest(const Eigen::VectorXd& v) {
  return hex_digest(fnv1a({reinterpret_cast<const char*>(v.data()), std::size_t(v.size()) * sizeof(double)}));
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> row) {
  require(row.size() == header_.size(), "CsvTable: row width does not match the header");
  rows_.push_back(std::move(row));
}

void CsvTable::write(std::ostream& os) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        os << cells[i];
        continue;
      }
      os << '"';
      for (char c : cells[i]) os << (c == '"' ? "\"\"" : std::string(1, c));
      os << '"';
    }
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

std::string CsvTable::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

std::vector<std::string> ledger_header() {
  return {"name", "n", "lambda", "Lambda", "alpha", "epsilon", "constant", "pass", "seed", "grid_m", "residual"};
}

namespace {

// JSON numbers cannot hold nan/inf; those go out as strings.
ordered_json num(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

}  // namespace

std::string to_json(const InequalityReport& r) {
  ordered_json j;
  j["name"] = r.name;
  j["lhs"] = num(r.lhs);
  j["rhs"] = num(r.rhs);
  j["measured_constant"] = num(r.measured_constant);
  j["tolerance"] = num(r.tolerance);
  j["pass"] = r.pass;
  j["inputs_digest"] = r.inputs_digest;
  j["notes"] = r.notes;
  return j.dump(2);
}

std::string to_json(const BarrierCertificate& c) {
  const auto& p = c.spec.params;
  ordered_json j;
  j["n"] = p.n;
  j["lambda"] = p.lambda;
  j["Lambda"] = p.Lambda;
  j["alpha"] = p.alpha;
  j["M"] = c.spec.M;
  j["R"] = c.spec.R;
  j["beta"] = c.constants.beta;
  j["c0"] = c.constants.c0;
  j["A1"] = c.constants.A1;
  j["A2"] = c.constants.A2;
  j["A3"] = c.constants.A3;
  j["A4"] = c.constants.A4;
  ordered_json m;
  m["pucci"] = num(c.margins.pucci);
  m["lower_sandwich"] = num(c.margins.lower_sandwich);
  m["upper_sandwich"] = num(c.margins.upper_sandwich);
  m["grad_lower"] = num(c.margins.grad_lower);
  m["grad_upper"] = num(c.margins.grad_upper);
  m["boundary"] = num(c.margins.boundary);
  j["margins"] = m;
  j["samples"] = c.samples;
  j["tol"] = c.tol;
  j["pass"] = c.pass;
  if (!c.pass) j["failed_property"] = c.failed_property;
  return j.dump(2);
}

}  // namespace hopflab
