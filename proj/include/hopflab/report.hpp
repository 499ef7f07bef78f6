#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hopflab {

struct InequalityReport;
struct BarrierCertificate;
struct SweepSummary;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 14695981039346656037ull);
std::string hex_digest(std::uint64_t h);
/// Digest of the raw bytes of a vector of doubles.
std::string field_digest(const Eigen::VectorXd& v);

/// Shortest round-trip text for a double ("%.17g"); nan / inf spelled out.
std::string format_double(double x);

/// CSV table with a header row, LF endings, optional provenance column.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> row);
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  void write(std::ostream& os) const;
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Ledger columns: name, n, lambda, Lambda, alpha, epsilon, constant, pass, seed, grid_m, residual.
std::vector<std::string> ledger_header();

/// JSON text (stable key order, two-space indent).
std::string to_json(const InequalityReport& r);
std::string to_json(const BarrierCertificate& c);

}  // namespace hopflab
