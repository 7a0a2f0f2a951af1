#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "provex/provgen.hpp"
#include "provex/relation.hpp"

namespace provex {

/// Customers, Orders and Lineitem with keys c_key, o_key and (o_key, linenum).
/// Every order references an existing customer and every line an existing order.
Database gen_minitpch(std::size_t customers, std::size_t orders, std::size_t lineitems, std::uint64_t seed);

/// A strategy produced rows that differ from the reference provenance.
class OracleMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BenchQuery {
  std::string name;
  std::string program;
};

struct OccurrenceTiming {
  std::string occurrence;  // qualified name
  double prov_us = 0;
  std::size_t join_count = 0;
  std::size_t rows = 0;
  bool operator==(const OccurrenceTiming&) const = default;
};

struct BenchCell {
  std::string query;
  std::string strategy;
  double oq_us = 0;
  std::size_t rows_R = 0;
  std::size_t rows_RK = 0;
  std::vector<OccurrenceTiming> occurrences;  // base occurrences, program order

  double ap_us() const;
  double mp_us() const;
  bool operator==(const BenchCell&) const = default;
};

struct BenchReport {
  std::vector<BenchCell> cells;
  bool operator==(const BenchReport&) const = default;
};

struct SuiteOptions {
  std::size_t repetitions = 1;
  std::size_t selected_rows = 1;  // leading rows of R used as the selection
};

/// Times every (query, strategy) cell, reporting medians. Each strategy's
/// provenance is compared with oracle_provenance first; a difference throws OracleMismatch.
BenchReport run_suite(const Database& db, const std::vector<BenchQuery>& queries, const std::vector<Strategy>& strategies,
                      const SuiteOptions& options = {});

/// One line per value under the header "query,strategy,metric,occurrence,value".
std::string report_to_csv(const BenchReport& report);
std::string report_to_json(const BenchReport& report);
BenchReport report_from_json(const std::string& text);
/// Writes csv or json by `format`; throws std::runtime_error when the path cannot be written.
void emit_report(const BenchReport& report, const std::string& format, const std::string& path);

}  // namespace provex
