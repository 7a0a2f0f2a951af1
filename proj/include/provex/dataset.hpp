#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "provex/relation.hpp"

namespace provex {

/// Malformed catalog or CSV input; the message names the line.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Catalog sidecar, one relation per line:
///   Lineitem; o_key:text, linenum:text, qty:int; key: o_key, linenum; fd: a -> b
/// Blank lines and lines starting with '#' are skipped.
Catalog parse_catalog(std::string_view text);
std::string format_catalog(const Catalog& catalog);

std::vector<std::vector<std::string>> parse_csv(std::string_view text);
/// CSV with a header row naming the entry's attributes (any order).
Relation parse_relation_csv(std::string_view text, const CatalogEntry& entry);
std::string format_relation_csv(const Relation& rel);

/// Builds and validates a database from catalog text and one CSV text per relation.
Database make_database(std::string_view catalog_text, const std::map<std::string, std::string>& csv_by_relation);

inline constexpr const char* kCatalogFile = "catalog.txt";

/// Reads `dir/catalog.txt` and `dir/<Relation>.csv` for every catalog entry.
Database load_dataset(const std::filesystem::path& dir);
/// Writes base relations of `db` in the layout load_dataset reads.
void save_dataset(const Database& db, const std::filesystem::path& dir);

/// Parses comma-separated values for a row of `attrs` kinds.
Row parse_row(const std::vector<std::string>& fields, const std::vector<Attribute>& attrs);

}  // namespace provex
