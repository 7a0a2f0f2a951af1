#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "provex/value.hpp"

namespace provex {

using Row = std::vector<Value>;

struct RowHash {
  std::size_t operator()(const Row& row) const {
    std::size_t h = row.size();
    for (const auto& v : row) h ^= v.hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

struct Attribute {
  std::string name;
  Kind kind = Kind::Text;
  bool operator==(const Attribute&) const = default;
};

/// A declared dependency `lhs -> rhs` over a relation's own attribute names.
struct DeclaredFd {
  std::vector<std::string> lhs;
  std::string rhs;
  bool operator==(const DeclaredFd&) const = default;
};

enum class RelationKind { Base, View };

struct CatalogEntry {
  std::string name;
  std::vector<Attribute> attributes;
  std::optional<std::vector<std::string>> key;
  std::vector<DeclaredFd> fds;
  RelationKind kind = RelationKind::Base;

  std::vector<std::string> attribute_names() const;
  std::optional<std::size_t> index_of(std::string_view attr) const;
  bool has_attribute(std::string_view attr) const { return index_of(attr).has_value(); }
  /// Throws std::invalid_argument when the entry is malformed (duplicate names, key not a subset).
  void validate() const;
};

using Catalog = std::map<std::string, CatalogEntry, std::less<>>;

/// Set-semantics relation instance. Rows are kept ordered so iteration is deterministic.
class Relation {
 public:
  Relation() = default;
  explicit Relation(std::vector<std::string> attributes);

  const std::vector<std::string>& attributes() const { return attributes_; }
  std::optional<std::size_t> index_of(std::string_view attr) const;
  std::size_t index_or_throw(std::string_view attr) const;

  const std::set<Row>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  bool contains(const Row& row) const { return rows_.count(row) > 0; }

  /// Returns false when the row was already present.
  bool insert(Row row);
  void insert_all(const Relation& other);

  /// Rows reordered to `attrs` (a permutation or subset of this relation's attributes), deduplicated.
  Relation project(const std::vector<std::string>& attrs) const;
  bool is_subset_of(const Relation& other) const;

  bool operator==(const Relation& other) const {
    return attributes_ == other.attributes_ && rows_ == other.rows_;
  }

  std::string to_string() const;

 private:
  std::vector<std::string> attributes_;
  std::set<Row> rows_;
};

/// Relation instances plus their catalog entries. Instances are shared immutably,
/// so copying a Database (e.g. to extend it with view results) is cheap.
struct Database {
  Catalog catalog;
  std::map<std::string, std::shared_ptr<const Relation>, std::less<>> relations;

  const Relation& relation(std::string_view name) const;
  const CatalogEntry& entry(std::string_view name) const;
  bool has(std::string_view name) const { return relations.find(name) != relations.end(); }

  void put(CatalogEntry entry, Relation instance);

  /// Checks attribute lists, key uniqueness and declared FDs against the instances.
  void validate() const;
};

/// Hash index over some attributes of a relation. Holds pointers to the relation's
/// rows, which stay valid while the relation is alive, including across moves.
class RowIndex {
 public:
  RowIndex(const Relation& rel, std::vector<std::string> attrs);

  /// Rows agreeing with some row of `probe` on the indexed attributes; same result as semijoin.
  Relation restrict(const Relation& probe) const;

 private:
  std::vector<std::string> rel_attributes_;
  std::vector<std::string> attrs_;
  std::unordered_map<Row, std::vector<const Row*>, RowHash> map_;
};

/// Rows of `rel` agreeing with some row of `probe` on every shared attribute.
Relation semijoin(const Relation& rel, const Relation& probe);

}  // namespace provex
