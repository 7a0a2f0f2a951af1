#include "provex/relation.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace provex {

std::vector<std::string> CatalogEntry::attribute_names() const {
  std::vector<std::string> out;
  out.reserve(attributes.size());
  for (const auto& a : attributes) out.push_back(a.name);
  return out;
}

std::optional<std::size_t> CatalogEntry::index_of(std::string_view attr) const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i].name == attr) return i;
  return std::nullopt;
}

void CatalogEntry::validate() const {
  std::set<std::string> seen;
  for (const auto& a : attributes)
    if (!seen.insert(a.name).second)
      throw std::invalid_argument("relation " + name + ": duplicate attribute '" + a.name + "'");
  if (key) {
    for (const auto& k : *key)
      if (!seen.count(k)) throw std::invalid_argument("relation " + name + ": key attribute '" + k + "' is not an attribute");
  }
  for (const auto& fd : fds) {
    for (const auto& l : fd.lhs)
      if (!seen.count(l)) throw std::invalid_argument("relation " + name + ": fd attribute '" + l + "' is not an attribute");
    if (!seen.count(fd.rhs))
      throw std::invalid_argument("relation " + name + ": fd attribute '" + fd.rhs + "' is not an attribute");
  }
}

Relation::Relation(std::vector<std::string> attributes) : attributes_(std::move(attributes)) {}

std::optional<std::size_t> Relation::index_of(std::string_view attr) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i)
    if (attributes_[i] == attr) return i;
  return std::nullopt;
}

std::size_t Relation::index_or_throw(std::string_view attr) const {
  auto i = index_of(attr);
  if (!i) throw std::out_of_range("relation has no attribute '" + std::string(attr) + "'");
  return *i;
}

bool Relation::insert(Row row) {
  if (row.size() != attributes_.size())
    throw std::invalid_argument("row arity " + std::to_string(row.size()) + " does not match relation arity " +
                                std::to_string(attributes_.size()));
  return rows_.insert(std::move(row)).second;
}

void Relation::insert_all(const Relation& other) {
  if (other.attributes_ == attributes_) {
    rows_.insert(other.rows_.begin(), other.rows_.end());
    return;
  }
  Relation reordered = other.project(attributes_);
  rows_.insert(reordered.rows_.begin(), reordered.rows_.end());
}

Relation Relation::project(const std::vector<std::string>& attrs) const {
  std::vector<std::size_t> idx;
  idx.reserve(attrs.size());
  for (const auto& a : attrs) idx.push_back(index_or_throw(a));
  Relation out(attrs);
  for (const auto& row : rows_) {
    Row r;
    r.reserve(idx.size());
    for (auto i : idx) r.push_back(row[i]);
    out.rows_.insert(std::move(r));
  }
  return out;
}

bool Relation::is_subset_of(const Relation& other) const {
  if (other.attributes_ != attributes_) {
    if (other.attributes_.size() != attributes_.size()) return false;
    return project(other.attributes_).is_subset_of(other);
  }
  return std::includes(other.rows_.begin(), other.rows_.end(), rows_.begin(), rows_.end());
}

std::string Relation::to_string() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < attributes_.size(); ++i) os << (i ? ", " : "") << attributes_[i];
  os << ") {";
  bool first = true;
  for (const auto& row : rows_) {
    os << (first ? "" : ", ") << "(";
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i].to_string();
    os << ")";
    first = false;
  }
  os << "}";
  return os.str();
}

const Relation& Database::relation(std::string_view name) const {
  auto it = relations.find(name);
  if (it == relations.end()) throw std::out_of_range("unknown relation '" + std::string(name) + "'");
  return *it->second;
}

const CatalogEntry& Database::entry(std::string_view name) const {
  auto it = catalog.find(name);
  if (it == catalog.end()) throw std::out_of_range("unknown relation '" + std::string(name) + "'");
  return it->second;
}

void Database::put(CatalogEntry entry, Relation instance) {
  std::string name = entry.name;
  catalog.insert_or_assign(name, std::move(entry));
  relations.insert_or_assign(name, std::make_shared<const Relation>(std::move(instance)));
}

namespace {

void check_dependency(const CatalogEntry& e, const Relation& r, const std::vector<std::string>& lhs,
                      const std::vector<std::string>& rhs, const std::string& what) {
  std::vector<std::size_t> li, ri;
  for (const auto& a : lhs) li.push_back(r.index_or_throw(a));
  for (const auto& a : rhs) ri.push_back(r.index_or_throw(a));
  std::unordered_map<Row, Row, RowHash> seen;
  for (const auto& row : r.rows()) {
    Row k, v;
    for (auto i : li) k.push_back(row[i]);
    for (auto i : ri) v.push_back(row[i]);
    auto [it, inserted] = seen.emplace(std::move(k), v);
    if (!inserted && it->second != v) throw std::invalid_argument("relation " + e.name + " violates its " + what);
  }
}

}  // namespace

void Database::validate() const {
  for (const auto& [name, e] : catalog) {
    e.validate();
    auto it = relations.find(name);
    if (it == relations.end()) throw std::invalid_argument("relation " + name + " has no instance");
    const Relation& r = *it->second;
    if (r.attributes() != e.attribute_names())
      throw std::invalid_argument("relation " + name + ": instance attributes do not match catalog");
    for (const auto& row : r.rows())
      for (std::size_t i = 0; i < row.size(); ++i)
        if (row[i].kind() != e.attributes[i].kind)
          throw std::invalid_argument("relation " + name + ": value '" + row[i].to_string() + "' in column " +
                                      e.attributes[i].name + " is not of kind " +
                                      std::string(kind_name(e.attributes[i].kind)));
    if (e.key) check_dependency(e, r, *e.key, e.attribute_names(), "key");
    for (const auto& fd : e.fds) check_dependency(e, r, fd.lhs, {fd.rhs}, "functional dependency");
  }
}

Relation semijoin(const Relation& rel, const Relation& probe) {
  std::vector<std::size_t> ri, pi;
  for (std::size_t i = 0; i < rel.attributes().size(); ++i) {
    if (auto j = probe.index_of(rel.attributes()[i])) {
      ri.push_back(i);
      pi.push_back(*j);
    }
  }
  Relation out(rel.attributes());
  if (probe.empty()) return out;
  std::unordered_set<Row, RowHash> keys;
  for (const auto& row : probe.rows()) {
    Row k;
    for (auto j : pi) k.push_back(row[j]);
    keys.insert(std::move(k));
  }
  for (const auto& row : rel.rows()) {
    Row k;
    for (auto i : ri) k.push_back(row[i]);
    if (keys.count(k)) out.insert(row);
  }
  return out;
}

RowIndex::RowIndex(const Relation& rel, std::vector<std::string> attrs)
    : rel_attributes_(rel.attributes()), attrs_(std::move(attrs)) {
  std::vector<std::size_t> idx;
  for (const auto& a : attrs_) idx.push_back(rel.index_or_throw(a));
  for (const auto& row : rel.rows()) {
    Row k;
    for (auto i : idx) k.push_back(row[i]);
    map_[std::move(k)].push_back(&row);
  }
}

Relation RowIndex::restrict(const Relation& probe) const {
  std::vector<std::size_t> idx;
  for (const auto& a : attrs_) idx.push_back(probe.index_or_throw(a));
  Relation out(rel_attributes_);
  for (const auto& row : probe.rows()) {
    Row k;
    for (auto i : idx) k.push_back(row[i]);
    auto it = map_.find(k);
    if (it == map_.end()) continue;
    for (const Row* r : it->second) out.insert(*r);
  }
  return out;
}

}  // namespace provex
