#include "provex/constraints.hpp"

#include <algorithm>

namespace provex {

namespace {

void add_atom_fds(const TableAtom& atom, const CatalogEntry& e, std::size_t index, FdSet& out) {
  auto exposed = [&](const std::string& source) {
    for (const auto& c : atom.columns)
      if (c.source == source) return c.exposed;
    throw ValidationError("atom " + atom.occurrence_name() + " has no column '" + source + "'");
  };
  if (e.key) {
    std::set<std::string> lhs;
    for (const auto& k : *e.key) lhs.insert(exposed(k));
    for (const auto& c : atom.columns)
      if (!lhs.count(c.exposed))
        out.push_back({lhs, c.exposed, FunctionalDependency::Source::Atom, index});
  }
  for (const auto& fd : e.fds) {
    std::set<std::string> lhs;
    for (const auto& l : fd.lhs) lhs.insert(exposed(l));
    std::string rhs = exposed(fd.rhs);
    if (!lhs.count(rhs)) out.push_back({lhs, rhs, FunctionalDependency::Source::Atom, index});
  }
}

}  // namespace

FdSet derive_body_fds(const Rule& rule, const Catalog& catalog) {
  FdSet out;
  for (std::size_t i = 0; i < rule.atoms.size(); ++i) {
    const TableAtom& a = rule.atoms[i];
    auto it = catalog.find(a.relation);
    if (it == catalog.end()) throw ValidationError("unknown relation '" + a.relation + "'");
    add_atom_fds(a, it->second, i, out);
  }
  for (std::size_t i = 0; i < rule.predicates.size(); ++i) {
    const Predicate& p = rule.predicates[i];
    if (p.op != CmpOp::Eq) continue;
    auto* l = std::get_if<AttrRef>(&p.left);
    auto* r = std::get_if<AttrRef>(&p.right);
    if (l && r) {
      if (l->name == r->name) continue;
      out.push_back({{l->name}, r->name, FunctionalDependency::Source::Predicate, i});
      out.push_back({{r->name}, l->name, FunctionalDependency::Source::Predicate, i});
    } else {
      out.push_back({{}, l ? l->name : r->name, FunctionalDependency::Source::Predicate, i});
    }
  }
  return out;
}

FdSet derive_body_fds(const Program& program, std::size_t rule, const Catalog& catalog) {
  Catalog merged = catalog;
  for (const auto& [name, e] : program.heads) merged.insert_or_assign(name, e);
  return derive_body_fds(program.rules.at(rule), merged);
}

std::optional<KeyFact> infer_view_key(const Rule& rule) {
  if (rule.kind() != RuleKind::SPJA) return std::nullopt;
  return KeyFact{rule.head, rule.group_by()};
}

std::set<std::string> closure(const std::set<std::string>& attrs, const FdSet& fds) {
  std::set<std::string> out = attrs;
  std::vector<bool> used(fds.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (used[i]) continue;
      const auto& fd = fds[i];
      if (std::includes(out.begin(), out.end(), fd.lhs.begin(), fd.lhs.end())) {
        used[i] = true;
        if (out.insert(fd.rhs).second) changed = true;
      }
    }
  }
  return out;
}

bool holds_fd(const std::set<std::string>& lhs, const std::string& c, const FdSet& fds) {
  return lhs.count(c) > 0 || closure(lhs, fds).count(c) > 0;
}

std::string to_string(const FunctionalDependency& fd) {
  std::string s = "{";
  bool first = true;
  for (const auto& l : fd.lhs) {
    s += (first ? "" : ",") + l;
    first = false;
  }
  return s + "} -> " + fd.rhs;
}

}  // namespace provex
