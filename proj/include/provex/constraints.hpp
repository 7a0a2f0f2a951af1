#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "provex/ir.hpp"

namespace provex {

/// `lhs -> rhs` over the exposed names of one rule body. `origin` records which
/// body element justifies it: an atom (key or declared fd) or an equality predicate.
struct FunctionalDependency {
  enum class Source { Atom, Predicate };

  std::set<std::string> lhs;
  std::string rhs;
  Source source = Source::Atom;
  std::size_t origin = 0;

  bool operator==(const FunctionalDependency&) const = default;
};

using FdSet = std::vector<FunctionalDependency>;

struct KeyFact {
  std::string relation;
  std::vector<std::string> key;
  bool operator==(const KeyFact&) const = default;
};

/// Instantiates keys and declared fds of every bound atom, plus the fds induced by
/// equality predicates. `catalog` must hold entries for base relations and view heads.
FdSet derive_body_fds(const Rule& rule, const Catalog& catalog);
/// Same, resolving view heads through program.heads.
FdSet derive_body_fds(const Program& program, std::size_t rule, const Catalog& catalog);

std::optional<KeyFact> infer_view_key(const Rule& rule);

std::set<std::string> closure(const std::set<std::string>& attrs, const FdSet& fds);
bool holds_fd(const std::set<std::string>& lhs, const std::string& c, const FdSet& fds);

std::string to_string(const FunctionalDependency& fd);

}  // namespace provex
