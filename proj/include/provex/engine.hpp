#pragma once

#include <string>
#include <vector>

#include "provex/ir.hpp"
#include "provex/relation.hpp"

namespace provex {

/// One input of a conjunctive query: a relation whose columns are known under
/// `names` (parallel to rel->attributes()). Equal names across inputs join.
struct JoinInput {
  const Relation* rel = nullptr;
  std::vector<std::string> names;
};

/// Natural join of the inputs, filtered by `predicates`, projected onto `output`
/// (names visible in some input) and returned under `output_names` (or `output`
/// when empty). Predicates are applied as soon as their attributes are bound.
Relation join_project(const std::vector<JoinInput>& inputs, const std::vector<Predicate>& predicates,
                      const std::vector<std::string>& output, const std::vector<std::string>& output_names = {});

/// Full join of a rule body, every column kept (hidden ones included), one row per derivation.
Relation join_body(const Rule& rule, const Database& db);

Relation eval_rule(const Rule& rule, const Database& db);

/// Binds the program against db.catalog when needed and evaluates every rule in
/// order; the result holds db plus one relation per rule head.
Database eval_program(const Program& program, const Database& db);

/// Catalog entries of the program heads merged over the base catalog.
Catalog merged_catalog(const Program& program, const Catalog& base);

}  // namespace provex
