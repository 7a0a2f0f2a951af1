#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "provex/constraints.hpp"
#include "provex/ir.hpp"
#include "provex/relation.hpp"

namespace provex {

enum class Strategy { W, O1, G, O2 };

std::string_view strategy_name(Strategy s);
Strategy parse_strategy(std::string_view name);

/// Selected rows are not all present in the relation they claim to come from.
class DependencyViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One conjunctive retrieval query: the driving selection joined with retained
/// atoms of one rule body, filtered by retained predicates.
struct ProvStep {
  std::string output;   // relation the rows are added to
  std::string source;   // "R'", "RK'" or "P:<view>"
  std::vector<ColumnBinding> source_columns;  // selection attributes and the names they join under
  std::size_t rule = 0;
  std::vector<TableAtom> atoms;
  std::vector<Predicate> predicates;
  std::vector<std::string> output_columns;  // names bound by the query
  std::vector<std::string> output_names;    // attribute names of `output`
};

struct ProvQuery {
  OccurrenceId target;
  std::string target_name;
  std::string result;  // output name of the steps producing the target rows
  std::vector<std::string> result_attributes;
  std::vector<ProvStep> steps;
  int hybrid_case = 0;

  /// Sorted labels of the final step's body: the selection source plus occurrence names.
  std::vector<std::string> canonical_body() const;
  std::size_t retained_atoms() const;
  std::string to_string() const;
};

/// Selection references plus retained atoms over all steps, minus one.
std::size_t join_count(const ProvQuery& q);

struct Retention {
  std::vector<std::size_t> atoms;
  std::vector<std::size_t> predicates;
  bool operator==(const Retention&) const = default;
};

/// Pruning over one rule body. `selection` holds the attributes bound by the
/// driving selection; `targets` are atom indices whose rows must be produced.
/// Only dependencies that originate in retained atoms or predicates count.
/// Atoms in `always` are kept even when the selection covers their columns.
Retention prune_body(const Rule& rule, const std::set<std::size_t>& targets, const std::set<std::string>& selection,
                     const FdSet& fds, const std::set<std::size_t>& always = {});

/// Steps selecting from the final rule through every view on the way to `target`.
/// `prune` picks pruned bodies (O1) over full bodies (W). `top` overrides the
/// driving selection of the final rule (used for RK').
struct TopSource {
  std::string name;
  std::vector<ColumnBinding> columns;
};
ProvQuery retrieval_chain(const Program& program, OccurrenceId target, const Catalog& base, bool prune,
                          const std::optional<TopSource>& top = std::nullopt);

ProvQuery baseline_retrieval(const Program& program, OccurrenceId target, const Catalog& base);
ProvQuery optimized_retrieval(const Program& program, OccurrenceId target, const Catalog& base);

/// Executes the steps. `evaluated` must contain every relation the atoms name;
/// `sources` holds the named top-level selections.
Relation run_query(const ProvQuery& q, const Database& evaluated, const std::map<std::string, Relation>& sources);

/// Throws DependencyViolation unless `selection` is a subset of `instance` with the same attributes.
void check_selection(const Relation& selection, const Relation& instance, const std::string& name);

struct ProvStats {
  std::size_t join_count = 0;
  std::size_t retained_atoms = 0;
  double elapsed_us = 0;
  int hybrid_case = 0;
};

struct ProvResult {
  Relation rows;
  ProvStats stats;
  ProvQuery query;
};

/// Lazy strategies W and O1 over a database holding every rule head.
ProvResult provenance(const Program& program, OccurrenceId target, const Relation& selection, Strategy strategy,
                      const Database& evaluated);

/// Reference definition: PView = H joined with the full body, restricted to the
/// selected head rows, projected onto the occurrence. `selection` is over the head of `rule_head`.
Relation naive_provenance(const Program& program, std::string_view rule_head, OccurrenceId occurrence,
                          const Relation& selection, const Database& evaluated);

/// naive_provenance composed through every view level, for a selection on the result.
Relation oracle_provenance(const Program& program, OccurrenceId occurrence, const Relation& selection,
                           const Database& evaluated);

/// Columns exposing a rule head under its own attribute names.
std::vector<ColumnBinding> head_columns_as_selection(const Rule& rule);

}  // namespace provex
