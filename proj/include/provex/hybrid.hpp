#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "provex/ir.hpp"
#include "provex/provgen.hpp"
#include "provex/relation.hpp"

namespace provex {

/// A plan cannot be built for this program or subset.
class PlanError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws PlanError unless every non-final head is referenced exactly once.
void require_tree_shape(const Program& program);

/// A column copied into a keyed head because it does not reach the result on its own.
struct ExtraColumn {
  std::string name;  // source attribute plus the occurrence's key suffix
  Kind kind = Kind::Text;
  OccurrenceId origin;
  std::string attribute;
};

/// Keyed version of one rule: the head joined with the atoms supplying extras.
struct KeyedRule {
  std::size_t rule = 0;
  std::vector<ExtraColumn> extras;  // own extras first, then those inherited from child views
  Retention retention;              // atoms and predicates of the keyed query
  bool identity() const { return extras.empty(); }
};

struct MaterializationPlan {
  std::set<OccurrenceId> chosen;
  bool all_columns = false;        // eager layout: every column of every occurrence
  std::vector<KeyedRule> keyed;    // one per rule, program order
  std::vector<std::string> rk_attributes;
  /// Per occurrence: source attribute -> RK column carrying its value.
  std::map<OccurrenceId, std::map<std::string, std::string>> mapping;

  const KeyedRule& rk_rule() const { return keyed.back(); }
  std::vector<std::string> added_columns() const;
  /// 1 when the occurrence's key is fully carried by RK, else 2.
  int retrieval_case(const Program& program, OccurrenceId id, const Catalog& base) const;
  std::string describe(const Program& program) const;
};

/// Key attributes (source names) used to decide Case 1; all attributes when keyless.
std::vector<std::string> occurrence_key(const Program& program, OccurrenceId id, const Catalog& base);

MaterializationPlan build_plan(const Program& program, const Catalog& base, const std::set<OccurrenceId>& chosen);
MaterializationPlan build_eager_plan(const Program& program, const Catalog& base);

/// Evaluates the keyed rules bottom-up over a database holding every head; returns RK.
Relation materialize(const MaterializationPlan& plan, const Program& program, const Database& evaluated);
Relation answer_from_rk(const MaterializationPlan& plan, const Program& program, const Relation& rk);
Relation rk_restrict(const Relation& selection, const Relation& rk);

/// Case 1: RK' joined with the occurrence on its carried columns. Case 2: the
/// pruned chain driven by RK'.
ProvQuery hybrid_retrieval(const MaterializationPlan& plan, const Program& program, OccurrenceId target,
                           const Catalog& base);

struct EagerStore {
  MaterializationPlan plan;
  Relation store;
};

EagerStore eager_materialize(const Program& program, const Database& evaluated);
/// Projects already restricted store rows onto the occurrence's columns.
Relation eager_project(const MaterializationPlan& plan, const Program& program, OccurrenceId target,
                       const Relation& restricted);
Relation eager_retrieval(const EagerStore& store, const Program& program, OccurrenceId target,
                         const Relation& selection);

struct PlanScore {
  std::size_t rows_R = 0;
  std::size_t rows_RK = 0;
  double joins_without = 0;
  double joins_with = 0;
  double benefit = 1;
  double cost = 1;
  double score = 1;
};

/// score = 1 + (benefit - 1) / cost with benefit = (1 + without) / (1 + with) and
/// cost = rows_RK / rows_R. The empty plan scores exactly 1.
double score_plan(const PlanScore& stats);

struct PlanOptions {
  bool estimate = false;       // estimate rows_RK instead of materializing
  bool allow_large = false;    // lift the 12-occurrence enumeration guard
  std::map<OccurrenceId, double> weights;  // default weight 1
  unsigned threads = 0;        // 0 picks hardware concurrency
};

struct PlanCandidate {
  std::set<OccurrenceId> chosen;
  PlanScore score;
};

struct PlanChoice {
  MaterializationPlan plan;
  PlanScore score;
  std::vector<PlanCandidate> candidates;  // every enumerated subset, enumeration order
};

/// Weighted join totals over the base occurrences: O1 queries and plan queries.
double joins_without_plan(const Program& program, const Catalog& base, const PlanOptions& options);
double joins_with_plan(const MaterializationPlan& plan, const Program& program, const Catalog& base,
                       const PlanOptions& options);
std::size_t estimate_rk_rows(const MaterializationPlan& plan, const Program& program, const Database& evaluated);

PlanScore evaluate_plan(const MaterializationPlan& plan, const Program& program, const Database& evaluated,
                        const PlanOptions& options = {});

/// Exhaustive search over subsets of base occurrences. Ties go to fewer occurrences,
/// then to the lexicographically least list of qualified names.
PlanChoice select_plan(const Program& program, const Database& evaluated, const PlanOptions& options = {});

/// True when `a` beats `b` under the selection order.
bool better_candidate(const Program& program, const PlanCandidate& a, const PlanCandidate& b);

}  // namespace provex
