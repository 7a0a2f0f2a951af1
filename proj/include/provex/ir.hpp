#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "provex/relation.hpp"
#include "provex/value.hpp"

namespace provex {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        bare_(message) {}
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& bare_message() const { return bare_; }

 private:
  int line_;
  int column_;
  std::string bare_;
};

/// Program does not fit the catalog: unsafe rule, unknown relation or attribute, kind clash.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownOccurrence : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

enum class AggFn { Sum, Count, Min, Max, Avg };
enum class CmpOp { Lt, Le, Eq, Ne, Ge, Gt };

std::string_view agg_name(AggFn fn);
std::string_view cmp_symbol(CmpOp op);
bool apply_cmp(CmpOp op, std::strong_ordering ord);

struct AttrRef {
  std::string name;
  bool operator==(const AttrRef&) const = default;
};

using Operand = std::variant<AttrRef, Value>;

struct Predicate {
  Operand left;
  CmpOp op = CmpOp::Eq;
  Operand right;

  std::vector<std::string> attributes() const;
  bool operator==(const Predicate&) const = default;
};

struct HeadColumn {
  std::optional<AggFn> fn;  // empty for a plain (group-by) column
  std::string attribute;    // exposed body attribute
  std::string output;       // equals attribute for plain columns

  bool is_plain() const { return !fn.has_value(); }
  bool operator==(const HeadColumn&) const = default;
};

struct Renaming {
  std::string source;
  std::string exposed;
  bool operator==(const Renaming&) const = default;
};

/// One column of an occurrence after binding. Columns the atom's argument list
/// leaves out are hidden: they get a private name that never joins.
struct ColumnBinding {
  std::string source;
  std::string exposed;
  bool hidden = false;
  bool operator==(const ColumnBinding&) const = default;
};

struct TableAtom {
  std::string relation;
  std::string alias;                           // from `Rel@alias`; empty when absent
  std::optional<std::vector<Renaming>> args;   // from `Rel(a, b as c)`
  std::vector<ColumnBinding> columns;          // filled in by bind_program

  /// Name of the occurrence within its rule, e.g. "Lineitem2" for `Lineitem@2`.
  std::string occurrence_name() const { return relation + alias; }
  std::vector<std::string> exposed() const;      // visible names, relation order
  std::vector<std::string> all_exposed() const;  // including hidden names
  std::optional<std::string> exposed_name(std::string_view source) const;
  std::optional<std::string> source_of(std::string_view exposed) const;

  bool operator==(const TableAtom& o) const {
    return relation == o.relation && alias == o.alias && args == o.args;
  }
};

enum class RuleKind { SPJ, SPJA };

struct Rule {
  std::string head;
  std::vector<HeadColumn> head_columns;
  std::vector<TableAtom> atoms;
  std::vector<Predicate> predicates;
  int line = 0;

  RuleKind kind() const;
  std::vector<std::string> head_attributes() const;
  std::vector<std::string> group_by() const;
  bool is_plain_head(std::string_view attr) const;
  std::optional<std::size_t> atom_index(std::string_view occurrence_name) const;

  bool operator==(const Rule& o) const {
    return head == o.head && head_columns == o.head_columns && atoms == o.atoms && predicates == o.predicates;
  }
};

struct OccurrenceId {
  std::size_t rule = 0;
  std::size_t atom = 0;
  auto operator<=>(const OccurrenceId&) const = default;
};

struct Program {
  std::vector<Rule> rules;
  Catalog heads;  // schemas of rule heads, filled in by bind_program
  bool bound = false;

  const Rule& result() const { return rules.back(); }
  std::optional<std::size_t> rule_index(std::string_view head) const;
  bool is_view(std::string_view relation) const { return rule_index(relation).has_value(); }

  const TableAtom& atom(OccurrenceId id) const { return rules.at(id.rule).atoms.at(id.atom); }
  std::vector<OccurrenceId> occurrences() const;
  std::vector<OccurrenceId> base_occurrences() const;
  /// "Head.Name", always unambiguous.
  std::string qualified_name(OccurrenceId id) const;
  /// Short name when unique across the program, otherwise the qualified name.
  std::string display_name(OccurrenceId id) const;
  /// Accepts a qualified name or a short name that is unique across the program.
  OccurrenceId find_occurrence(std::string_view name) const;
  /// Suffix appended to attribute names when an occurrence's columns are copied into RK.
  std::string key_suffix(OccurrenceId id) const;
  /// Number of rule steps between the occurrence's rule and the final rule.
  std::size_t depth(OccurrenceId id) const;
  /// Atoms anywhere in the program that reference the head of rule `r`.
  std::vector<OccurrenceId> references_to(std::size_t r) const;

  bool operator==(const Program& o) const { return rules == o.rules; }
};

/// Syntax-level parse. Safety is checked here only for rules whose atoms all carry
/// explicit argument lists; bind_program completes the check against a catalog.
Program parse_program(std::string_view text);
/// parse_program followed by bind_program.
Program parse_program(std::string_view text, const Catalog& catalog);

/// Resolves every atom against the catalog (and earlier heads), coerces literal
/// kinds, checks safety and infers head schemas. Throws ValidationError.
Program bind_program(Program program, const Catalog& catalog);

/// Empty when the rule is safe; otherwise one message per offending attribute.
/// Throws ValidationError for unknown relations or unknown renaming sources.
std::vector<std::string> check_safety(const Rule& rule, const Catalog& catalog);

/// Union of the visible exposed attributes of the body atoms.
std::set<std::string> rhs_attributes(const Rule& rule);

std::string to_string(const Predicate& p);
std::string to_string(const Rule& rule);
std::string to_string(const Program& program);

}  // namespace provex
