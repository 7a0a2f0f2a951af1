#pragma once

#include <map>
#include <vector>

#include "provex/ir.hpp"
#include "provex/relation.hpp"

namespace provex::testing {

/// Provenance by brute force: every rule is evaluated by enumerating all
/// assignments of body atoms to rows, and provenance is read off the
/// assignments that derive selected rows. Shares no evaluation code with the library.
class DerivationOracle {
 public:
  DerivationOracle(const Program& program, const Database& base);

  /// Head instance of a rule as computed by enumeration.
  const Relation& head(std::size_t rule) const { return heads_.at(rule); }
  const Relation& result() const { return heads_.back(); }

  /// Rows of every occurrence taking part in a derivation of a selected result row.
  std::map<OccurrenceId, Relation> provenance(const Relation& selection) const;

 private:
  struct Derivation {
    std::vector<const Row*> rows;  // one per body atom
    Row group;                     // plain head values
  };

  const Relation& instance(const std::string& relation) const;
  void enumerate(std::size_t rule);

  const Program& program_;
  const Database& base_;
  std::vector<Relation> heads_;
  std::vector<std::vector<Derivation>> derivations_;
  std::vector<std::map<Row, Row>> head_of_group_;
};

}  // namespace provex::testing
