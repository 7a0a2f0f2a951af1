#pragma once

#include <optional>
#include <set>

#include "provex/hybrid.hpp"
#include "provex/provgen.hpp"

namespace provex {

enum class PlanMode { Auto, None, Explicit };

struct ExplorerConfig {
  Strategy strategy = Strategy::O1;
  PlanMode plan_mode = PlanMode::Auto;
  std::set<OccurrenceId> plan;  // used with PlanMode::Explicit
  PlanOptions plan_options;
};

/// A program evaluated once over a database, answering provenance requests under
/// one strategy. G and O2 materialize during construction.
class Explorer {
 public:
  Explorer(Program program, const Database& base, ExplorerConfig config);
  Explorer(const Explorer&) = delete;
  Explorer& operator=(const Explorer&) = delete;
  Explorer(Explorer&&) = default;

  const Program& program() const { return program_; }
  const Database& evaluated() const { return evaluated_; }
  const Relation& result() const { return evaluated_.relation(program_.result().head); }
  Strategy strategy() const { return config_.strategy; }
  const MaterializationPlan* plan() const { return plan_ ? &*plan_ : nullptr; }
  const PlanChoice* choice() const { return choice_ ? &*choice_ : nullptr; }
  const Relation* rk() const { return rk_ ? &*rk_ : nullptr; }
  const EagerStore* eager() const { return eager_ ? &*eager_ : nullptr; }

  /// Time spent answering the original query, materialization included.
  double original_query_us() const { return oq_us_; }

  /// Result rows as the strategy would answer the original query.
  Relation answer() const;

  ProvResult provenance(OccurrenceId target, const Relation& selection) const;
  ProvQuery query_for(OccurrenceId target) const;

 private:
  Program program_;
  ExplorerConfig config_;
  Database evaluated_;
  std::optional<PlanChoice> choice_;
  std::optional<MaterializationPlan> plan_;
  std::optional<Relation> rk_;
  std::optional<EagerStore> eager_;
  std::optional<RowIndex> index_;  // RK or the eager store, on the result attributes
  double oq_us_ = 0;
};

}  // namespace provex
