#include "provex/explorer.hpp"

#include <chrono>

#include "provex/engine.hpp"

namespace provex {

namespace {

double since_us(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Explorer::Explorer(Program program, const Database& base, ExplorerConfig config)
    : program_(program.bound ? std::move(program) : bind_program(std::move(program), base.catalog)),
      config_(std::move(config)) {
  auto t0 = std::chrono::steady_clock::now();
  evaluated_ = eval_program(program_, base);
  switch (config_.strategy) {
    case Strategy::W:
    case Strategy::O1:
      break;
    case Strategy::G:
      eager_ = eager_materialize(program_, evaluated_);
      break;
    case Strategy::O2: {
      if (config_.plan_mode == PlanMode::Auto) {
        auto t1 = std::chrono::steady_clock::now();
        choice_ = select_plan(program_, evaluated_, config_.plan_options);
        t0 += std::chrono::steady_clock::now() - t1;  // plan search is not part of answering the query
        plan_ = choice_->plan;
      } else {
        plan_ = build_plan(program_, evaluated_.catalog,
                           config_.plan_mode == PlanMode::Explicit ? config_.plan : std::set<OccurrenceId>{});
      }
      rk_ = materialize(*plan_, program_, evaluated_);
      break;
    }
  }
  if (rk_) index_.emplace(*rk_, program_.result().head_attributes());
  if (eager_) index_.emplace(eager_->store, program_.result().head_attributes());
  oq_us_ = since_us(t0);
}

Relation Explorer::answer() const {
  if (rk_) return answer_from_rk(*plan_, program_, *rk_);
  if (eager_) return eager_->store.project(program_.result().head_attributes());
  return result();
}

ProvQuery Explorer::query_for(OccurrenceId target) const {
  switch (config_.strategy) {
    case Strategy::W:
      return baseline_retrieval(program_, target, evaluated_.catalog);
    case Strategy::O1:
      return optimized_retrieval(program_, target, evaluated_.catalog);
    case Strategy::O2:
      return hybrid_retrieval(*plan_, program_, target, evaluated_.catalog);
    case Strategy::G:
      break;
  }
  ProvQuery q;
  q.target = target;
  q.target_name = program_.qualified_name(target);
  q.result = "P:" + q.target_name;
  return q;
}

ProvResult Explorer::provenance(OccurrenceId target, const Relation& selection) const {
  if (config_.strategy == Strategy::W || config_.strategy == Strategy::O1)
    return provex::provenance(program_, target, selection, config_.strategy, evaluated_);
  const std::string& head = program_.result().head;
  check_selection(selection, result(), head);
  ProvResult out;
  out.query = query_for(target);
  auto t0 = std::chrono::steady_clock::now();
  if (config_.strategy == Strategy::G) {
    out.rows = eager_project(eager_->plan, program_, target, index_->restrict(selection));
  } else {
    out.rows = run_query(out.query, evaluated_, {{"RK'", index_->restrict(selection)}});
    out.stats.join_count = join_count(out.query);
    out.stats.retained_atoms = out.query.retained_atoms();
    out.stats.hybrid_case = out.query.hybrid_case;
  }
  out.stats.elapsed_us = since_us(t0);
  return out;
}

}  // namespace provex
