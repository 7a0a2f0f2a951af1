#include "provex/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "provex/engine.hpp"

namespace provex {

void require_tree_shape(const Program& program) {
  for (std::size_t r = 0; r + 1 < program.rules.size(); ++r) {
    auto refs = program.references_to(r);
    if (refs.size() != 1)
      throw PlanError("materialization needs every view to be used exactly once; " + program.rules[r].head +
                      " is used " + std::to_string(refs.size()) + " times");
  }
}

std::vector<std::string> occurrence_key(const Program& program, OccurrenceId id, const Catalog& base) {
  const TableAtom& a = program.atom(id);
  const CatalogEntry* e = nullptr;
  if (auto it = program.heads.find(a.relation); it != program.heads.end())
    e = &it->second;
  else if (auto jt = base.find(a.relation); jt != base.end())
    e = &jt->second;
  if (!e) throw ValidationError("unknown relation '" + a.relation + "'");
  return e->key ? *e->key : e->attribute_names();
}

std::vector<std::string> MaterializationPlan::added_columns() const {
  std::vector<std::string> out;
  for (const auto& x : rk_rule().extras) out.push_back(x.name);
  return out;
}

int MaterializationPlan::retrieval_case(const Program& program, OccurrenceId id, const Catalog& base) const {
  auto it = mapping.find(id);
  for (const auto& k : occurrence_key(program, id, base))
    if (it == mapping.end() || !it->second.count(k)) return 2;
  return 1;
}

std::string MaterializationPlan::describe(const Program& program) const {
  std::ostringstream os;
  os << "chosen:";
  if (chosen.empty()) os << " (none)";
  for (auto id : chosen) os << " " << program.display_name(id);
  os << "\nRK(";
  for (std::size_t i = 0; i < rk_attributes.size(); ++i) os << (i ? ", " : "") << rk_attributes[i];
  os << ")\n";
  for (const auto& k : keyed) {
    if (k.identity()) continue;
    const Rule& rule = program.rules[k.rule];
    os << rule.head << "K: " << rule.head << "'";
    for (auto a : k.retention.atoms) os << ", " << rule.atoms[a].occurrence_name();
    for (auto p : k.retention.predicates) os << ", " << to_string(rule.predicates[p]);
    os << " adds";
    for (const auto& x : k.extras) os << " " << x.name;
    os << "\n";
  }
  return os.str();
}

namespace {

// Name under which a head attribute of rule `r` reaches the result, if it does.
std::optional<std::string> lift(const Program& program, std::size_t r, std::string attr) {
  std::size_t last = program.rules.size() - 1;
  while (r != last) {
    auto refs = program.references_to(r);
    if (refs.size() != 1) return std::nullopt;
    const TableAtom& parent = program.atom(refs.front());
    auto exposed = parent.exposed_name(attr);
    if (!exposed || !program.rules[refs.front().rule].is_plain_head(*exposed)) return std::nullopt;
    attr = *exposed;
    r = refs.front().rule;
  }
  return attr;
}

MaterializationPlan build(const Program& program, const Catalog& base, const std::set<OccurrenceId>& chosen,
                          bool all_columns) {
  if (!program.bound) throw std::logic_error("build_plan needs a bound program");
  require_tree_shape(program);
  auto bases = program.base_occurrences();
  for (auto id : chosen) {
    if (id.rule >= program.rules.size() || id.atom >= program.rules[id.rule].atoms.size())
      throw UnknownOccurrence("occurrence index out of range");
    if (std::find(bases.begin(), bases.end(), id) == bases.end())
      throw PlanError(program.qualified_name(id) + " is not a base-table occurrence");
  }
  Catalog catalog = merged_catalog(program, base);
  MaterializationPlan plan;
  plan.chosen = chosen;
  plan.all_columns = all_columns;
  std::size_t n = program.rules.size();
  std::vector<std::vector<ExtraColumn>> own(n);

  std::set<std::string> taken;
  for (const auto& rule : program.rules) {
    for (const auto& h : rule.head_attributes()) taken.insert(h);
    for (const auto& a : rule.atoms)
      for (const auto& c : a.columns) taken.insert(c.exposed);
  }
  // Atoms of one rule that expose the same name carry the same value, so they share one added column.
  std::vector<std::map<std::string, std::string>> shared(n);

  for (auto id : program.occurrences()) {
    const TableAtom& a = program.atom(id);
    const Rule& rule = program.rules[id.rule];
    auto& m = plan.mapping[id];
    for (const auto& c : a.columns) {
      if (c.hidden || !rule.is_plain_head(c.exposed)) continue;
      if (auto name = lift(program, id.rule, c.exposed)) m[c.source] = *name;
    }
    if (!all_columns && !chosen.count(id)) continue;
    const CatalogEntry& e = catalog.at(a.relation);
    auto needed = all_columns ? e.attribute_names() : occurrence_key(program, id, base);
    for (const auto& c : a.columns) {
      if (m.count(c.source) || std::find(needed.begin(), needed.end(), c.source) == needed.end()) continue;
      if (!c.hidden) {
        if (auto it = shared[id.rule].find(c.exposed); it != shared[id.rule].end()) {
          m[c.source] = it->second;
          continue;
        }
      }
      std::string name = c.source + program.key_suffix(id);
      if (taken.count(name)) {
        if (!all_columns)
          throw PlanError("added column '" + name + "' for " + program.qualified_name(id) +
                          " clashes with an existing name");
        std::string stem = name;
        for (int k = 2; taken.count(name); ++k) name = stem + "_" + std::to_string(k);
      }
      taken.insert(name);
      ExtraColumn x{name, e.attributes[*e.index_of(c.source)].kind, id, c.source};
      m[c.source] = x.name;
      if (!c.hidden) shared[id.rule][c.exposed] = x.name;
      own[id.rule].push_back(std::move(x));
    }
  }

  std::vector<std::vector<ExtraColumn>> extras(n);
  for (std::size_t r = 0; r < n; ++r) {
    const Rule& rule = program.rules[r];
    KeyedRule k;
    k.rule = r;
    k.extras = own[r];
    std::set<std::size_t> targets, always;
    for (const auto& x : own[r]) targets.insert(x.origin.atom);
    for (std::size_t i = 0; i < rule.atoms.size(); ++i) {
      auto v = program.rule_index(rule.atoms[i].relation);
      if (!v || extras[*v].empty()) continue;
      always.insert(i);
      k.extras.insert(k.extras.end(), extras[*v].begin(), extras[*v].end());
    }
    if (!k.extras.empty()) {
      targets.insert(always.begin(), always.end());
      auto sel = rule.head_attributes();
      k.retention = prune_body(rule, targets, {sel.begin(), sel.end()}, derive_body_fds(rule, catalog), always);
    }
    extras[r] = k.extras;
    plan.keyed.push_back(std::move(k));
  }
  plan.rk_attributes = program.result().head_attributes();
  for (const auto& x : plan.rk_rule().extras) plan.rk_attributes.push_back(x.name);
  return plan;
}

}  // namespace

MaterializationPlan build_plan(const Program& program, const Catalog& base, const std::set<OccurrenceId>& chosen) {
  return build(program, base, chosen, false);
}

MaterializationPlan build_eager_plan(const Program& program, const Catalog& base) {
  auto all = program.occurrences();
  MaterializationPlan plan = build(program, base, {}, true);
  plan.chosen.insert(all.begin(), all.end());
  return plan;
}

Relation materialize(const MaterializationPlan& plan, const Program& program, const Database& evaluated) {
  std::vector<std::optional<Relation>> keyed(program.rules.size());
  auto instance = [&](std::size_t r) -> const Relation& {
    return keyed[r] ? *keyed[r] : evaluated.relation(program.rules[r].head);
  };
  for (const auto& k : plan.keyed) {
    if (k.identity()) continue;
    const Rule& rule = program.rules[k.rule];
    std::vector<JoinInput> inputs{{&evaluated.relation(rule.head), rule.head_attributes()}};
    for (auto i : k.retention.atoms) {
      const TableAtom& a = rule.atoms[i];
      auto v = program.rule_index(a.relation);
      JoinInput in{v ? &instance(*v) : &evaluated.relation(a.relation), a.all_exposed()};
      if (v)
        for (const auto& x : plan.keyed[*v].extras) in.names.push_back(x.name);
      inputs.push_back(std::move(in));
    }
    std::vector<Predicate> preds;
    for (auto p : k.retention.predicates) preds.push_back(rule.predicates[p]);
    std::vector<std::string> cols = rule.head_attributes(), names = rule.head_attributes();
    for (const auto& x : k.extras) {
      names.push_back(x.name);
      if (x.origin.rule == k.rule) {
        const TableAtom& a = rule.atoms[x.origin.atom];
        auto it = std::find_if(a.columns.begin(), a.columns.end(),
                               [&](const ColumnBinding& c) { return c.source == x.attribute; });
        cols.push_back(it->exposed);
      } else {
        cols.push_back(x.name);
      }
    }
    keyed[k.rule] = join_project(inputs, preds, cols, names);
  }
  return instance(program.rules.size() - 1);
}

Relation answer_from_rk(const MaterializationPlan&, const Program& program, const Relation& rk) {
  return rk.project(program.result().head_attributes());
}

Relation rk_restrict(const Relation& selection, const Relation& rk) { return semijoin(rk, selection); }

ProvQuery hybrid_retrieval(const MaterializationPlan& plan, const Program& program, OccurrenceId target,
                           const Catalog& base) {
  const TableAtom& a = program.atom(target);
  std::vector<ColumnBinding> rk_columns;
  std::set<std::string> extra_names;
  for (const auto& x : plan.rk_rule().extras) extra_names.insert(x.name);
  for (const auto& n : plan.rk_attributes) rk_columns.push_back({n, n, false});

  if (plan.retrieval_case(program, target, base) == 2) {
    std::vector<ColumnBinding> top;
    for (const auto& c : rk_columns) {
      bool extra = extra_names.count(c.source) > 0;
      top.push_back({c.source, extra ? "~RK'." + c.source : c.source, extra});
    }
    ProvQuery q = retrieval_chain(program, target, base, true, TopSource{"RK'", top});
    q.hybrid_case = 2;
    return q;
  }

  const auto& m = plan.mapping.at(target);
  ProvQuery q;
  q.target = target;
  q.target_name = program.qualified_name(target);
  q.result = "P:" + q.target_name;
  q.hybrid_case = 1;
  ProvStep s;
  s.output = q.result;
  s.source = "RK'";
  s.source_columns = rk_columns;
  s.rule = target.rule;
  bool all_mapped = true;
  TableAtom copy = a;
  for (auto& c : copy.columns) {
    q.result_attributes.push_back(c.source);
    s.output_names.push_back(c.source);
    auto it = m.find(c.source);
    if (it != m.end()) {
      c.exposed = it->second;
      c.hidden = false;
    } else {
      c.exposed = "~" + a.occurrence_name() + "." + c.source;
      c.hidden = true;
      all_mapped = false;
    }
    s.output_columns.push_back(c.exposed);
  }
  if (!all_mapped) s.atoms.push_back(std::move(copy));
  q.steps.push_back(std::move(s));
  return q;
}

EagerStore eager_materialize(const Program& program, const Database& evaluated) {
  EagerStore out;
  out.plan = build_eager_plan(program, evaluated.catalog);
  out.store = materialize(out.plan, program, evaluated);
  return out;
}

Relation eager_project(const MaterializationPlan& plan, const Program& program, OccurrenceId target,
                       const Relation& restricted) {
  const TableAtom& a = program.atom(target);
  const auto& m = plan.mapping.at(target);
  std::vector<std::string> cols, names;
  for (const auto& c : a.columns) {
    cols.push_back(m.at(c.source));
    names.push_back(c.source);
  }
  Relation picked = restricted.project(cols);
  Relation out(names);
  for (const auto& row : picked.rows()) out.insert(row);
  return out;
}

Relation eager_retrieval(const EagerStore& store, const Program& program, OccurrenceId target,
                         const Relation& selection) {
  return eager_project(store.plan, program, target, semijoin(store.store, selection));
}

double score_plan(const PlanScore& s) {
  double benefit = (1 + s.joins_without) / (1 + s.joins_with);
  double cost = s.rows_R == 0 ? 1.0 : static_cast<double>(s.rows_RK) / static_cast<double>(s.rows_R);
  if (cost <= 0) cost = 1;
  return 1 + (benefit - 1) / cost;
}

namespace {

double weight(const PlanOptions& options, OccurrenceId id) {
  auto it = options.weights.find(id);
  return it == options.weights.end() ? 1.0 : it->second;
}

}  // namespace

double joins_without_plan(const Program& program, const Catalog& base, const PlanOptions& options) {
  double total = 0;
  for (auto id : program.base_occurrences())
    total += weight(options, id) * static_cast<double>(join_count(optimized_retrieval(program, id, base)));
  return total;
}

double joins_with_plan(const MaterializationPlan& plan, const Program& program, const Catalog& base,
                       const PlanOptions& options) {
  double total = 0;
  for (auto id : program.base_occurrences())
    total += weight(options, id) * static_cast<double>(join_count(hybrid_retrieval(plan, program, id, base)));
  return total;
}

std::size_t estimate_rk_rows(const MaterializationPlan& plan, const Program& program, const Database& evaluated) {
  double rows = static_cast<double>(evaluated.relation(program.result().head).size());
  std::map<OccurrenceId, std::set<std::string>> added;
  for (const auto& k : plan.keyed)
    for (const auto& x : k.extras)
      if (x.origin.rule == k.rule) added[x.origin].insert(x.attribute);
  // Each occurrence with added columns multiplies rows by its fan-out below the carried key part.
  for (const auto& [id, attrs] : added) {
    const Relation& t = evaluated.relation(program.atom(id).relation);
    std::vector<std::string> carried;
    for (const auto& [attr, name] : plan.mapping.at(id))
      if (!attrs.count(attr)) carried.push_back(attr);
    double distinct = carried.empty() ? 1.0 : static_cast<double>(t.project(carried).size());
    if (distinct > 0) rows *= std::max(1.0, static_cast<double>(t.size()) / distinct);
  }
  return static_cast<std::size_t>(std::llround(rows));
}

PlanScore evaluate_plan(const MaterializationPlan& plan, const Program& program, const Database& evaluated,
                        const PlanOptions& options) {
  PlanScore s;
  s.rows_R = evaluated.relation(program.result().head).size();
  s.rows_RK = options.estimate ? estimate_rk_rows(plan, program, evaluated)
                               : materialize(plan, program, evaluated).size();
  s.joins_without = joins_without_plan(program, evaluated.catalog, options);
  s.joins_with = joins_with_plan(plan, program, evaluated.catalog, options);
  s.benefit = (1 + s.joins_without) / (1 + s.joins_with);
  s.cost = s.rows_R == 0 ? 1.0 : static_cast<double>(s.rows_RK) / static_cast<double>(s.rows_R);
  s.score = score_plan(s);
  return s;
}

bool better_candidate(const Program& program, const PlanCandidate& a, const PlanCandidate& b) {
  constexpr double kEps = 1e-12;
  if (a.score.score > b.score.score + kEps) return true;
  if (b.score.score > a.score.score + kEps) return false;
  if (a.chosen.size() != b.chosen.size()) return a.chosen.size() < b.chosen.size();
  auto names = [&](const std::set<OccurrenceId>& s) {
    std::vector<std::string> out;
    for (auto id : s) out.push_back(program.qualified_name(id));
    std::sort(out.begin(), out.end());
    return out;
  };
  return names(a.chosen) < names(b.chosen);
}

PlanChoice select_plan(const Program& program, const Database& evaluated, const PlanOptions& options) {
  auto bases = program.base_occurrences();
  if (bases.size() > 12 && !options.allow_large)
    throw PlanError("plan search over " + std::to_string(bases.size()) +
                    " occurrences is too large; pass the override to enumerate anyway");
  if (bases.size() >= 63) throw PlanError("too many occurrences to enumerate");
  require_tree_shape(program);
  std::uint64_t total = std::uint64_t{1} << bases.size();
  // Joins without a plan do not depend on the candidate.
  PlanOptions shared = options;
  double without = joins_without_plan(program, evaluated.catalog, options);

  auto subset = [&](std::uint64_t mask) {
    std::set<OccurrenceId> s;
    for (std::size_t i = 0; i < bases.size(); ++i)
      if (mask & (std::uint64_t{1} << i)) s.insert(bases[i]);
    return s;
  };
  auto run = [&](std::uint64_t mask) -> std::optional<PlanCandidate> {
    PlanCandidate c;
    c.chosen = subset(mask);
    try {
      MaterializationPlan plan = build_plan(program, evaluated.catalog, c.chosen);
      PlanScore s;
      s.rows_R = evaluated.relation(program.result().head).size();
      s.rows_RK = shared.estimate ? estimate_rk_rows(plan, program, evaluated)
                                  : materialize(plan, program, evaluated).size();
      s.joins_without = without;
      s.joins_with = joins_with_plan(plan, program, evaluated.catalog, shared);
      s.benefit = (1 + s.joins_without) / (1 + s.joins_with);
      s.cost = s.rows_R == 0 ? 1.0 : static_cast<double>(s.rows_RK) / static_cast<double>(s.rows_R);
      s.score = score_plan(s);
      c.score = s;
      return c;
    } catch (const PlanError&) {
      return std::nullopt;
    }
  };

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, total));
  std::vector<std::optional<PlanCandidate>> results(total);
  std::vector<std::future<void>> workers;
  for (unsigned t = 0; t < threads; ++t) {
    workers.push_back(std::async(std::launch::async, [&, t] {
      for (std::uint64_t mask = t; mask < total; mask += threads) results[mask] = run(mask);
    }));
  }
  for (auto& w : workers) w.get();

  PlanChoice choice;
  const PlanCandidate* best = nullptr;
  for (auto& r : results)
    if (r) choice.candidates.push_back(*r);
  for (const auto& c : choice.candidates)
    if (!best || better_candidate(program, c, *best)) best = &c;
  choice.plan = build_plan(program, evaluated.catalog, best->chosen);
  choice.score = best->score;
  return choice;
}

}  // namespace provex
