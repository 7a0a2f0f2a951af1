#include "provex/provgen.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "provex/engine.hpp"

namespace provex {

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::W:
      return "W";
    case Strategy::O1:
      return "O1";
    case Strategy::G:
      return "G";
    case Strategy::O2:
      return "O2";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "W" || name == "w") return Strategy::W;
  if (name == "O1" || name == "o1") return Strategy::O1;
  if (name == "G" || name == "g") return Strategy::G;
  if (name == "O2" || name == "o2") return Strategy::O2;
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "' (expected W, O1, G or O2)");
}

std::vector<std::string> ProvQuery::canonical_body() const {
  std::vector<std::string> out;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    if (it->output != result) continue;
    out.push_back(it->source);
    for (const auto& a : it->atoms) out.push_back(a.occurrence_name());
    break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t ProvQuery::retained_atoms() const {
  std::size_t n = 0;
  for (const auto& s : steps) n += s.atoms.size();
  return n;
}

std::size_t join_count(const ProvQuery& q) {
  std::size_t refs = 0;
  for (const auto& s : q.steps) refs += 1 + s.atoms.size();
  return refs == 0 ? 0 : refs - 1;
}

std::string ProvQuery::to_string() const {
  std::ostringstream os;
  for (const auto& s : steps) {
    os << s.output << "(";
    for (std::size_t i = 0; i < s.output_names.size(); ++i) {
      os << (i ? ", " : "") << s.output_columns[i];
      if (s.output_columns[i] != s.output_names[i]) os << " as " << s.output_names[i];
    }
    os << ") :- " << s.source << "(";
    bool first = true;
    for (const auto& c : s.source_columns) {
      if (c.hidden) continue;
      os << (first ? "" : ", ") << c.source;
      if (c.exposed != c.source) os << " as " << c.exposed;
      first = false;
    }
    os << ")";
    for (const auto& a : s.atoms) {
      os << ", " << a.occurrence_name() << "(";
      for (std::size_t i = 0; i < a.columns.size(); ++i) os << (i ? ", " : "") << a.columns[i].exposed;
      os << ")";
    }
    for (const auto& p : s.predicates) os << ", " << provex::to_string(p);
    os << ".\n";
  }
  return os.str();
}

Retention prune_body(const Rule& rule, const std::set<std::size_t>& targets, const std::set<std::string>& selection,
                     const FdSet& fds, const std::set<std::size_t>& always) {
  std::vector<bool> atom_in(rule.atoms.size(), false), pred_in(rule.predicates.size(), false);
  for (auto t : always) atom_in.at(t) = true;
  for (auto t : targets) {
    const TableAtom& a = rule.atoms.at(t);
    bool covered = std::all_of(a.columns.begin(), a.columns.end(),
                               [&](const ColumnBinding& c) { return !c.hidden && selection.count(c.exposed); });
    if (!covered) atom_in[t] = true;
  }
  if (std::none_of(atom_in.begin(), atom_in.end(), [](bool b) { return b; })) return {};

  for (bool changed = true; changed;) {
    changed = false;
    FdSet usable;
    for (const auto& fd : fds) {
      bool ok = fd.source == FunctionalDependency::Source::Atom ? atom_in[fd.origin] : pred_in[fd.origin];
      if (ok) usable.push_back(fd);
    }
    std::set<std::string> determined = closure(selection, usable);
    std::set<std::string> bound = selection, needed;
    for (std::size_t i = 0; i < rule.atoms.size(); ++i) {
      if (!atom_in[i]) continue;
      for (const auto& c : rule.atoms[i].columns) {
        bound.insert(c.exposed);
        needed.insert(c.exposed);
      }
    }
    // A predicate stays when it constrains a retained column the selection does not pin down.
    for (std::size_t p = 0; p < rule.predicates.size(); ++p) {
      if (pred_in[p]) continue;
      for (const auto& attr : rule.predicates[p].attributes()) {
        if (bound.count(attr) && !selection.count(attr) && !determined.count(attr)) {
          pred_in[p] = true;
          changed = true;
          break;
        }
      }
    }
    for (std::size_t p = 0; p < rule.predicates.size(); ++p)
      if (pred_in[p])
        for (const auto& attr : rule.predicates[p].attributes()) needed.insert(attr);
    for (std::size_t i = 0; i < rule.atoms.size(); ++i) {
      if (atom_in[i]) continue;
      for (const auto& c : rule.atoms[i].columns) {
        if (c.hidden || !needed.count(c.exposed)) continue;
        if (!determined.count(c.exposed) || !bound.count(c.exposed)) {
          atom_in[i] = true;
          changed = true;
          break;
        }
      }
    }
  }
  Retention out;
  for (std::size_t i = 0; i < atom_in.size(); ++i)
    if (atom_in[i]) out.atoms.push_back(i);
  for (std::size_t p = 0; p < pred_in.size(); ++p)
    if (pred_in[p]) out.predicates.push_back(p);
  return out;
}

std::vector<ColumnBinding> head_columns_as_selection(const Rule& rule) {
  std::vector<ColumnBinding> out;
  for (const auto& n : rule.head_attributes()) out.push_back({n, n, false});
  return out;
}

namespace {

std::vector<bool> relevant_rules(const Program& program, std::size_t target_rule) {
  std::size_t n = program.rules.size();
  std::vector<bool> contributes(n, false), above(n, false);
  contributes[n - 1] = true;
  for (std::size_t r = n; r-- > 0;) {
    if (!contributes[r]) continue;
    for (const auto& a : program.rules[r].atoms)
      if (auto v = program.rule_index(a.relation)) contributes[*v] = true;
  }
  above[target_rule] = true;
  for (std::size_t r = target_rule + 1; r < n; ++r)
    for (const auto& a : program.rules[r].atoms)
      if (auto v = program.rule_index(a.relation); v && above[*v]) above[r] = true;
  std::vector<bool> out(n);
  for (std::size_t r = 0; r < n; ++r) out[r] = contributes[r] && above[r];
  return out;
}

ProvStep make_step(const Program& program, std::size_t r, std::size_t atom, const Catalog& catalog, bool prune,
                   const std::string& output, const std::string& source, const std::vector<ColumnBinding>& columns) {
  const Rule& rule = program.rules[r];
  ProvStep s;
  s.output = output;
  s.source = source;
  s.source_columns = columns;
  s.rule = r;
  Retention keep;
  if (prune) {
    std::set<std::string> sel;
    for (const auto& c : columns)
      if (!c.hidden) sel.insert(c.exposed);
    keep = prune_body(rule, {atom}, sel, derive_body_fds(rule, catalog));
  } else {
    for (std::size_t i = 0; i < rule.atoms.size(); ++i) keep.atoms.push_back(i);
    for (std::size_t i = 0; i < rule.predicates.size(); ++i) keep.predicates.push_back(i);
  }
  for (auto i : keep.atoms) s.atoms.push_back(rule.atoms[i]);
  for (auto i : keep.predicates) s.predicates.push_back(rule.predicates[i]);
  for (const auto& c : rule.atoms[atom].columns) {
    s.output_columns.push_back(c.exposed);
    s.output_names.push_back(c.source);
  }
  return s;
}

}  // namespace

ProvQuery retrieval_chain(const Program& program, OccurrenceId target, const Catalog& base, bool prune,
                          const std::optional<TopSource>& top) {
  if (!program.bound) throw std::logic_error("retrieval_chain needs a bound program");
  program.atom(target);  // range check
  Catalog catalog = merged_catalog(program, base);
  ProvQuery q;
  q.target = target;
  q.target_name = program.qualified_name(target);
  q.result = "P:" + q.target_name;
  for (const auto& c : program.atom(target).columns) q.result_attributes.push_back(c.source);
  auto relevant = relevant_rules(program, target.rule);
  std::size_t last = program.rules.size() - 1;
  for (std::size_t r = program.rules.size(); r-- > 0;) {
    if (!relevant[r]) continue;
    const Rule& rule = program.rules[r];
    std::string source = r == last ? (top ? top->name : "R'") : "P:" + rule.head;
    std::vector<ColumnBinding> columns = r == last && top ? top->columns : head_columns_as_selection(rule);
    for (std::size_t i = 0; i < rule.atoms.size(); ++i) {
      if (r == target.rule && i == target.atom) {
        q.steps.push_back(make_step(program, r, i, catalog, prune, q.result, source, columns));
        continue;
      }
      auto v = program.rule_index(rule.atoms[i].relation);
      if (v && relevant[*v] && *v != r)
        q.steps.push_back(
            make_step(program, r, i, catalog, prune, "P:" + program.rules[*v].head, source, columns));
    }
  }
  return q;
}

ProvQuery baseline_retrieval(const Program& program, OccurrenceId target, const Catalog& base) {
  return retrieval_chain(program, target, base, false);
}

ProvQuery optimized_retrieval(const Program& program, OccurrenceId target, const Catalog& base) {
  return retrieval_chain(program, target, base, true);
}

Relation run_query(const ProvQuery& q, const Database& evaluated, const std::map<std::string, Relation>& sources) {
  std::map<std::string, Relation> outputs;
  for (const auto& s : q.steps) {
    auto [it, inserted] = outputs.try_emplace(s.output, Relation(s.output_names));
    const Relation* src = nullptr;
    if (auto f = sources.find(s.source); f != sources.end())
      src = &f->second;
    else if (auto g = outputs.find(s.source); g != outputs.end())
      src = &g->second;
    if (!src || src->empty()) continue;
    std::vector<JoinInput> inputs;
    JoinInput sel{src, {}};
    for (const auto& attr : src->attributes()) {
      auto b = std::find_if(s.source_columns.begin(), s.source_columns.end(),
                            [&](const ColumnBinding& c) { return c.source == attr; });
      sel.names.push_back(b == s.source_columns.end() || b->hidden ? "~" + s.source + "." + attr : b->exposed);
    }
    inputs.push_back(std::move(sel));
    for (const auto& a : s.atoms) inputs.push_back({&evaluated.relation(a.relation), a.all_exposed()});
    it->second.insert_all(join_project(inputs, s.predicates, s.output_columns, s.output_names));
  }
  auto r = outputs.find(q.result);
  if (r == outputs.end()) return Relation(q.result_attributes);
  return r->second;
}

void check_selection(const Relation& selection, const Relation& instance, const std::string& name) {
  if (selection.attributes() != instance.attributes())
    throw DependencyViolation("selection attributes do not match " + name);
  for (const auto& row : selection.rows()) {
    if (!instance.contains(row)) {
      std::string t;
      for (std::size_t i = 0; i < row.size(); ++i) t += (i ? "," : "") + row[i].to_string();
      throw DependencyViolation("selected row (" + t + ") is not in " + name);
    }
  }
}

ProvResult provenance(const Program& program, OccurrenceId target, const Relation& selection, Strategy strategy,
                      const Database& evaluated) {
  if (strategy != Strategy::W && strategy != Strategy::O1)
    throw std::invalid_argument("lazy provenance supports W and O1 only");
  const std::string& head = program.result().head;
  check_selection(selection, evaluated.relation(head), head);
  ProvResult out;
  out.query = retrieval_chain(program, target, evaluated.catalog, strategy == Strategy::O1);
  auto t0 = std::chrono::steady_clock::now();
  out.rows = run_query(out.query, evaluated, {{"R'", selection}});
  auto t1 = std::chrono::steady_clock::now();
  out.stats.join_count = join_count(out.query);
  out.stats.retained_atoms = out.query.retained_atoms();
  out.stats.elapsed_us = std::chrono::duration<double, std::micro>(t1 - t0).count();
  return out;
}

Relation naive_provenance(const Program& program, std::string_view rule_head, OccurrenceId occurrence,
                          const Relation& selection, const Database& evaluated) {
  auto r = program.rule_index(rule_head);
  if (!r) throw UnknownOccurrence("no rule defines '" + std::string(rule_head) + "'");
  if (occurrence.rule != *r) throw UnknownOccurrence(program.qualified_name(occurrence) + " is not in the body of " +
                                                     std::string(rule_head));
  const Rule& rule = program.rules[*r];
  const Relation& h = evaluated.relation(rule.head);
  check_selection(selection, h, rule.head);
  const TableAtom& target = program.atom(occurrence);
  std::vector<JoinInput> inputs{{&h, rule.head_attributes()}};
  std::vector<std::string> all = rule.head_attributes();
  for (const auto& a : rule.atoms) {
    inputs.push_back({&evaluated.relation(a.relation), a.all_exposed()});
    for (const auto& n : a.all_exposed())
      if (std::find(all.begin(), all.end(), n) == all.end()) all.push_back(n);
  }
  Relation pview = join_project(inputs, rule.predicates, all);
  Relation chosen = semijoin(pview, selection);
  std::vector<std::string> cols, names;
  for (const auto& c : target.columns) {
    cols.push_back(c.exposed);
    names.push_back(c.source);
  }
  Relation projected = chosen.project(cols);
  Relation out(names);
  for (const auto& row : projected.rows()) out.insert(row);
  return out;
}

Relation oracle_provenance(const Program& program, OccurrenceId occurrence, const Relation& selection,
                           const Database& evaluated) {
  auto relevant = relevant_rules(program, occurrence.rule);
  std::map<std::string, Relation> pv;
  std::size_t last = program.rules.size() - 1;
  pv.emplace(program.rules[last].head, selection);
  Relation result(evaluated.entry(program.atom(occurrence).relation).attribute_names());
  for (std::size_t r = program.rules.size(); r-- > 0;) {
    if (!relevant[r]) continue;
    const Rule& rule = program.rules[r];
    auto sel = pv.find(rule.head);
    Relation empty(rule.head_attributes());
    const Relation& s = sel == pv.end() ? empty : sel->second;
    for (std::size_t i = 0; i < rule.atoms.size(); ++i) {
      OccurrenceId id{r, i};
      if (id == occurrence) {
        result.insert_all(naive_provenance(program, rule.head, id, s, evaluated));
        continue;
      }
      auto v = program.rule_index(rule.atoms[i].relation);
      if (v && relevant[*v] && *v != r) {
        Relation part = naive_provenance(program, rule.head, id, s, evaluated);
        auto [it, inserted] = pv.try_emplace(program.rules[*v].head, part);
        if (!inserted) it->second.insert_all(part);
      }
    }
  }
  return result;
}

}  // namespace provex
