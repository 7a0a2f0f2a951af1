#include "provex/engine.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace provex {

namespace {

// Intermediate join result: a schema and rows in vector form.
struct Table {
  std::vector<std::string> names;
  std::vector<Row> rows;

  std::optional<std::size_t> index_of(const std::string& n) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return i;
    return std::nullopt;
  }
};

const Value& operand_value(const Operand& o, const Table& t, const Row& row) {
  if (auto* a = std::get_if<AttrRef>(&o)) return row[*t.index_of(a->name)];
  return std::get<Value>(o);
}

bool bound_in(const Predicate& p, const Table& t) {
  for (const auto& a : p.attributes())
    if (!t.index_of(a)) return false;
  return true;
}

void apply_predicates(Table& t, const std::vector<Predicate>& preds, std::vector<bool>& done) {
  std::vector<const Predicate*> now;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (done[i] || !bound_in(preds[i], t)) continue;
    done[i] = true;
    now.push_back(&preds[i]);
  }
  if (now.empty()) return;
  std::vector<Row> kept;
  for (auto& row : t.rows) {
    bool ok = true;
    for (const auto* p : now) {
      if (!apply_cmp(p->op, compare_values(operand_value(p->left, t, row), operand_value(p->right, t, row)))) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(std::move(row));
  }
  t.rows = std::move(kept);
}

Table from_input(const JoinInput& in) {
  Table t;
  // Repeated names inside one input act as an equality filter.
  std::vector<std::size_t> first(in.names.size());
  for (std::size_t i = 0; i < in.names.size(); ++i) {
    auto it = std::find(in.names.begin(), in.names.begin() + static_cast<std::ptrdiff_t>(i), in.names[i]);
    first[i] = static_cast<std::size_t>(it - in.names.begin());
    if (first[i] == i) t.names.push_back(in.names[i]);
  }
  t.rows.reserve(in.rel->size());
  for (const auto& row : in.rel->rows()) {
    bool ok = true;
    Row r;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (first[i] != i) {
        if (row[first[i]] != row[i]) ok = false;
        continue;
      }
      r.push_back(row[i]);
    }
    if (ok) t.rows.push_back(std::move(r));
  }
  return t;
}

Table hash_join(const Table& left, const Table& right) {
  std::vector<std::size_t> li, ri, extra;
  for (std::size_t j = 0; j < right.names.size(); ++j) {
    if (auto i = left.index_of(right.names[j])) {
      li.push_back(*i);
      ri.push_back(j);
    } else {
      extra.push_back(j);
    }
  }
  Table out;
  out.names = left.names;
  for (auto j : extra) out.names.push_back(right.names[j]);
  std::unordered_map<Row, std::vector<const Row*>, RowHash> index;
  index.reserve(right.rows.size());
  for (const auto& row : right.rows) {
    Row k;
    k.reserve(ri.size());
    for (auto j : ri) k.push_back(row[j]);
    index[std::move(k)].push_back(&row);
  }
  for (const auto& row : left.rows) {
    Row k;
    k.reserve(li.size());
    for (auto i : li) k.push_back(row[i]);
    auto it = index.find(k);
    if (it == index.end()) continue;
    for (const Row* match : it->second) {
      Row r = row;
      for (auto j : extra) r.push_back((*match)[j]);
      out.rows.push_back(std::move(r));
    }
  }
  return out;
}

std::size_t combine(std::size_t h, const Value& v) { return h ^ (v.hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

// Hashes the (smaller) accumulated table and streams the stored rows of `in`
// against it without copying them first.
Table probe_join(const Table& left, const JoinInput& in) {
  std::vector<std::size_t> first(in.names.size());
  std::vector<std::size_t> li, ri, extra;
  for (std::size_t j = 0; j < in.names.size(); ++j) {
    auto it = std::find(in.names.begin(), in.names.begin() + static_cast<std::ptrdiff_t>(j), in.names[j]);
    first[j] = static_cast<std::size_t>(it - in.names.begin());
    if (first[j] != j) continue;
    if (auto i = left.index_of(in.names[j])) {
      li.push_back(*i);
      ri.push_back(j);
    } else {
      extra.push_back(j);
    }
  }
  Table out;
  out.names = left.names;
  for (auto j : extra) out.names.push_back(in.names[j]);
  std::unordered_map<std::size_t, std::vector<std::size_t>> index;
  index.reserve(left.rows.size());
  for (std::size_t r = 0; r < left.rows.size(); ++r) {
    std::size_t h = li.size();
    for (auto i : li) h = combine(h, left.rows[r][i]);
    index[h].push_back(r);
  }
  for (const auto& row : in.rel->rows()) {
    bool ok = true;
    for (std::size_t j = 0; j < row.size() && ok; ++j)
      if (first[j] != j && row[first[j]] != row[j]) ok = false;
    if (!ok) continue;
    std::size_t h = ri.size();
    for (auto j : ri) h = combine(h, row[j]);
    auto it = index.find(h);
    if (it == index.end()) continue;
    for (std::size_t r : it->second) {
      const Row& l = left.rows[r];
      bool eq = true;
      for (std::size_t k = 0; k < li.size() && eq; ++k) eq = l[li[k]] == row[ri[k]];
      if (!eq) continue;
      Row o = l;
      for (auto j : extra) o.push_back(row[j]);
      out.rows.push_back(std::move(o));
    }
  }
  return out;
}

// Drops columns outside `keep` and removes duplicate rows.
void narrow(Table& t, const std::set<std::string>& keep) {
  std::vector<std::size_t> idx;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < t.names.size(); ++i)
    if (keep.count(t.names[i])) {
      idx.push_back(i);
      names.push_back(t.names[i]);
    }
  if (idx.size() == t.names.size()) return;
  std::unordered_set<Row, RowHash> seen;
  std::vector<Row> rows;
  for (const auto& row : t.rows) {
    Row r;
    r.reserve(idx.size());
    for (auto i : idx) r.push_back(row[i]);
    if (seen.insert(r).second) rows.push_back(std::move(r));
  }
  t.names = std::move(names);
  t.rows = std::move(rows);
}

std::size_t shared_count(const Table& t, const JoinInput& in) {
  std::size_t n = 0;
  for (const auto& name : in.names)
    if (t.index_of(name)) ++n;
  return n;
}

// Joins every input; with `prune` set, columns not needed by `output`, later
// inputs or pending predicates are projected away between joins.
Table join_all(const std::vector<JoinInput>& inputs, const std::vector<Predicate>& predicates,
               const std::vector<std::string>& output, bool prune) {
  std::vector<bool> done(predicates.size(), false);
  std::vector<bool> used(inputs.size(), false);
  if (inputs.empty()) throw std::invalid_argument("join over no inputs");
  std::size_t start = 0;
  for (std::size_t i = 1; i < inputs.size(); ++i)
    if (inputs[i].rel->size() < inputs[start].rel->size()) start = i;
  Table acc = from_input(inputs[start]);
  used[start] = true;
  apply_predicates(acc, predicates, done);
  for (std::size_t step = 1; step < inputs.size(); ++step) {
    std::size_t best = inputs.size();
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (used[i]) continue;
      if (best == inputs.size()) {
        best = i;
        continue;
      }
      std::size_t si = shared_count(acc, inputs[i]), sb = shared_count(acc, inputs[best]);
      bool connected_i = si > 0, connected_b = sb > 0;
      if (connected_i != connected_b) {
        if (connected_i) best = i;
      } else if (inputs[i].rel->size() < inputs[best].rel->size()) {
        best = i;
      }
    }
    used[best] = true;
    if (acc.rows.size() <= inputs[best].rel->size())
      acc = probe_join(acc, inputs[best]);
    else
      acc = hash_join(acc, from_input(inputs[best]));
    apply_predicates(acc, predicates, done);
    if (prune) {
      std::set<std::string> keep(output.begin(), output.end());
      for (std::size_t i = 0; i < inputs.size(); ++i)
        if (!used[i]) keep.insert(inputs[i].names.begin(), inputs[i].names.end());
      for (std::size_t i = 0; i < predicates.size(); ++i)
        if (!done[i])
          for (const auto& a : predicates[i].attributes()) keep.insert(a);
      narrow(acc, keep);
    }
    if (acc.rows.empty()) break;
  }
  if (acc.rows.empty()) {
    for (const auto& in : inputs)
      for (const auto& n : in.names)
        if (!acc.index_of(n)) acc.names.push_back(n);
    return acc;
  }
  for (std::size_t i = 0; i < predicates.size(); ++i)
    if (!done[i])
      throw std::invalid_argument("predicate " + to_string(predicates[i]) + " mentions an unbound attribute");
  return acc;
}

Relation to_relation(const Table& t, const std::vector<std::string>& output, const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  for (const auto& o : output) {
    auto i = t.index_of(o);
    if (!i) throw std::invalid_argument("output attribute '" + o + "' is not bound by the query");
    idx.push_back(*i);
  }
  Relation out(names.empty() ? output : names);
  for (const auto& row : t.rows) {
    Row r;
    r.reserve(idx.size());
    for (auto i : idx) r.push_back(row[i]);
    out.insert(std::move(r));
  }
  return out;
}

std::vector<JoinInput> body_inputs(const Rule& rule, const Database& db) {
  std::vector<JoinInput> inputs;
  for (const auto& a : rule.atoms) inputs.push_back({&db.relation(a.relation), a.all_exposed()});
  return inputs;
}

Value aggregate(AggFn fn, const std::vector<const Value*>& vals) {
  switch (fn) {
    case AggFn::Count:
      return Value(static_cast<std::int64_t>(vals.size()));
    case AggFn::Min:
    case AggFn::Max: {
      const Value* best = vals.front();
      for (const Value* v : vals) {
        auto ord = compare_values(*v, *best);
        if (fn == AggFn::Min ? ord < 0 : ord > 0) best = v;
      }
      return *best;
    }
    case AggFn::Sum:
    case AggFn::Avg: {
      Kind k = vals.front()->kind();
      __int128 total = 0;
      for (const Value* v : vals) {
        if (v->kind() == Kind::Int)
          total += v->as_int();
        else if (v->kind() == Kind::Decimal)
          total += v->as_decimal().micros;
        else
          throw EvalError(std::string(agg_name(fn)) + " over " + std::string(kind_name(v->kind())) + " value '" +
                          v->to_string() + "'");
      }
      if (fn == AggFn::Sum) {
        if (k == Kind::Int) return Value(static_cast<std::int64_t>(total));
        return Value(Decimal{static_cast<std::int64_t>(total)});
      }
      if (k == Kind::Int) total *= Decimal::kScale;
      return Value(Decimal{divide_half_even(total, static_cast<std::int64_t>(vals.size()))});
    }
  }
  throw EvalError("unknown aggregate");
}

}  // namespace

Relation join_project(const std::vector<JoinInput>& inputs, const std::vector<Predicate>& predicates,
                      const std::vector<std::string>& output, const std::vector<std::string>& output_names) {
  Table t = join_all(inputs, predicates, output, true);
  return to_relation(t, output, output_names);
}

Relation join_body(const Rule& rule, const Database& db) {
  auto inputs = body_inputs(rule, db);
  std::vector<std::string> all;
  for (const auto& in : inputs)
    for (const auto& n : in.names)
      if (std::find(all.begin(), all.end(), n) == all.end()) all.push_back(n);
  Table t = join_all(inputs, rule.predicates, all, false);
  return to_relation(t, all, {});
}

Relation eval_rule(const Rule& rule, const Database& db) {
  auto inputs = body_inputs(rule, db);
  if (rule.kind() == RuleKind::SPJ) {
    std::vector<std::string> out;
    for (const auto& hc : rule.head_columns) out.push_back(hc.attribute);
    return join_project(inputs, rule.predicates, out, rule.head_attributes());
  }
  // Aggregates see one row per derivation, so nothing is projected away first.
  Table t = join_all(inputs, rule.predicates, {}, false);
  std::vector<std::size_t> group_idx;
  for (const auto& g : rule.group_by()) group_idx.push_back(*t.index_of(g));
  std::map<Row, std::vector<const Row*>> groups;
  for (const auto& row : t.rows) {
    Row k;
    for (auto i : group_idx) k.push_back(row[i]);
    groups[std::move(k)].push_back(&row);
  }
  Relation out(rule.head_attributes());
  for (const auto& [key, rows] : groups) {
    Row r;
    std::size_t g = 0;
    for (const auto& hc : rule.head_columns) {
      if (hc.is_plain()) {
        r.push_back(key[g++]);
        continue;
      }
      std::size_t i = *t.index_of(hc.attribute);
      std::vector<const Value*> vals;
      vals.reserve(rows.size());
      for (const Row* row : rows) vals.push_back(&(*row)[i]);
      r.push_back(aggregate(*hc.fn, vals));
    }
    out.insert(std::move(r));
  }
  return out;
}

Catalog merged_catalog(const Program& program, const Catalog& base) {
  Catalog out = base;
  for (const auto& [name, e] : program.heads) out.insert_or_assign(name, e);
  return out;
}

Database eval_program(const Program& program, const Database& db) {
  const Program& bound = program;
  Program rebound;
  const Program* p = &bound;
  if (!program.bound) {
    rebound = bind_program(program, db.catalog);
    p = &rebound;
  }
  Database out = db;
  for (const auto& rule : p->rules) out.put(p->heads.at(rule.head), eval_rule(rule, out));
  return out;
}

}  // namespace provex
