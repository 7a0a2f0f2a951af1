#include "support/generators.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "provex/engine.hpp"

namespace provex::testing {

namespace {

const std::vector<std::string> kPool = {"a0", "a1", "a2", "a3", "a4", "a5"};

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <class T>
std::vector<T> sample(std::mt19937_64& rng, std::vector<T> from, std::size_t k) {
  std::shuffle(from.begin(), from.end(), rng);
  from.resize(std::min(k, from.size()));
  return from;
}

struct Schema {
  std::string name;
  std::vector<std::string> attrs;
};

}  // namespace

Database random_database(std::mt19937_64& rng) {
  Database db;
  std::size_t tables = 2 + pick(rng, 3);
  for (std::size_t t = 0; t < tables; ++t) {
    CatalogEntry e;
    e.name = "B" + std::to_string(t);
    auto attrs = sample(rng, kPool, 2 + pick(rng, 3));
    std::sort(attrs.begin(), attrs.end());
    for (const auto& a : attrs) e.attributes.push_back({a, Kind::Int});
    int shape = static_cast<int>(pick(rng, 4));
    if (shape == 1) e.key = std::vector<std::string>{attrs[0]};
    if (shape == 2) e.key = std::vector<std::string>{attrs[0], attrs[1]};
    if (attrs.size() >= 3 && coin(rng, 0.25)) e.fds.push_back({{attrs[1]}, attrs[2]});

    Relation rel(e.attribute_names());
    std::map<Row, Row> by_key;
    std::map<Value, Value> by_fd;
    std::size_t rows = 1 + pick(rng, 7);
    for (std::size_t i = 0; i < rows; ++i) {
      Row row;
      for (std::size_t c = 0; c < attrs.size(); ++c) row.push_back(Value(static_cast<std::int64_t>(pick(rng, 3))));
      if (!e.fds.empty()) {
        auto [it, fresh] = by_fd.emplace(row[1], row[2]);
        if (!fresh) row[2] = it->second;
      }
      if (e.key) {
        Row k(row.begin(), row.begin() + static_cast<long>(e.key->size()));
        if (!by_key.emplace(k, row).second) continue;
      }
      rel.insert(row);
    }
    db.put(std::move(e), std::move(rel));
  }
  db.validate();
  return db;
}

std::string random_program(std::mt19937_64& rng, const Database& db) {
  std::vector<Schema> bases;
  for (const auto& [name, e] : db.catalog) bases.push_back({name, e.attribute_names()});

  std::size_t nrules = 1 + pick(rng, 4);
  std::vector<std::vector<std::size_t>> children(nrules);
  for (std::size_t j = 0; j + 1 < nrules; ++j) children[j + 1 + pick(rng, nrules - j - 1)].push_back(j);
  // A rule has at most five atoms; children beyond that are re-parented upward.
  for (std::size_t r = 0; r < nrules; ++r) {
    while (children[r].size() > 4 && r + 1 < nrules) {
      children[r + 1 + pick(rng, nrules - r - 1)].push_back(children[r].back());
      children[r].pop_back();
    }
  }

  std::vector<Schema> heads(nrules);
  int alias_counter = 0;
  int agg_counter = 0;
  std::ostringstream out;
  for (std::size_t r = 0; r < nrules; ++r) {
    std::string head = r + 1 == nrules ? "R" : "V" + std::to_string(r);
    std::vector<Schema> atoms;
    for (auto c : children[r]) atoms.push_back(heads[c]);
    std::size_t max_base = 5 - atoms.size();
    std::size_t nbase = atoms.empty() ? 1 + pick(rng, std::min<std::size_t>(max_base, 3)) : pick(rng, std::min<std::size_t>(max_base, 3) + 1);
    for (std::size_t i = 0; i < nbase; ++i) atoms.push_back(bases[pick(rng, bases.size())]);
    std::shuffle(atoms.begin(), atoms.end(), rng);

    std::vector<std::string> body;
    std::set<std::string> visible;
    std::map<std::string, int> uses;
    for (const auto& a : atoms) ++uses[a.name];
    for (const auto& a : atoms) {
      std::string text = a.name;
      if (uses[a.name] > 1 || coin(rng, 0.2)) text += "@x" + std::to_string(++alias_counter);
      if (coin(rng, 0.5)) {
        auto listed = sample(rng, a.attrs, 1 + pick(rng, a.attrs.size()));
        std::set<std::string> taken;
        std::vector<std::string> args;
        for (const auto& s : listed) {
          std::string exposed = s;
          if (coin(rng, 0.3)) {
            std::string to = kPool[pick(rng, kPool.size())];
            bool clash = taken.count(to) || std::find(listed.begin(), listed.end(), to) != listed.end();
            if (!clash) exposed = to;
          }
          taken.insert(exposed);
          visible.insert(exposed);
          args.push_back(exposed == s ? s : s + " as " + exposed);
        }
        std::string joined;
        for (const auto& x : args) joined += (joined.empty() ? "" : ", ") + x;
        text += "(" + joined + ")";
      } else {
        visible.insert(a.attrs.begin(), a.attrs.end());
      }
      body.push_back(text);
    }

    std::vector<std::string> vis(visible.begin(), visible.end());
    std::vector<std::string> cols;
    Schema schema{head, {}};
    bool aggregate = coin(rng, 0.35);
    auto plain = sample(rng, vis, (aggregate ? 0 : 1) + pick(rng, vis.size()));
    std::sort(plain.begin(), plain.end());
    for (const auto& p : plain) {
      cols.push_back(p);
      schema.attrs.push_back(p);
    }
    if (aggregate) {
      static const char* fns[] = {"sum", "count", "min", "max", "avg"};
      std::size_t naggs = 1 + pick(rng, 2);
      for (std::size_t i = 0; i < naggs; ++i) {
        const char* fn = fns[pick(rng, 5)];
        // avg yields decimals; keep parents integer-only by reserving it for the result.
        if (std::string(fn) == "avg" && r + 1 != nrules) fn = "sum";
        std::string name = "s" + std::to_string(agg_counter++);
        cols.push_back(std::string(fn) + "(" + vis[pick(rng, vis.size())] + ") as " + name);
        schema.attrs.push_back(name);
      }
    }

    std::size_t npreds = pick(rng, 3);
    static const char* ops[] = {"<", "<=", "=", "!=", ">=", ">"};
    for (std::size_t i = 0; i < npreds; ++i) {
      std::string lhs = vis[pick(rng, vis.size())];
      std::string rhs = coin(rng, 0.5) ? vis[pick(rng, vis.size())] : std::to_string(pick(rng, 3));
      if (rhs == lhs) continue;
      body.push_back(lhs + " " + ops[pick(rng, 6)] + " " + rhs);
    }

    out << head << "(";
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? ", " : "") << cols[i];
    out << ") :- ";
    for (std::size_t i = 0; i < body.size(); ++i) out << (i ? ", " : "") << body[i];
    out << ".\n";
    heads[r] = schema;
  }
  return out.str();
}

Relation random_selection(std::mt19937_64& rng, const Relation& result) {
  Relation sel(result.attributes());
  std::vector<Row> rows(result.rows().begin(), result.rows().end());
  for (const auto& row : sample(rng, rows, 1 + pick(rng, std::min<std::size_t>(3, rows.size())))) sel.insert(row);
  return sel;
}

RandomCase random_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (;;) {
    RandomCase c;
    c.seed = seed;
    c.db = random_database(rng);
    c.text = random_program(rng, c.db);
    c.program = parse_program(c.text, c.db.catalog);
    Database ev = eval_program(c.program, c.db);
    c.result = ev.relation(c.program.result().head);
    if (c.result.empty()) continue;
    c.selection = random_selection(rng, c.result);
    return c;
  }
}

std::vector<std::set<OccurrenceId>> sample_plans(std::mt19937_64& rng, const Program& program, std::size_t limit) {
  auto bases = program.base_occurrences();
  std::set<std::set<OccurrenceId>> seen;
  std::vector<std::set<OccurrenceId>> out;
  auto add = [&](std::set<OccurrenceId> p) {
    if (out.size() < limit && seen.insert(p).second) out.push_back(std::move(p));
  };
  add({});
  add({bases.begin(), bases.end()});
  std::size_t total = bases.size() < 20 ? (std::size_t{1} << bases.size()) : limit;
  for (int tries = 0; out.size() < std::min(limit, total) && tries < 200; ++tries) {
    std::set<OccurrenceId> p;
    for (auto id : bases)
      if (rng() % 2) p.insert(id);
    add(std::move(p));
  }
  return out;
}

}  // namespace provex::testing
