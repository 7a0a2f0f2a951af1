#include <gtest/gtest.h>

#include "provex/dataset.hpp"
#include "provex/engine.hpp"
#include "provex/explorer.hpp"
#include "provex/fixtures.hpp"
#include "provex/provgen.hpp"
#include "support/oracle.hpp"

namespace provex {
namespace {

Relation rows(std::vector<std::string> attrs, std::vector<Row> rs) {
  Relation r(std::move(attrs));
  for (auto& row : rs) r.insert(std::move(row));
  return r;
}

using Body = std::vector<std::string>;

struct WorkedExample : ::testing::Test {
  Database db = fixtures::orders_example();
  Program p = parse_program(fixtures::kQ18, db.catalog);
  Database ev = eval_program(p, db);
  Relation selected = rows({"c_name", "c_key", "o_key", "o_date", "total_qty"}, {{"n1", "c1", "o1", "d1", 350}});

  OccurrenceId id(const char* name) { return p.find_occurrence(name); }
};

TEST_F(WorkedExample, EveryStrategyReturnsTheWorkedSets) {
  std::map<std::string, Relation> expected{
      {"Customers", rows({"c_key", "c_name", "c_address"}, {{"c1", "n1", "a1"}})},
      {"Orders", rows({"o_key", "c_key", "o_date"}, {{"o1", "c1", "d1"}})},
      {"Lineitem1", rows({"o_key", "linenum", "qty"}, {{"o1", "l1", 200}, {"o1", "l2", 150}})},
      {"Lineitem2", rows({"o_key", "linenum", "qty"}, {{"o1", "l1", 200}, {"o1", "l2", 150}})},
      {"Q18_tmp", rows({"o_key", "t_sum_qty"}, {{"o1", 350}})},
  };
  for (Strategy st : {Strategy::W, Strategy::O1, Strategy::G, Strategy::O2}) {
    Explorer ex(p, db, {st, PlanMode::Auto, {}, {}});
    for (const auto& [name, want] : expected)
      EXPECT_EQ(ex.provenance(id(name.c_str()), selected).rows, want) << strategy_name(st) << " " << name;
  }
}

TEST_F(WorkedExample, NaiveDefinition) {
  Relation q18_sel = rows({"o_key", "t_sum_qty"}, {{"o2", 260}});
  EXPECT_EQ(naive_provenance(p, "Q18_tmp", id("Lineitem2"), q18_sel, ev),
            rows({"o_key", "linenum", "qty"}, {{"o2", "l1", 100}, {"o2", "l2", 160}}));
  EXPECT_EQ(naive_provenance(p, "R", id("Orders"), selected, ev), rows({"o_key", "c_key", "o_date"}, {{"o1", "c1", "d1"}}));
  EXPECT_TRUE(naive_provenance(p, "R", id("Orders"), Relation(selected.attributes()), ev).empty());
  EXPECT_THROW(naive_provenance(p, "R", id("Lineitem2"), selected, ev), UnknownOccurrence);
}

TEST_F(WorkedExample, InnerSelectionUnderEveryStrategy) {
  Program inner;
  inner.rules = {p.rules[0]};
  inner = bind_program(inner, db.catalog);
  Relation q18_sel = rows({"o_key", "t_sum_qty"}, {{"o2", 260}});
  for (Strategy st : {Strategy::W, Strategy::O1, Strategy::G, Strategy::O2}) {
    Explorer ex(inner, db, {st, PlanMode::Auto, {}, {}});
    EXPECT_EQ(ex.provenance({0, 0}, q18_sel).rows,
              rows({"o_key", "linenum", "qty"}, {{"o2", "l1", 100}, {"o2", "l2", 160}}))
        << strategy_name(st);
  }
}

TEST_F(WorkedExample, BaselineKeepsTheWholeBody) {
  ProvQuery q = baseline_retrieval(p, id("Customers"), db.catalog);
  ASSERT_EQ(q.steps.size(), 1u);
  EXPECT_EQ(q.canonical_body(), (Body{"Customers", "Lineitem1", "Orders", "Q18_tmp", "R'"}));
  EXPECT_EQ(q.steps[0].predicates.size(), 1u);
  EXPECT_EQ(join_count(q), 4u);
}

TEST_F(WorkedExample, OptimizedBodies) {
  for (const char* name : {"Customers", "Lineitem1", "Q18_tmp"}) {
    ProvQuery q = optimized_retrieval(p, id(name), db.catalog);
    EXPECT_EQ(q.canonical_body(), (Body{name, "R'"})) << name;
    EXPECT_EQ(join_count(q), 1u) << name;
    EXPECT_TRUE(q.steps.back().predicates.empty()) << name;
  }
  // Every Orders column is in the result here, so no join is needed at all.
  ProvQuery orders = optimized_retrieval(p, id("Orders"), db.catalog);
  EXPECT_EQ(orders.canonical_body(), Body{"R'"});
  EXPECT_EQ(join_count(orders), 0u);
}

TEST(Optimized, OrdersWithAnUnlistedColumnJoinsOnce) {
  Database db = fixtures::orders_with_totalprice();
  Program p = parse_program(fixtures::kQ18, db.catalog);
  ProvQuery q = optimized_retrieval(p, p.find_occurrence("Orders"), db.catalog);
  EXPECT_EQ(q.canonical_body(), (Body{"Orders", "R'"}));
  EXPECT_EQ(join_count(q), 1u);
}

TEST_F(WorkedExample, InnerLineitemRecursesThroughTheView) {
  ProvQuery o1 = optimized_retrieval(p, id("Lineitem2"), db.catalog);
  ASSERT_EQ(o1.steps.size(), 2u);
  EXPECT_EQ(o1.steps[0].output, "P:Q18_tmp");
  EXPECT_EQ(o1.steps[1].source, "P:Q18_tmp");
  EXPECT_EQ(o1.canonical_body(), (Body{"Lineitem2", "P:Q18_tmp"}));
  EXPECT_EQ(join_count(o1), 3u);
  ProvQuery w = baseline_retrieval(p, id("Lineitem2"), db.catalog);
  EXPECT_EQ(join_count(w), 6u);
  auto res = provenance(p, id("Lineitem2"), selected, Strategy::O1, ev);
  EXPECT_EQ(res.rows, rows({"o_key", "linenum", "qty"}, {{"o1", "l1", 200}, {"o1", "l2", 150}}));
  EXPECT_EQ(res.stats.join_count, 3u);
}

TEST_F(WorkedExample, SelectionMustComeFromTheResult) {
  Relation fake = rows(selected.attributes(), {{"n9", "c1", "o1", "d1", 350}});
  EXPECT_THROW(provenance(p, id("Customers"), fake, Strategy::O1, ev), DependencyViolation);
  Relation wrong({"c_name"});
  EXPECT_THROW(provenance(p, id("Customers"), wrong, Strategy::W, ev), DependencyViolation);
  EXPECT_TRUE(provenance(p, id("Customers"), Relation(selected.attributes()), Strategy::O1, ev).rows.empty());
  EXPECT_THROW(provenance(p, id("Customers"), selected, Strategy::G, ev), std::invalid_argument);
}

TEST_F(WorkedExample, ProvenanceIsSound) {
  for (auto occ : p.occurrences()) {
    auto got = provenance(p, occ, selected, Strategy::O1, ev).rows;
    EXPECT_TRUE(got.is_subset_of(ev.relation(p.atom(occ).relation)));
  }
}

TEST(SingletonChain, OptimizedBodies) {
  Database db = fixtures::singleton_chain();
  Program p = parse_program(fixtures::kSingletonChain, db.catalog);
  auto body = [&](const char* t) { return optimized_retrieval(p, p.find_occurrence(t), db.catalog).canonical_body(); };
  EXPECT_EQ(body("T6"), Body{"R'"});
  EXPECT_EQ(body("T3"), (Body{"R'", "T3"}));
  EXPECT_EQ(body("T4"), (Body{"R'", "T1", "T2", "T4", "T5"}));
  ProvQuery w = baseline_retrieval(p, p.find_occurrence("T3"), db.catalog);
  EXPECT_EQ(w.retained_atoms(), 6u);
  EXPECT_EQ(join_count(w), 6u);
}

TEST(SingletonChain, MatchesTheEnumerationOracle) {
  Database db = fixtures::singleton_chain();
  Program p = parse_program(fixtures::kSingletonChain, db.catalog);
  Database ev = eval_program(p, db);
  testing::DerivationOracle oracle(p, db);
  auto expected = oracle.provenance(ev.relation("R"));
  for (auto id : p.occurrences())
    for (Strategy st : {Strategy::W, Strategy::O1})
      EXPECT_EQ(provenance(p, id, ev.relation("R"), st, ev).rows, expected.at(id));
}

TEST(Baseline, SingleAtom) {
  Database db = make_database("T; A:int\n", {{"T", "A\n1\n2\n"}});
  Program p = parse_program("R(A) :- T(A).\n", db.catalog);
  ProvQuery w = baseline_retrieval(p, {0, 0}, db.catalog);
  EXPECT_EQ(w.canonical_body(), (Body{"R'", "T"}));
  EXPECT_EQ(optimized_retrieval(p, {0, 0}, db.catalog).canonical_body(), Body{"R'"});
}

// Rule: R(A) :- Xj(A, C), Xk(A, C) with Xk keyed on A. Xk's key determines C,
// but only while Xk stays in the query; dropping Xk must not drop the C check.
TEST(PruneBody, DependenciesOfRemovedAtomsDoNotCount) {
  Database db = make_database("Xj; A:int, C:int\nXk; A:int, C:int; key: A\n",
                              {{"Xj", "A,C\n1,1\n1,2\n"}, {"Xk", "A,C\n1,1\n"}});
  Program p = parse_program("R(A) :- Xj(A, C), Xk(A, C).\n", db.catalog);
  Database ev = eval_program(p, db);
  OccurrenceId xj{0, 0};
  auto got = provenance(p, xj, ev.relation("R"), Strategy::O1, ev).rows;
  EXPECT_EQ(got, rows({"A", "C"}, {{1, 1}}));
  EXPECT_EQ(optimized_retrieval(p, xj, db.catalog).canonical_body(), (Body{"R'", "Xj", "Xk"}));
}

TEST(PruneBody, KeyOfAPrunedAtomCannotBeUsed) {
  Database db = fixtures::orders_example();
  Program p = parse_program("R(o_key) :- Orders, Customers.\n", db.catalog);
  FdSet fds = derive_body_fds(p, 0, db.catalog);
  Retention orders = prune_body(p.rules[0], {0}, {"o_key"}, fds);
  EXPECT_EQ(orders.atoms, std::vector<std::size_t>{0});
  // c_key is only determined through the Orders key, so Orders comes back.
  Retention customers = prune_body(p.rules[0], {1}, {"o_key"}, fds);
  EXPECT_EQ(customers.atoms, (std::vector<std::size_t>{0, 1}));
}

TEST(PruneBody, PredicatesFollowTheirAtoms) {
  Database db = fixtures::orders_example();
  Program p = parse_program("R(o_key) :- Orders, Lineitem, qty > 150.\n", db.catalog);
  FdSet fds = derive_body_fds(p, 0, db.catalog);
  Retention orders = prune_body(p.rules[0], {0}, {"o_key"}, fds);
  EXPECT_EQ(orders.atoms, std::vector<std::size_t>{0});
  EXPECT_TRUE(orders.predicates.empty());
  Retention lines = prune_body(p.rules[0], {1}, {"o_key"}, fds);
  EXPECT_EQ(lines.atoms, std::vector<std::size_t>{1});
  EXPECT_EQ(lines.predicates, std::vector<std::size_t>{0});
  Retention always = prune_body(p.rules[0], {1}, {"o_key"}, fds, {0});
  EXPECT_EQ(always.atoms, (std::vector<std::size_t>{0, 1}));

  Database ev = eval_program(p, db);
  for (auto id : p.occurrences())
    EXPECT_EQ(provenance(p, id, ev.relation("R"), Strategy::O1, ev).rows,
              naive_provenance(p, "R", id, ev.relation("R"), ev));
}

TEST(PruneBody, DeterminedPredicateIsDropped) {
  Database db = fixtures::orders_example();
  Program p = parse_program("R(o_key, qty) :- Lineitem, Orders, qty > 150.\n", db.catalog);
  FdSet fds = derive_body_fds(p, 0, db.catalog);
  Retention r = prune_body(p.rules[0], {1}, {"o_key", "qty"}, fds);
  EXPECT_EQ(r.atoms, std::vector<std::size_t>{1});
  EXPECT_TRUE(r.predicates.empty());
}

TEST(PruneBody, CoveredTargetIsSkipped) {
  Database db = fixtures::orders_example();
  Program p = parse_program("R(c_key, c_name, c_address) :- Customers, Orders.\n", db.catalog);
  FdSet fds = derive_body_fds(p, 0, db.catalog);
  Retention r = prune_body(p.rules[0], {0}, {"c_key", "c_name", "c_address"}, fds);
  EXPECT_TRUE(r.atoms.empty());
}

TEST(Strategies, Names) {
  EXPECT_EQ(parse_strategy("o2"), Strategy::O2);
  EXPECT_EQ(strategy_name(Strategy::G), "G");
  EXPECT_THROW(parse_strategy("X"), std::invalid_argument);
}

TEST(Fixtures, EveryStrategyMatchesTheEnumerationOracle) {
  for (const auto& f : fixtures::corpus()) {
    Program p = parse_program(f.program, f.db.catalog);
    testing::DerivationOracle oracle(p, f.db);
    const Relation& result = oracle.result();
    ASSERT_FALSE(result.empty()) << f.name;
    std::vector<Relation> selections{result};
    Relation first(result.attributes());
    first.insert(*result.rows().begin());
    selections.push_back(first);
    for (Strategy st : {Strategy::W, Strategy::O1, Strategy::G, Strategy::O2}) {
      Explorer ex(p, f.db, {st, PlanMode::Auto, {}, {}});
      EXPECT_EQ(ex.answer(), result) << f.name;
      for (const auto& sel : selections) {
        auto expected = oracle.provenance(sel);
        for (auto id : p.occurrences())
          EXPECT_EQ(ex.provenance(id, sel).rows, expected.at(id))
              << f.name << " " << strategy_name(st) << " " << p.qualified_name(id);
      }
    }
  }
}

}  // namespace
}  // namespace provex
