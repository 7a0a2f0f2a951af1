#include <gtest/gtest.h>

#include <algorithm>

#include "provex/constraints.hpp"
#include "provex/fixtures.hpp"

namespace provex {
namespace {

bool has_fd(const FdSet& fds, std::set<std::string> lhs, const std::string& rhs) {
  return std::any_of(fds.begin(), fds.end(), [&](const FunctionalDependency& f) { return f.lhs == lhs && f.rhs == rhs; });
}

struct Q18 : ::testing::Test {
  Database db = fixtures::orders_example();
  Program p = parse_program(fixtures::kQ18, db.catalog);
  FdSet fds = derive_body_fds(p, 1, db.catalog);
  std::set<std::string> a_r{"c_name", "c_key", "o_key", "o_date", "total_qty"};
};

TEST_F(Q18, BodyFdsInstantiateKeys) {
  EXPECT_TRUE(has_fd(fds, {"c_key"}, "c_name"));
  EXPECT_TRUE(has_fd(fds, {"c_key"}, "c_address"));
  EXPECT_TRUE(has_fd(fds, {"o_key"}, "o_date"));
  EXPECT_TRUE(has_fd(fds, {"o_key"}, "t_sum_qty"));
  EXPECT_TRUE(has_fd(fds, {"o_key", "linenum"}, "qty"));
  auto tmp = std::find_if(fds.begin(), fds.end(), [](const auto& f) { return f.rhs == "t_sum_qty"; });
  ASSERT_NE(tmp, fds.end());
  EXPECT_EQ(tmp->source, FunctionalDependency::Source::Atom);
  EXPECT_EQ(tmp->origin, 3u);
}

TEST_F(Q18, FdsMentionOnlyExposedNames) {
  auto attrs = rhs_attributes(p.result());
  for (const auto& f : fds) {
    EXPECT_TRUE(attrs.count(f.rhs)) << to_string(f);
    for (const auto& l : f.lhs) EXPECT_TRUE(attrs.count(l)) << to_string(f);
  }
}

TEST_F(Q18, ClosureOfResultAttributes) {
  auto c = closure(a_r, fds);
  EXPECT_TRUE(c.count("c_address"));
  EXPECT_TRUE(c.count("t_sum_qty"));
  EXPECT_FALSE(c.count("qty"));
  EXPECT_FALSE(c.count("linenum"));
  EXPECT_TRUE(holds_fd(a_r, "c_key", fds));
  EXPECT_FALSE(holds_fd(a_r, "qty", fds));
}

TEST(Constraints, ClosureBasics) {
  EXPECT_EQ(closure({"a", "b"}, {}), (std::set<std::string>{"a", "b"}));
  FdSet d_e{{{"D"}, "E", FunctionalDependency::Source::Atom, 0}};
  EXPECT_EQ(closure({"D"}, d_e), (std::set<std::string>{"D", "E"}));
  EXPECT_TRUE(holds_fd({"x"}, "x", {}));
  FdSet chain{{{"a"}, "b", FunctionalDependency::Source::Atom, 0}, {{"b", "c"}, "d", FunctionalDependency::Source::Atom, 1}};
  EXPECT_FALSE(holds_fd({"a"}, "d", chain));
  EXPECT_TRUE(holds_fd({"a", "c"}, "d", chain));
}

TEST(Constraints, DeclaredFdInSingletonChain) {
  Database db = fixtures::singleton_chain();
  Program p = parse_program(fixtures::kSingletonChain, db.catalog);
  FdSet fds = derive_body_fds(p, 0, db.catalog);
  EXPECT_TRUE(has_fd(fds, {"D"}, "E"));
  EXPECT_EQ(fds.size(), 1u);
}

TEST(Constraints, KeylessViewsContributeNothing) {
  Database db = fixtures::orders_example();
  Program p = parse_program("V(o_key, qty) :- Lineitem.\nR(o_key) :- V.\n", db.catalog);
  EXPECT_TRUE(derive_body_fds(p, 1, db.catalog).empty());
}

TEST(Constraints, EqualityPredicatesInduceFds) {
  Database db = fixtures::orders_example();
  Program p = parse_program("R(o_key) :- Lineitem, Orders(o_key as k, o_date), o_key = k, qty = 200.\n", db.catalog);
  FdSet fds = derive_body_fds(p, 0, db.catalog);
  EXPECT_TRUE(has_fd(fds, {"o_key"}, "k"));
  EXPECT_TRUE(has_fd(fds, {"k"}, "o_key"));
  EXPECT_TRUE(has_fd(fds, {}, "qty"));
  auto eq = std::find_if(fds.begin(), fds.end(), [](const auto& f) { return f.rhs == "qty" && f.lhs.empty(); });
  EXPECT_EQ(eq->source, FunctionalDependency::Source::Predicate);
  EXPECT_EQ(eq->origin, 1u);
}

TEST(Constraints, ViewKeys) {
  Program q18 = parse_program(fixtures::kQ18);
  auto k = infer_view_key(q18.rules[0]);
  ASSERT_TRUE(k.has_value());
  EXPECT_EQ(k->relation, "Q18_tmp");
  EXPECT_EQ(k->key, std::vector<std::string>{"o_key"});
  auto singleton = infer_view_key(parse_program("S(sum(x) as s) :- T(x).\n").rules[0]);
  ASSERT_TRUE(singleton.has_value());
  EXPECT_TRUE(singleton->key.empty());
  EXPECT_FALSE(infer_view_key(parse_program("S(x) :- T(x).\n").rules[0]).has_value());
}

}  // namespace
}  // namespace provex
