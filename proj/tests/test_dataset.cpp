#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "provex/dataset.hpp"
#include "provex/fixtures.hpp"

namespace provex {
namespace {

namespace fs = std::filesystem;

TEST(Catalog, ParsesKeysAndFds) {
  Catalog c = parse_catalog(
      "# comment\n"
      "\n"
      "Lineitem; o_key:text, linenum:text, qty:int; key: o_key, linenum\n"
      "T4; D:int, E:int; fd: D -> E\n");
  ASSERT_EQ(c.size(), 2u);
  const auto& l = c.at("Lineitem");
  EXPECT_EQ(l.attribute_names(), (std::vector<std::string>{"o_key", "linenum", "qty"}));
  EXPECT_EQ(l.attributes[2].kind, Kind::Int);
  EXPECT_EQ(*l.key, (std::vector<std::string>{"o_key", "linenum"}));
  EXPECT_EQ(c.at("T4").fds, (std::vector<DeclaredFd>{{{"D"}, "E"}}));
  EXPECT_FALSE(c.at("T4").key.has_value());
}

TEST(Catalog, FormatRoundTrips) {
  Catalog c = fixtures::singleton_chain().catalog;
  EXPECT_EQ(parse_catalog(format_catalog(c)).size(), c.size());
  for (const auto& [name, e] : parse_catalog(format_catalog(c))) {
    EXPECT_EQ(e.attributes, c.at(name).attributes);
    EXPECT_EQ(e.key, c.at(name).key);
    EXPECT_EQ(e.fds, c.at(name).fds);
  }
}

TEST(Catalog, Errors) {
  EXPECT_THROW(parse_catalog("T\n"), DataError);
  EXPECT_THROW(parse_catalog("T; a\n"), DataError);
  EXPECT_THROW(parse_catalog("T; a:blob\n"), DataError);
  EXPECT_THROW(parse_catalog("T; a:int; fd: a b\n"), DataError);
  EXPECT_THROW(parse_catalog("T; a:int; key: b\n"), DataError);
  EXPECT_THROW(parse_catalog("T; a:int; wat: a\n"), DataError);
  EXPECT_THROW(parse_catalog("T; a:int\nT; b:int\n"), DataError);
  try {
    parse_catalog("T; a:int\nU; b\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Csv, QuotedFields) {
  auto rows = parse_csv("a,b\n\"x,y\",\"say \"\"hi\"\"\"\n3,\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1], (std::vector<std::string>{"x,y", "say \"hi\""}));
  EXPECT_EQ(rows[2], (std::vector<std::string>{"3", ""}));
  EXPECT_THROW(parse_csv("a\n\"open\n"), DataError);
}

TEST(Csv, HeaderInAnyOrder) {
  CatalogEntry e{"T", {{"a", Kind::Int}, {"b", Kind::Text}}, std::nullopt, {}, RelationKind::Base};
  Relation r = parse_relation_csv("b,a\nx,1\ny,2\n", e);
  EXPECT_EQ(r.attributes(), (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(r.contains({Value(1), Value("x")}));
  EXPECT_THROW(parse_relation_csv("a\n1\n", e), DataError);
  EXPECT_THROW(parse_relation_csv("a,c\n1,x\n", e), DataError);
  EXPECT_THROW(parse_relation_csv("a,b\nq,x\n", e), DataError);
  EXPECT_THROW(parse_relation_csv("a,b\n1\n", e), DataError);
  EXPECT_THROW(parse_relation_csv("", e), DataError);
}

TEST(Csv, FormatRoundTrips) {
  CatalogEntry e{"T", {{"a", Kind::Text}, {"b", Kind::Decimal}}, std::nullopt, {}, RelationKind::Base};
  Relation r(e.attribute_names());
  r.insert({Value("x,\"y\""), Value(Decimal{1'250'000})});
  EXPECT_EQ(parse_relation_csv(format_relation_csv(r), e), r);
}

TEST(Database, MakeValidates) {
  EXPECT_EQ(make_database("T; a:int; key: a\n", {{"T", "a\n1\n1\n"}}).relation("T").size(), 1u);
  EXPECT_NO_THROW(make_database("T; a:int, b:int; key: a\n", {{"T", "a,b\n1,1\n2,1\n"}}));
  EXPECT_THROW(make_database("T; a:int, b:int; key: a\n", {{"T", "a,b\n1,1\n1,2\n"}}), DataError);
  EXPECT_THROW(make_database("T; a:int\n", {}), DataError);
  EXPECT_THROW(make_database("T; a:int\n", {{"T", "a\n1\n"}, {"U", "a\n1\n"}}), DataError);
}

TEST(Database, SaveAndLoad) {
  fs::path dir = fs::temp_directory_path() / "provex_dataset_test";
  fs::remove_all(dir);
  Database db = fixtures::orders_with_totalprice();
  save_dataset(db, dir);
  EXPECT_TRUE(fs::exists(dir / kCatalogFile));
  Database back = load_dataset(dir);
  for (const auto& [name, rel] : db.relations) EXPECT_EQ(back.relation(name), *rel) << name;
  fs::remove_all(dir);
  EXPECT_THROW(load_dataset(dir), DataError);
}

}  // namespace
}  // namespace provex
