#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "provex/fixtures.hpp"
#include "provex/service.hpp"

namespace provex {
namespace {

using nlohmann::json;

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override { svc.add_dataset("t1", fixtures::orders_with_totalprice()); }

  std::string open(const std::string& strategy = "O2") {
    Response r = svc.create_session({{"dataset", "t1"}, {"program", fixtures::kQ18}, {"strategy", strategy}});
    EXPECT_EQ(r.status, 201) << r.body.dump();
    return r.body.at("session").get<std::string>();
  }

  ExploreService svc;
};

TEST_F(ServiceTest, SessionReturnsResultAndPlan) {
  Response r = svc.create_session({{"dataset", "t1"}, {"program", fixtures::kQ18}, {"strategy", "O2"}});
  ASSERT_EQ(r.status, 201) << r.body.dump();
  EXPECT_EQ(r.body["attributes"], json::parse(R"(["c_name","c_key","o_key","o_date","total_qty"])"));
  EXPECT_EQ(r.body["rows"], json::parse(R"([["n1","c1","o1","d1",350]])"));
  EXPECT_EQ(r.body["plan"]["chosen"], json::parse(R"(["Q18_tmp.Lineitem2"])"));
  EXPECT_EQ(r.body["strategy"], "O2");
  EXPECT_TRUE(r.body.contains("elapsed_us"));
}

TEST_F(ServiceTest, SelectionAndProvenance) {
  std::string s = open();
  Response sel = svc.select_rows(s, {{"rows", json::parse(R"([["n1","c1","o1","d1",350]])")}});
  ASSERT_EQ(sel.status, 200) << sel.body.dump();

  Response c = svc.get_provenance(s, "Customers");
  ASSERT_EQ(c.status, 200) << c.body.dump();
  EXPECT_EQ(c.body["attributes"], json::parse(R"(["c_key","c_name","c_address"])"));
  EXPECT_EQ(c.body["rows"], json::parse(R"([["c1","n1","a1"]])"));
  EXPECT_EQ(c.body["stats"]["join_count"], 1);

  Response l2 = svc.get_provenance(s, "Q18_tmp.Lineitem2");
  ASSERT_EQ(l2.status, 200) << l2.body.dump();
  EXPECT_EQ(l2.body["stats"]["case"], 1);
  EXPECT_EQ(l2.body["rows"], json::parse(R"([["o1","l1",200],["o1","l2",150]])"));

  Response v = svc.get_provenance(s, "Q18_tmp");
  ASSERT_EQ(v.status, 200) << v.body.dump();
  EXPECT_EQ(v.body["rows"], json::parse(R"([["o1",350]])"));

  Response again = svc.get_provenance(s, "Customers");
  EXPECT_EQ(again.body["rows"], c.body["rows"]);
}

TEST_F(ServiceTest, EveryStrategyAgrees) {
  json expected;
  for (const char* st : {"W", "O1", "G", "O2"}) {
    std::string s = open(st);
    ASSERT_EQ(svc.select_rows(s, json::parse(R"([["n1","c1","o1","d1",350]])")).status, 200);
    Response p = svc.get_provenance(s, "R.Lineitem1");
    ASSERT_EQ(p.status, 200) << st << p.body.dump();
    if (expected.is_null()) expected = p.body["rows"];
    EXPECT_EQ(p.body["rows"], expected) << st;
    EXPECT_EQ(p.body["strategy"], st);
  }
}

TEST_F(ServiceTest, Occurrences) {
  std::string s = open();
  Response r = svc.list_occurrences(s);
  ASSERT_EQ(r.status, 200);
  const json& occ = r.body["occurrences"];
  ASSERT_EQ(occ.size(), 5u) << r.body.dump();
  bool found = false;
  for (const auto& o : occ)
    if (o["occurrence"] == "Q18_tmp.Lineitem2") {
      found = true;
      EXPECT_EQ(o["key_covered"], true);
      EXPECT_EQ(o["relation"], "Lineitem");
      EXPECT_EQ(o["alias"], "2");
    }
  EXPECT_TRUE(found);
  Response plan = svc.get_plan(s);
  EXPECT_EQ(plan.status, 200);
  EXPECT_EQ(plan.body["plan"]["chosen"], json::parse(R"(["Q18_tmp.Lineitem2"])")) << plan.body.dump();
}

TEST_F(ServiceTest, Errors) {
  std::string s = open();
  Response before = svc.get_provenance(s, "Customers");
  EXPECT_EQ(before.status, 409);
  EXPECT_EQ(before.body["code"], "no_selection");

  Response bad_row = svc.select_rows(s, json::parse(R"([["n9","c1","o1","d1",350]])"));
  EXPECT_EQ(bad_row.status, 422);
  EXPECT_EQ(bad_row.body["code"], "row_not_in_result");
  EXPECT_EQ(svc.select_rows(s, json::parse(R"([["n1"]])")).status, 400);

  ASSERT_EQ(svc.select_rows(s, json::array()).status, 200);
  Response empty = svc.get_provenance(s, "Customers");
  EXPECT_EQ(empty.status, 200);
  EXPECT_TRUE(empty.body["rows"].empty());

  EXPECT_EQ(svc.get_provenance(s, "Nope").status, 404);
  EXPECT_EQ(svc.get_provenance(s, "Nope").body["code"], "unknown_occurrence");
  EXPECT_EQ(svc.get_provenance("missing", "Customers").body["code"], "unknown_session");
  EXPECT_EQ(svc.create_session({{"dataset", "zzz"}, {"program", fixtures::kQ18}}).body["code"], "unknown_dataset");

  Response parse = svc.create_session({{"dataset", "t1"}, {"program", "R(a) :- Customers\nR(b) :- ,"}});
  EXPECT_EQ(parse.status, 400);
  EXPECT_EQ(parse.body["code"], "parse_error");
  EXPECT_EQ(parse.body["detail"]["line"], 2);

  Response invalid = svc.create_session({{"dataset", "t1"}, {"program", "R(zz) :- Customers."}});
  EXPECT_EQ(invalid.status, 400);
  EXPECT_EQ(invalid.body["code"], "validation_error");
  EXPECT_EQ(svc.create_session({{"dataset", "t1"}, {"program", fixtures::kQ18}, {"strategy", "X"}}).status, 400);
}

TEST_F(ServiceTest, GeneratedAndUploadedDatasets) {
  Response g = svc.create_dataset(json{{"generate", {{"customers", 5}, {"orders", 10}, {"lineitems", 40}, {"seed", 1}}}});
  ASSERT_EQ(g.status, 201) << g.body.dump();
  std::string id = g.body["dataset"];
  Response s = svc.create_session({{"dataset", id}, {"program", fixtures::kQ18}, {"strategy", "G"}});
  EXPECT_EQ(s.status, 201) << s.body.dump();

  Response up = svc.create_dataset("T; a:int, b:text; key: a\n", {{"T", "a,b\n1,x\n2,y\n"}});
  ASSERT_EQ(up.status, 201) << up.body.dump();
  Response bad = svc.create_dataset("T; a:int; key: a\n", {{"T", "a\n1\n1\nq\n"}});
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(bad.body["code"], "invalid_dataset");
}

TEST(ServiceEviction, IdleSessionsAreDropped) {
  ExploreService svc(ServiceOptions{std::chrono::seconds(1)});
  svc.add_dataset("t1", fixtures::orders_example());
  Response a = svc.create_session({{"dataset", "t1"}, {"program", fixtures::kQ18}});
  ASSERT_EQ(a.status, 201);
  std::this_thread::sleep_for(std::chrono::milliseconds(1100));
  Response b = svc.create_session({{"dataset", "t1"}, {"program", fixtures::kQ18}});
  EXPECT_EQ(svc.session_count(), 1u);
  EXPECT_EQ(svc.list_occurrences(b.body["session"]).status, 200);
  EXPECT_EQ(svc.list_occurrences(a.body["session"]).status, 404);
}

TEST(Http, RoundTrip) {
  ExploreService svc;
  HttpFrontend http(svc);
  int port = http.bind("127.0.0.1:0");
  ASSERT_GT(port, 0);
  std::thread server([&] { http.run(); });

  httplib::Client cli("127.0.0.1", port);
  httplib::MultipartFormDataItems form = {
      {"catalog", "Customers; c_key:text, c_name:text, c_address:text; key: c_key\n", "", ""},
      {"Customers", "c_key,c_name,c_address\nc1,n1,a1\nc2,n2,a2\n", "Customers.csv", "text/csv"},
  };
  auto ds = cli.Post("/datasets", form);
  ASSERT_TRUE(ds);
  ASSERT_EQ(ds->status, 201) << ds->body;
  std::string dataset = json::parse(ds->body)["dataset"];

  json req = {{"dataset", dataset}, {"program", "R(c_name) :- Customers."}, {"strategy", "O1"}};
  auto sess = cli.Post("/sessions", req.dump(), "application/json");
  ASSERT_TRUE(sess);
  ASSERT_EQ(sess->status, 201) << sess->body;
  std::string id = json::parse(sess->body)["session"];

  auto sel = cli.Post("/sessions/" + id + "/selection", R"({"rows":[["n2"]]})", "application/json");
  ASSERT_TRUE(sel);
  EXPECT_EQ(sel->status, 200) << sel->body;
  auto prov = cli.Get("/sessions/" + id + "/provenance/Customers");
  ASSERT_TRUE(prov);
  EXPECT_EQ(prov->status, 200);
  EXPECT_EQ(json::parse(prov->body)["rows"], json::parse(R"([["c2","n2","a2"]])"));
  EXPECT_EQ(prov->get_header_value("Access-Control-Allow-Origin"), "*");

  auto occ = cli.Get("/sessions/" + id + "/occurrences");
  ASSERT_TRUE(occ);
  EXPECT_EQ(occ->status, 200);
  auto missing = cli.Get("/sessions/nope/plan");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  auto junk = cli.Post("/sessions", "{not json", "application/json");
  ASSERT_TRUE(junk);
  EXPECT_EQ(junk->status, 400);

  http.stop();
  server.join();
}

TEST(Listen, Resolution) {
  EXPECT_EQ(resolve_listen("0.0.0.0:1"), "0.0.0.0:1");
  unsetenv("PROVEX_LISTEN");
  EXPECT_EQ(resolve_listen(""), "127.0.0.1:8080");
  setenv("PROVEX_LISTEN", "127.0.0.1:9", 1);
  EXPECT_EQ(resolve_listen(""), "127.0.0.1:9");
  unsetenv("PROVEX_LISTEN");
}

}  // namespace
}  // namespace provex
