#include "provex/fixtures.hpp"

#include "provex/dataset.hpp"

namespace provex::fixtures {

const char* const kQ18 =
    "Q18_tmp(o_key, sum(qty) as t_sum_qty) :- Lineitem@2.\n"
    "R(c_name, c_key, o_key, o_date, sum(qty) as total_qty) :- Customers, Orders, Lineitem@1, Q18_tmp,\n"
    "    t_sum_qty > 300.\n";

const char* const kSingletonChain = "R(A, C) :- T1(A, B, C, D), T2(B), T3(C, Z), T4(D, E), T5(E, Y), T6(A).\n";

namespace {

const char* const kCustomersCsv = "c_key,c_name,c_address\nc1,n1,a1\n";
const char* const kLineitemCsv = "o_key,linenum,qty\no1,l1,200\no1,l2,150\no2,l1,100\no2,l2,160\n";

}  // namespace

Database orders_example() {
  return make_database(
      "Customers; c_key:text, c_name:text, c_address:text; key: c_key\n"
      "Orders; o_key:text, c_key:text, o_date:text; key: o_key\n"
      "Lineitem; o_key:text, linenum:text, qty:int; key: o_key, linenum\n",
      {{"Customers", kCustomersCsv},
       {"Orders", "o_key,c_key,o_date\no1,c1,d1\no2,c1,d2\n"},
       {"Lineitem", kLineitemCsv}});
}

Database orders_with_totalprice() {
  return make_database(
      "Customers; c_key:text, c_name:text, c_address:text; key: c_key\n"
      "Orders; o_key:text, c_key:text, o_date:text, o_totalprice:decimal; key: o_key\n"
      "Lineitem; o_key:text, linenum:text, qty:int; key: o_key, linenum\n",
      {{"Customers", kCustomersCsv},
       {"Orders", "o_key,c_key,o_date,o_totalprice\no1,c1,d1,1070.50\no2,c1,d2,545.25\n"},
       {"Lineitem", kLineitemCsv}});
}

Database singleton_chain() {
  return make_database(
      "T1; A:int, B:int, C:int, D:int\n"
      "T2; B:int\n"
      "T3; C:int, Z:int\n"
      "T4; D:int, E:int; fd: D -> E\n"
      "T5; E:int, Y:int\n"
      "T6; A:int\n",
      {{"T1", "A,B,C,D\n1,2,3,4\n"},
       {"T2", "B\n2\n"},
       {"T3", "C,Z\n3,5\n"},
       {"T4", "D,E\n4,6\n"},
       {"T5", "E,Y\n6,7\n"},
       {"T6", "A\n1\n"}});
}

std::vector<Fixture> corpus() {
  std::vector<Fixture> out;
  out.push_back({"q18", orders_example(), kQ18, true});
  out.push_back({"q18_totalprice", orders_with_totalprice(), kQ18, true});
  out.push_back({"singleton_chain", singleton_chain(), kSingletonChain, true});

  out.push_back({"all_columns_in_result",
                 make_database("Emp; e:int, d:int, s:int; key: e\nDept; d:int, m:text; key: d\n",
                               {{"Emp", "e,d,s\n1,10,100\n2,10,120\n3,20,90\n"},
                                {"Dept", "d,m\n10,ann\n20,bob\n30,cy\n"}}),
                 "R(e, d, s, m) :- Emp, Dept.\n", true});

  out.push_back({"key_in_result",
                 make_database("Big; k:int, v1:int, j:int; key: k\nSmall; j:int, v2:text; key: j\n",
                               {{"Big", "k,v1,j\n1,5,7\n2,6,7\n3,6,8\n4,9,9\n"},
                                {"Small", "j,v2\n7,x\n8,y\n"}}),
                 "R(k, v2) :- Big, Small.\n", true});

  out.push_back({"predicate_through_view",
                 make_database("Items; id:int, g:int, v:int; key: id\nGroups; g:int, name:text; key: g\n",
                               {{"Items", "id,g,v\n1,1,4\n2,1,9\n3,2,3\n4,3,20\n5,3,1\n"},
                                {"Groups", "g,name\n1,red\n2,green\n3,blue\n"}}),
                 "Agg(g, sum(v) as total) :- Items.\n"
                 "R(g, name) :- Groups, Agg, total > 10.\n",
                 true});

  out.push_back({"keyless_chain",
                 make_database("S; a:int, b:int\nT; b:int, c:int\nU; c:int\n",
                               {{"S", "a,b\n1,1\n1,2\n2,3\n"},
                                {"T", "b,c\n1,5\n2,6\n3,7\n2,5\n"},
                                {"U", "c\n5\n6\n"}}),
                 "R(a) :- S, T, U.\n", false});

  out.push_back({"three_levels",
                 make_database("Fact; id:int, g:int, h:int, x:int; key: id\n"
                               "Dim; h:int, w:int; key: h\n"
                               "Tag; g:int, label:text; key: g\n",
                               {{"Fact", "id,g,h,x\n1,1,1,5\n2,1,2,7\n3,2,1,1\n4,2,3,4\n5,1,1,2\n"},
                                {"Dim", "h,w\n1,3\n2,0\n3,8\n"},
                                {"Tag", "g,label\n1,one\n2,two\n"}}),
                 "L1(g, h, sum(x) as sx) :- Fact.\n"
                 "L2(g, sum(sx) as tot) :- L1, Dim, w > 0.\n"
                 "R(g, tot, label) :- L2, Tag.\n",
                 true});

  out.push_back({"self_join",
                 make_database("Edge; src:int, dst:int\n",
                               {{"Edge", "src,dst\n1,2\n2,3\n3,4\n2,4\n4,1\n"}}),
                 "R(a, c) :- Edge@1(src as a, dst as b), Edge@2(src as b, dst as c).\n", false});

  out.push_back({"equality_predicate",
                 make_database("S; a:int, b:int\nT; b2:int, y:int\n",
                               {{"S", "a,b\n1,1\n1,2\n2,2\n3,4\n"},
                                {"T", "b2,y\n1,0\n2,0\n2,1\n3,3\n"}}),
                 "R(a, b2) :- S, T, b = b2.\n", true});

  out.push_back({"predicate_forces_atom",
                 make_database("S; a:int, b:int, c:int\nT; c2:int, d:int\n",
                               {{"S", "a,b,c\n1,1,1\n2,1,5\n3,2,9\n"},
                                {"T", "c2,d\n2,0\n6,1\n"}}),
                 "R(a, b) :- S, T, c < c2.\n", false});
  return out;
}

}  // namespace provex::fixtures
