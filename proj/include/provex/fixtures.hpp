#pragma once

#include <string>
#include <vector>

#include "provex/relation.hpp"

namespace provex::fixtures {

/// Customers, Orders and Lineitem with the two orders of the running example.
Database orders_example();
/// orders_example with an extra o_totalprice column on Orders that the result does not project.
Database orders_with_totalprice();
/// T1..T6 singleton tables with the declared dependency D -> E on T4.
Database singleton_chain();

/// Two-step Q18: per-order quantity view, then large orders per customer.
extern const char* const kQ18;
extern const char* const kSingletonChain;

struct Fixture {
  std::string name;
  Database db;
  std::string program;
  bool prunable = false;  // O1 retains fewer atoms than W somewhere in the program
};

/// Q18 (both schemas), the T1..T6 query and eight synthetic programs.
std::vector<Fixture> corpus();

}  // namespace provex::fixtures
