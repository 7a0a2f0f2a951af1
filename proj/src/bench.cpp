#include "provex/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "provex/explorer.hpp"

namespace provex {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

std::string iso_date(std::mt19937_64& rng) {
  int y = std::uniform_int_distribution<int>(1992, 1998)(rng);
  int m = std::uniform_int_distribution<int>(1, 12)(rng);
  int d = std::uniform_int_distribution<int>(1, 28)(rng);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return buf;
}

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::fixed << v;
  return os.str();
}

}  // namespace

Database gen_minitpch(std::size_t customers, std::size_t orders, std::size_t lineitems, std::uint64_t seed) {
  if (customers == 0 || orders == 0 || lineitems == 0) throw std::invalid_argument("row counts must be at least 1");
  std::mt19937_64 rng(seed);
  Database db;

  CatalogEntry c{"Customers", {{"c_key", Kind::Text}, {"c_name", Kind::Text}, {"c_address", Kind::Text}},
                 std::vector<std::string>{"c_key"}, {}, RelationKind::Base};
  Relation cr(c.attribute_names());
  for (std::size_t i = 1; i <= customers; ++i) {
    auto n = std::to_string(i);
    cr.insert({Value("c" + n), Value("n" + n), Value("a" + n)});
  }

  CatalogEntry o{"Orders",
                 {{"o_key", Kind::Text}, {"c_key", Kind::Text}, {"o_date", Kind::Date}, {"o_totalprice", Kind::Decimal}},
                 std::vector<std::string>{"o_key"}, {}, RelationKind::Base};
  Relation orl(o.attribute_names());
  std::uniform_int_distribution<std::size_t> pick_customer(1, customers);
  for (std::size_t i = 1; i <= orders; ++i) {
    auto cents = std::uniform_int_distribution<std::int64_t>(100'00, 500'000'00)(rng);
    orl.insert({Value("o" + std::to_string(i)), Value("c" + std::to_string(pick_customer(rng))), Value(Date{iso_date(rng)}),
                Value(Decimal{cents * 10'000})});
  }

  CatalogEntry l{"Lineitem", {{"o_key", Kind::Text}, {"linenum", Kind::Text}, {"qty", Kind::Int}},
                 std::vector<std::string>{"o_key", "linenum"}, {}, RelationKind::Base};
  Relation lr(l.attribute_names());
  // Even split across orders; the remainder goes to random orders.
  std::vector<std::size_t> lines(orders, lineitems / orders);
  std::uniform_int_distribution<std::size_t> pick_order(0, orders - 1);
  for (std::size_t r = 0; r < lineitems % orders; ++r) ++lines[pick_order(rng)];
  std::uniform_int_distribution<std::int64_t> qty(1, 200);
  for (std::size_t i = 0; i < orders; ++i)
    for (std::size_t k = 1; k <= lines[i]; ++k)
      lr.insert({Value("o" + std::to_string(i + 1)), Value("l" + std::to_string(k)), Value(qty(rng))});

  db.put(std::move(c), std::move(cr));
  db.put(std::move(o), std::move(orl));
  db.put(std::move(l), std::move(lr));
  return db;
}

double BenchCell::ap_us() const {
  if (occurrences.empty()) return 0;
  double sum = 0;
  for (const auto& o : occurrences) sum += o.prov_us;
  return sum / static_cast<double>(occurrences.size());
}

double BenchCell::mp_us() const {
  if (occurrences.empty()) return 0;
  double m = occurrences.front().prov_us;
  for (const auto& o : occurrences) m = std::min(m, o.prov_us);
  return m;
}

BenchReport run_suite(const Database& db, const std::vector<BenchQuery>& queries, const std::vector<Strategy>& strategies,
                      const SuiteOptions& options) {
  if (options.repetitions == 0) throw std::invalid_argument("repetitions must be at least 1");
  BenchReport report;
  for (const auto& q : queries) {
    Program program = parse_program(q.program, db.catalog);
    for (Strategy st : strategies) {
      BenchCell cell;
      cell.query = q.name;
      cell.strategy = std::string(strategy_name(st));
      std::vector<double> oq;
      std::map<OccurrenceId, std::vector<double>> prov;
      for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
        ExplorerConfig cfg;
        cfg.strategy = st;
        Explorer ex(program, db, cfg);
        oq.push_back(ex.original_query_us());
        const Relation& result = ex.result();
        Relation sel(result.attributes());
        for (const auto& row : result.rows()) {
          if (sel.size() >= options.selected_rows) break;
          sel.insert(row);
        }
        if (rep == 0) {
          cell.rows_R = result.size();
          if (ex.rk()) cell.rows_RK = ex.rk()->size();
          if (ex.eager()) cell.rows_RK = ex.eager()->store.size();
        }
        for (auto id : program.base_occurrences()) {
          auto res = ex.provenance(id, sel);
          prov[id].push_back(res.stats.elapsed_us);
          if (rep != 0) continue;
          Relation expected = oracle_provenance(program, id, sel, ex.evaluated());
          if (res.rows != expected)
            throw OracleMismatch(q.name + "/" + cell.strategy + ": provenance of " + program.qualified_name(id) +
                                 " differs from the reference (" + std::to_string(res.rows.size()) + " rows vs " +
                                 std::to_string(expected.size()) + ")");
          cell.occurrences.push_back({program.qualified_name(id), 0, res.stats.join_count, res.rows.size()});
        }
      }
      cell.oq_us = median(oq);
      std::size_t i = 0;
      for (auto id : program.base_occurrences()) cell.occurrences[i++].prov_us = median(prov[id]);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

std::string report_to_csv(const BenchReport& report) {
  std::ostringstream os;
  os << "query,strategy,metric,occurrence,value\n";
  for (const auto& c : report.cells) {
    auto line = [&](const char* metric, const std::string& occ, const std::string& value) {
      os << c.query << "," << c.strategy << "," << metric << "," << occ << "," << value << "\n";
    };
    line("oq_us", "", format_value(c.oq_us));
    line("ap_us", "", format_value(c.ap_us()));
    line("mp_us", "", format_value(c.mp_us()));
    line("rows_R", "", std::to_string(c.rows_R));
    line("rows_RK", "", std::to_string(c.rows_RK));
    for (const auto& o : c.occurrences) {
      line("prov_us", o.occurrence, format_value(o.prov_us));
      line("join_count", o.occurrence, std::to_string(o.join_count));
      line("rows", o.occurrence, std::to_string(o.rows));
    }
  }
  return os.str();
}

std::string report_to_json(const BenchReport& report) {
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& c : report.cells) {
    nlohmann::ordered_json occs = nlohmann::ordered_json::array();
    for (const auto& o : c.occurrences)
      occs.push_back({{"occurrence", o.occurrence}, {"prov_us", o.prov_us}, {"join_count", o.join_count}, {"rows", o.rows}});
    cells.push_back({{"query", c.query},
                     {"strategy", c.strategy},
                     {"oq_us", c.oq_us},
                     {"ap_us", c.ap_us()},
                     {"mp_us", c.mp_us()},
                     {"rows_R", c.rows_R},
                     {"rows_RK", c.rows_RK},
                     {"occurrences", occs}});
  }
  return nlohmann::ordered_json{{"cells", cells}}.dump(2);
}

BenchReport report_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  BenchReport r;
  for (const auto& c : j.at("cells")) {
    BenchCell cell;
    cell.query = c.at("query").get<std::string>();
    cell.strategy = c.at("strategy").get<std::string>();
    cell.oq_us = c.at("oq_us").get<double>();
    cell.rows_R = c.at("rows_R").get<std::size_t>();
    cell.rows_RK = c.at("rows_RK").get<std::size_t>();
    for (const auto& o : c.at("occurrences"))
      cell.occurrences.push_back({o.at("occurrence").get<std::string>(), o.at("prov_us").get<double>(),
                                  o.at("join_count").get<std::size_t>(), o.at("rows").get<std::size_t>()});
    r.cells.push_back(std::move(cell));
  }
  return r;
}

void emit_report(const BenchReport& report, const std::string& format, const std::string& path) {
  std::string body;
  if (format == "csv")
    body = report_to_csv(report);
  else if (format == "json")
    body = report_to_json(report);
  else
    throw std::invalid_argument("unknown report format '" + format + "' (expected csv or json)");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report to " + path);
  out << body;
  if (!out) throw std::runtime_error("cannot write report to " + path);
}

}  // namespace provex
