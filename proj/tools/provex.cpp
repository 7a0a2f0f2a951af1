#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "provex/bench.hpp"
#include "provex/dataset.hpp"
#include "provex/explorer.hpp"
#include "provex/fixtures.hpp"
#include "provex/service.hpp"

using namespace provex;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::size_t> parse_scale(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(std::stoul(part));
  if (out.size() != 3) throw std::invalid_argument("--scale expects customers,orders,lineitems");
  return out;
}

std::vector<Strategy> parse_strategies(const std::string& text) {
  std::vector<Strategy> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(parse_strategy(part));
  return out;
}

PlanMode parse_plan_mode(const std::string& s) {
  if (s == "auto") return PlanMode::Auto;
  if (s == "none") return PlanMode::None;
  if (s == "explicit") return PlanMode::Explicit;
  throw std::invalid_argument("--plan-mode must be auto, none or explicit");
}

void print_relation(const Relation& rel) {
  std::cout << format_relation_csv(rel);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Provenance exploration over rule programs"};
  app.require_subcommand(1);

  auto* bench = app.add_subcommand("bench", "Time W, O1, G and O2 on generated or loaded data");
  std::string bench_data, bench_scale = "100,400,1600", bench_strategies = "W,O1,G,O2", bench_out;
  std::vector<std::string> bench_programs;
  std::uint64_t bench_seed = 7;
  std::size_t bench_reps = 3, bench_rows = 1;
  bench->add_option("--data", bench_data, "Dataset directory (default: generate)");
  bench->add_option("--scale", bench_scale, "customers,orders,lineitems for generated data");
  bench->add_option("--seed", bench_seed);
  bench->add_option("--strategies", bench_strategies);
  bench->add_option("--reps", bench_reps)->check(CLI::PositiveNumber);
  bench->add_option("--select", bench_rows, "Number of leading result rows to select")->check(CLI::PositiveNumber);
  bench->add_option("--program", bench_programs, "Program files (default: the Q18 program)");
  bench->add_option("--out", bench_out, "Report path; .json writes JSON, anything else CSV");

  auto* run = app.add_subcommand("run", "Print the provenance of one occurrence");
  std::string run_program, run_data, run_table, run_strategy = "O1", run_mode = "auto";
  std::vector<std::string> run_select, run_plan;
  run->add_option("--program", run_program)->required();
  run->add_option("--data", run_data)->required();
  run->add_option("--select", run_select, "Comma-separated result row; repeatable")->required();
  run->add_option("--table", run_table, "Occurrence name")->required();
  run->add_option("--strategy", run_strategy);
  run->add_option("--plan-mode", run_mode);
  run->add_option("--plan", run_plan, "Occurrences to materialize with --plan-mode explicit");

  auto* plan = app.add_subcommand("plan", "Print the selected materialization plan as JSON");
  std::string plan_program, plan_data;
  bool plan_estimate = false;
  plan->add_option("--program", plan_program)->required();
  plan->add_option("--data", plan_data)->required();
  plan->add_flag("--estimate", plan_estimate, "Estimate RK sizes instead of materializing candidates");

  auto* serve = app.add_subcommand("serve", "Run the HTTP exploration service");
  std::string serve_listen, serve_data;
  int serve_idle = 30;
  serve->add_option("--listen", serve_listen, "host:port (default PROVEX_LISTEN or 127.0.0.1:8080)");
  serve->add_option("--data", serve_data, "Dataset directory preloaded as dataset 'default'");
  serve->add_option("--idle-minutes", serve_idle)->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen", "Write a generated dataset directory");
  std::string gen_scale = "100,400,1600", gen_out;
  std::uint64_t gen_seed = 7;
  gen->add_option("--scale", gen_scale);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench) {
      Database db;
      if (bench_data.empty()) {
        auto s = parse_scale(bench_scale);
        db = gen_minitpch(s[0], s[1], s[2], bench_seed);
      } else {
        db = load_dataset(bench_data);
      }
      std::vector<BenchQuery> queries;
      if (bench_programs.empty()) queries.push_back({"Q18", fixtures::kQ18});
      for (const auto& f : bench_programs) queries.push_back({f, read_file(f)});
      SuiteOptions opts;
      opts.repetitions = bench_reps;
      opts.selected_rows = bench_rows;
      BenchReport report = run_suite(db, queries, parse_strategies(bench_strategies), opts);
      if (bench_out.empty()) {
        std::cout << report_to_csv(report);
      } else {
        bool json = bench_out.size() > 5 && bench_out.substr(bench_out.size() - 5) == ".json";
        emit_report(report, json ? "json" : "csv", bench_out);
      }
    } else if (*run) {
      Database db = load_dataset(run_data);
      Program program = parse_program(read_file(run_program), db.catalog);
      ExplorerConfig cfg;
      cfg.strategy = parse_strategy(run_strategy);
      cfg.plan_mode = parse_plan_mode(run_mode);
      for (const auto& name : run_plan) cfg.plan.insert(program.find_occurrence(name));
      Explorer ex(program, db, cfg);
      const CatalogEntry& head = ex.evaluated().entry(ex.program().result().head);
      Relation sel(ex.result().attributes());
      for (const auto& text : run_select) {
        std::vector<std::string> fields;
        auto rows = parse_csv(text);
        if (!rows.empty()) fields = rows.front();
        sel.insert(parse_row(fields, head.attributes));
      }
      check_selection(sel, ex.result(), head.name);
      auto res = ex.provenance(ex.program().find_occurrence(run_table), sel);
      print_relation(res.rows);
      std::cerr << "strategy=" << strategy_name(cfg.strategy) << " join_count=" << res.stats.join_count
                << " retained_atoms=" << res.stats.retained_atoms << " elapsed_us=" << res.stats.elapsed_us;
      if (res.stats.hybrid_case) std::cerr << " case=" << res.stats.hybrid_case;
      std::cerr << "\n";
    } else if (*plan) {
      Database db = load_dataset(plan_data);
      ExplorerConfig cfg;
      cfg.strategy = Strategy::O2;
      cfg.plan_options.estimate = plan_estimate;
      Explorer ex(parse_program(read_file(plan_program), db.catalog), db, cfg);
      std::cout << plan_to_json(ex, db.catalog).dump(2) << "\n";
    } else if (*serve) {
      ServiceOptions opts;
      opts.idle_timeout = std::chrono::minutes(serve_idle);
      ExploreService service(opts);
      if (!serve_data.empty()) service.add_dataset("default", load_dataset(serve_data));
      HttpFrontend http(service);
      std::string listen = resolve_listen(serve_listen);
      int port = http.bind(listen);
      std::cerr << "listening on " << listen.substr(0, listen.rfind(':')) << ":" << port << "\n";
      http.run();
    } else if (*gen) {
      auto s = parse_scale(gen_scale);
      save_dataset(gen_minitpch(s[0], s[1], s[2], gen_seed), gen_out);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error at " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
