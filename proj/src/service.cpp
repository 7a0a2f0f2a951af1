#include "provex/service.hpp"

#include <cstdlib>
#include <random>
#include <sstream>

#include <httplib.h>

#include "provex/bench.hpp"
#include "provex/dataset.hpp"

namespace provex {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

Response error(int status, const std::string& code, const std::string& message, Json detail = Json::object()) {
  return {status, Json{{"code", code}, {"message", message}, {"detail", std::move(detail)}}};
}

struct ApiError {
  Response response;
};

[[noreturn]] void fail(int status, const std::string& code, const std::string& message, Json detail = Json::object()) {
  throw ApiError{error(status, code, message, std::move(detail))};
}

template <class F>
Response guarded(const char* strategy_hint, F&& f) {
  auto t0 = Clock::now();
  Response r;
  try {
    r = f();
  } catch (const ApiError& e) {
    r = e.response;
  } catch (const ParseError& e) {
    r = error(400, "parse_error", e.bare_message(), Json{{"line", e.line()}, {"column", e.column()}});
  } catch (const ValidationError& e) {
    r = error(400, "validation_error", e.what());
  } catch (const PlanError& e) {
    r = error(400, "plan_error", e.what());
  } catch (const DataError& e) {
    r = error(400, "invalid_dataset", e.what());
  } catch (const UnknownOccurrence& e) {
    r = error(404, "unknown_occurrence", e.what());
  } catch (const DependencyViolation& e) {
    r = error(422, "row_not_in_result", e.what());
  } catch (const nlohmann::json::exception& e) {
    r = error(400, "bad_request", e.what());
  } catch (const std::invalid_argument& e) {
    r = error(400, "bad_request", e.what());
  }
  r.body["elapsed_us"] = std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
  if (!r.body.contains("strategy")) r.body["strategy"] = strategy_hint ? Json(strategy_hint) : Json(nullptr);
  return r;
}

std::string kind_expected(Kind k) { return std::string(kind_name(k)); }

}  // namespace

Json value_to_json(const Value& v) {
  switch (v.kind()) {
    case Kind::Int:
      return v.as_int();
    default:
      return v.to_string();
  }
}

Value value_from_json(const nlohmann::json& j, Kind kind) {
  if (j.is_string()) return parse_value(j.get<std::string>(), kind);
  if (j.is_number_integer() && kind == Kind::Int) return Value(j.get<std::int64_t>());
  if (j.is_number_integer() && kind == Kind::Decimal) return Value(Decimal::from_int(j.get<std::int64_t>()));
  if (j.is_number_float() && kind == Kind::Decimal) return parse_value(j.dump(), kind);
  throw std::invalid_argument("value " + j.dump() + " is not a " + kind_expected(kind));
}

Json relation_to_json(const Relation& rel) {
  Json rows = Json::array();
  for (const auto& row : rel.rows()) {
    Json r = Json::array();
    for (const auto& v : row) r.push_back(value_to_json(v));
    rows.push_back(std::move(r));
  }
  return Json{{"attributes", rel.attributes()}, {"rows", std::move(rows)}};
}

Json plan_to_json(const Explorer& ex, const Catalog& base) {
  const MaterializationPlan* plan = ex.plan();
  if (!plan) return nullptr;
  const Program& p = ex.program();
  Json chosen = Json::array();
  for (auto id : plan->chosen) chosen.push_back(p.qualified_name(id));
  Json cases = Json::object();
  for (auto id : p.base_occurrences()) cases[p.qualified_name(id)] = plan->retrieval_case(p, id, base);
  Json out{{"chosen", chosen}, {"rk_attributes", plan->rk_attributes}, {"added_columns", plan->added_columns()},
           {"cases", cases}};
  if (ex.rk()) out["rows_RK"] = ex.rk()->size();
  if (const PlanChoice* c = ex.choice()) {
    const PlanScore& s = c->score;
    out["score"] = Json{{"rows_R", s.rows_R},           {"rows_RK", s.rows_RK}, {"joins_without", s.joins_without},
                        {"joins_with", s.joins_with},   {"benefit", s.benefit}, {"cost", s.cost},
                        {"score", s.score}};
    out["candidates"] = c->candidates.size();
  }
  return out;
}

ExploreService::ExploreService(ServiceOptions options) : options_(options), salt_(std::random_device{}()) {}

std::string ExploreService::fresh_id(const char* prefix) {
  std::mt19937_64 rng(salt_ ^ (++counter_ * 0x9e3779b97f4a7c15ULL));
  std::ostringstream os;
  os << prefix << std::hex << rng();
  return os.str();
}

void ExploreService::add_dataset(const std::string& id, Database db) {
  std::lock_guard lock(mutex_);
  datasets_[id] = std::make_shared<const Database>(std::move(db));
}

std::size_t ExploreService::session_count() {
  std::lock_guard lock(mutex_);
  evict_idle();
  return sessions_.size();
}

void ExploreService::evict_idle() {
  auto now = Clock::now();
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::unique_lock lock(it->second->mutex, std::try_to_lock);
    if (lock.owns_lock() && now - it->second->last_used > options_.idle_timeout) {
      lock.unlock();
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

std::shared_ptr<ExploreService::Session> ExploreService::find_session(const std::string& id) {
  std::lock_guard lock(mutex_);
  evict_idle();
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(404, "unknown_session", "no session '" + id + "'");
  return it->second;
}

Response ExploreService::create_dataset(const std::string& catalog,
                                        const std::map<std::string, std::string>& csv_by_relation) {
  return guarded(nullptr, [&] {
    Database db;
    try {
      db = make_database(catalog, csv_by_relation);
    } catch (const std::invalid_argument& e) {
      fail(400, "invalid_dataset", e.what());
    }
    Json relations = Json::object();
    for (const auto& [name, rel] : db.relations) relations[name] = rel->size();
    std::string id;
    {
      std::lock_guard lock(mutex_);
      id = fresh_id("d");
    }
    add_dataset(id, std::move(db));
    return Response{201, Json{{"dataset", id}, {"relations", relations}}};
  });
}

Response ExploreService::create_dataset(const nlohmann::json& body) {
  if (body.contains("generate")) {
    return guarded(nullptr, [&] {
      const auto& g = body.at("generate");
      Database db = gen_minitpch(g.value("customers", 1), g.value("orders", 2), g.value("lineitems", 4),
                                 g.value("seed", std::uint64_t{1}));
      Json relations = Json::object();
      for (const auto& [name, rel] : db.relations) relations[name] = rel->size();
      std::string id;
      {
        std::lock_guard lock(mutex_);
        id = fresh_id("d");
      }
      add_dataset(id, std::move(db));
      return Response{201, Json{{"dataset", id}, {"relations", relations}}};
    });
  }
  std::map<std::string, std::string> csv;
  std::string catalog;
  try {
    catalog = body.at("catalog").get<std::string>();
    for (const auto& [k, v] : body.at("relations").items()) csv[k] = v.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    return guarded(nullptr, [&]() -> Response { fail(400, "bad_request", "expected {catalog, relations}", e.what()); });
  }
  return create_dataset(catalog, csv);
}

Response ExploreService::create_session(const nlohmann::json& body) {
  std::string strategy_text = body.is_object() ? body.value("strategy", std::string("O1")) : "O1";
  return guarded(strategy_text.c_str(), [&] {
    std::string dataset = body.at("dataset").get<std::string>();
    std::shared_ptr<const Database> db;
    {
      std::lock_guard lock(mutex_);
      auto it = datasets_.find(dataset);
      if (it == datasets_.end()) fail(404, "unknown_dataset", "no dataset '" + dataset + "'");
      db = it->second;
    }
    ExplorerConfig cfg;
    cfg.strategy = parse_strategy(strategy_text);
    Program program = parse_program(body.at("program").get<std::string>(), db->catalog);
    std::string mode = body.value("plan_mode", std::string("auto"));
    if (mode == "auto") {
      cfg.plan_mode = PlanMode::Auto;
    } else if (mode == "none") {
      cfg.plan_mode = PlanMode::None;
    } else if (mode == "explicit") {
      cfg.plan_mode = PlanMode::Explicit;
      for (const auto& name : body.value("plan", std::vector<std::string>{})) cfg.plan.insert(program.find_occurrence(name));
    } else {
      fail(400, "bad_request", "plan_mode must be auto, none or explicit");
    }
    auto s = std::make_shared<Session>();
    s->dataset = dataset;
    s->db = db;
    s->explorer = std::make_unique<Explorer>(std::move(program), *db, cfg);
    s->last_used = Clock::now();
    const Explorer& ex = *s->explorer;
    Json occs = Json::array();
    for (auto id : ex.program().occurrences()) occs.push_back(ex.program().qualified_name(id));
    Json out = relation_to_json(ex.result());
    std::string id;
    {
      std::lock_guard lock(mutex_);
      evict_idle();
      id = fresh_id("s");
      sessions_[id] = s;
    }
    out["session"] = id;
    out["occurrences"] = occs;
    out["strategy"] = std::string(strategy_name(cfg.strategy));
    out["oq_us"] = ex.original_query_us();
    out["plan"] = plan_to_json(ex, db->catalog);
    return Response{201, out};
  });
}

Response ExploreService::select_rows(const std::string& session, const nlohmann::json& body) {
  return guarded(nullptr, [&] {
    auto s = find_session(session);
    std::lock_guard lock(s->mutex);
    s->last_used = Clock::now();
    const Explorer& ex = *s->explorer;
    const Relation& result = ex.result();
    const CatalogEntry& head = ex.evaluated().entry(ex.program().result().head);
    Relation sel(result.attributes());
    const auto& rows = body.is_array() ? body : body.at("rows");
    for (const auto& jr : rows) {
      if (!jr.is_array() || jr.size() != head.attributes.size())
        fail(400, "bad_request", "each row needs " + std::to_string(head.attributes.size()) + " values",
             Json{{"row", jr}});
      Row row;
      for (std::size_t i = 0; i < jr.size(); ++i) row.push_back(value_from_json(jr[i], head.attributes[i].kind));
      if (!result.contains(row)) fail(422, "row_not_in_result", "selected row is not in the result", Json{{"row", jr}});
      sel.insert(std::move(row));
    }
    std::size_t n = sel.size();
    s->selection = std::move(sel);
    return Response{200, Json{{"selected", n}, {"strategy", strategy_name(ex.strategy())}}};
  });
}

Response ExploreService::get_provenance(const std::string& session, const std::string& occurrence) {
  return guarded(nullptr, [&] {
    auto s = find_session(session);
    std::lock_guard lock(s->mutex);
    s->last_used = Clock::now();
    const Explorer& ex = *s->explorer;
    if (!s->selection) fail(409, "no_selection", "select result rows before asking for provenance");
    OccurrenceId id = ex.program().find_occurrence(occurrence);
    ProvResult res = ex.provenance(id, *s->selection);
    Json out = relation_to_json(res.rows);
    out["occurrence"] = ex.program().qualified_name(id);
    out["stats"] = Json{{"join_count", res.stats.join_count},
                        {"retained_atoms", res.stats.retained_atoms},
                        {"elapsed_us", res.stats.elapsed_us},
                        {"case", res.stats.hybrid_case == 0 ? Json(nullptr) : Json(res.stats.hybrid_case)}};
    out["strategy"] = strategy_name(ex.strategy());
    return Response{200, out};
  });
}

Response ExploreService::list_occurrences(const std::string& session) {
  return guarded(nullptr, [&] {
    auto s = find_session(session);
    std::lock_guard lock(s->mutex);
    s->last_used = Clock::now();
    const Explorer& ex = *s->explorer;
    const Program& p = ex.program();
    Json list = Json::array();
    for (auto id : p.occurrences()) {
      const TableAtom& a = p.atom(id);
      bool view = p.is_view(a.relation);
      Json key_covered = nullptr;
      if (ex.plan() && !view) key_covered = ex.plan()->retrieval_case(p, id, s->db->catalog) == 1;
      list.push_back(Json{{"occurrence", p.qualified_name(id)},
                          {"name", p.display_name(id)},
                          {"relation", a.relation},
                          {"alias", a.alias},
                          {"rule", p.rules[id.rule].head},
                          {"depth", p.depth(id)},
                          {"view", view},
                          {"key_covered", key_covered}});
    }
    return Response{200, Json{{"occurrences", list}, {"strategy", strategy_name(ex.strategy())}}};
  });
}

Response ExploreService::get_plan(const std::string& session) {
  return guarded(nullptr, [&] {
    auto s = find_session(session);
    std::lock_guard lock(s->mutex);
    s->last_used = Clock::now();
    const Explorer& ex = *s->explorer;
    return Response{200, Json{{"plan", plan_to_json(ex, s->db->catalog)}, {"strategy", strategy_name(ex.strategy())}}};
  });
}

HttpFrontend::HttpFrontend(ExploreService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body.dump(), "application/json");
  };
  auto parse_body = [](const httplib::Request& req) {
    return req.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(req.body);
  };
  auto bad_json = [&](httplib::Response& res, const std::exception& e) {
    Response r{400, Json{{"code", "bad_request"}, {"message", "request body is not valid JSON"}, {"detail", e.what()}}};
    r.body["elapsed_us"] = 0;
    r.body["strategy"] = nullptr;
    send(res, r);
  };

  server_->Post("/datasets", [=, this](const httplib::Request& req, httplib::Response& res) {
    if (req.is_multipart_form_data()) {
      std::string catalog;
      std::map<std::string, std::string> csv;
      for (const auto& [field, part] : req.files) {
        if (field == "catalog") {
          catalog = part.content;
          continue;
        }
        std::string name = part.filename.empty() ? field : part.filename;
        if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") name.resize(name.size() - 4);
        csv[name] = part.content;
      }
      return send(res, service_.create_dataset(catalog, csv));
    }
    try {
      send(res, service_.create_dataset(parse_body(req)));
    } catch (const nlohmann::json::exception& e) {
      bad_json(res, e);
    }
  });
  server_->Post("/sessions", [=, this](const httplib::Request& req, httplib::Response& res) {
    try {
      send(res, service_.create_session(parse_body(req)));
    } catch (const nlohmann::json::exception& e) {
      bad_json(res, e);
    }
  });
  server_->Post(R"(/sessions/([^/]+)/selection)", [=, this](const httplib::Request& req, httplib::Response& res) {
    try {
      send(res, service_.select_rows(req.matches[1], parse_body(req)));
    } catch (const nlohmann::json::exception& e) {
      bad_json(res, e);
    }
  });
  server_->Get(R"(/sessions/([^/]+)/provenance/([^/]+))", [=, this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.get_provenance(req.matches[1], req.matches[2]));
  });
  server_->Get(R"(/sessions/([^/]+)/occurrences)", [=, this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.list_occurrences(req.matches[1]));
  });
  server_->Get(R"(/sessions/([^/]+)/plan)", [=, this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.get_plan(req.matches[1]));
  });
  server_->Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

HttpFrontend::~HttpFrontend() = default;

int HttpFrontend::bind(const std::string& listen) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("listen address must be host:port, got '" + listen + "'");
  std::string host = listen.substr(0, colon);
  int port = std::stoi(listen.substr(colon + 1));
  if (port == 0) {
    port = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    port = -1;
  }
  if (port < 0) throw std::runtime_error("cannot listen on " + listen);
  return port;
}

void HttpFrontend::run() { server_->listen_after_bind(); }

void HttpFrontend::stop() { server_->stop(); }

std::string resolve_listen(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PROVEX_LISTEN"); env && *env) return env;
  return "127.0.0.1:8080";
}

}  // namespace provex
